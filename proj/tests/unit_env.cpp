#include <doctest.h>

#include <algorithm>
#include <random>

#include "grasp2d/env.hpp"

using namespace grasp2d;

namespace {

PreGrasp firstPreGrasp(ObjectKind kind = ObjectKind::Disk, std::uint64_t seed = 42) {
    return samplePreGrasps(kind, 1, seed)[0];
}

}  // namespace

TEST_CASE("observation dimension follows the contact-feedback switch") {
    EpisodeConfig ec;
    ec.contact_feedback = true;
    Env with(firstPreGrasp(), ec);
    CHECK(with.observationDim() == 20);
    CHECK(with.reset().size() == 20);
    ec.contact_feedback = false;
    Env without(firstPreGrasp(), ec);
    CHECK(without.observationDim() == 10);
    CHECK(without.reset().size() == 10);
}

TEST_CASE("reward breakdown sums exactly to the reward") {
    EpisodeConfig ec;
    ec.horizon = 40;
    Env env(firstPreGrasp(), ec);
    env.reset();
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 0.8);
    while (!env.done()) {
        const StepResult r = env.step({g(rng), g(rng), g(rng), g(rng)});
        CHECK(r.reward == r.info.breakdown.total());
    }
}

TEST_CASE("distance terms telescope over the episode") {
    EpisodeConfig ec;
    ec.horizon = 60;
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        Env env(firstPreGrasp(ObjectKind::Bar, seed), ec);
        env.reset();
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> g(0.0, 0.6);
        double dist_sum = 0.0, tip_sum = 0.0;
        while (!env.done()) {
            const StepResult r = env.step({g(rng), g(rng), g(rng), g(rng)});
            dist_sum += r.info.breakdown.terms[1];
            tip_sum += r.info.breakdown.terms[4];
        }
        // alpha * (d_T - d_0): recompute endpoint distances from fresh episodes
        Env probe(firstPreGrasp(ObjectKind::Bar, seed), ec);
        probe.reset();
        const Vec2 palm0 = probe.world().body(probe.hand().palm).position;
        const Vec2 obj0 = probe.world().body(probe.objectId()).position;
        const double d0 = (obj0 - palm0).norm();
        const double tip0 =
            fingertipMeanDistance(probe.hand(), probe.world(), probe.objectId());

        const Vec2 palmT = env.world().body(env.hand().palm).position;
        const Vec2 objT = env.world().body(env.objectId()).position;
        const double dT = (objT - palmT).norm();
        const double tipT = fingertipMeanDistance(env.hand(), env.world(), env.objectId());

        CHECK(std::abs(dist_sum - (-1.0) * (dT - d0)) < 1e-9);
        CHECK(std::abs(tip_sum - (-1.0) * (tipT - tip0)) < 1e-9);
    }
}

TEST_CASE("drop-test term appears exactly once, at the horizon") {
    EpisodeConfig ec;
    ec.horizon = 30;
    Env env(firstPreGrasp(), ec);
    env.reset();
    int step = 0, term_count = 0, ran_at = -1;
    while (!env.done()) {
        const StepResult r = env.step(Eigen::Vector4d::Constant(0.1));
        ++step;
        if (r.info.breakdown.terms[5] != 0.0 || r.info.drop_test_ran) {
            ++term_count;
            ran_at = step;
            CHECK(r.done);
        }
    }
    CHECK(term_count == 1);
    CHECK(ran_at == 30);
}

TEST_CASE("stepping a finished episode is an error") {
    EpisodeConfig ec;
    ec.horizon = 5;
    Env env(firstPreGrasp(), ec);
    env.reset();
    while (!env.done()) env.step(Eigen::Vector4d::Zero());
    CHECK_THROWS_AS(env.step(Eigen::Vector4d::Zero()), std::logic_error);
    env.reset();
    CHECK_NOTHROW(env.step(Eigen::Vector4d::Zero()));
}

TEST_CASE("episodes are deterministic given the seed") {
    EpisodeConfig ec;
    ec.horizon = 50;
    ec.noise.enabled = true;
    ec.noise.seed = 7;
    auto run = [&] {
        Env env(firstPreGrasp(), ec);
        Eigen::VectorXd obs = env.reset();
        std::vector<double> history{obs.sum()};
        std::mt19937_64 rng(1);
        std::normal_distribution<double> g(0.0, 0.5);
        while (!env.done()) {
            const StepResult r = env.step({g(rng), g(rng), g(rng), g(rng)});
            history.push_back(r.observation.sum());
            history.push_back(r.reward);
        }
        return history;
    };
    CHECK(run() == run());
}

TEST_CASE("pose noise stays in its disk and angles pass a KS test") {
    NoiseConfig noise;
    noise.enabled = true;
    std::mt19937_64 rng(123);
    const int n = 100000;
    std::vector<double> angles;
    double max_offset = 0.0;
    for (int i = 0; i < n; ++i) {
        Vec2 p;
        double a = 0.0;
        corruptPose(p, a, noise, rng);
        max_offset = std::max(max_offset, p.norm());
        angles.push_back(a);
    }
    CHECK(max_offset <= 0.015 + 1e-12);
    CHECK(max_offset > 0.0149);  // the disk is actually filled

    // Kolmogorov-Smirnov against U[-0.3, 0.3]; critical value at alpha=0.01
    std::sort(angles.begin(), angles.end());
    double ks = 0.0;
    for (int i = 0; i < n; ++i) {
        const double cdf = (angles[static_cast<size_t>(i)] + 0.3) / 0.6;
        ks = std::max(ks, std::abs(cdf - (i + 1.0) / n));
        ks = std::max(ks, std::abs(cdf - static_cast<double>(i) / n));
    }
    CHECK(ks < 1.63 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("noise disabled reproduces the true pose in the observation") {
    EpisodeConfig ec;
    ec.contact_feedback = false;
    ec.horizon = 5;
    Env env(firstPreGrasp(), ec);
    const Eigen::VectorXd obs = env.reset();
    // palm-frame object pose from ground truth
    const RigidBody& palm = env.world().body(env.hand().palm);
    const RigidBody& obj = env.world().body(env.objectId());
    const Vec2 rel = palm.transform().applyInv(obj.position);
    CHECK(obs[4] == doctest::Approx(rel.x));
    CHECK(obs[5] == doctest::Approx(rel.y));
    CHECK(obs[6] == doctest::Approx(wrapAngle(obj.angle - palm.angle)));
}

TEST_CASE("free object fails the drop test ballistically") {
    EpisodeConfig ec;
    World world;
    HandModel hand;
    PreGrasp pg = firstPreGrasp();
    pg.hand_position = {10.0, 0.0};  // hand far away: the object is free
    const BodyId obj = instantiatePreGrasp(world, pg, ec.hand, hand);
    CHECK_FALSE(dropTest(world, obj, hand, ec, Eigen::Vector4d::Zero()));
    // ballistic displacement after 0.5 s at F/m = 120 m/s^2 is ~15 m >> 0.025 m
    CHECK(world.body(obj).position.norm() > 0.025);
}

TEST_CASE("a firm pinch passes the drop test, the same pinch with mu=0 fails") {
    // palm close to the disk, fingers slightly open, then a gentle close lets
    // the links conform around the object before the full-torque hold
    auto build = [](double friction, World& world, HandModel& hand) {
        EpisodeConfig ec;
        ec.hand.friction = friction;
        PreGrasp pg;
        pg.kind = ObjectKind::Disk;
        pg.hand_position = {-0.045, 0.0};
        const BodyId obj = instantiatePreGrasp(world, pg, ec.hand, hand);
        world.body(obj).friction = friction;
        Articulation& art = world.articulations[0];
        art.setState(Eigen::VectorXd::Constant(4, -0.1), Eigen::VectorXd::Zero(4));
        art.syncLinkBodies(world);
        const Eigen::Vector4d close{0.1, 0.05, 0.1, 0.05};
        for (int i = 0; i < 400; ++i) {
            applyJointTorques(hand, world, close);
            world.step();
        }
        return obj;
    };
    EpisodeConfig ec;
    World gripping, slipping;
    HandModel h1, h2;
    const BodyId o1 = build(0.8, gripping, h1);
    const BodyId o2 = build(0.0, slipping, h2);
    CHECK(dropTest(gripping, o1, h1, ec, Eigen::Vector4d::Constant(2.5)));
    CHECK_FALSE(dropTest(slipping, o2, h2, ec, Eigen::Vector4d::Constant(2.5)));
}

TEST_CASE("initial penetration is rejected at reset") {
    EpisodeConfig ec;
    PreGrasp pg = firstPreGrasp();
    pg.hand_position = {0.0, 0.0};  // palm on top of the object
    Env env(pg, ec);
    CHECK_THROWS_AS(env.reset(), std::runtime_error);
}

TEST_CASE("contact-feedback observations expose sensed forces") {
    EpisodeConfig ec;
    ec.contact_feedback = true;
    ec.horizon = 400;
    Env env(firstPreGrasp(), ec);
    env.reset();
    bool saw_force = false;
    while (!env.done()) {
        const StepResult r = env.step(Eigen::Vector4d::Constant(0.4));
        const double force_mag = r.observation.tail(10).cwiseAbs().maxCoeff();
        if (r.info.n_contacts > 0 || force_mag > 0.0) saw_force = saw_force || force_mag > 0.0;
    }
    CHECK(saw_force);
}
