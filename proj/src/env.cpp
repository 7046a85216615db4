#include "grasp2d/env.hpp"

#include <stdexcept>

namespace grasp2d {

void corruptPose(Vec2& position, double& angle, const NoiseConfig& noise, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double r = noise.position_radius * std::sqrt(u01(rng));
    const double phi = 2.0 * kPi * u01(rng);
    position += Vec2{r * std::cos(phi), r * std::sin(phi)};
    if (noise.fixed_angle_magnitude)
        angle += u01(rng) < 0.5 ? -noise.angle_max : noise.angle_max;
    else
        angle += noise.angle_max * (2.0 * u01(rng) - 1.0);
}

bool dropTest(World& world, BodyId object, const HandModel& hand, const EpisodeConfig& config,
              const Eigen::Vector4d& hold_torques) {
    const Vec2 start = world.body(object).position;
    const int phase_steps =
        static_cast<int>(std::lround(config.drop_phase_duration / world.dt));
    const double radius = 0.5 * config.success_diameter;
    for (int phase = 0; phase < 2; ++phase) {
        const Vec2 force{0.0, phase == 0 ? config.drop_force : -config.drop_force};
        for (int i = 0; i < phase_steps; ++i) {
            world.applyExternalForce(object, force);
            applyJointTorques(hand, world, hold_torques);
            world.step();
            if (world.unstable) return false;
            if ((world.body(object).position - start).norm() > radius) return false;
        }
    }
    return true;
}

RewardBreakdown computeReward(int prev_contacts, int curr_contacts, double prev_distance,
                              double curr_distance, double prev_fingertip, double curr_fingertip,
                              const Eigen::Vector4d& action, const Eigen::Vector3d& twist,
                              const RewardWeights& w, std::optional<bool> drop_test_success) {
    RewardBreakdown b;
    b.terms[0] = w.contact_delta * static_cast<double>(curr_contacts - prev_contacts);
    b.terms[1] = w.distance_delta * (curr_distance - prev_distance);
    b.terms[2] = w.action_norm * action.squaredNorm();
    b.terms[3] = w.twist_norm * twist.squaredNorm();
    b.terms[4] = w.fingertip_delta * (curr_fingertip - prev_fingertip);
    b.terms[5] = drop_test_success ? (w.drop_test * (*drop_test_success ? 1.0 : 0.0)) : 0.0;
    return b;
}

Env::Env(const PreGrasp& pregrasp, const EpisodeConfig& config)
    : pregrasp_(pregrasp), config_(config) {}

Eigen::VectorXd Env::reset() {
    world_ = World{};
    world_.dt = config_.dt;
    object_ = instantiatePreGrasp(world_, pregrasp_, config_.hand, hand_);
    for (const Contact& c : detectContacts(world_)) {
        if (c.penetration > 0.0 && (c.body_a == object_ || c.body_b == object_))
            throw std::runtime_error("pre-grasp places hand and object in penetration");
    }
    step_ = 0;
    done_ = false;
    prev_ = takeSnapshot();
    // independent noise stream per (seed, instance, episode)
    std::seed_seq seq{static_cast<unsigned>(config_.noise.seed & 0xffffffffu),
                      static_cast<unsigned>(config_.noise.seed >> 32),
                      static_cast<unsigned>(pregrasp_.id),
                      static_cast<unsigned>(episode_counter_)};
    noise_rng_ = std::mt19937_64(seq);
    ++episode_counter_;
    return observe(noise_rng_);
}

Env::Snapshot Env::takeSnapshot() const {
    Snapshot s;
    s.n_contacts = handBodiesInContact(hand_, world_, object_);
    s.hand_object_distance =
        (world_.body(object_).position - world_.body(hand_.palm).position).norm();
    s.fingertip_distance = fingertipMeanDistance(hand_, world_, object_);
    return s;
}

Eigen::VectorXd Env::observe(std::mt19937_64& rng) {
    const RigidBody& obj = world_.body(object_);
    const RigidBody& palm = world_.body(hand_.palm);
    const Transform palm_xf = palm.transform();
    const HandReading reading = readSensors(hand_, world_);

    Vec2 obs_pos = obj.position;
    double obs_angle = obj.angle;
    if (config_.noise.enabled) corruptPose(obs_pos, obs_angle, config_.noise, rng);

    // pose and twist expressed in the palm frame
    const Vec2 rel_pos = palm_xf.applyInv(obs_pos);
    const double rel_angle = wrapAngle(obs_angle - palm.angle);
    const Vec2 rel_vel = palm_xf.rotateInv(obj.linear_vel);

    Eigen::VectorXd obs(observationDim());
    obs.segment<4>(0) = reading.q;
    obs[4] = rel_pos.x;
    obs[5] = rel_pos.y;
    obs[6] = rel_angle;
    obs[7] = rel_vel.x;
    obs[8] = rel_vel.y;
    obs[9] = obj.angular_vel;
    if (config_.contact_feedback) {
        for (int i = 0; i < 5; ++i) {
            obs[10 + 2 * i] = reading.contact_forces[static_cast<size_t>(i)].x;
            obs[11 + 2 * i] = reading.contact_forces[static_cast<size_t>(i)].y;
        }
    }
    return obs;
}

StepResult Env::step(const Eigen::Vector4d& action) {
    if (done_) throw std::logic_error("step() after episode end; call reset()");

    applyJointTorques(hand_, world_, action);
    world_.step();
    ++step_;

    StepResult result;
    result.info.unstable = world_.unstable;

    const Snapshot curr = takeSnapshot();
    const RigidBody& obj = world_.body(object_);
    const Eigen::Vector3d twist(obj.linear_vel.x, obj.linear_vel.y, obj.angular_vel);
    result.info.n_contacts = curr.n_contacts;
    result.info.true_position = obj.position;
    result.info.true_angle = obj.angle;

    std::optional<bool> drop;
    if (world_.unstable) {
        // physics blow-up counts as a failed grasp and ends the episode
        drop = false;
        done_ = true;
    } else if (step_ >= config_.horizon) {
        // the drop test is a measurement, not part of the episode dynamics:
        // run it on the live world, then restore so the final state matches
        // the state the last reward was computed from
        const World saved = world_;
        drop = dropTest(world_, object_, hand_, config_, action);
        world_ = saved;
        done_ = true;
    }
    result.info.drop_test_ran = drop.has_value();
    result.info.drop_test_success = drop.value_or(false);

    result.info.breakdown = computeReward(
        prev_.n_contacts, curr.n_contacts, prev_.hand_object_distance, curr.hand_object_distance,
        prev_.fingertip_distance, curr.fingertip_distance, action, twist, config_.reward, drop);
    result.reward = result.info.breakdown.total();
    result.done = done_;
    prev_ = curr;
    result.observation = observe(noise_rng_);
    return result;
}

}  // namespace grasp2d
