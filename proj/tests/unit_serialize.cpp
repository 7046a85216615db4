#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "grasp2d/config.hpp"
#include "grasp2d/env.hpp"
#include "grasp2d/serialize.hpp"

using namespace grasp2d;

TEST_CASE("dataset save/load round-trips byte-identically") {
    Dataset dataset = splitDataset(samplePreGrasps(ObjectKind::Tee, 10, 17), 0.7, 3);
    const nlohmann::json j = datasetToJson(dataset);
    const Dataset loaded = datasetFromJson(j);
    CHECK(datasetToJson(loaded).dump() == j.dump());

    CHECK(loaded.pregrasps.size() == dataset.pregrasps.size());
    CHECK(loaded.train_ids == dataset.train_ids);
    CHECK(loaded.test_ids == dataset.test_ids);
    for (std::size_t i = 0; i < dataset.pregrasps.size(); ++i) {
        const PreGrasp& a = dataset.pregrasps[i];
        const PreGrasp& b = loaded.pregrasps[i];
        CHECK(a.kind == b.kind);
        CHECK(a.id == b.id);
        CHECK(a.object_position.x == b.object_position.x);
        CHECK(a.object_position.y == b.object_position.y);
        CHECK(a.object_angle == b.object_angle);
        CHECK(a.hand_position.x == b.hand_position.x);
        CHECK(a.hand_position.y == b.hand_position.y);
        CHECK(a.hand_angle == b.hand_angle);
        CHECK((a.q0 - b.q0).cwiseAbs().maxCoeff() == 0.0);
    }

    const std::string path =
        (std::filesystem::temp_directory_path() / "grasp2d_dataset_rt.json").string();
    saveDataset(dataset, path);
    const std::string first = [&] {
        std::ifstream in(path);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }();
    saveDataset(loadDataset(path), path);
    const std::string second = [&] {
        std::ifstream in(path);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }();
    CHECK(first == second);
    std::filesystem::remove(path);
}

TEST_CASE("checkpoint round-trip preserves every parameter") {
    std::mt19937_64 rng(5);
    Checkpoint ck;
    ck.iteration = 37;
    ck.contact_feedback = false;
    ck.policy = GaussianPolicy(MlpSpec{10, {16, 8}, 4}, 0.22);
    ck.policy.initialize(rng);
    ck.value = ValueFunction(MlpSpec{10, {16, 8}, 1});
    ck.value.initialize(rng);
    ck.norm = RunningNorm(10);
    Eigen::MatrixXd batch(30, 10);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int i = 0; i < 30; ++i)
        for (int j = 0; j < 10; ++j) batch(i, j) = g(rng);
    ck.norm.update(batch);

    const nlohmann::json j = checkpointToJson(ck);
    const Checkpoint loaded = checkpointFromJson(j);
    CHECK(loaded.iteration == 37);
    CHECK(loaded.contact_feedback == false);
    CHECK((loaded.policy.flatten() - ck.policy.flatten()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((loaded.value.net().flatten() - ck.value.net().flatten()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((loaded.norm.mean - ck.norm.mean).cwiseAbs().maxCoeff() == 0.0);
    CHECK((loaded.norm.m2 - ck.norm.m2).cwiseAbs().maxCoeff() == 0.0);
    CHECK(loaded.norm.count == ck.norm.count);
    CHECK(checkpointToJson(loaded).dump() == j.dump());
}

TEST_CASE("shape json round-trip covers every shape type") {
    const std::vector<Shape> shapes = {Circle{{0.01, -0.02}, 0.03},
                                       makeBox({0.0, 0.0}, 0.04, 0.01),
                                       Capsule{{-0.02, 0.0}, {0.02, 0.0}, 0.008}};
    for (const Shape& s : shapes) {
        const Shape back = shapeFromJson(shapeToJson(s));
        CHECK(back.index() == s.index());
        CHECK(shapeToJson(back).dump() == shapeToJson(s).dump());
    }
    CHECK_THROWS(shapeFromJson(nlohmann::json{{"type", "hypercube"}}));
}

TEST_CASE("world snapshot reports bodies, poses and mass") {
    World world;
    RigidBody disk = makeObject(ObjectKind::Disk);
    disk.position = {0.1, -0.2};
    disk.angle = 0.3;
    disk.linear_vel = {1.0, 2.0};
    disk.angular_vel = -0.5;
    world.addBody(disk);
    const nlohmann::json j = worldSnapshot(world);
    REQUIRE(j.contains("bodies"));
    REQUIRE(j["bodies"].size() == 1);
    const nlohmann::json& b = j["bodies"][0];
    CHECK(b["pose"]["x"].get<double>() == doctest::Approx(0.1));
    CHECK(b["pose"]["y"].get<double>() == doctest::Approx(-0.2));
    CHECK(b["pose"]["theta"].get<double>() == doctest::Approx(0.3));
    CHECK(b["linear_velocity"][0].get<double>() == doctest::Approx(1.0));
    CHECK(b["linear_velocity"][1].get<double>() == doctest::Approx(2.0));
    CHECK(b["angular_velocity"].get<double>() == doctest::Approx(-0.5));
    CHECK(b["mass"].get<double>() > 0.0);
    CHECK(b["shapes"].size() == disk.fixtures.size());
}

TEST_CASE("trace write/read round-trip") {
    const PreGrasp pg = samplePreGrasps(ObjectKind::Disk, 1, 9)[0];
    EpisodeConfig ep;
    ep.horizon = 5;
    ep.contact_feedback = true;
    Env env(pg, ep);
    Eigen::VectorXd obs = env.reset();

    std::stringstream ss;
    TraceWriter writer(ss, env.world(), env.hand(), env.objectId());
    const Eigen::Vector4d action(0.4, -0.4, 0.4, -0.4);
    int steps = 0;
    while (!env.done()) {
        const StepResult r = env.step(action);
        writer.step(steps, env.world(), obs, action, r);
        obs = r.observation;
        ++steps;
    }
    REQUIRE(steps == 5);

    const Trace trace = readTrace(ss);
    CHECK(trace.frames.size() == 5);
    REQUIRE_FALSE(trace.bodies.empty());
    int hand_bodies = 0, object_bodies = 0;
    for (const TraceBody& body : trace.bodies) {
        CHECK_FALSE(body.shapes.empty());
        (body.is_hand ? hand_bodies : object_bodies) += 1;
    }
    CHECK(hand_bodies == 5);  // palm + 4 finger links
    CHECK(object_bodies == 1);
    for (std::size_t f = 0; f < trace.frames.size(); ++f) {
        const TraceFrame& frame = trace.frames[f];
        CHECK(frame.step == static_cast<int>(f));
        CHECK(frame.poses.size() == trace.bodies.size());
        CHECK(frame.reward == doctest::Approx(frame.breakdown.total()).epsilon(1e-12));
    }
}

TEST_CASE("malformed trace input reports the offending line") {
    std::stringstream ss;
    ss << R"({"format_version":1,"bodies":[]})" << "\n";
    ss << R"({"step":0)" << "\n";  // truncated JSON on line 2
    try {
        readTrace(ss);
        FAIL("expected a parse error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("run config round-trips through its fully expanded json") {
    RunConfig config;
    config.seed = 123;
    config.output_dir = "elsewhere";
    config.experiment.category = ExperimentCategory::MultiPreGraspNoise;
    config.experiment.n_pregrasps = 12;
    config.episode().horizon = 345;
    config.trpo().max_kl = 0.02;
    const nlohmann::json j = runConfigToJson(config);
    const RunConfig back = parseRunConfig(j);
    CHECK(back.seed == 123);
    CHECK(back.output_dir == "elsewhere");
    CHECK(back.experiment.category == ExperimentCategory::MultiPreGraspNoise);
    CHECK(back.experiment.n_pregrasps == 12);
    CHECK(back.episode().horizon == 345);
    CHECK(back.trpo().max_kl == 0.02);
    CHECK(runConfigToJson(back).dump() == j.dump());
}

TEST_CASE("unknown config keys are rejected with their path") {
    nlohmann::json j = runConfigToJson(RunConfig{});
    j["experiment"]["episod"] = 5;
    try {
        parseRunConfig(j);
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("episod") != std::string::npos);
    }
}

TEST_CASE("out-of-range config values name the offending field") {
    nlohmann::json j = runConfigToJson(RunConfig{});
    j["experiment"]["split_ratio"] = 1.5;
    try {
        parseRunConfig(j);
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("split_ratio") != std::string::npos);
    }
}

TEST_CASE("wrong-typed config values are reported as type errors") {
    nlohmann::json j = runConfigToJson(RunConfig{});
    j["seed"] = "not-a-number";
    CHECK_THROWS_AS((void)parseRunConfig(j), ConfigError);
}
