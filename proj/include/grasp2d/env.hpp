#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <random>

#include "grasp2d/scene.hpp"

namespace grasp2d {

struct RewardWeights {
    double contact_delta = 0.1;       // alpha-1, change in hand bodies touching the object
    double distance_delta = -1.0;     // alpha-2, change in hand-base-to-object distance
    double action_norm = -1e-3;       // alpha-3, squared torque magnitude
    double twist_norm = -1e-2;        // alpha-4, squared object twist magnitude
    double fingertip_delta = -1.0;    // alpha-5, change in mean fingertip distance
    double drop_test = 50.0;          // alpha-6, binary drop-test outcome at the horizon
};

struct NoiseConfig {
    bool enabled = false;
    double position_radius = 0.015;  // m, uniform over the disk
    double angle_max = 0.3;          // rad, uniform over [-max, max]
    bool fixed_angle_magnitude = false;
    std::uint64_t seed = 0;
};

struct EpisodeConfig {
    int horizon = 1000;
    double dt = 0.010;
    double drop_force = 12.0;          // N
    double drop_phase_duration = 0.5;  // s, per direction
    double success_diameter = 0.05;    // m
    bool contact_feedback = true;
    NoiseConfig noise;
    RewardWeights reward;
    HandConfig hand;
};

struct RewardBreakdown {
    std::array<double, 6> terms{};
    double total() const {
        double s = 0.0;
        for (double t : terms) s += t;
        return s;
    }
};

struct StepInfo {
    int n_contacts = 0;          // hand bodies touching the object
    Vec2 true_position;          // object pose unaffected by observation noise
    double true_angle = 0.0;
    RewardBreakdown breakdown;
    bool drop_test_ran = false;
    bool drop_test_success = false;
    bool unstable = false;
};

struct StepResult {
    Eigen::VectorXd observation;
    double reward = 0.0;
    bool done = false;
    StepInfo info;
};

// pose noise draw; position uniform on the disk, angle uniform on [-max, max]
void corruptPose(Vec2& position, double& angle, const NoiseConfig& noise, std::mt19937_64& rng);

// 12N up then down, 0.5s each; success iff the object stays within the
// success radius of its pre-test position at every step of the test.
// `hold_torques` is re-applied each step so the grip does not go slack.
bool dropTest(World& world, BodyId object, const HandModel& hand, const EpisodeConfig& config,
              const Eigen::Vector4d& hold_torques);

// One grasp episode: finite-horizon MDP over joint torques.
class Env {
  public:
    Env(const PreGrasp& pregrasp, const EpisodeConfig& config);

    // rebuilds the world at the pre-grasp; throws if hand and object overlap
    Eigen::VectorXd reset();
    StepResult step(const Eigen::Vector4d& action);

    int observationDim() const { return config_.contact_feedback ? 20 : 10; }
    int stepCount() const { return step_; }
    bool done() const { return done_; }
    const World& world() const { return world_; }
    const HandModel& hand() const { return hand_; }
    BodyId objectId() const { return object_; }
    const EpisodeConfig& config() const { return config_; }

  private:
    struct Snapshot {
        int n_contacts = 0;
        double hand_object_distance = 0.0;
        double fingertip_distance = 0.0;
    };
    Snapshot takeSnapshot() const;
    Eigen::VectorXd observe(std::mt19937_64& rng);

    PreGrasp pregrasp_;
    EpisodeConfig config_;
    World world_;
    HandModel hand_;
    BodyId object_ = -1;
    int step_ = 0;
    bool done_ = true;
    int episode_counter_ = 0;
    Snapshot prev_;
    std::mt19937_64 noise_rng_;
};

// breakdown of the six shaped-reward terms between two consecutive snapshots
RewardBreakdown computeReward(int prev_contacts, int curr_contacts, double prev_distance,
                              double curr_distance, double prev_fingertip, double curr_fingertip,
                              const Eigen::Vector4d& action, const Eigen::Vector3d& twist,
                              const RewardWeights& w,
                              std::optional<bool> drop_test_success = std::nullopt);

}  // namespace grasp2d
