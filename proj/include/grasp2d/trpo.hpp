#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "grasp2d/env.hpp"
#include "grasp2d/policy.hpp"

namespace grasp2d {

struct TrpoConfig {
    double max_kl = 0.01;
    double gamma = 0.995;
    int cg_iterations = 10;
    double cg_residual_tol = 1e-10;
    double cg_damping = 0.1;
    double backtrack_ratio = 0.8;
    int max_backtracks = 10;
    int batch_timesteps = 20000;
    int value_epochs = 25;
    double value_learning_rate = 1e-2;
    int iterations = 100;
    int checkpoint_every = 10;
    bool normalize_observations = true;
    double log_std_init = 0.22;
    std::uint64_t seed = 0;
};

struct TrajectoryBatch {
    Eigen::MatrixXd observations;  // raw (unnormalized), one row per step
    Eigen::MatrixXd actions;
    Eigen::VectorXd rewards;
    Eigen::VectorXd log_prob_old;
    Eigen::VectorXd returns;          // discounted reward-to-go within each episode
    std::vector<int> episode_starts;  // offsets into the step arrays
    std::vector<bool> drop_success;   // per episode
    int timesteps() const { return static_cast<int>(observations.rows()); }
    int episodes() const { return static_cast<int>(episode_starts.size()); }
    double meanEpisodeReward() const;
    double successRate() const;
};

struct UpdateDiagnostics {
    bool accepted = false;
    int backtracks = 0;
    double surrogate_before = 0.0;
    double surrogate_after = 0.0;
    double mean_kl = 0.0;
    double cg_residual = 0.0;
    double grad_norm = 0.0;
};

// full episodes from uniformly sampled train pre-grasps until >= n_timesteps;
// envs persist across calls so per-instance noise streams advance
TrajectoryBatch collectBatch(const GaussianPolicy& policy, const RunningNorm& norm,
                             std::vector<Env>& train_envs, int n_timesteps, double gamma,
                             std::mt19937_64& rng);

// A_t = G_t - V(s_t), standardized over the batch; raw values via out param
Eigen::VectorXd computeAdvantages(const TrajectoryBatch& batch, const ValueFunction& value,
                                  const RunningNorm& norm, Eigen::VectorXd* raw = nullptr);

// standard CG from x0 = 0 for symmetric positive definite operators
Eigen::VectorXd conjugateGradient(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& a,
                                  const Eigen::VectorXd& b, int iterations, double residual_tol,
                                  double* residual_out = nullptr);

// natural-gradient step with backtracking line search under the KL constraint;
// leaves the policy unchanged when no candidate is acceptable
UpdateDiagnostics trpoUpdate(GaussianPolicy& policy, const Eigen::MatrixXd& norm_obs,
                             const Eigen::MatrixXd& actions, const Eigen::VectorXd& log_prob_old,
                             const Eigen::VectorXd& advantages, const TrpoConfig& config);

struct TrainResult {
    GaussianPolicy policy;
    ValueFunction value;
    RunningNorm norm;
    int iterations_run = 0;
    double final_success_rate = 0.0;
};

struct IterationStats {
    int iteration = 0;
    int timesteps = 0;
    double mean_return = 0.0;
    double success_rate = 0.0;
    double mean_std = 0.0;  // exploration scale, averaged over action dims
    UpdateDiagnostics update;
};

// collect -> advantages -> trpo update -> value fit, for config.iterations;
// metrics_csv (optional) receives one row per iteration, checkpoint_sink
// (optional) is called every checkpoint_every iterations and at the end;
// a resume state continues iteration numbering from resume->iterations_run
TrainResult train(const std::vector<PreGrasp>& train_set, const EpisodeConfig& episode,
                  const TrpoConfig& config, const std::string& metrics_csv_path = "",
                  const std::function<void(int, const TrainResult&)>& checkpoint_sink = nullptr,
                  const std::function<void(const IterationStats&)>& progress = nullptr,
                  const TrainResult* resume = nullptr);

}  // namespace grasp2d
