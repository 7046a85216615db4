#pragma once

#include <map>
#include <optional>
#include <string>

#include "grasp2d/trpo.hpp"

namespace grasp2d {

enum class ExperimentCategory { SinglePreGrasp, MultiPreGrasp, MultiPreGraspNoise };

std::string categoryName(ExperimentCategory c);
ExperimentCategory categoryFromName(const std::string& name);

struct ExperimentConfig {
    ExperimentCategory category = ExperimentCategory::MultiPreGrasp;
    std::vector<ObjectKind> objects = allObjectKinds();
    int n_pregrasps = 20;
    double split_ratio = 0.7;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    EpisodeConfig episode;
    TrpoConfig trpo;
    NoiseConfig eval_noise;        // applied during noisy evaluation
    int physics_trials = 31;
    Eigen::Vector4d constant_torque = Eigen::Vector4d::Constant(1.25);
};

struct EvalOutcome {
    double success_fraction = 0.0;
    std::vector<std::pair<int, bool>> per_instance;  // (pre-grasp id, success)
};

// open-loop baseline: fixed torque vector at every step, then the drop test
EvalOutcome constantTorqueEval(const std::vector<PreGrasp>& pregrasps,
                               const Eigen::Vector4d& torque, const EpisodeConfig& config);

// open-loop staged-close stability metric over n noisy-pose trials;
// a pre-grasp passes when the fraction exceeds 0.5
double physicsScore(const PreGrasp& pregrasp, const EpisodeConfig& config, int n_trials,
                    const NoiseConfig& noise, std::uint64_t seed);

// one mean-action episode per pre-grasp, drop test decides success
EvalOutcome evaluatePolicy(const GaussianPolicy& policy, const RunningNorm& norm,
                           const std::vector<PreGrasp>& pregrasps, const EpisodeConfig& config);

struct ResultsTable {
    ExperimentCategory category;
    std::vector<std::string> columns;
    // row label -> column name -> percentage (absent cell = gap)
    std::map<std::string, std::map<std::string, std::optional<double>>> cells;
    int n_pregrasps = 0;
    int n_seeds = 0;

    std::string toCsv() const;
    std::string toText() const;
};

struct CategoryRunOptions {
    std::string raw_output_path;  // JSON-lines of per-instance outcomes ("" = off)
    std::function<void(const std::string&)> log;  // progress messages
    int workers = 1;  // parallelism across (object, seed) cells
    bool baselines_only = false;  // skip training; policy columns stay blank
};

ResultsTable runCategory(const ExperimentConfig& config, const CategoryRunOptions& options = {});

}  // namespace grasp2d
