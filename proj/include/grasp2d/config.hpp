#pragma once

#include <string>

#include <json.hpp>

#include "grasp2d/experiments.hpp"

namespace grasp2d {

// Whole-run configuration: one JSON document (// comments allowed) with
// strict schema validation; unknown keys are rejected with their path.
struct RunConfig {
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    ExperimentConfig experiment;  // holds episode/trpo/noise/objects settings

    EpisodeConfig& episode() { return experiment.episode; }
    const EpisodeConfig& episode() const { return experiment.episode; }
    TrpoConfig& trpo() { return experiment.trpo; }
    const TrpoConfig& trpo() const { return experiment.trpo; }
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

RunConfig parseRunConfig(const nlohmann::json& j);
nlohmann::json runConfigToJson(const RunConfig& config);  // every default, fully expanded
RunConfig loadRunConfig(const std::string& path);

void validateRunConfig(const RunConfig& config);  // range checks; throws ConfigError

}  // namespace grasp2d
