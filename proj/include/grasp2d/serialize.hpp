#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "grasp2d/env.hpp"
#include "grasp2d/trpo.hpp"

namespace grasp2d {

inline constexpr int kDatasetFormatVersion = 1;
inline constexpr int kCheckpointFormatVersion = 1;
inline constexpr int kTraceFormatVersion = 1;

// ---- dataset -------------------------------------------------------------
nlohmann::json datasetToJson(const Dataset& dataset);
Dataset datasetFromJson(const nlohmann::json& j);
void saveDataset(const Dataset& dataset, const std::string& path);
Dataset loadDataset(const std::string& path);

// ---- training checkpoints --------------------------------------------------
struct Checkpoint {
    int iteration = 0;
    bool contact_feedback = true;
    GaussianPolicy policy;
    ValueFunction value;
    RunningNorm norm;
};

nlohmann::json checkpointToJson(const Checkpoint& ck);
Checkpoint checkpointFromJson(const nlohmann::json& j);
void saveCheckpoint(const Checkpoint& ck, const std::string& path);
Checkpoint loadCheckpoint(const std::string& path);

// ---- world snapshots (poses, twists, shapes) -------------------------------
nlohmann::json shapeToJson(const Shape& shape);
Shape shapeFromJson(const nlohmann::json& j);
nlohmann::json worldSnapshot(const World& world);

// ---- episode traces (JSON-lines: one meta line, then one line per step) ----
class TraceWriter {
  public:
    TraceWriter(std::ostream& os, const World& world, const HandModel& hand, BodyId object);

    void step(int step_index, const World& world, const Eigen::VectorXd& observation,
              const Eigen::Vector4d& action, const StepResult& result);

  private:
    std::ostream& os_;
};

struct TraceBody {
    std::vector<Shape> shapes;
    Vec2 position;
    double angle = 0.0;
    bool is_hand = false;
};

struct TraceContact {
    Vec2 point;
    Vec2 force;  // impulse / dt, world frame
};

struct TraceFrame {
    int step = 0;
    std::vector<std::pair<Vec2, double>> poses;  // per body, meta order
    std::vector<TraceContact> contacts;
    double reward = 0.0;
    RewardBreakdown breakdown;
    int n_contacts = 0;
};

struct Trace {
    std::vector<TraceBody> bodies;  // geometry from the meta line
    std::vector<TraceFrame> frames;
};

// throws std::runtime_error naming the offending line on malformed input
Trace readTrace(std::istream& is);
Trace loadTrace(const std::string& path);

}  // namespace grasp2d
