#include "grasp2d/serialize.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace grasp2d {

namespace {

nlohmann::json vecToJson(const Eigen::VectorXd& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

Eigen::VectorXd vecFromJson(const nlohmann::json& a) {
    Eigen::VectorXd v(a.size());
    for (size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
    return v;
}

nlohmann::json poseToJson(Vec2 p, double angle) {
    return {{"x", p.x}, {"y", p.y}, {"theta", angle}};
}

void requireVersion(const nlohmann::json& j, int expected, const char* what) {
    if (!j.contains("format_version") || j["format_version"].get<int>() != expected)
        throw std::runtime_error(std::string(what) + ": unsupported or missing format_version");
}

std::ofstream openOut(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write file: " + path);
    return f;
}

std::ifstream openIn(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read file: " + path);
    return f;
}

}  // namespace

// ---- dataset ---------------------------------------------------------------

nlohmann::json datasetToJson(const Dataset& dataset) {
    nlohmann::json j;
    j["format_version"] = kDatasetFormatVersion;
    nlohmann::json items = nlohmann::json::array();
    for (const PreGrasp& pg : dataset.pregrasps) {
        items.push_back({{"id", pg.id},
                         {"object", objectKindName(pg.kind)},
                         {"object_pose", poseToJson(pg.object_position, pg.object_angle)},
                         {"hand_pose", poseToJson(pg.hand_position, pg.hand_angle)},
                         {"q0", vecToJson(pg.q0)}});
    }
    j["pregrasps"] = items;
    j["train_ids"] = dataset.train_ids;
    j["test_ids"] = dataset.test_ids;
    return j;
}

Dataset datasetFromJson(const nlohmann::json& j) {
    requireVersion(j, kDatasetFormatVersion, "dataset");
    Dataset ds;
    for (const nlohmann::json& item : j.at("pregrasps")) {
        PreGrasp pg;
        pg.id = item.at("id").get<int>();
        pg.kind = objectKindFromName(item.at("object").get<std::string>());
        pg.object_position = {item.at("object_pose").at("x").get<double>(),
                              item.at("object_pose").at("y").get<double>()};
        pg.object_angle = item.at("object_pose").at("theta").get<double>();
        pg.hand_position = {item.at("hand_pose").at("x").get<double>(),
                            item.at("hand_pose").at("y").get<double>()};
        pg.hand_angle = item.at("hand_pose").at("theta").get<double>();
        pg.q0 = vecFromJson(item.at("q0"));
        ds.pregrasps.push_back(pg);
    }
    ds.train_ids = j.at("train_ids").get<std::vector<int>>();
    ds.test_ids = j.at("test_ids").get<std::vector<int>>();
    return ds;
}

void saveDataset(const Dataset& dataset, const std::string& path) {
    openOut(path) << datasetToJson(dataset).dump(2) << '\n';
}

Dataset loadDataset(const std::string& path) {
    auto f = openIn(path);
    nlohmann::json j;
    f >> j;
    return datasetFromJson(j);
}

// ---- checkpoints -----------------------------------------------------------

namespace {

nlohmann::json mlpSpecToJson(const MlpSpec& s) {
    return {{"input_dim", s.input_dim}, {"hidden", s.hidden}, {"output_dim", s.output_dim}};
}

MlpSpec mlpSpecFromJson(const nlohmann::json& j) {
    MlpSpec s;
    s.input_dim = j.at("input_dim").get<int>();
    s.hidden = j.at("hidden").get<std::vector<int>>();
    s.output_dim = j.at("output_dim").get<int>();
    return s;
}

}  // namespace

nlohmann::json checkpointToJson(const Checkpoint& ck) {
    nlohmann::json j;
    j["format_version"] = kCheckpointFormatVersion;
    j["iteration"] = ck.iteration;
    j["contact_feedback"] = ck.contact_feedback;
    j["policy"] = {{"spec", mlpSpecToJson(ck.policy.meanNet().spec())},
                   {"params", vecToJson(ck.policy.meanNet().flatten())},
                   {"log_std", vecToJson(ck.policy.logStd())}};
    j["value"] = {{"spec", mlpSpecToJson(ck.value.net().spec())},
                  {"params", vecToJson(ck.value.net().flatten())}};
    j["norm"] = {{"mean", vecToJson(ck.norm.mean)},
                 {"m2", vecToJson(ck.norm.m2)},
                 {"count", ck.norm.count},
                 {"clip", ck.norm.clip},
                 {"enabled", ck.norm.enabled}};
    return j;
}

Checkpoint checkpointFromJson(const nlohmann::json& j) {
    requireVersion(j, kCheckpointFormatVersion, "checkpoint");
    Checkpoint ck;
    ck.iteration = j.at("iteration").get<int>();
    ck.contact_feedback = j.at("contact_feedback").get<bool>();

    const nlohmann::json& pj = j.at("policy");
    const Eigen::VectorXd log_std = vecFromJson(pj.at("log_std"));
    ck.policy = GaussianPolicy(mlpSpecFromJson(pj.at("spec")), 0.0);
    Eigen::VectorXd flat(ck.policy.paramCount());
    flat << vecFromJson(pj.at("params")), log_std;
    ck.policy.unflatten(flat);

    const nlohmann::json& vj = j.at("value");
    ck.value = ValueFunction(mlpSpecFromJson(vj.at("spec")));
    ck.value.net().unflatten(vecFromJson(vj.at("params")));

    const nlohmann::json& nj = j.at("norm");
    ck.norm = RunningNorm(static_cast<int>(nj.at("mean").size()));
    ck.norm.mean = vecFromJson(nj.at("mean"));
    ck.norm.m2 = vecFromJson(nj.at("m2"));
    ck.norm.count = nj.at("count").get<double>();
    ck.norm.clip = nj.at("clip").get<double>();
    ck.norm.enabled = nj.at("enabled").get<bool>();
    return ck;
}

void saveCheckpoint(const Checkpoint& ck, const std::string& path) {
    openOut(path) << checkpointToJson(ck).dump() << '\n';
}

Checkpoint loadCheckpoint(const std::string& path) {
    auto f = openIn(path);
    nlohmann::json j;
    f >> j;
    return checkpointFromJson(j);
}

// ---- world snapshots ---------------------------------------------------------

nlohmann::json shapeToJson(const Shape& shape) {
    return std::visit(
        [](const auto& s) -> nlohmann::json {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Circle>) {
                return {{"type", "circle"},
                        {"center", {s.center.x, s.center.y}},
                        {"radius", s.radius}};
            } else if constexpr (std::is_same_v<T, Polygon>) {
                nlohmann::json verts = nlohmann::json::array();
                for (Vec2 v : s.vertices) verts.push_back({v.x, v.y});
                return {{"type", "polygon"}, {"vertices", verts}};
            } else {
                return {{"type", "capsule"},
                        {"a", {s.a.x, s.a.y}},
                        {"b", {s.b.x, s.b.y}},
                        {"radius", s.radius}};
            }
        },
        shape);
}

Shape shapeFromJson(const nlohmann::json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "circle") {
        Circle c;
        c.center = {j.at("center")[0].get<double>(), j.at("center")[1].get<double>()};
        c.radius = j.at("radius").get<double>();
        return c;
    }
    if (type == "polygon") {
        Polygon p;
        for (const nlohmann::json& v : j.at("vertices"))
            p.vertices.push_back({v[0].get<double>(), v[1].get<double>()});
        return p;
    }
    if (type == "capsule") {
        Capsule c;
        c.a = {j.at("a")[0].get<double>(), j.at("a")[1].get<double>()};
        c.b = {j.at("b")[0].get<double>(), j.at("b")[1].get<double>()};
        c.radius = j.at("radius").get<double>();
        return c;
    }
    throw std::runtime_error("unknown shape type: " + type);
}

nlohmann::json worldSnapshot(const World& world) {
    nlohmann::json j;
    j["format_version"] = 1;
    nlohmann::json bodies = nlohmann::json::array();
    for (const RigidBody& b : world.bodies) {
        nlohmann::json shapes = nlohmann::json::array();
        for (const Shape& s : b.fixtures) shapes.push_back(shapeToJson(s));
        bodies.push_back({{"pose", poseToJson(b.position, b.angle)},
                          {"linear_velocity", {b.linear_vel.x, b.linear_vel.y}},
                          {"angular_velocity", b.angular_vel},
                          {"mass", b.mass},
                          {"shapes", shapes}});
    }
    j["bodies"] = bodies;
    return j;
}

// ---- episode traces ----------------------------------------------------------

TraceWriter::TraceWriter(std::ostream& os, const World& world, const HandModel& hand,
                         BodyId object)
    : os_(os) {
    nlohmann::json meta;
    meta["format_version"] = kTraceFormatVersion;
    nlohmann::json bodies = nlohmann::json::array();
    for (BodyId id = 0; id < static_cast<BodyId>(world.bodies.size()); ++id) {
        const RigidBody& b = world.body(id);
        const bool is_hand = id == hand.palm ||
                             std::find(hand.links.begin(), hand.links.end(), id) !=
                                 hand.links.end();
        nlohmann::json shapes = nlohmann::json::array();
        for (const Shape& s : b.fixtures) shapes.push_back(shapeToJson(s));
        bodies.push_back({{"id", id},
                          {"hand", is_hand},
                          {"object", id == object},
                          {"shapes", shapes},
                          {"pose", poseToJson(b.position, b.angle)}});
    }
    meta["bodies"] = bodies;
    os_ << meta.dump() << '\n';
}

void TraceWriter::step(int step_index, const World& world, const Eigen::VectorXd& observation,
                       const Eigen::Vector4d& action, const StepResult& result) {
    nlohmann::json j;
    j["step"] = step_index;
    nlohmann::json poses = nlohmann::json::array();
    for (const RigidBody& b : world.bodies) poses.push_back(poseToJson(b.position, b.angle));
    j["poses"] = poses;
    nlohmann::json contacts = nlohmann::json::array();
    for (const Contact& c : world.last_contacts) {
        const Vec2 force = (c.normal * c.normal_impulse +
                            Vec2{-c.normal.y, c.normal.x} * c.tangent_impulse) *
                           (1.0 / world.dt);
        contacts.push_back(
            {{"point", {c.point.x, c.point.y}}, {"force", {force.x, force.y}}});
    }
    j["contacts"] = contacts;
    j["observation"] = vecToJson(observation);
    j["action"] = vecToJson(action);
    j["reward"] = result.reward;
    j["reward_terms"] = result.info.breakdown.terms;
    j["n_contacts"] = result.info.n_contacts;
    j["true_pose"] = poseToJson(result.info.true_position, result.info.true_angle);
    os_ << j.dump() << '\n';
}

Trace readTrace(std::istream& is) {
    Trace trace;
    std::string line;
    int line_no = 0;
    bool have_meta = false;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
            if (!have_meta) {
                requireVersion(j, kTraceFormatVersion, "trace");
                for (const nlohmann::json& bj : j.at("bodies")) {
                    TraceBody body;
                    for (const nlohmann::json& sj : bj.at("shapes"))
                        body.shapes.push_back(shapeFromJson(sj));
                    body.position = {bj.at("pose").at("x").get<double>(),
                                     bj.at("pose").at("y").get<double>()};
                    body.angle = bj.at("pose").at("theta").get<double>();
                    body.is_hand = bj.at("hand").get<bool>();
                    trace.bodies.push_back(body);
                }
                have_meta = true;
                continue;
            }
            TraceFrame frame;
            frame.step = j.at("step").get<int>();
            for (const nlohmann::json& pj : j.at("poses"))
                frame.poses.emplace_back(
                    Vec2{pj.at("x").get<double>(), pj.at("y").get<double>()},
                    pj.at("theta").get<double>());
            if (frame.poses.size() != trace.bodies.size())
                throw std::runtime_error("pose count does not match the geometry line");
            for (const nlohmann::json& cj : j.at("contacts")) {
                TraceContact c;
                c.point = {cj.at("point")[0].get<double>(), cj.at("point")[1].get<double>()};
                c.force = {cj.at("force")[0].get<double>(), cj.at("force")[1].get<double>()};
                frame.contacts.push_back(c);
            }
            frame.reward = j.at("reward").get<double>();
            const auto terms = j.at("reward_terms").get<std::vector<double>>();
            if (terms.size() != frame.breakdown.terms.size())
                throw std::runtime_error("expected 6 reward terms");
            std::copy(terms.begin(), terms.end(), frame.breakdown.terms.begin());
            frame.n_contacts = j.at("n_contacts").get<int>();
            trace.frames.push_back(frame);
        } catch (const std::exception& e) {
            throw std::runtime_error("malformed trace at line " + std::to_string(line_no) +
                                     ": " + e.what());
        }
    }
    return trace;
}

Trace loadTrace(const std::string& path) {
    auto f = openIn(path);
    return readTrace(f);
}

}  // namespace grasp2d
