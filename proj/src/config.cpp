#include "grasp2d/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace grasp2d {

namespace {

// pulls known keys out of an object, then rejects whatever is left
class Section {
  public:
    Section(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object())
            throw ConfigError("config: '" + path_ + "' must be a JSON object");
    }

    template <typename T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError("config: '" + path_ + "." + key + "' has the wrong type");
        }
    }

    const nlohmann::json* sub(const char* key) {
        seen_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }

    void finish() const {
        for (const auto& [key, value] : j_.items())
            if (!seen_.count(key))
                throw ConfigError("config: unknown key '" + path_ + "." + key + "'");
    }

  private:
    const nlohmann::json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void parseNoise(const nlohmann::json& j, const std::string& path, NoiseConfig& n) {
    Section s(j, path);
    s.get("enabled", n.enabled);
    s.get("position_radius", n.position_radius);
    s.get("angle_max", n.angle_max);
    s.get("fixed_angle_magnitude", n.fixed_angle_magnitude);
    s.finish();
}

void parseHand(const nlohmann::json& j, HandConfig& h) {
    Section s(j, "hand");
    s.get("palm_half_width", h.palm_half_width);
    s.get("palm_half_thickness", h.palm_half_thickness);
    s.get("finger_offset", h.finger_offset);
    s.get("link_length", h.link_length);
    s.get("link_half_thickness", h.link_half_thickness);
    s.get("link_mass", h.link_mass);
    s.get("torque_limit", h.torque_limit);
    s.get("damping", h.damping);
    s.get("q_min", h.q_min);
    s.get("q_max", h.q_max);
    s.get("friction", h.friction);
    s.finish();
}

void parseReward(const nlohmann::json& j, RewardWeights& w) {
    Section s(j, "episode.reward");
    s.get("contact_delta", w.contact_delta);
    s.get("distance_delta", w.distance_delta);
    s.get("action_norm", w.action_norm);
    s.get("twist_norm", w.twist_norm);
    s.get("fingertip_delta", w.fingertip_delta);
    s.get("drop_test", w.drop_test);
    s.finish();
}

void parseEpisode(const nlohmann::json& j, EpisodeConfig& e) {
    Section s(j, "episode");
    s.get("horizon", e.horizon);
    s.get("dt", e.dt);
    s.get("drop_force", e.drop_force);
    s.get("drop_phase_duration", e.drop_phase_duration);
    s.get("success_diameter", e.success_diameter);
    s.get("contact_feedback", e.contact_feedback);
    if (const nlohmann::json* n = s.sub("noise")) parseNoise(*n, "episode.noise", e.noise);
    if (const nlohmann::json* r = s.sub("reward")) parseReward(*r, e.reward);
    s.finish();
}

void parseTrpo(const nlohmann::json& j, TrpoConfig& t) {
    Section s(j, "trpo");
    s.get("max_kl", t.max_kl);
    s.get("gamma", t.gamma);
    s.get("cg_iterations", t.cg_iterations);
    s.get("cg_residual_tol", t.cg_residual_tol);
    s.get("cg_damping", t.cg_damping);
    s.get("backtrack_ratio", t.backtrack_ratio);
    s.get("max_backtracks", t.max_backtracks);
    s.get("batch_timesteps", t.batch_timesteps);
    s.get("value_epochs", t.value_epochs);
    s.get("value_learning_rate", t.value_learning_rate);
    s.get("iterations", t.iterations);
    s.get("checkpoint_every", t.checkpoint_every);
    s.get("normalize_observations", t.normalize_observations);
    s.get("log_std_init", t.log_std_init);
    s.finish();
}

void parseExperiment(const nlohmann::json& j, ExperimentConfig& x) {
    Section s(j, "experiment");
    std::string category = categoryName(x.category);
    s.get("category", category);
    x.category = categoryFromName(category);

    std::vector<std::string> names;
    s.get("objects", names);
    if (!names.empty()) {
        x.objects.clear();
        for (const std::string& n : names) x.objects.push_back(objectKindFromName(n));
    }
    s.get("n_pregrasps", x.n_pregrasps);
    s.get("split_ratio", x.split_ratio);
    s.get("seeds", x.seeds);
    s.get("physics_trials", x.physics_trials);
    if (const nlohmann::json* n = s.sub("eval_noise"))
        parseNoise(*n, "experiment.eval_noise", x.eval_noise);
    std::vector<double> torque;
    s.get("constant_torque", torque);
    if (!torque.empty()) {
        if (torque.size() != 4)
            throw ConfigError("config: 'experiment.constant_torque' must have 4 entries");
        for (int i = 0; i < 4; ++i) x.constant_torque[i] = torque[static_cast<size_t>(i)];
    }
    s.finish();
}

}  // namespace

RunConfig parseRunConfig(const nlohmann::json& j) {
    RunConfig config;
    config.experiment.eval_noise.enabled = true;  // noisy evaluation when requested
    Section s(j, "");
    s.get("seed", config.seed);
    s.get("output_dir", config.output_dir);
    if (const nlohmann::json* e = s.sub("episode")) parseEpisode(*e, config.episode());
    if (const nlohmann::json* h = s.sub("hand")) parseHand(*h, config.episode().hand);
    if (const nlohmann::json* t = s.sub("trpo")) parseTrpo(*t, config.trpo());
    if (const nlohmann::json* x = s.sub("experiment")) parseExperiment(*x, config.experiment);
    s.finish();
    config.trpo().seed = config.seed;
    config.episode().noise.seed = config.seed;
    config.experiment.eval_noise.seed = config.seed;
    validateRunConfig(config);
    return config;
}

void validateRunConfig(const RunConfig& config) {
    const EpisodeConfig& e = config.episode();
    auto fail = [](const std::string& m) { throw ConfigError("config: " + m); };
    if (e.horizon <= 0) fail("'episode.horizon' must be positive");
    if (e.dt <= 0.0) fail("'episode.dt' must be positive");
    if (e.drop_phase_duration <= 0.0) fail("'episode.drop_phase_duration' must be positive");
    if (e.success_diameter <= 0.0) fail("'episode.success_diameter' must be positive");
    if (e.noise.position_radius < 0.0) fail("'episode.noise.position_radius' must be >= 0");
    if (e.noise.angle_max < 0.0) fail("'episode.noise.angle_max' must be >= 0");
    if (e.hand.q_min >= e.hand.q_max) fail("'hand.q_min' must be below 'hand.q_max'");
    if (e.hand.torque_limit <= 0.0) fail("'hand.torque_limit' must be positive");

    const TrpoConfig& t = config.trpo();
    if (t.max_kl <= 0.0) fail("'trpo.max_kl' must be positive");
    if (t.gamma <= 0.0 || t.gamma > 1.0) fail("'trpo.gamma' must be in (0, 1]");
    if (t.cg_iterations <= 0) fail("'trpo.cg_iterations' must be positive");
    if (t.batch_timesteps <= 0) fail("'trpo.batch_timesteps' must be positive");
    if (t.iterations < 0) fail("'trpo.iterations' must be >= 0");

    const ExperimentConfig& x = config.experiment;
    if (x.n_pregrasps <= 0) fail("'experiment.n_pregrasps' must be positive");
    if (x.split_ratio <= 0.0 || x.split_ratio >= 1.0)
        fail("'experiment.split_ratio' must be in (0, 1)");
    if (x.seeds.empty()) fail("'experiment.seeds' must not be empty");
    if (x.physics_trials <= 0) fail("'experiment.physics_trials' must be positive");
    if (x.objects.empty()) fail("'experiment.objects' must not be empty");
}

nlohmann::json runConfigToJson(const RunConfig& config) {
    const EpisodeConfig& e = config.episode();
    const TrpoConfig& t = config.trpo();
    const ExperimentConfig& x = config.experiment;
    nlohmann::json j;
    j["seed"] = config.seed;
    j["output_dir"] = config.output_dir;
    j["episode"] = {{"horizon", e.horizon},
                    {"dt", e.dt},
                    {"drop_force", e.drop_force},
                    {"drop_phase_duration", e.drop_phase_duration},
                    {"success_diameter", e.success_diameter},
                    {"contact_feedback", e.contact_feedback},
                    {"noise",
                     {{"enabled", e.noise.enabled},
                      {"position_radius", e.noise.position_radius},
                      {"angle_max", e.noise.angle_max},
                      {"fixed_angle_magnitude", e.noise.fixed_angle_magnitude}}},
                    {"reward",
                     {{"contact_delta", e.reward.contact_delta},
                      {"distance_delta", e.reward.distance_delta},
                      {"action_norm", e.reward.action_norm},
                      {"twist_norm", e.reward.twist_norm},
                      {"fingertip_delta", e.reward.fingertip_delta},
                      {"drop_test", e.reward.drop_test}}}};
    j["hand"] = {{"palm_half_width", e.hand.palm_half_width},
                 {"palm_half_thickness", e.hand.palm_half_thickness},
                 {"finger_offset", e.hand.finger_offset},
                 {"link_length", e.hand.link_length},
                 {"link_half_thickness", e.hand.link_half_thickness},
                 {"link_mass", e.hand.link_mass},
                 {"torque_limit", e.hand.torque_limit},
                 {"damping", e.hand.damping},
                 {"q_min", e.hand.q_min},
                 {"q_max", e.hand.q_max},
                 {"friction", e.hand.friction}};
    j["trpo"] = {{"max_kl", t.max_kl},
                 {"gamma", t.gamma},
                 {"cg_iterations", t.cg_iterations},
                 {"cg_residual_tol", t.cg_residual_tol},
                 {"cg_damping", t.cg_damping},
                 {"backtrack_ratio", t.backtrack_ratio},
                 {"max_backtracks", t.max_backtracks},
                 {"batch_timesteps", t.batch_timesteps},
                 {"value_epochs", t.value_epochs},
                 {"value_learning_rate", t.value_learning_rate},
                 {"iterations", t.iterations},
                 {"checkpoint_every", t.checkpoint_every},
                 {"normalize_observations", t.normalize_observations},
                 {"log_std_init", t.log_std_init}};
    std::vector<std::string> names;
    for (ObjectKind k : x.objects) names.push_back(objectKindName(k));
    j["experiment"] = {{"category", categoryName(x.category)},
                       {"objects", names},
                       {"n_pregrasps", x.n_pregrasps},
                       {"split_ratio", x.split_ratio},
                       {"seeds", x.seeds},
                       {"physics_trials", x.physics_trials},
                       {"eval_noise",
                        {{"enabled", x.eval_noise.enabled},
                         {"position_radius", x.eval_noise.position_radius},
                         {"angle_max", x.eval_noise.angle_max},
                         {"fixed_angle_magnitude", x.eval_noise.fixed_angle_magnitude}}},
                       {"constant_torque",
                        {x.constant_torque[0], x.constant_torque[1], x.constant_torque[2],
                         x.constant_torque[3]}}};
    return j;
}

RunConfig loadRunConfig(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file: " + path);
    std::stringstream buf;
    buf << f.rdbuf();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(buf.str(), nullptr, true, /*ignore_comments=*/true);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config: " + path + " is not valid JSON: " + e.what());
    }
    return parseRunConfig(j);
}

}  // namespace grasp2d
