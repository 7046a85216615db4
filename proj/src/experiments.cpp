#include "grasp2d/experiments.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace grasp2d {

std::string categoryName(ExperimentCategory c) {
    switch (c) {
        case ExperimentCategory::SinglePreGrasp: return "single_pregrasp";
        case ExperimentCategory::MultiPreGrasp: return "multi_pregrasp";
        case ExperimentCategory::MultiPreGraspNoise: return "multi_pregrasp_noise";
    }
    return "multi_pregrasp";
}

ExperimentCategory categoryFromName(const std::string& name) {
    for (ExperimentCategory c : {ExperimentCategory::SinglePreGrasp,
                                 ExperimentCategory::MultiPreGrasp,
                                 ExperimentCategory::MultiPreGraspNoise})
        if (categoryName(c) == name) return c;
    throw std::invalid_argument("unknown experiment category: " + name);
}

EvalOutcome constantTorqueEval(const std::vector<PreGrasp>& pregrasps,
                               const Eigen::Vector4d& torque, const EpisodeConfig& config) {
    EvalOutcome out;
    if (pregrasps.empty()) throw std::invalid_argument("empty pre-grasp set");
    for (const PreGrasp& pg : pregrasps) {
        Env env(pg, config);
        env.reset();
        bool success = false;
        while (!env.done()) {
            const StepResult r = env.step(torque);
            if (r.done) success = r.info.drop_test_success;
        }
        out.per_instance.emplace_back(pg.id, success);
        out.success_fraction += success ? 1.0 : 0.0;
    }
    out.success_fraction /= static_cast<double>(pregrasps.size());
    return out;
}

namespace {

std::vector<Vec2> convexHull(std::vector<Vec2> pts) {
    std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });
    std::vector<Vec2> hull;
    auto build = [&](auto begin, auto end) {
        const size_t base = hull.size();
        for (auto it = begin; it != end; ++it) {
            while (hull.size() >= base + 2 &&
                   cross(hull[hull.size() - 1] - hull[hull.size() - 2],
                         *it - hull[hull.size() - 1]) <= 0.0)
                hull.pop_back();
            hull.push_back(*it);
        }
        hull.pop_back();
    };
    build(pts.begin(), pts.end());
    build(pts.rbegin(), pts.rend());
    return hull;
}

bool pointInHull(const std::vector<Vec2>& hull, Vec2 p) {
    if (hull.size() < 3) return false;
    for (size_t i = 0; i < hull.size(); ++i) {
        const Vec2 a = hull[i];
        const Vec2 b = hull[(i + 1) % hull.size()];
        if (cross(b - a, p - a) < 0.0) return false;
    }
    return true;
}

std::vector<Vec2> handHullPoints(const World& world, const HandModel& hand) {
    std::vector<Vec2> pts;
    auto addBody = [&](BodyId id) {
        const RigidBody& b = world.body(id);
        const Transform xf = b.transform();
        for (const Shape& s : b.fixtures) {
            if (const auto* poly = std::get_if<Polygon>(&s))
                for (Vec2 v : poly->vertices) pts.push_back(xf.apply(v));
        }
    };
    addBody(hand.palm);
    for (BodyId link : hand.links) addBody(link);
    return pts;
}

// smallest surface distance between one finger's links and the object
double fingerObjectDistance(const World& world, const HandModel& hand, BodyId object,
                            int finger) {
    const RigidBody& obj = world.body(object);
    double best = std::numeric_limits<double>::infinity();
    for (int l = 2 * finger; l < 2 * finger + 2; ++l) {
        const RigidBody& link = world.body(hand.links[static_cast<size_t>(l)]);
        for (const Shape& sl : link.fixtures)
            for (const Shape& so : obj.fixtures)
                best = std::min(best,
                                shapeDistance(sl, link.transform(), so, obj.transform()));
    }
    return best;
}

std::uint64_t mixSeed(std::uint64_t a, std::uint64_t b) {
    a ^= b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2);
    return a;
}

}  // namespace

double physicsScore(const PreGrasp& pregrasp, const EpisodeConfig& config, int n_trials,
                    const NoiseConfig& noise, std::uint64_t seed) {
    int successes = 0;
    for (int trial = 0; trial < n_trials; ++trial) {
        std::mt19937_64 rng(mixSeed(seed, static_cast<std::uint64_t>(trial)));
        PreGrasp pg = pregrasp;
        if (noise.enabled) corruptPose(pg.object_position, pg.object_angle, noise, rng);

        World world;
        world.dt = config.dt;
        HandModel hand;
        const BodyId object = instantiatePreGrasp(world, pg, config.hand, hand);
        Articulation& art = world.articulations[static_cast<size_t>(hand.articulation)];

        // stage 1: drive the fingers closed kinematically; each finger stops
        // when it touches the object, contacts are not resolved yet
        const double step_q = 0.02;
        bool moving = true;
        std::array<bool, 2> stopped{false, false};
        for (int i = 0; i < 400 && moving; ++i) {
            moving = false;
            Eigen::VectorXd q = art.q();
            for (int f = 0; f < 2; ++f) {
                if (stopped[static_cast<size_t>(f)]) continue;
                if (fingerObjectDistance(world, hand, object, f) <= 1e-4) {
                    stopped[static_cast<size_t>(f)] = true;
                    continue;
                }
                bool advanced = false;
                for (int j = 2 * f; j < 2 * f + 2; ++j) {
                    const double q_max = art.joints()[static_cast<size_t>(j)].q_max;
                    if (q[j] < q_max) {
                        q[j] = std::min(q_max, q[j] + step_q);
                        advanced = true;
                    }
                }
                if (!advanced) stopped[static_cast<size_t>(f)] = true;
                moving = moving || advanced;
            }
            art.setState(q, Eigen::VectorXd::Zero(art.dof()));
            art.syncLinkBodies(world);
        }

        // stage 2: resolve contacts dynamically for one second under closing torque
        const Eigen::Vector4d closing = Eigen::Vector4d::Constant(
            0.5 * config.hand.torque_limit);
        const int steps = static_cast<int>(std::lround(1.0 / config.dt));
        for (int i = 0; i < steps && !world.unstable; ++i) {
            applyJointTorques(hand, world, closing);
            world.step();
        }

        // the object "has not slipped out" when its center is still inside the hand
        if (!world.unstable &&
            pointInHull(convexHull(handHullPoints(world, hand)),
                        world.body(object).position))
            ++successes;
    }
    return static_cast<double>(successes) / static_cast<double>(n_trials);
}

EvalOutcome evaluatePolicy(const GaussianPolicy& policy, const RunningNorm& norm,
                           const std::vector<PreGrasp>& pregrasps,
                           const EpisodeConfig& config) {
    if (pregrasps.empty()) throw std::invalid_argument("empty evaluation set");
    EvalOutcome out;
    for (const PreGrasp& pg : pregrasps) {
        Env env(pg, config);
        if (env.observationDim() != policy.meanNet().spec().input_dim)
            throw std::invalid_argument(
                "policy input dimension does not match the environment observation");
        Eigen::VectorXd obs = env.reset();
        bool success = false;
        while (!env.done()) {
            const Eigen::VectorXd norm_obs = norm.normalize(obs.transpose()).row(0).transpose();
            const Eigen::Vector4d action =
                policy.meanActions(norm_obs.transpose()).row(0).transpose();
            const StepResult r = env.step(action);
            obs = r.observation;
            if (r.done) success = r.info.drop_test_success;
        }
        out.per_instance.emplace_back(pg.id, success);
        out.success_fraction += success ? 1.0 : 0.0;
    }
    out.success_fraction /= static_cast<double>(pregrasps.size());
    return out;
}

std::string ResultsTable::toCsv() const {
    std::ostringstream os;
    os << "object";
    for (const std::string& c : columns) os << ',' << c;
    os << '\n';
    for (const auto& [row, row_cells] : cells) {
        os << row;
        for (const std::string& c : columns) {
            os << ',';
            const auto it = row_cells.find(c);
            if (it != row_cells.end() && it->second) os << std::fixed << std::setprecision(1)
                                                        << *it->second;
        }
        os << '\n';
    }
    return os.str();
}

std::string ResultsTable::toText() const {
    std::ostringstream os;
    os << categoryName(category) << "  (n=" << n_pregrasps << ", seeds=" << n_seeds << ")\n";
    os << std::left << std::setw(10) << "object";
    for (const std::string& c : columns) os << std::right << std::setw(10) << c;
    os << '\n' << std::string(10 + 10 * columns.size(), '-') << '\n';
    for (const auto& [row, row_cells] : cells) {
        os << std::left << std::setw(10) << row;
        for (const std::string& c : columns) {
            const auto it = row_cells.find(c);
            std::ostringstream cell;
            if (it != row_cells.end() && it->second)
                cell << std::fixed << std::setprecision(1) << *it->second << '%';
            else
                cell << "-";
            os << std::right << std::setw(10) << cell.str();
        }
        os << '\n';
    }
    return os.str();
}

namespace {

struct CellJob {
    ObjectKind object;
    std::uint64_t seed;
};

constexpr const char* kNoC = "\u00acC";
constexpr const char* kWithC = "C";

struct CellResult {
    // column -> (fraction, per-instance outcomes)
    std::map<std::string, EvalOutcome> outcomes;
    double physics_pass_rate = 0.0;
};

std::vector<PreGrasp> select(const Dataset& ds, const std::vector<int>& ids) {
    std::vector<PreGrasp> out;
    out.reserve(ids.size());
    for (int id : ids) out.push_back(ds.pregrasps[static_cast<size_t>(id)]);
    return out;
}

CellResult runCell(const ExperimentConfig& config, const CellJob& job, bool baselines_only,
                   const std::function<void(const std::string&)>& log) {
    CellResult result;
    const std::uint64_t obj_seed =
        mixSeed(job.seed, static_cast<std::uint64_t>(job.object) + 101);
    auto say = [&](const std::string& m) {
        if (log) log("[" + objectKindName(job.object) + " seed " + std::to_string(job.seed) +
                     "] " + m);
    };

    std::vector<PreGrasp> pregrasps =
        samplePreGrasps(job.object, config.n_pregrasps, obj_seed, config.episode.hand);

    auto episodeVariant = [&](bool contacts, bool train_noise) {
        EpisodeConfig ec = config.episode;
        ec.contact_feedback = contacts;
        ec.noise = config.eval_noise;
        ec.noise.enabled = train_noise;
        return ec;
    };
    auto trainPolicy = [&](const std::vector<PreGrasp>& train_set, bool contacts,
                           bool train_noise, std::uint64_t salt) {
        TrpoConfig tc = config.trpo;
        tc.seed = mixSeed(obj_seed, salt);
        return train(train_set, episodeVariant(contacts, train_noise), tc);
    };
    auto evalConfig = [&](bool contacts, bool eval_noise) {
        EpisodeConfig ec = config.episode;
        ec.contact_feedback = contacts;
        ec.noise = config.eval_noise;
        ec.noise.enabled = eval_noise;
        return ec;
    };

    if (config.category == ExperimentCategory::SinglePreGrasp) {
        // one policy per pre-grasp, tested on the same instance
        if (!baselines_only) {
            EvalOutcome no_c, with_c;
            for (const PreGrasp& pg : pregrasps) {
                for (const bool contacts : {false, true}) {
                    const TrainResult tr = trainPolicy({pg}, contacts, false,
                                                       static_cast<std::uint64_t>(pg.id) * 2 +
                                                           (contacts ? 1 : 0));
                    const EvalOutcome eo =
                        evaluatePolicy(tr.policy, tr.norm, {pg}, evalConfig(contacts, false));
                    EvalOutcome& agg = contacts ? with_c : no_c;
                    agg.per_instance.push_back(eo.per_instance.front());
                    agg.success_fraction += eo.success_fraction;
                }
                say("trained pre-grasp " + std::to_string(pg.id));
            }
            no_c.success_fraction /= static_cast<double>(pregrasps.size());
            with_c.success_fraction /= static_cast<double>(pregrasps.size());
            result.outcomes[kNoC] = no_c;
            result.outcomes[kWithC] = with_c;
        }
        result.outcomes["CT"] =
            constantTorqueEval(pregrasps, config.constant_torque, evalConfig(false, false));
        double pass = 0.0;
        for (const PreGrasp& pg : pregrasps)
            pass += physicsScore(pg, config.episode, config.physics_trials, config.eval_noise,
                                 mixSeed(obj_seed, static_cast<std::uint64_t>(pg.id))) > 0.5
                        ? 1.0
                        : 0.0;
        result.physics_pass_rate = pass / static_cast<double>(pregrasps.size());
        return result;
    }

    const Dataset ds = splitDataset(pregrasps, config.split_ratio, mixSeed(obj_seed, 7));
    const std::vector<PreGrasp> train_set = select(ds, ds.train_ids);
    const std::vector<PreGrasp> test_set = select(ds, ds.test_ids);
    const bool noisy = config.category == ExperimentCategory::MultiPreGraspNoise;

    std::vector<std::pair<std::string, std::pair<bool, bool>>> variants;  // (contacts, train noise)
    if (noisy)
        variants = {{"\u00acC,\u00acN", {false, false}},
                    {"C,\u00acN", {true, false}},
                    {"\u00acC,N", {false, true}},
                    {"C,N", {true, true}}};
    else
        variants = {{kNoC, {false, false}}, {kWithC, {true, false}}};

    std::uint64_t salt = 1;
    if (baselines_only) variants.clear();
    for (const auto& [name, flags] : variants) {
        const TrainResult tr = trainPolicy(train_set, flags.first, flags.second, salt++);
        result.outcomes[name] =
            evaluatePolicy(tr.policy, tr.norm, test_set, evalConfig(flags.first, noisy));
        say("variant " + name + " done (" +
            std::to_string(result.outcomes[name].success_fraction * 100.0) + "%)");
    }
    result.outcomes["CT"] =
        constantTorqueEval(test_set, config.constant_torque, evalConfig(false, noisy));
    double pass = 0.0;
    for (const PreGrasp& pg : test_set)
        pass += physicsScore(pg, config.episode, config.physics_trials, config.eval_noise,
                             mixSeed(obj_seed, static_cast<std::uint64_t>(pg.id))) > 0.5
                    ? 1.0
                    : 0.0;
    result.physics_pass_rate = pass / static_cast<double>(test_set.size());
    return result;
}

}  // namespace

ResultsTable runCategory(const ExperimentConfig& config, const CategoryRunOptions& options) {
    if (config.n_pregrasps < 2 && config.category != ExperimentCategory::SinglePreGrasp)
        throw std::invalid_argument("need at least 2 pre-grasps for a split");

    ResultsTable table;
    table.category = config.category;
    table.n_pregrasps = config.n_pregrasps;
    table.n_seeds = static_cast<int>(config.seeds.size());
    if (config.category == ExperimentCategory::MultiPreGraspNoise)
        table.columns = {"P", "CT", "\u00acC,\u00acN", "C,\u00acN", "\u00acC,N", "C,N"};
    else
        table.columns = {"P", "CT", kNoC, kWithC};

    std::vector<CellJob> jobs;
    for (ObjectKind obj : config.objects)
        for (std::uint64_t seed : config.seeds) jobs.push_back({obj, seed});

    std::vector<CellResult> results(jobs.size());
    std::vector<std::string> errors(jobs.size());
    std::mutex log_mutex;
    auto locked_log = [&](const std::string& m) {
        if (!options.log) return;
        std::lock_guard<std::mutex> lock(log_mutex);
        options.log(m);
    };

    const int workers = std::max(1, options.workers);
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
            try {
                results[i] = runCell(config, jobs[i], options.baselines_only, locked_log);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    // merge: per-object mean over seeds; failed cells leave explicit gaps
    std::ofstream raw;
    if (!options.raw_output_path.empty()) raw.open(options.raw_output_path);
    for (ObjectKind obj : config.objects) {
        const std::string row = objectKindName(obj);
        std::map<std::string, std::pair<double, int>> acc;  // column -> (sum, count)
        for (size_t i = 0; i < jobs.size(); ++i) {
            if (jobs[i].object != obj) continue;
            if (!errors[i].empty()) {
                locked_log("cell failed (" + row + ", seed " + std::to_string(jobs[i].seed) +
                           "): " + errors[i]);
                continue;
            }
            auto& p = acc["P"];
            p.first += results[i].physics_pass_rate * 100.0;
            p.second += 1;
            for (const auto& [col, outcome] : results[i].outcomes) {
                auto& a = acc[col];
                a.first += outcome.success_fraction * 100.0;
                a.second += 1;
                if (raw.is_open()) {
                    nlohmann::json rec;
                    rec["object"] = row;
                    rec["seed"] = jobs[i].seed;
                    rec["column"] = col;
                    rec["success_fraction"] = outcome.success_fraction;
                    nlohmann::json per;
                    for (const auto& [id, ok] : outcome.per_instance)
                        per.push_back({{"id", id}, {"success", ok}});
                    rec["per_instance"] = per;
                    raw << rec.dump() << '\n';
                }
            }
        }
        for (const std::string& col : table.columns) {
            const auto it = acc.find(col);
            if (it != acc.end() && it->second.second > 0)
                table.cells[row][col] = it->second.first / it->second.second;
            else
                table.cells[row][col] = std::nullopt;
        }
    }
    return table;
}

}  // namespace grasp2d
