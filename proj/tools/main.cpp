#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "grasp2d/config.hpp"
#include "grasp2d/render.hpp"
#include "grasp2d/serialize.hpp"

namespace fs = std::filesystem;
using namespace grasp2d;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    int workers = 1;
};

void addCommon(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
    auto* opt = cmd->add_option("--config", args.config_path, "run configuration JSON");
    if (config_required) opt->required();
    cmd->add_option("--seed", args.seed, "master seed override");
    cmd->add_option("--out", args.out_dir, "output directory override");
    cmd->add_option("--workers", args.workers, "worker threads")->check(CLI::PositiveNumber);
}

// loads the config, applies overrides, creates the output directory and
// copies the config file into it verbatim
RunConfig setup(const CommonArgs& args) {
    RunConfig config =
        args.config_path.empty() ? RunConfig{} : loadRunConfig(args.config_path);
    if (args.seed) {
        config.seed = *args.seed;
        config.trpo().seed = *args.seed;
        config.episode().noise.seed = *args.seed;
        config.experiment.eval_noise.seed = *args.seed;
    }
    if (!args.out_dir.empty()) config.output_dir = args.out_dir;
    fs::create_directories(config.output_dir);
    if (!args.config_path.empty())
        fs::copy_file(args.config_path, fs::path(config.output_dir) / "config.json",
                      fs::copy_options::overwrite_existing);
    return config;
}

std::vector<PreGrasp> select(const Dataset& ds, const std::vector<int>& ids) {
    std::vector<PreGrasp> out;
    for (int id : ids) out.push_back(ds.pregrasps.at(static_cast<size_t>(id)));
    return out;
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    a ^= b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2);
    return a;
}

int cmdDataset(const CommonArgs& args) {
    const RunConfig config = setup(args);
    const ExperimentConfig& x = config.experiment;
    std::vector<PreGrasp> all;
    for (ObjectKind kind : x.objects) {
        const std::uint64_t kind_seed =
            mix(config.seed, static_cast<std::uint64_t>(kind) + 101);
        for (PreGrasp pg : samplePreGrasps(kind, x.n_pregrasps, kind_seed,
                                           config.episode().hand)) {
            pg.id = static_cast<int>(all.size());
            all.push_back(pg);
        }
    }
    Dataset ds = splitDataset(all, x.split_ratio, mix(config.seed, 7));
    const fs::path path = fs::path(config.output_dir) / "dataset.json";
    saveDataset(ds, path.string());
    std::cout << "wrote " << path.string() << " (" << ds.pregrasps.size() << " pre-grasps, "
              << ds.train_ids.size() << " train / " << ds.test_ids.size() << " test)\n";
    return kExitOk;
}

int cmdTrain(const CommonArgs& args, const std::string& dataset_path,
             const std::string& resume_path, const std::string& object_filter) {
    const RunConfig config = setup(args);
    Dataset ds = loadDataset(dataset_path);
    std::vector<PreGrasp> train_set = select(ds, ds.train_ids);
    if (!object_filter.empty()) {
        const ObjectKind kind = objectKindFromName(object_filter);
        std::erase_if(train_set, [&](const PreGrasp& pg) { return pg.kind != kind; });
    }
    if (train_set.empty()) throw std::invalid_argument("train split is empty");

    TrainResult resume_state;
    const TrainResult* resume = nullptr;
    if (!resume_path.empty()) {
        Checkpoint ck = loadCheckpoint(resume_path);
        if (ck.contact_feedback != config.episode().contact_feedback)
            throw std::invalid_argument(
                "checkpoint contact_feedback does not match the configuration");
        resume_state.policy = ck.policy;
        resume_state.value = ck.value;
        resume_state.norm = ck.norm;
        resume_state.iterations_run = ck.iteration;
        resume = &resume_state;
    }

    const fs::path out(config.output_dir);
    auto sink = [&](int iteration, const TrainResult& tr) {
        Checkpoint ck;
        ck.iteration = iteration;
        ck.contact_feedback = config.episode().contact_feedback;
        ck.policy = tr.policy;
        ck.value = tr.value;
        ck.norm = tr.norm;
        std::ostringstream name;
        name << "checkpoint_" << std::setw(6) << std::setfill('0') << iteration << ".json";
        saveCheckpoint(ck, (out / name.str()).string());
    };
    auto progress = [](const IterationStats& st) {
        std::cout << "iter " << st.iteration << "  return " << st.mean_return << "  success "
                  << st.success_rate << "  kl " << st.update.mean_kl << '\n';
    };
    const TrainResult tr = train(train_set, config.episode(), config.trpo(),
                                 (out / "metrics.csv").string(), sink, progress, resume);
    std::cout << "trained " << tr.iterations_run << " iterations, final success rate "
              << tr.final_success_rate << '\n';
    return kExitOk;
}

// one traced episode driven by `act`, written as JSON-lines
void writeEpisodeTrace(Env& env, const std::function<Eigen::Vector4d(const Eigen::VectorXd&)>& act,
                       const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write trace: " + path);
    Eigen::VectorXd obs = env.reset();
    TraceWriter writer(f, env.world(), env.hand(), env.objectId());
    int step = 0;
    while (!env.done()) {
        const Eigen::Vector4d action = act(obs);
        const StepResult result = env.step(action);
        writer.step(step++, env.world(), obs, action, result);
        obs = result.observation;
    }
}

int cmdEval(const CommonArgs& args, const std::string& dataset_path,
            const std::string& checkpoint_path, const std::string& trace_path) {
    const RunConfig config = setup(args);
    Dataset ds = loadDataset(dataset_path);
    const std::vector<PreGrasp> test_set = select(ds, ds.test_ids);
    if (test_set.empty()) throw std::invalid_argument("test split is empty");

    std::optional<Checkpoint> ck;
    if (!checkpoint_path.empty()) ck = loadCheckpoint(checkpoint_path);

    ResultsTable table;
    table.category = config.experiment.category;
    table.n_pregrasps = static_cast<int>(test_set.size());
    table.n_seeds = 1;
    table.columns = {"P", "CT", "¬C", "C"};

    const fs::path out(config.output_dir);
    std::ofstream raw(out / "raw.jsonl");

    for (ObjectKind kind : config.experiment.objects) {
        std::vector<PreGrasp> set;
        for (const PreGrasp& pg : test_set)
            if (pg.kind == kind) set.push_back(pg);
        const std::string row = objectKindName(kind);
        if (set.empty()) {
            for (const std::string& c : table.columns) table.cells[row][c] = std::nullopt;
            continue;
        }

        EpisodeConfig ec = config.episode();
        double pass = 0.0;
        for (const PreGrasp& pg : set)
            pass += physicsScore(pg, ec, config.experiment.physics_trials,
                                 config.experiment.eval_noise,
                                 mix(config.seed, static_cast<std::uint64_t>(pg.id))) > 0.5
                        ? 1.0
                        : 0.0;
        table.cells[row]["P"] = 100.0 * pass / static_cast<double>(set.size());

        EpisodeConfig ct_config = ec;
        ct_config.contact_feedback = false;
        const EvalOutcome ct =
            constantTorqueEval(set, config.experiment.constant_torque, ct_config);
        table.cells[row]["CT"] = 100.0 * ct.success_fraction;
        table.cells[row]["¬C"] = std::nullopt;
        table.cells[row]["C"] = std::nullopt;

        if (ck) {
            ec.contact_feedback = ck->contact_feedback;
            const EvalOutcome eo = evaluatePolicy(ck->policy, ck->norm, set, ec);
            table.cells[row][ck->contact_feedback ? "C" : "¬C"] =
                100.0 * eo.success_fraction;
            for (const auto& [id, ok] : eo.per_instance)
                raw << nlohmann::json({{"object", row}, {"id", id}, {"success", ok}}).dump()
                    << '\n';
        }
    }

    std::ofstream(out / "results.csv") << table.toCsv();
    std::ofstream(out / "results.txt") << table.toText();
    std::cout << table.toText();

    if (!trace_path.empty()) {
        EpisodeConfig ec = config.episode();
        if (ck) {
            ec.contact_feedback = ck->contact_feedback;
            Env env(test_set.front(), ec);
            const GaussianPolicy& policy = ck->policy;
            const RunningNorm& norm = ck->norm;
            writeEpisodeTrace(
                env,
                [&](const Eigen::VectorXd& obs) -> Eigen::Vector4d {
                    const Eigen::VectorXd n = norm.normalize(obs.transpose()).row(0).transpose();
                    return policy.meanActions(n.transpose()).row(0).transpose();
                },
                trace_path);
        } else {
            ec.contact_feedback = false;
            Env env(test_set.front(), ec);
            const Eigen::Vector4d torque = config.experiment.constant_torque;
            writeEpisodeTrace(
                env, [&](const Eigen::VectorXd&) -> Eigen::Vector4d { return torque; },
                trace_path);
        }
        std::cout << "wrote trace " << trace_path << '\n';
    }
    return kExitOk;
}

int cmdExperiment(const CommonArgs& args) {
    const RunConfig config = setup(args);
    CategoryRunOptions options;
    options.workers = args.workers;
    const fs::path out(config.output_dir);
    options.raw_output_path = (out / "raw.jsonl").string();
    options.log = [](const std::string& m) { std::cout << m << '\n'; };
    const ResultsTable table = runCategory(config.experiment, options);
    std::ofstream(out / "results.csv") << table.toCsv();
    std::ofstream(out / "results.txt") << table.toText();
    std::cout << table.toText();
    return kExitOk;
}

int cmdRender(const std::string& trace_path, const std::string& out_dir, int every) {
    RenderOptions options;
    options.every = every;
    const Trace trace = loadTrace(trace_path);
    const int n = renderTrace(trace, out_dir, options);
    std::cout << "wrote " << n << " frames to " << out_dir << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"planar grasp-acquisition laboratory"};
    app.require_subcommand(1);

    CommonArgs dataset_args;
    CLI::App* dataset_cmd = app.add_subcommand("dataset", "sample pre-grasps and split them");
    addCommon(dataset_cmd, dataset_args);

    CommonArgs train_args;
    std::string train_dataset, train_resume, train_object;
    CLI::App* train_cmd = app.add_subcommand("train", "optimize a policy on the train split");
    addCommon(train_cmd, train_args);
    train_cmd->add_option("--dataset", train_dataset, "dataset JSON")->required();
    train_cmd->add_option("--resume", train_resume, "checkpoint to continue from");
    train_cmd->add_option("--object", train_object, "restrict to one object kind");

    CommonArgs eval_args;
    std::string eval_dataset, eval_checkpoint, eval_trace;
    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
    addCommon(eval_cmd, eval_args);
    eval_cmd->add_option("--dataset", eval_dataset, "dataset JSON")->required();
    eval_cmd->add_option("--checkpoint", eval_checkpoint, "policy checkpoint")->required();
    eval_cmd->add_option("--trace", eval_trace, "write an episode trace here");

    CommonArgs baseline_args;
    std::string baseline_dataset, baseline_trace;
    CLI::App* baseline_cmd =
        app.add_subcommand("baseline", "physics score and constant-torque baselines");
    addCommon(baseline_cmd, baseline_args);
    baseline_cmd->add_option("--dataset", baseline_dataset, "dataset JSON")->required();
    baseline_cmd->add_option("--trace", baseline_trace, "write an episode trace here");

    CommonArgs experiment_args;
    CLI::App* experiment_cmd =
        app.add_subcommand("experiment", "run a full experiment category");
    addCommon(experiment_cmd, experiment_args);

    std::string render_trace, render_out = "frames";
    int render_every = 10;
    CLI::App* render_cmd = app.add_subcommand("render", "episode trace to SVG frames");
    render_cmd->add_option("--trace", render_trace, "episode trace JSON-lines")->required();
    render_cmd->add_option("--out", render_out, "frame output directory");
    render_cmd->add_option("--every", render_every, "render every k-th step")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
        if (dataset_cmd->parsed()) return cmdDataset(dataset_args);
        if (train_cmd->parsed())
            return cmdTrain(train_args, train_dataset, train_resume, train_object);
        if (eval_cmd->parsed())
            return cmdEval(eval_args, eval_dataset, eval_checkpoint, eval_trace);
        if (baseline_cmd->parsed())
            return cmdEval(baseline_args, baseline_dataset, "", baseline_trace);
        if (experiment_cmd->parsed()) return cmdExperiment(experiment_args);
        if (render_cmd->parsed()) return cmdRender(render_trace, render_out, render_every);
        return kExitValidation;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}
