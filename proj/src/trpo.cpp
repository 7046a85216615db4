#include "grasp2d/trpo.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace grasp2d {

double TrajectoryBatch::meanEpisodeReward() const {
    if (episodes() == 0) return 0.0;
    double acc = 0.0;
    for (int e = 0; e < episodes(); ++e) {
        const int start = episode_starts[static_cast<size_t>(e)];
        const int end = e + 1 < episodes() ? episode_starts[static_cast<size_t>(e + 1)]
                                           : timesteps();
        acc += rewards.segment(start, end - start).sum();
    }
    return acc / static_cast<double>(episodes());
}

double TrajectoryBatch::successRate() const {
    if (drop_success.empty()) return 0.0;
    double n = 0.0;
    for (bool s : drop_success) n += s ? 1.0 : 0.0;
    return n / static_cast<double>(drop_success.size());
}

TrajectoryBatch collectBatch(const GaussianPolicy& policy, const RunningNorm& norm,
                             std::vector<Env>& train_envs, int n_timesteps, double gamma,
                             std::mt19937_64& rng) {
    if (train_envs.empty()) throw std::invalid_argument("empty train set");

    std::vector<Eigen::VectorXd> obs_rows, act_rows;
    std::vector<double> rewards, log_probs;
    TrajectoryBatch batch;

    std::uniform_int_distribution<size_t> pick(0, train_envs.size() - 1);
    while (static_cast<int>(obs_rows.size()) < n_timesteps) {
        Env& env = train_envs[pick(rng)];
        batch.episode_starts.push_back(static_cast<int>(obs_rows.size()));
        Eigen::VectorXd obs = env.reset();
        bool success = false;
        while (!env.done()) {
            const Eigen::VectorXd norm_obs = norm.normalize(obs.transpose()).row(0).transpose();
            double lp = 0.0;
            const Eigen::VectorXd action = policy.sampleAction(norm_obs, rng, &lp);
            const StepResult result = env.step(action);
            obs_rows.push_back(obs);
            act_rows.push_back(action);
            rewards.push_back(result.reward);
            log_probs.push_back(lp);
            obs = result.observation;
            if (result.done) success = result.info.drop_test_success;
        }
        batch.drop_success.push_back(success);
    }

    const int n = static_cast<int>(obs_rows.size());
    batch.observations.resize(n, obs_rows[0].size());
    batch.actions.resize(n, act_rows[0].size());
    batch.rewards.resize(n);
    batch.log_prob_old.resize(n);
    for (int i = 0; i < n; ++i) {
        batch.observations.row(i) = obs_rows[static_cast<size_t>(i)].transpose();
        batch.actions.row(i) = act_rows[static_cast<size_t>(i)].transpose();
        batch.rewards[i] = rewards[static_cast<size_t>(i)];
        batch.log_prob_old[i] = log_probs[static_cast<size_t>(i)];
    }

    // discounted reward-to-go within each episode
    batch.returns.resize(n);
    for (int e = 0; e < batch.episodes(); ++e) {
        const int start = batch.episode_starts[static_cast<size_t>(e)];
        const int end = e + 1 < batch.episodes()
                            ? batch.episode_starts[static_cast<size_t>(e + 1)]
                            : n;
        double g = 0.0;
        for (int t = end - 1; t >= start; --t) {
            g = batch.rewards[t] + gamma * g;
            batch.returns[t] = g;
        }
    }
    return batch;
}

Eigen::VectorXd computeAdvantages(const TrajectoryBatch& batch, const ValueFunction& value,
                                  const RunningNorm& norm, Eigen::VectorXd* raw) {
    const Eigen::MatrixXd norm_obs = norm.normalize(batch.observations);
    Eigen::VectorXd adv = batch.returns - value.predict(norm_obs);
    if (raw) *raw = adv;
    const double mean = adv.mean();
    adv.array() -= mean;
    const double stddev = std::sqrt(adv.squaredNorm() / static_cast<double>(adv.size()));
    if (stddev > 1e-12) adv /= stddev;
    return adv;
}

Eigen::VectorXd conjugateGradient(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& a,
                                  const Eigen::VectorXd& b, int iterations, double residual_tol,
                                  double* residual_out) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
    Eigen::VectorXd r = b;
    Eigen::VectorXd p = b;
    double rr = r.squaredNorm();
    for (int i = 0; i < iterations && std::sqrt(rr) >= residual_tol; ++i) {
        const Eigen::VectorXd ap = a(p);
        const double alpha = rr / p.dot(ap);
        x += alpha * p;
        r -= alpha * ap;
        if (!x.allFinite()) throw std::runtime_error("conjugate gradient produced NaN");
        const double rr_new = r.squaredNorm();
        p = r + (rr_new / rr) * p;
        rr = rr_new;
    }
    if (residual_out) *residual_out = std::sqrt(rr);
    return x;
}

namespace {

double surrogate(const GaussianPolicy& policy, const Eigen::MatrixXd& obs,
                 const Eigen::MatrixXd& actions, const Eigen::VectorXd& log_prob_old,
                 const Eigen::VectorXd& advantages) {
    const Eigen::ArrayXd ratio = (policy.logProb(obs, actions) - log_prob_old).array().exp();
    return (ratio * advantages.array()).mean();
}

}  // namespace

UpdateDiagnostics trpoUpdate(GaussianPolicy& policy, const Eigen::MatrixXd& norm_obs,
                             const Eigen::MatrixXd& actions, const Eigen::VectorXd& log_prob_old,
                             const Eigen::VectorXd& advantages, const TrpoConfig& config) {
    if (norm_obs.rows() == 0) throw std::invalid_argument("empty batch");
    UpdateDiagnostics diag;

    const Eigen::VectorXd g =
        policy.weightedScoreGradient(norm_obs, actions, advantages);
    if (!g.allFinite()) throw std::runtime_error("non-finite policy gradient");
    diag.grad_norm = g.norm();
    diag.surrogate_before = surrogate(policy, norm_obs, actions, log_prob_old, advantages);
    diag.surrogate_after = diag.surrogate_before;
    if (diag.grad_norm < 1e-12) return diag;  // zero advantages: nothing to do

    auto fvp = [&](const Eigen::VectorXd& v) {
        return policy.fisherVectorProduct(norm_obs, v, config.cg_damping);
    };
    const Eigen::VectorXd direction =
        conjugateGradient(fvp, g, config.cg_iterations, config.cg_residual_tol,
                          &diag.cg_residual);

    const double dhd = direction.dot(fvp(direction));
    if (dhd <= 0.0) return diag;
    const double beta = std::sqrt(2.0 * config.max_kl / dhd);

    const GaussianPolicy old_policy = policy;
    const Eigen::VectorXd theta_old = policy.flatten();
    double scale = beta;
    for (int k = 0; k <= config.max_backtracks; ++k, scale *= config.backtrack_ratio) {
        policy.unflatten(theta_old + scale * direction);
        const double surr = surrogate(policy, norm_obs, actions, log_prob_old, advantages);
        const double kl = GaussianPolicy::meanKl(old_policy, policy, norm_obs);
        if (std::isfinite(surr) && std::isfinite(kl) && surr > diag.surrogate_before &&
            kl <= config.max_kl) {
            diag.accepted = true;
            diag.backtracks = k;
            diag.surrogate_after = surr;
            diag.mean_kl = kl;
            return diag;
        }
    }
    policy.unflatten(theta_old);  // no acceptable candidate
    return diag;
}

TrainResult train(const std::vector<PreGrasp>& train_set, const EpisodeConfig& episode,
                  const TrpoConfig& config, const std::string& metrics_csv_path,
                  const std::function<void(int, const TrainResult&)>& checkpoint_sink,
                  const std::function<void(const IterationStats&)>& progress,
                  const TrainResult* resume) {
    if (train_set.empty()) throw std::invalid_argument("empty train set");

    std::vector<Env> envs;
    envs.reserve(train_set.size());
    for (const PreGrasp& pg : train_set) {
        EpisodeConfig ec = episode;
        ec.noise.seed = config.seed ^ (0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(pg.id));
        envs.emplace_back(pg, ec);
    }

    const int obs_dim = envs.front().observationDim();
    std::mt19937_64 rng(config.seed);

    TrainResult result;
    int start_iteration = 0;
    if (resume) {
        if (resume->policy.meanNet().spec().input_dim != obs_dim)
            throw std::invalid_argument(
                "resume checkpoint dimension does not match the environment observation");
        result = *resume;
        start_iteration = resume->iterations_run;
    } else {
        MlpSpec pi_spec{obs_dim, {64, 64, 64}, 4};
        MlpSpec v_spec{obs_dim, {64, 64, 64}, 1};
        result.policy = GaussianPolicy(pi_spec, config.log_std_init);
        result.policy.initialize(rng);
        result.value = ValueFunction(v_spec);
        result.value.initialize(rng);
        result.norm = RunningNorm(obs_dim);
        result.norm.enabled = config.normalize_observations;
    }

    std::ofstream csv;
    if (!metrics_csv_path.empty()) {
        csv.open(metrics_csv_path);
        if (!csv) throw std::runtime_error("cannot open metrics file: " + metrics_csv_path);
        csv << "iteration,timesteps,mean_return,success_rate,mean_kl,surrogate_improvement,"
               "cg_residual\n";
    }

    if (checkpoint_sink) checkpoint_sink(start_iteration, result);

    long long total_steps = 0;
    const int last = start_iteration + config.iterations;
    for (int it = start_iteration + 1; it <= last; ++it) {
        const TrajectoryBatch batch = collectBatch(result.policy, result.norm, envs,
                                                   config.batch_timesteps, config.gamma, rng);
        total_steps += batch.timesteps();

        const Eigen::MatrixXd norm_obs = result.norm.normalize(batch.observations);
        const Eigen::VectorXd advantages = computeAdvantages(batch, result.value, result.norm);
        const UpdateDiagnostics diag = trpoUpdate(result.policy, norm_obs, batch.actions,
                                                  batch.log_prob_old, advantages, config);
        result.value.fit(norm_obs, batch.returns, config.value_epochs,
                         config.value_learning_rate);
        // stats update after the optimization step, so the batch that produced
        // the gradients was scored with the stats it was collected under
        result.norm.update(batch.observations);

        result.final_success_rate = batch.successRate();
        if (csv.is_open()) {
            csv << it << ',' << total_steps << ',' << std::setprecision(17)
                << batch.meanEpisodeReward() << ',' << batch.successRate() << ','
                << diag.mean_kl << ',' << (diag.surrogate_after - diag.surrogate_before) << ','
                << diag.cg_residual << '\n';
        }
        if (progress) {
            IterationStats st;
            st.iteration = it;
            st.timesteps = batch.timesteps();
            st.mean_return = batch.meanEpisodeReward();
            st.success_rate = batch.successRate();
            st.mean_std = result.policy.logStd().array().exp().mean();
            st.update = diag;
            progress(st);
        }
        if (checkpoint_sink && config.checkpoint_every > 0 &&
            (it % config.checkpoint_every == 0 || it == last))
            checkpoint_sink(it, result);
        result.iterations_run = it;
    }
    return result;
}

}  // namespace grasp2d
