#pragma once

#include "grasp2d/mlp.hpp"

namespace grasp2d {

// Diagonal-Gaussian policy: MLP mean, state-independent log standard
// deviations. The flat parameter vector is [mlp params, log_std].
class GaussianPolicy {
  public:
    GaussianPolicy() = default;
    GaussianPolicy(const MlpSpec& spec, double log_std_init);

    int actionDim() const { return mean_.spec().output_dim; }
    int paramCount() const { return mean_.paramCount() + static_cast<int>(log_std_.size()); }

    Eigen::VectorXd flatten() const;
    void unflatten(const Eigen::VectorXd& params);
    const Eigen::VectorXd& logStd() const { return log_std_; }
    const Mlp& meanNet() const { return mean_; }
    Mlp& meanNet() { return mean_; }

    Eigen::MatrixXd meanActions(const Eigen::MatrixXd& obs) const { return mean_.forward(obs); }

    // a = mean + exp(log_std) * z
    Eigen::VectorXd sampleAction(const Eigen::VectorXd& obs, std::mt19937_64& rng,
                                 double* log_prob = nullptr) const;

    Eigen::VectorXd logProb(const Eigen::MatrixXd& obs, const Eigen::MatrixXd& actions) const;
    double logProbOf(const Eigen::VectorXd& obs, const Eigen::VectorXd& action) const;

    // exact gradient of log pi(a|s) w.r.t. the flat parameters
    Eigen::VectorXd gradLogProb(const Eigen::VectorXd& obs, const Eigen::VectorXd& action) const;

    // gradient of (1/N) sum_i coeff_i * log pi(a_i|s_i)
    Eigen::VectorXd weightedScoreGradient(const Eigen::MatrixXd& obs,
                                          const Eigen::MatrixXd& actions,
                                          const Eigen::VectorXd& coeffs) const;

    // mean over the batch of KL(pi_old || pi_new)
    static double meanKl(const GaussianPolicy& old_policy, const GaussianPolicy& new_policy,
                         const Eigen::MatrixXd& obs);

    // (Fisher of the mean KL at the current parameters) * v + damping * v,
    // via the exact Gaussian closed form
    Eigen::VectorXd fisherVectorProduct(const Eigen::MatrixXd& obs, const Eigen::VectorXd& v,
                                        double damping) const;

    void initialize(std::mt19937_64& rng) { mean_.initialize(rng, 0.01); }

  private:
    Mlp mean_;
    Eigen::VectorXd log_std_;
};

// MLP state-value baseline fitted to empirical returns
class ValueFunction {
  public:
    ValueFunction() = default;
    explicit ValueFunction(const MlpSpec& spec);

    const Mlp& net() const { return net_; }
    Mlp& net() { return net_; }

    Eigen::VectorXd predict(const Eigen::MatrixXd& obs) const;

    // full-batch Adam on MSE; keeps the best parameters seen, so the
    // returned fit never has higher MSE than the initial one
    double fit(const Eigen::MatrixXd& obs, const Eigen::VectorXd& targets, int epochs,
               double learning_rate);

    void initialize(std::mt19937_64& rng) { net_.initialize(rng, 1.0); }

  private:
    Mlp net_;
};

}  // namespace grasp2d
