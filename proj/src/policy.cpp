#include "grasp2d/policy.hpp"

#include <stdexcept>

namespace grasp2d {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

GaussianPolicy::GaussianPolicy(const MlpSpec& spec, double log_std_init)
    : mean_(spec), log_std_(Eigen::VectorXd::Constant(spec.output_dim, log_std_init)) {}

Eigen::VectorXd GaussianPolicy::flatten() const {
    Eigen::VectorXd out(paramCount());
    out.head(mean_.paramCount()) = mean_.flatten();
    out.tail(log_std_.size()) = log_std_;
    return out;
}

void GaussianPolicy::unflatten(const Eigen::VectorXd& params) {
    if (params.size() != paramCount()) throw std::invalid_argument("parameter size mismatch");
    mean_.unflatten(params.head(mean_.paramCount()));
    log_std_ = params.tail(log_std_.size());
}

Eigen::VectorXd GaussianPolicy::sampleAction(const Eigen::VectorXd& obs, std::mt19937_64& rng,
                                             double* log_prob) const {
    const Eigen::VectorXd mu = mean_.forward(obs.transpose()).row(0).transpose();
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd a(actionDim());
    for (int i = 0; i < actionDim(); ++i) a[i] = mu[i] + std::exp(log_std_[i]) * gauss(rng);
    if (log_prob) *log_prob = logProbOf(obs, a);
    return a;
}

Eigen::VectorXd GaussianPolicy::logProb(const Eigen::MatrixXd& obs,
                                        const Eigen::MatrixXd& actions) const {
    const Eigen::MatrixXd mu = mean_.forward(obs);
    const Eigen::ArrayXd inv_var = (-2.0 * log_std_.array()).exp();
    const Eigen::ArrayXXd diff = (actions - mu).array();
    Eigen::VectorXd out(obs.rows());
    const double log_det = log_std_.sum();
    for (int i = 0; i < obs.rows(); ++i) {
        const double quad = (diff.row(i).square() * inv_var.transpose()).sum();
        out[i] = -0.5 * quad - log_det - 0.5 * kLog2Pi * static_cast<double>(actionDim());
    }
    return out;
}

double GaussianPolicy::logProbOf(const Eigen::VectorXd& obs, const Eigen::VectorXd& action) const {
    return logProb(obs.transpose(), action.transpose())[0];
}

Eigen::VectorXd GaussianPolicy::weightedScoreGradient(const Eigen::MatrixXd& obs,
                                                      const Eigen::MatrixXd& actions,
                                                      const Eigen::VectorXd& coeffs) const {
    const double n = static_cast<double>(obs.rows());
    const Eigen::MatrixXd mu = mean_.forward(obs);
    const Eigen::ArrayXd inv_var = (-2.0 * log_std_.array()).exp();
    // d logpi / d mu = (a - mu) / sigma^2, weighted per sample
    Eigen::MatrixXd dmu = (actions - mu).array().rowwise() * inv_var.transpose().array();
    dmu.array().colwise() *= coeffs.array() / n;

    Eigen::VectorXd grad(paramCount());
    grad.head(mean_.paramCount()) = mean_.paramGradient(obs, dmu);
    // d logpi / d log_std_j = (a_j - mu_j)^2 / sigma_j^2 - 1
    const Eigen::ArrayXXd z2 =
        (actions - mu).array().square().rowwise() * inv_var.transpose().array();
    grad.tail(log_std_.size()) =
        ((z2.colwise() * coeffs.array()).colwise().sum() / n -
         (coeffs.sum() / n) * Eigen::ArrayXd::Ones(log_std_.size()).transpose())
            .transpose()
            .matrix();
    return grad;
}

Eigen::VectorXd GaussianPolicy::gradLogProb(const Eigen::VectorXd& obs,
                                            const Eigen::VectorXd& action) const {
    return weightedScoreGradient(obs.transpose(), action.transpose(), Eigen::VectorXd::Ones(1));
}

double GaussianPolicy::meanKl(const GaussianPolicy& p_old, const GaussianPolicy& p_new,
                              const Eigen::MatrixXd& obs) {
    if (obs.rows() == 0) throw std::invalid_argument("empty observation batch");
    const Eigen::MatrixXd mu_old = p_old.mean_.forward(obs);
    const Eigen::MatrixXd mu_new = p_new.mean_.forward(obs);
    const Eigen::ArrayXd var_old = (2.0 * p_old.log_std_.array()).exp();
    const Eigen::ArrayXd inv_var_new = (-2.0 * p_new.log_std_.array()).exp();
    const double log_det_term = (p_new.log_std_ - p_old.log_std_).sum();
    double acc = 0.0;
    for (int i = 0; i < obs.rows(); ++i) {
        const Eigen::ArrayXd d2 = (mu_old.row(i) - mu_new.row(i)).array().square().transpose();
        acc += log_det_term + 0.5 * ((var_old + d2) * inv_var_new).sum() -
               0.5 * static_cast<double>(p_old.actionDim());
    }
    return acc / static_cast<double>(obs.rows());
}

Eigen::VectorXd GaussianPolicy::fisherVectorProduct(const Eigen::MatrixXd& obs,
                                                    const Eigen::VectorXd& v,
                                                    double damping) const {
    if (v.size() != paramCount()) throw std::invalid_argument("vector size mismatch");
    const double n = static_cast<double>(obs.rows());
    const Eigen::VectorXd v_mean = v.head(mean_.paramCount());
    const Eigen::ArrayXd inv_var = (-2.0 * log_std_.array()).exp();

    // mean block: (1/N) J^T diag(1/sigma^2) J v
    const Eigen::MatrixXd ju = mean_.jvp(obs, v_mean);
    const Eigen::MatrixXd weighted =
        (ju.array().rowwise() * inv_var.transpose().array()).matrix() / n;
    Eigen::VectorXd out(paramCount());
    out.head(mean_.paramCount()) = mean_.paramGradient(obs, weighted);
    // log_std block of the Gaussian KL Hessian is 2*I
    out.tail(log_std_.size()) = 2.0 * v.tail(log_std_.size());
    return out + damping * v;
}

ValueFunction::ValueFunction(const MlpSpec& spec) : net_(spec) {
    if (spec.output_dim != 1) throw std::invalid_argument("value network must have output_dim 1");
}

Eigen::VectorXd ValueFunction::predict(const Eigen::MatrixXd& obs) const {
    return net_.forward(obs).col(0);
}

double ValueFunction::fit(const Eigen::MatrixXd& obs, const Eigen::VectorXd& targets, int epochs,
                          double learning_rate) {
    const double n = static_cast<double>(obs.rows());
    auto mse = [&](const Eigen::VectorXd& pred) { return (pred - targets).squaredNorm() / n; };

    Eigen::VectorXd params = net_.flatten();
    Eigen::VectorXd best_params = params;
    double best_mse = mse(predict(obs));

    Eigen::VectorXd m = Eigen::VectorXd::Zero(params.size());
    Eigen::VectorXd s = Eigen::VectorXd::Zero(params.size());
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    for (int epoch = 1; epoch <= epochs; ++epoch) {
        const Eigen::VectorXd pred = predict(obs);
        const double cur = mse(pred);
        if (!std::isfinite(cur)) throw std::runtime_error("value fit diverged");
        if (cur < best_mse) {
            best_mse = cur;
            best_params = params;
        }
        const Eigen::MatrixXd dy = (2.0 / n) * (pred - targets);
        const Eigen::VectorXd grad = net_.paramGradient(obs, dy);
        m = b1 * m + (1.0 - b1) * grad;
        s = b2 * s + (1.0 - b2) * grad.cwiseProduct(grad);
        const double corr1 = 1.0 - std::pow(b1, epoch);
        const double corr2 = 1.0 - std::pow(b2, epoch);
        params -= (learning_rate / corr1) *
                  (m.array() / ((s.array() / corr2).sqrt() + eps)).matrix();
        net_.unflatten(params);
    }
    const double final_mse = mse(predict(obs));
    if (final_mse < best_mse) {
        best_mse = final_mse;
    } else {
        net_.unflatten(best_params);
    }
    return best_mse;
}

}  // namespace grasp2d
