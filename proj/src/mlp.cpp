#include "grasp2d/mlp.hpp"

#include <stdexcept>

namespace grasp2d {

Mlp::Mlp(const MlpSpec& spec) : spec_(spec) {
    if (spec.input_dim <= 0 || spec.output_dim <= 0)
        throw std::invalid_argument("network dimensions must be positive");
    const auto dims = layerDims();
    param_count_ = 0;
    for (size_t l = 0; l + 1 < dims.size(); ++l) {
        weights_.emplace_back(Eigen::MatrixXd::Zero(dims[l + 1], dims[l]));
        biases_.emplace_back(Eigen::VectorXd::Zero(dims[l + 1]));
        param_count_ += dims[l + 1] * (dims[l] + 1);
    }
}

std::vector<int> Mlp::layerDims() const {
    std::vector<int> dims;
    dims.push_back(spec_.input_dim);
    for (int h : spec_.hidden) dims.push_back(h);
    dims.push_back(spec_.output_dim);
    return dims;
}

Eigen::VectorXd Mlp::flatten() const {
    Eigen::VectorXd out(param_count_);
    int at = 0;
    for (size_t l = 0; l < weights_.size(); ++l) {
        const auto& w = weights_[l];
        for (int i = 0; i < w.rows(); ++i)
            for (int j = 0; j < w.cols(); ++j) out[at++] = w(i, j);
        for (int i = 0; i < biases_[l].size(); ++i) out[at++] = biases_[l][i];
    }
    return out;
}

void Mlp::unflatten(const Eigen::VectorXd& params) {
    if (params.size() != param_count_) throw std::invalid_argument("parameter size mismatch");
    int at = 0;
    for (size_t l = 0; l < weights_.size(); ++l) {
        auto& w = weights_[l];
        for (int i = 0; i < w.rows(); ++i)
            for (int j = 0; j < w.cols(); ++j) w(i, j) = params[at++];
        for (int i = 0; i < biases_[l].size(); ++i) biases_[l][i] = params[at++];
    }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x) const {
    if (x.cols() != spec_.input_dim) throw std::invalid_argument("input dimension mismatch");
    Eigen::MatrixXd h = x;
    for (size_t l = 0; l < weights_.size(); ++l) {
        Eigen::MatrixXd z = h * weights_[l].transpose();
        z.rowwise() += biases_[l].transpose();
        h = (l + 1 < weights_.size()) ? z.array().tanh().matrix() : z;
    }
    return h;
}

Eigen::VectorXd Mlp::paramGradient(const Eigen::MatrixXd& x, const Eigen::MatrixXd& dy) const {
    // forward with cached activations
    std::vector<Eigen::MatrixXd> acts;  // acts[l] is the input to layer l
    acts.reserve(weights_.size() + 1);
    acts.push_back(x);
    for (size_t l = 0; l < weights_.size(); ++l) {
        Eigen::MatrixXd z = acts.back() * weights_[l].transpose();
        z.rowwise() += biases_[l].transpose();
        acts.push_back(l + 1 < weights_.size() ? z.array().tanh().matrix() : z);
    }

    std::vector<Eigen::MatrixXd> grad_w(weights_.size());
    std::vector<Eigen::VectorXd> grad_b(weights_.size());
    Eigen::MatrixXd dz = dy;
    for (size_t l = weights_.size(); l-- > 0;) {
        if (l + 1 < weights_.size()) {
            const Eigen::MatrixXd& h = acts[l + 1];
            dz = (dz.array() * (1.0 - h.array().square())).matrix();
        }
        grad_w[l] = dz.transpose() * acts[l];
        grad_b[l] = dz.colwise().sum();
        if (l > 0) dz = dz * weights_[l];
    }

    Eigen::VectorXd out(param_count_);
    int at = 0;
    for (size_t l = 0; l < weights_.size(); ++l) {
        for (int i = 0; i < grad_w[l].rows(); ++i)
            for (int j = 0; j < grad_w[l].cols(); ++j) out[at++] = grad_w[l](i, j);
        for (int i = 0; i < grad_b[l].size(); ++i) out[at++] = grad_b[l][i];
    }
    return out;
}

Eigen::MatrixXd Mlp::jvp(const Eigen::MatrixXd& x, const Eigen::VectorXd& v) const {
    if (v.size() != param_count_) throw std::invalid_argument("tangent size mismatch");
    // unpack the tangent with the flatten layout
    std::vector<Eigen::MatrixXd> dw(weights_.size());
    std::vector<Eigen::VectorXd> db(weights_.size());
    int at = 0;
    for (size_t l = 0; l < weights_.size(); ++l) {
        dw[l].resize(weights_[l].rows(), weights_[l].cols());
        for (int i = 0; i < dw[l].rows(); ++i)
            for (int j = 0; j < dw[l].cols(); ++j) dw[l](i, j) = v[at++];
        db[l].resize(biases_[l].size());
        for (int i = 0; i < db[l].size(); ++i) db[l][i] = v[at++];
    }

    Eigen::MatrixXd h = x;
    Eigen::MatrixXd dh = Eigen::MatrixXd::Zero(x.rows(), x.cols());
    for (size_t l = 0; l < weights_.size(); ++l) {
        Eigen::MatrixXd z = h * weights_[l].transpose();
        z.rowwise() += biases_[l].transpose();
        Eigen::MatrixXd dz = h * dw[l].transpose() + dh * weights_[l].transpose();
        dz.rowwise() += db[l].transpose();
        if (l + 1 < weights_.size()) {
            const Eigen::MatrixXd t = z.array().tanh().matrix();
            dh = ((1.0 - t.array().square()) * dz.array()).matrix();
            h = t;
        } else {
            h = z;
            dh = dz;
        }
    }
    return dh;
}

void Mlp::initialize(std::mt19937_64& rng, double final_gain) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (size_t l = 0; l < weights_.size(); ++l) {
        Eigen::MatrixXd a(weights_[l].rows(), weights_[l].cols());
        for (int i = 0; i < a.rows(); ++i)
            for (int j = 0; j < a.cols(); ++j) a(i, j) = gauss(rng);
        // orthogonal rows/columns via thin QR with sign-fixed R diagonal
        const bool tall = a.rows() >= a.cols();
        const Eigen::MatrixXd m = tall ? a : Eigen::MatrixXd(a.transpose());
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
        Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols());
        const Eigen::MatrixXd r = qr.matrixQR().topRows(m.cols()).triangularView<Eigen::Upper>();
        for (int j = 0; j < q.cols(); ++j)
            if (r(j, j) < 0.0) q.col(j) *= -1.0;
        weights_[l] = tall ? q : Eigen::MatrixXd(q.transpose());
        const double gain = (l + 1 == weights_.size()) ? final_gain : 1.0;
        weights_[l] *= gain;
        biases_[l].setZero();
    }
}

void RunningNorm::update(const Eigen::MatrixXd& rows) {
    for (int i = 0; i < rows.rows(); ++i) {
        count += 1.0;
        const Eigen::VectorXd x = rows.row(i).transpose();
        const Eigen::VectorXd delta = x - mean;
        mean += delta / count;
        m2 += delta.cwiseProduct(x - mean);
    }
}

Eigen::VectorXd RunningNorm::std() const {
    if (count < 2.0) return Eigen::VectorXd::Ones(mean.size());
    return (m2 / count).cwiseMax(1e-8).cwiseSqrt();
}

Eigen::MatrixXd RunningNorm::normalize(const Eigen::MatrixXd& rows) const {
    if (!enabled || count < 2.0) return rows;
    const Eigen::VectorXd s = std();
    Eigen::MatrixXd out = rows;
    out.rowwise() -= mean.transpose();
    out.array().rowwise() /= s.transpose().array();
    return out.cwiseMax(-clip).cwiseMin(clip);
}

}  // namespace grasp2d
