#pragma once

#include <Eigen/Dense>
#include <random>
#include <vector>

namespace grasp2d {

struct MlpSpec {
    int input_dim = 0;
    std::vector<int> hidden = {64, 64, 64};
    int output_dim = 0;
};

// Fully connected tanh network with explicit reverse- and forward-mode
// passes over a flat parameter vector. Rows of X are samples.
class Mlp {
  public:
    Mlp() = default;
    explicit Mlp(const MlpSpec& spec);

    const MlpSpec& spec() const { return spec_; }
    int paramCount() const { return param_count_; }

    Eigen::VectorXd flatten() const;
    void unflatten(const Eigen::VectorXd& params);

    Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;

    // gradient of sum_ij dy_ij * y_ij with respect to the flat parameters
    Eigen::VectorXd paramGradient(const Eigen::MatrixXd& x, const Eigen::MatrixXd& dy) const;

    // forward-mode: directional derivative of the outputs along a flat tangent v
    Eigen::MatrixXd jvp(const Eigen::MatrixXd& x, const Eigen::VectorXd& v) const;

    // orthogonal hidden layers; the final layer is scaled by final_gain
    void initialize(std::mt19937_64& rng, double final_gain);

  private:
    std::vector<int> layerDims() const;

    MlpSpec spec_;
    int param_count_ = 0;
    std::vector<Eigen::MatrixXd> weights_;  // out x in
    std::vector<Eigen::VectorXd> biases_;
};

// clipped running mean/std normalization of observations
struct RunningNorm {
    Eigen::VectorXd mean;
    Eigen::VectorXd m2;
    double count = 0.0;
    double clip = 10.0;
    bool enabled = true;

    explicit RunningNorm(int dim = 0)
        : mean(Eigen::VectorXd::Zero(dim)), m2(Eigen::VectorXd::Zero(dim)) {}

    void update(const Eigen::MatrixXd& batch_rows);
    Eigen::VectorXd std() const;
    Eigen::MatrixXd normalize(const Eigen::MatrixXd& rows) const;
};

}  // namespace grasp2d
