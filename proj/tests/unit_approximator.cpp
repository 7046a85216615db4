#include <doctest.h>

#include <random>

#include "grasp2d/math2d.hpp"
#include "grasp2d/policy.hpp"

using namespace grasp2d;

namespace {

Eigen::MatrixXd randomBatch(int n, int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd x(n, dim);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < dim; ++j) x(i, j) = g(rng);
    return x;
}

}  // namespace

TEST_CASE("flatten and unflatten round-trip") {
    std::mt19937_64 rng(1);
    Mlp net(MlpSpec{3, {5, 4}, 2});
    net.initialize(rng, 0.7);
    const Eigen::VectorXd theta = net.flatten();
    Mlp other(MlpSpec{3, {5, 4}, 2});
    other.unflatten(theta);
    const Eigen::MatrixXd x = randomBatch(6, 3, rng);
    CHECK((net.forward(x) - other.forward(x)).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS(other.unflatten(theta.head(theta.size() - 1)));
}

TEST_CASE("parameter gradient matches central finite differences") {
    std::mt19937_64 rng(2);
    Mlp net(MlpSpec{4, {8, 6}, 3});
    net.initialize(rng, 1.0);
    const Eigen::MatrixXd x = randomBatch(5, 4, rng);
    const Eigen::MatrixXd dy = randomBatch(5, 3, rng);
    const Eigen::VectorXd grad = net.paramGradient(x, dy);
    const Eigen::VectorXd theta = net.flatten();
    const double eps = 1e-6;
    std::uniform_int_distribution<int> pick(0, static_cast<int>(theta.size()) - 1);
    for (int t = 0; t < 60; ++t) {
        const int i = pick(rng);
        Eigen::VectorXd tp = theta, tm = theta;
        tp[i] += eps;
        tm[i] -= eps;
        net.unflatten(tp);
        const double fp = (net.forward(x).array() * dy.array()).sum();
        net.unflatten(tm);
        const double fm = (net.forward(x).array() * dy.array()).sum();
        const double fd = (fp - fm) / (2.0 * eps);
        CHECK(grad[i] == doctest::Approx(fd).epsilon(1e-4).scale(std::abs(fd) + 1.0));
    }
    net.unflatten(theta);
}

TEST_CASE("jvp matches directional finite differences") {
    std::mt19937_64 rng(3);
    Mlp net(MlpSpec{3, {6, 6}, 2});
    net.initialize(rng, 1.0);
    const Eigen::MatrixXd x = randomBatch(4, 3, rng);
    const Eigen::VectorXd theta = net.flatten();
    std::normal_distribution<double> g(0.0, 1.0);
    for (int t = 0; t < 10; ++t) {
        Eigen::VectorXd v(theta.size());
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = g(rng);
        const Eigen::MatrixXd jv = net.jvp(x, v);
        const double eps = 1e-7;
        net.unflatten(theta + eps * v);
        const Eigen::MatrixXd yp = net.forward(x);
        net.unflatten(theta - eps * v);
        const Eigen::MatrixXd ym = net.forward(x);
        net.unflatten(theta);
        const Eigen::MatrixXd fd = (yp - ym) / (2.0 * eps);
        CHECK((jv - fd).cwiseAbs().maxCoeff() < 1e-5 * (1.0 + fd.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("orthogonal initialization produces orthonormal rows or columns") {
    std::mt19937_64 rng(4);
    Mlp net(MlpSpec{16, {64}, 4});
    net.initialize(rng, 0.01);
    // reconstruct the first weight matrix from the flat vector (row-major W, then b)
    const Eigen::VectorXd theta = net.flatten();
    Eigen::MatrixXd w1(64, 16);
    for (int r = 0; r < 64; ++r)
        for (int c = 0; c < 16; ++c) w1(r, c) = theta[r * 16 + c];
    const Eigen::MatrixXd gram = w1.transpose() * w1;  // tall: columns orthonormal
    CHECK((gram - Eigen::MatrixXd::Identity(16, 16)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("gaussian log probability matches the closed form") {
    std::mt19937_64 rng(5);
    GaussianPolicy policy(MlpSpec{3, {8}, 2}, 0.22);
    policy.initialize(rng);
    const Eigen::MatrixXd obs = randomBatch(7, 3, rng);
    const Eigen::MatrixXd mean = policy.meanActions(obs);
    const Eigen::MatrixXd actions = randomBatch(7, 2, rng);
    const Eigen::VectorXd lp = policy.logProb(obs, actions);
    for (int i = 0; i < 7; ++i) {
        double expected = 0.0;
        for (int j = 0; j < 2; ++j) {
            const double sigma = std::exp(policy.logStd()[j]);
            const double z = (actions(i, j) - mean(i, j)) / sigma;
            expected += -0.5 * z * z - std::log(sigma) - 0.5 * std::log(2.0 * kPi);
        }
        CHECK(lp[i] == doctest::Approx(expected).epsilon(1e-12));
        CHECK(policy.logProbOf(obs.row(i).transpose(), actions.row(i).transpose()) ==
              doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("grad log prob matches central finite differences") {
    std::mt19937_64 rng(6);
    GaussianPolicy policy(MlpSpec{4, {6, 5}, 3}, 0.1);
    policy.initialize(rng);
    const Eigen::VectorXd theta = policy.flatten();
    std::uniform_int_distribution<int> pick(0, static_cast<int>(theta.size()) - 1);
    for (int inst = 0; inst < 50; ++inst) {
        const Eigen::VectorXd obs = randomBatch(1, 4, rng).row(0).transpose();
        const Eigen::VectorXd act = randomBatch(1, 3, rng).row(0).transpose();
        const Eigen::VectorXd grad = policy.gradLogProb(obs, act);
        const double eps = 1e-6;
        for (int t = 0; t < 4; ++t) {
            const int i = pick(rng);
            Eigen::VectorXd tp = theta, tm = theta;
            tp[i] += eps;
            tm[i] -= eps;
            policy.unflatten(tp);
            const double fp = policy.logProbOf(obs, act);
            policy.unflatten(tm);
            const double fm = policy.logProbOf(obs, act);
            policy.unflatten(theta);
            const double fd = (fp - fm) / (2.0 * eps);
            const double rel = std::abs(grad[i] - fd) / std::max(1e-8, std::abs(fd));
            if (std::abs(fd) > 1e-6) CHECK(rel < 1e-4);
        }
    }
}

TEST_CASE("fisher-vector product matches the explicit Fisher on a small network") {
    std::mt19937_64 rng(7);
    GaussianPolicy policy(MlpSpec{2, {4}, 2}, 0.0);  // 2*4+4 + 4*2+2 + 2 = 24 params
    policy.initialize(rng);
    const int n_params = policy.paramCount();
    REQUIRE(n_params <= 200);
    const Eigen::MatrixXd obs = randomBatch(40, 2, rng);

    // explicit Fisher: E[grad grad^T] over actions; for the Gaussian the
    // closed form is J^T Sigma^-1 J averaged over the batch plus the
    // diagonal 2I block for the log-std parameters
    Eigen::MatrixXd fisher = Eigen::MatrixXd::Zero(n_params, n_params);
    const int mlp_params = n_params - 2;
    for (int i = 0; i < obs.rows(); ++i) {
        Eigen::MatrixXd jac(2, mlp_params);  // d mean / d mlp params
        for (int p = 0; p < mlp_params; ++p) {
            Eigen::VectorXd v = Eigen::VectorXd::Zero(mlp_params);
            v[p] = 1.0;
            jac.col(p) = policy.meanNet().jvp(obs.row(i), v).row(0).transpose();
        }
        Eigen::Matrix2d sigma_inv = Eigen::Matrix2d::Zero();
        sigma_inv(0, 0) = std::exp(-2.0 * policy.logStd()[0]);
        sigma_inv(1, 1) = std::exp(-2.0 * policy.logStd()[1]);
        fisher.topLeftCorner(mlp_params, mlp_params) += jac.transpose() * sigma_inv * jac;
    }
    fisher.topLeftCorner(mlp_params, mlp_params) /= static_cast<double>(obs.rows());
    fisher(mlp_params, mlp_params) = 2.0;
    fisher(mlp_params + 1, mlp_params + 1) = 2.0;

    std::normal_distribution<double> g(0.0, 1.0);
    for (int t = 0; t < 10; ++t) {
        Eigen::VectorXd v(n_params);
        for (int i = 0; i < n_params; ++i) v[i] = g(rng);
        const Eigen::VectorXd fv = policy.fisherVectorProduct(obs, v, 0.0);
        const Eigen::VectorXd expected = fisher * v;
        CHECK((fv - expected).norm() / std::max(1e-12, expected.norm()) < 1e-3);
    }

    // symmetry and positive semidefiniteness
    for (int t = 0; t < 20; ++t) {
        Eigen::VectorXd u(n_params), v(n_params);
        for (int i = 0; i < n_params; ++i) {
            u[i] = g(rng);
            v[i] = g(rng);
        }
        const double uv = u.dot(policy.fisherVectorProduct(obs, v, 0.0));
        const double vu = v.dot(policy.fisherVectorProduct(obs, u, 0.0));
        CHECK(std::abs(uv - vu) < 1e-8);
        CHECK(v.dot(policy.fisherVectorProduct(obs, v, 0.0)) >= -1e-8);
    }
}

TEST_CASE("mean KL is zero at equal parameters and grows with perturbation") {
    std::mt19937_64 rng(8);
    GaussianPolicy policy(MlpSpec{3, {6}, 2}, 0.1);
    policy.initialize(rng);
    const Eigen::MatrixXd obs = randomBatch(10, 3, rng);
    CHECK(GaussianPolicy::meanKl(policy, policy, obs) == doctest::Approx(0.0));
    GaussianPolicy other = policy;
    Eigen::VectorXd theta = policy.flatten();
    theta.array() += 0.01;
    other.unflatten(theta);
    CHECK(GaussianPolicy::meanKl(policy, other, obs) > 0.0);
    CHECK_THROWS(GaussianPolicy::meanKl(policy, other, Eigen::MatrixXd(0, 3)));
}

TEST_CASE("sampled actions have the right distribution moments") {
    std::mt19937_64 rng(9);
    GaussianPolicy policy(MlpSpec{2, {4}, 2}, 0.22);
    policy.initialize(rng);
    const Eigen::VectorXd obs = Eigen::VectorXd::Constant(2, 0.3);
    const Eigen::VectorXd mean = policy.meanActions(obs.transpose()).row(0).transpose();
    const int n = 20000;
    Eigen::Vector2d acc = Eigen::Vector2d::Zero(), acc2 = Eigen::Vector2d::Zero();
    for (int i = 0; i < n; ++i) {
        double lp = 0.0;
        const Eigen::VectorXd a = policy.sampleAction(obs, rng, &lp);
        CHECK(lp == doctest::Approx(policy.logProbOf(obs, a)).epsilon(1e-10));
        acc += a;
        acc2 += a.cwiseProduct(a);
    }
    const Eigen::Vector2d emp_mean = acc / n;
    const Eigen::Vector2d emp_var = acc2 / n - emp_mean.cwiseProduct(emp_mean);
    const double sigma2 = std::exp(2.0 * 0.22);
    for (int j = 0; j < 2; ++j) {
        CHECK(std::abs(emp_mean[j] - mean[j]) < 0.03);
        CHECK(emp_var[j] == doctest::Approx(sigma2).epsilon(0.05));
    }
}

TEST_CASE("value fit never increases the mean squared error") {
    std::mt19937_64 rng(10);
    ValueFunction value(MlpSpec{3, {16, 16}, 1});
    value.initialize(rng);
    const Eigen::MatrixXd obs = randomBatch(200, 3, rng);
    const Eigen::VectorXd targets =
        obs.col(0).array() * 2.0 - obs.col(1).array().square() + 0.3;
    const double before = (value.predict(obs) - targets).squaredNorm() / 200.0;
    const double after_mse = value.fit(obs, targets, 50, 1e-2);
    CHECK(after_mse <= before + 1e-12);
    const double recomputed = (value.predict(obs) - targets).squaredNorm() / 200.0;
    CHECK(recomputed == doctest::Approx(after_mse).epsilon(1e-9));
    CHECK(after_mse < 0.9 * before);  // it actually learns something
}

TEST_CASE("value-fit gradient path matches finite differences") {
    // the fit uses paramGradient with dy = 2(yhat - y)/N; verify the loss
    // gradient it implies against central differences
    std::mt19937_64 rng(11);
    ValueFunction value(MlpSpec{2, {5}, 1});
    value.initialize(rng);
    const Eigen::MatrixXd obs = randomBatch(10, 2, rng);
    const Eigen::VectorXd targets = randomBatch(10, 1, rng).col(0);
    Mlp& net = value.net();
    const Eigen::VectorXd theta = net.flatten();
    const Eigen::VectorXd resid = value.predict(obs) - targets;
    const Eigen::MatrixXd dy = 2.0 * resid / 10.0;
    const Eigen::VectorXd grad = net.paramGradient(obs, dy);
    const double eps = 1e-6;
    std::uniform_int_distribution<int> pick(0, static_cast<int>(theta.size()) - 1);
    for (int t = 0; t < 50; ++t) {
        const int i = pick(rng);
        Eigen::VectorXd tp = theta, tm = theta;
        tp[i] += eps;
        tm[i] -= eps;
        net.unflatten(tp);
        const double fp = (value.predict(obs) - targets).squaredNorm() / 10.0;
        net.unflatten(tm);
        const double fm = (value.predict(obs) - targets).squaredNorm() / 10.0;
        net.unflatten(theta);
        const double fd = (fp - fm) / (2.0 * eps);
        CHECK(grad[i] == doctest::Approx(fd).epsilon(1e-4).scale(std::abs(fd) + 1e-3));
    }
}

TEST_CASE("running normalization converges to batch statistics and clips") {
    std::mt19937_64 rng(12);
    RunningNorm norm(3);
    Eigen::MatrixXd data = randomBatch(5000, 3, rng);
    data.col(1) *= 4.0;
    data.col(2).array() += 10.0;
    norm.update(data.topRows(2500));
    norm.update(data.bottomRows(2500));
    const Eigen::VectorXd mean = data.colwise().mean();
    for (int j = 0; j < 3; ++j) CHECK(norm.mean[j] == doctest::Approx(mean[j]).epsilon(1e-9));
    const Eigen::MatrixXd normalized = norm.normalize(data);
    CHECK(std::abs(normalized.col(2).mean()) < 1e-9);
    CHECK(normalized.cwiseAbs().maxCoeff() <= 10.0);

    Eigen::MatrixXd outlier = Eigen::MatrixXd::Constant(1, 3, 1e6);
    CHECK(norm.normalize(outlier).cwiseAbs().maxCoeff() == 10.0);

    RunningNorm disabled(3);
    disabled.enabled = false;
    CHECK((disabled.normalize(data) - data).cwiseAbs().maxCoeff() == 0.0);
}
