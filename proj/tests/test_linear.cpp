#include "mimic/linear.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace mimic;

TEST_CASE("logreg on all-zero labels drives scores below 0.5") {
    Eigen::MatrixXd X(6, 2);
    X << 1, 0, 0, 1, 1, 1, -1, 0, 0, -1, 0.5, 0.5;
    const Eigen::VectorXd y = Eigen::VectorXd::Zero(6);
    const LinearModel m = train_logreg(X, y);
    CHECK(m.weights.norm() < 0.5);
    CHECK(m.bias < 0.0);
    const Eigen::VectorXd s = linear_predict(m, X);
    for (Eigen::Index i = 0; i < s.size(); ++i) CHECK(s(i) < 0.5);
}

TEST_CASE("logreg orients a separable 1-d problem positively") {
    Eigen::MatrixXd X(2, 1);
    X << -1, 1;
    Eigen::VectorXd y(2);
    y << 0, 1;
    LinearConfig cfg;
    cfg.l2 = 0.1;
    const LinearModel m = train_logreg(X, y, cfg);
    CHECK(m.weights(0) > 0.0);
}

TEST_CASE("logreg optimum is independent of the initial point") {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    testutil::separable_binary(60, 3, 17, X, y);
    LinearConfig base;
    base.l2 = 1e-2;
    const LinearModel ref = train_logreg(X, y, base);
    for (std::uint64_t s = 1; s <= 5; ++s) {
        LinearConfig cfg = base;
        cfg.init_scale = 0.5;
        cfg.seed = s;
        const LinearModel m = train_logreg(X, y, cfg);
        Eigen::VectorXd da = m.weights - ref.weights;
        const double dist = std::sqrt(da.squaredNorm() + (m.bias - ref.bias) * (m.bias - ref.bias));
        CHECK(dist < 1e-4);
    }
}

TEST_CASE("logreg loss is non-increasing per accepted iterate") {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    testutil::separable_binary(50, 4, 3, X, y);
    const LinearModel m = train_logreg(X, y);
    REQUIRE(m.loss_history.size() > 1);
    for (std::size_t i = 1; i < m.loss_history.size(); ++i)
        CHECK(m.loss_history[i] <= m.loss_history[i - 1] + 1e-12);
}

TEST_CASE("logreg accepts soft targets in [0,1]") {
    Eigen::MatrixXd X(4, 1);
    X << -2, -1, 1, 2;
    Eigen::VectorXd y(4);
    y << 0.1, 0.3, 0.7, 0.9;
    const LinearModel m = train_logreg(X, y);
    const Eigen::VectorXd s = linear_predict(m, X);
    CHECK(s(0) < s(3)); // monotone in the planted direction
    CHECK(s(0) > 0.0);
    CHECK(s(3) < 1.0);
}

TEST_CASE("logreg reports non-convergence instead of throwing") {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    testutil::separable_binary(50, 4, 3, X, y);
    LinearConfig cfg;
    cfg.max_iters = 2;
    const LinearModel m = train_logreg(X, y, cfg);
    CHECK_FALSE(m.converged);
    CHECK(m.final_grad_norm > cfg.grad_tol);
}

TEST_CASE("linsvm hinge loss vanishes on separable data") {
    Eigen::MatrixXd X(4, 1);
    X << -2, -1, 1, 2;
    Eigen::VectorXd y(4);
    y << 0, 0, 1, 1;
    const LinearModel m = train_linsvm(X, y);
    const Eigen::VectorXd margins = linear_predict(m, X);
    double hinge = 0.0;
    for (int i = 0; i < 4; ++i) {
        const double pm = (y(i) > 0.5 ? 1.0 : -1.0) * margins(i);
        hinge += std::max(0.0, 1.0 - pm);
    }
    CHECK(hinge / 4.0 < 0.2);
    CHECK(margins(0) < 0.0);
    CHECK(margins(3) > 0.0);
}

TEST_CASE("linsvm score ranking is invariant to input scaling") {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    testutil::separable_binary(40, 1, 29, X, y);
    const Eigen::VectorXd s1 = linear_predict(train_linsvm(X, y), X);
    const Eigen::MatrixXd X2 = 2.0 * X;
    const Eigen::VectorXd s2 = linear_predict(train_linsvm(X2, y), X2);
    for (Eigen::Index i = 0; i < s1.size(); ++i)
        for (Eigen::Index j = i + 1; j < s1.size(); ++j)
            if (s1(i) != s1(j)) CHECK((s1(i) < s1(j)) == (s2(i) < s2(j)));
}

TEST_CASE("linsvm on all-positive labels yields positive scores") {
    Eigen::MatrixXd X(3, 2);
    X << 1, 2, 0.5, 1, 2, 0.1;
    const Eigen::VectorXd y = Eigen::VectorXd::Ones(3);
    const Eigen::VectorXd s = linear_predict(train_linsvm(X, y), X);
    for (int i = 0; i < 3; ++i) CHECK(s(i) > 0.0);
}

TEST_CASE("linear training is deterministic") {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    testutil::separable_binary(30, 3, 8, X, y);
    const LinearModel a = train_logreg(X, y);
    const LinearModel b = train_logreg(X, y);
    CHECK(a.weights == b.weights);
    CHECK(a.bias == b.bias);
}
