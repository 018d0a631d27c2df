#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace mimic {

enum class LinearKind { logreg, linsvm };

struct LinearConfig {
    double l2 = -1.0; // <0 = kind default (5e-2 logreg, 1e-2 linsvm)
    int max_iters = 5000;
    double grad_tol = 1e-6;
    double init_scale = 0.0; // >0: random normal init instead of zeros
    std::uint64_t seed = 0;
};

struct LinearModel {
    Eigen::VectorXd weights;
    double bias = 0.0;
    LinearKind kind = LinearKind::logreg;
    double l2 = 0.0;
    bool converged = true;
    double final_grad_norm = 0.0;
    std::vector<double> loss_history; // objective per accepted iterate
};

// L2-regularized cross-entropy, full-batch gradient descent with backtracking.
// Targets may be soft values in [0,1].
LinearModel train_logreg(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const LinearConfig& cfg = {});
// L2-regularized hinge loss, subgradient descent with decaying step.
LinearModel train_linsvm(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const LinearConfig& cfg = {});

// logreg: sigmoid scores in (0,1); linsvm: raw margins.
Eigen::VectorXd linear_predict(const LinearModel& m, const Eigen::MatrixXd& X);

} // namespace mimic
