#include "mimic/linear.hpp"
#include "mimic/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace mimic {

namespace {

double sigmoid_stable(double a) {
    if (a >= 0) return 1.0 / (1.0 + std::exp(-a));
    const double e = std::exp(a);
    return e / (1.0 + e);
}

double softplus(double a) { return a > 30 ? a : std::log1p(std::exp(a)); }

// mean BCE + 0.5*l2*||w||^2; gradient written into (gw, gb)
double logreg_loss_grad(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& w, double b, double l2, Eigen::VectorXd* gw,
                        double* gb) {
    const double n = static_cast<double>(X.rows());
    const Eigen::VectorXd a = X * w + Eigen::VectorXd::Constant(X.rows(), b);
    double loss = 0;
    Eigen::VectorXd delta(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        loss += softplus(a(i)) - y(i) * a(i);
        delta(i) = sigmoid_stable(a(i)) - y(i);
    }
    loss = loss / n + 0.5 * l2 * w.squaredNorm();
    if (gw) {
        *gw = X.transpose() * delta / n + l2 * w;
        *gb = delta.sum() / n;
    }
    return loss;
}

} // namespace

LinearModel train_logreg(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const LinearConfig& cfg) {
    if (X.rows() == 0) throw std::invalid_argument("train_logreg: empty data");
    if (!X.allFinite() || !y.allFinite())
        throw std::invalid_argument("train_logreg: non-finite input");
    if ((y.array() < 0).any() || (y.array() > 1).any())
        throw std::invalid_argument("train_logreg: targets must lie in [0,1]");
    const double l2 = cfg.l2 < 0 ? 5e-2 : cfg.l2;

    Eigen::VectorXd w = Eigen::VectorXd::Zero(X.cols());
    double b = 0;
    if (cfg.init_scale > 0) {
        auto rng = make_rng(derive_seed(cfg.seed, {hash64("logreg-init")}));
        std::normal_distribution<double> gauss(0.0, cfg.init_scale);
        for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = gauss(rng);
        b = gauss(rng);
    }
    std::vector<double> history;
    Eigen::VectorXd gw;
    double gb = 0;
    double loss = logreg_loss_grad(X, y, w, b, l2, &gw, &gb);
    history.push_back(loss);
    double gnorm = std::sqrt(gw.squaredNorm() + gb * gb);
    double step = 1.0;
    int it = 0;
    for (; it < cfg.max_iters && gnorm >= cfg.grad_tol; ++it) {
        // Armijo backtracking from the last accepted step
        step = std::min(step * 2.0, 1e4);
        const double g2 = gw.squaredNorm() + gb * gb;
        while (true) {
            const Eigen::VectorXd w_new = w - step * gw;
            const double b_new = b - step * gb;
            const double loss_new = logreg_loss_grad(X, y, w_new, b_new, l2, nullptr, nullptr);
            if (loss_new <= loss - 1e-4 * step * g2 || step < 1e-16) {
                w = w_new;
                b = b_new;
                loss = loss_new;
                break;
            }
            step *= 0.5;
        }
        loss = logreg_loss_grad(X, y, w, b, l2, &gw, &gb);
        history.push_back(loss);
        gnorm = std::sqrt(gw.squaredNorm() + gb * gb);
    }

    LinearModel m;
    m.weights = w;
    m.bias = b;
    m.kind = LinearKind::logreg;
    m.l2 = l2;
    m.converged = gnorm < cfg.grad_tol;
    m.final_grad_norm = gnorm;
    m.loss_history = std::move(history);
    return m;
}

LinearModel train_linsvm(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const LinearConfig& cfg) {
    if (X.rows() == 0) throw std::invalid_argument("train_linsvm: empty data");
    if (!X.allFinite() || !y.allFinite())
        throw std::invalid_argument("train_linsvm: non-finite input");
    const double l2 = cfg.l2 < 0 ? 5e-2 : cfg.l2;
    const double n = static_cast<double>(X.rows());

    // labels in {-1,+1}
    Eigen::VectorXd s(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        if (y(i) != 0.0 && y(i) != 1.0)
            throw std::invalid_argument("train_linsvm: labels must be binary");
        s(i) = y(i) > 0.5 ? 1.0 : -1.0;
    }

    Eigen::VectorXd w = Eigen::VectorXd::Zero(X.cols());
    double b = 0;
    double gnorm = 0;
    for (int it = 0; it < cfg.max_iters; ++it) {
        const Eigen::VectorXd margin = s.array() * (X * w + Eigen::VectorXd::Constant(X.rows(), b)).array();
        Eigen::VectorXd gw = l2 * w;
        double gb = 0;
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            if (margin(i) < 1.0) {
                gw -= s(i) / n * X.row(i).transpose();
                gb -= s(i) / n;
            }
        }
        gnorm = std::sqrt(gw.squaredNorm() + gb * gb);
        if (gnorm < cfg.grad_tol) break;
        const double step = 1.0 / (1.0 + 0.01 * static_cast<double>(it));
        w -= step * gw;
        b -= step * gb;
    }

    LinearModel m;
    m.weights = w;
    m.bias = b;
    m.kind = LinearKind::linsvm;
    m.l2 = l2;
    m.converged = gnorm < cfg.grad_tol;
    m.final_grad_norm = gnorm;
    return m;
}

Eigen::VectorXd linear_predict(const LinearModel& m, const Eigen::MatrixXd& X) {
    if (X.cols() != m.weights.size())
        throw std::invalid_argument("linear_predict: feature count mismatch");
    Eigen::VectorXd a = X * m.weights + Eigen::VectorXd::Constant(X.rows(), m.bias);
    if (m.kind == LinearKind::linsvm) return a;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        a(i) = std::min(1.0 - 1e-15, std::max(1e-15, sigmoid_stable(a(i))));
    return a;
}

} // namespace mimic
