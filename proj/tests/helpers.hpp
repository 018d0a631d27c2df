#pragma once

#include "mimic/data.hpp"
#include "mimic/rng.hpp"

#include <Eigen/Core>
#include <random>
#include <vector>

namespace testutil {

// Random regression fixture: y linear in the first two columns plus noise.
inline void random_regression(int n, int d, std::uint64_t seed, Eigen::MatrixXd& X,
                              Eigen::VectorXd& y) {
    auto rng = mimic::make_rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    X.resize(n, d);
    y.resize(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) X(i, j) = g(rng);
        y(i) = 2.0 * X(i, 0) - X(i, 1 % d) + 0.3 * g(rng);
    }
}

// Linearly separable binary fixture: label by sign of first coordinate.
inline void separable_binary(int n, int d, std::uint64_t seed, Eigen::MatrixXd& X,
                             Eigen::VectorXd& y) {
    auto rng = mimic::make_rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    X.resize(n, d);
    y.resize(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) X(i, j) = g(rng);
        const double margin = X(i, 0) >= 0 ? 1.0 : -1.0;
        X(i, 0) += margin; // push classes apart
        y(i) = margin > 0 ? 1.0 : 0.0;
    }
}

// Tiny in-memory dataset with hand-placed missing cells.
// Q=2 statics (first binary, second continuous), P=1 temporal, T=2, N=4.
inline mimic::Dataset tiny_dataset() {
    mimic::Dataset ds;
    ds.t_steps = 2;
    ds.static_names = {"sex", "age"};
    ds.temporal_names = {"map"};
    ds.static_kinds = {mimic::VarKind::binary, mimic::VarKind::continuous};
    ds.statics.resize(4, 2);
    ds.statics << 1, 10, 1, 20, 0, 30, 0, 40;
    ds.temporal.resize(4, 2);
    ds.temporal << 1, 2, 3, 4, 5, 6, 7, 8;
    ds.static_mask = mimic::BoolMatrix::Constant(4, 2, false);
    ds.temporal_mask = mimic::BoolMatrix::Constant(4, 2, false);
    ds.labels[mimic::Task::mor] = (Eigen::VectorXd(4) << 0, 0, 1, 1).finished();
    ds.labels[mimic::Task::vfd] = (Eigen::VectorXd(4) << 0, 1, 0, 1).finished();
    return ds;
}

inline std::vector<std::string> names(int d) {
    std::vector<std::string> out;
    for (int i = 0; i < d; ++i) out.push_back("x" + std::to_string(i));
    return out;
}

} // namespace testutil
