#include "mimic/trees.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace mimic {

void TreeConfig::validate() const {
    if (n_stages < 1) throw std::invalid_argument("n_stages must be >= 1");
    if (shrinkage <= 0 || shrinkage > 1) throw std::invalid_argument("shrinkage must be in (0,1]");
    if (min_samples_split < 2) throw std::invalid_argument("min_samples_split must be >= 2");
    if (max_depth == 0 || max_depth < -1) throw std::invalid_argument("max_depth must be -1 or >= 1");
}

int Tree::depth() const {
    if (nodes.empty()) return 0;
    std::vector<std::pair<int, int>> stack{{0, 0}};
    int best = 0;
    while (!stack.empty()) {
        auto [i, d] = stack.back();
        stack.pop_back();
        best = std::max(best, d);
        const auto& nd = nodes[static_cast<std::size_t>(i)];
        if (nd.feature >= 0) {
            stack.emplace_back(nd.left, d + 1);
            stack.emplace_back(nd.right, d + 1);
        }
    }
    return best;
}

int Tree::n_leaves() const {
    int k = 0;
    for (const auto& nd : nodes)
        if (nd.feature < 0) ++k;
    return k;
}

namespace {

double node_impurity(const Eigen::VectorXd& y, const std::vector<int>& idx, TreeKind kind) {
    const double n = static_cast<double>(idx.size());
    if (kind == TreeKind::classifier_gini) {
        double ones = 0;
        for (int i : idx) ones += y(i);
        const double p = ones / n;
        return 1.0 - p * p - (1.0 - p) * (1.0 - p);
    }
    double sum = 0, sumsq = 0;
    for (int i : idx) {
        sum += y(i);
        sumsq += y(i) * y(i);
    }
    const double m = sum / n;
    return std::max(0.0, sumsq / n - m * m);
}

struct CartBuilder {
    const Eigen::MatrixXd& X;
    const Eigen::VectorXd& y;
    TreeKind kind;
    int max_depth;
    int min_samples_split;
    std::vector<TreeNode> nodes;

    int build(std::vector<int>& idx, int depth) {
        const auto node_id = static_cast<int>(nodes.size());
        nodes.emplace_back();
        const double n = static_cast<double>(idx.size());
        const double imp = node_impurity(y, idx, kind);

        double sum = 0;
        for (int i : idx) sum += y(i);
        nodes[static_cast<std::size_t>(node_id)].value = sum / n;
        nodes[static_cast<std::size_t>(node_id)].n_samples = static_cast<long>(idx.size());
        nodes[static_cast<std::size_t>(node_id)].impurity = imp;

        bool pure = true;
        for (std::size_t k = 1; k < idx.size() && pure; ++k) pure = y(idx[k]) == y(idx[0]);
        if (pure || imp <= 0.0 || (max_depth >= 0 && depth >= max_depth) ||
            static_cast<int>(idx.size()) < min_samples_split)
            return node_id;

        // best split: max impurity decrease, ties resolved by scan order
        // (lowest feature index, then smallest threshold). Zero-decrease
        // splits are accepted so impure nodes keep expanding until pure
        // (XOR needs two zero-gain root splits).
        int best_f = -1;
        double best_thr = 0, best_dec = -1.0;
        std::vector<std::pair<double, double>> vals; // (x, target)
        for (int f = 0; f < X.cols(); ++f) {
            vals.clear();
            for (int i : idx) vals.emplace_back(X(i, f), y(i));
            std::sort(vals.begin(), vals.end());
            if (kind == TreeKind::classifier_gini) {
                double left_ones = 0, total_ones = 0;
                for (const auto& v : vals) total_ones += v.second;
                for (std::size_t k = 1; k < vals.size(); ++k) {
                    left_ones += vals[k - 1].second;
                    if (vals[k].first == vals[k - 1].first) continue;
                    const double nl = static_cast<double>(k), nr = n - nl;
                    const double pl = left_ones / nl, pr = (total_ones - left_ones) / nr;
                    const double il = 1.0 - pl * pl - (1.0 - pl) * (1.0 - pl);
                    const double ir = 1.0 - pr * pr - (1.0 - pr) * (1.0 - pr);
                    const double dec = imp - (nl / n) * il - (nr / n) * ir;
                    if (dec > best_dec) {
                        best_dec = dec;
                        best_f = f;
                        best_thr = 0.5 * (vals[k - 1].first + vals[k].first);
                    }
                }
            } else {
                double lsum = 0, lsq = 0, tsum = 0, tsq = 0;
                for (const auto& v : vals) {
                    tsum += v.second;
                    tsq += v.second * v.second;
                }
                for (std::size_t k = 1; k < vals.size(); ++k) {
                    lsum += vals[k - 1].second;
                    lsq += vals[k - 1].second * vals[k - 1].second;
                    if (vals[k].first == vals[k - 1].first) continue;
                    const double nl = static_cast<double>(k), nr = n - nl;
                    const double ml = lsum / nl, mr = (tsum - lsum) / nr;
                    const double il = std::max(0.0, lsq / nl - ml * ml);
                    const double ir = std::max(0.0, (tsq - lsq) / nr - mr * mr);
                    const double dec = imp - (nl / n) * il - (nr / n) * ir;
                    if (dec > best_dec) {
                        best_dec = dec;
                        best_f = f;
                        best_thr = 0.5 * (vals[k - 1].first + vals[k].first);
                    }
                }
            }
        }
        if (best_f < 0) return node_id; // all candidate features constant here

        std::vector<int> left, right;
        for (int i : idx)
            (X(i, best_f) <= best_thr ? left : right).push_back(i);
        nodes[static_cast<std::size_t>(node_id)].feature = best_f;
        nodes[static_cast<std::size_t>(node_id)].threshold = best_thr;
        const int l = build(left, depth + 1);
        const int r = build(right, depth + 1);
        nodes[static_cast<std::size_t>(node_id)].left = l;
        nodes[static_cast<std::size_t>(node_id)].right = r;
        return node_id;
    }
};

double predict_one(const Tree& tree, const Eigen::MatrixXd& X, Eigen::Index row) {
    int i = 0;
    while (true) {
        const auto& nd = tree.nodes[static_cast<std::size_t>(i)];
        if (nd.feature < 0) return nd.value;
        i = X(row, nd.feature) <= nd.threshold ? nd.left : nd.right;
    }
}

std::string fmt4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

} // namespace

Tree cart_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& targets, const TreeConfig& cfg,
              TreeKind kind) {
    if (X.rows() == 0) throw std::invalid_argument("cart_fit: empty data");
    if (X.rows() != targets.size()) throw std::invalid_argument("cart_fit: X/targets size mismatch");
    if (!X.allFinite() || !targets.allFinite())
        throw std::invalid_argument("cart_fit: non-finite input");

    CartBuilder b{X, targets, kind, cfg.max_depth, cfg.min_samples_split, {}};
    std::vector<int> idx(static_cast<std::size_t>(X.rows()));
    std::iota(idx.begin(), idx.end(), 0);
    b.build(idx, 0);

    Tree t;
    t.nodes = std::move(b.nodes);
    t.kind = kind;
    t.max_depth = cfg.max_depth;
    t.n_features = static_cast<int>(X.cols());
    return t;
}

GbtEnsemble gbt_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& targets,
                    const TreeConfig& cfg) {
    cfg.validate();
    if (X.rows() == 0) throw std::invalid_argument("gbt_fit: empty data");
    if (!X.allFinite() || !targets.allFinite())
        throw std::invalid_argument("gbt_fit: non-finite input");

    GbtEnsemble ens;
    ens.shrinkage = cfg.shrinkage;
    ens.n_features = static_cast<int>(X.cols());
    ens.base_score = targets.mean();

    Eigen::VectorXd pred = Eigen::VectorXd::Constant(X.rows(), ens.base_score);
    ens.train_mse.push_back((targets - pred).squaredNorm() / static_cast<double>(X.rows()));
    TreeConfig stage_cfg = cfg;
    for (int m = 0; m < cfg.n_stages; ++m) {
        const Eigen::VectorXd residual = targets - pred;
        // leaf values are mean residuals, the exact line-search optimum for
        // squared loss, so the stage coefficient folds into the leaves
        Tree stage = cart_fit(X, residual, stage_cfg, TreeKind::regressor_mse);
        pred += cfg.shrinkage * tree_predict(stage, X);
        ens.stages.push_back(std::move(stage));
        ens.train_mse.push_back((targets - pred).squaredNorm() / static_cast<double>(X.rows()));
    }
    return ens;
}

Eigen::VectorXd tree_predict(const Tree& tree, const Eigen::MatrixXd& X) {
    if (X.cols() != tree.n_features)
        throw std::invalid_argument("tree_predict: expected " + std::to_string(tree.n_features) +
                                    " features, got " + std::to_string(X.cols()));
    Eigen::VectorXd out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = predict_one(tree, X, i);
    return out;
}

Eigen::VectorXd gbt_predict(const GbtEnsemble& ens, const Eigen::MatrixXd& X) {
    if (X.cols() != ens.n_features)
        throw std::invalid_argument("gbt_predict: expected " + std::to_string(ens.n_features) +
                                    " features, got " + std::to_string(X.cols()));
    Eigen::VectorXd out = Eigen::VectorXd::Constant(X.rows(), ens.base_score);
    for (const auto& stage : ens.stages) out += ens.shrinkage * tree_predict(stage, X);
    return out;
}

Eigen::VectorXd importance_raw(const Tree& tree) {
    Eigen::VectorXd imp = Eigen::VectorXd::Zero(tree.n_features);
    if (tree.nodes.empty()) return imp;
    const double n_total = static_cast<double>(tree.nodes[0].n_samples);
    for (const auto& nd : tree.nodes) {
        if (nd.feature < 0) continue;
        const auto& l = tree.nodes[static_cast<std::size_t>(nd.left)];
        const auto& r = tree.nodes[static_cast<std::size_t>(nd.right)];
        const double n = static_cast<double>(nd.n_samples);
        const double dec = nd.impurity - (static_cast<double>(l.n_samples) / n) * l.impurity -
                           (static_cast<double>(r.n_samples) / n) * r.impurity;
        imp(nd.feature) += (n / n_total) * dec;
    }
    return imp;
}

namespace {
Eigen::VectorXd normalized(Eigen::VectorXd v) {
    const double s = v.sum();
    if (s > 0) v /= s;
    return v;
}
} // namespace

Eigen::VectorXd feature_importance(const Tree& tree) { return normalized(importance_raw(tree)); }

Eigen::VectorXd feature_importance(const GbtEnsemble& ens) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(ens.n_features);
    for (const auto& stage : ens.stages) acc += importance_raw(stage);
    if (!ens.stages.empty()) acc /= static_cast<double>(ens.stages.size());
    return normalized(std::move(acc));
}

std::string export_dot(const Tree& tree, const std::vector<std::string>& feature_names) {
    auto escape = [](const std::string& s) {
        std::string out;
        for (char c : s) {
            if (c == '"' || c == '\\') out.push_back('\\');
            out.push_back(c);
        }
        return out;
    };
    std::ostringstream os;
    os << "digraph Tree {\n";
    os << "  node [shape=box, fontname=\"helvetica\"];\n";
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        const auto& nd = tree.nodes[i];
        if (nd.feature >= 0) {
            const std::string name = nd.feature < static_cast<int>(feature_names.size())
                                         ? feature_names[static_cast<std::size_t>(nd.feature)]
                                         : "x" + std::to_string(nd.feature);
            os << "  n" << i << " [label=\"" << escape(name) << " <= " << fmt4(nd.threshold)
               << "\\nsamples = " << nd.n_samples << "\\nimpurity = " << fmt4(nd.impurity)
               << "\"];\n";
            os << "  n" << i << " -> n" << nd.left << " [label=\"true\"];\n";
            os << "  n" << i << " -> n" << nd.right << " [label=\"false\"];\n";
        } else {
            os << "  n" << i << " [label=\"value = " << fmt4(nd.value)
               << "\\nsamples = " << nd.n_samples << "\"];\n";
        }
    }
    os << "}\n";
    return os.str();
}

} // namespace mimic
