#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace mimic {

enum class TreeKind { classifier_gini, regressor_mse };

// Nodes are stored preorder; nodes[0] is the root. feature == -1 marks a leaf.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0; // leaf: class-1 fraction or target mean
    long n_samples = 0;
    double impurity = 0.0;
};

struct Tree {
    std::vector<TreeNode> nodes;
    TreeKind kind = TreeKind::regressor_mse;
    int max_depth = -1; // -1 = unlimited
    int n_features = 0;

    bool is_leaf(int i) const { return nodes[static_cast<std::size_t>(i)].feature < 0; }
    int depth() const;
    int n_leaves() const;
};

struct TreeConfig {
    int max_depth = 3;       // GBT stage default; use -1 for unlimited single trees
    int n_stages = 100;      // M
    double shrinkage = 0.1;  // nu
    int min_samples_split = 2;
    std::uint64_t seed = 0;

    void validate() const;
};

struct GbtEnsemble {
    double base_score = 0.0; // F0
    std::vector<Tree> stages;
    double shrinkage = 0.1;
    int n_features = 0;
    std::vector<double> train_mse; // training MSE after stage m (index 0 = F0 only)
};

Tree cart_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& targets, const TreeConfig& cfg,
              TreeKind kind);
GbtEnsemble gbt_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& targets,
                    const TreeConfig& cfg);

Eigen::VectorXd tree_predict(const Tree& tree, const Eigen::MatrixXd& X);
Eigen::VectorXd gbt_predict(const GbtEnsemble& ens, const Eigen::MatrixXd& X);

// Unnormalized impurity-decrease totals per feature: each internal node adds
// (n_samples/N) * impurity_decrease to its split feature.
Eigen::VectorXd importance_raw(const Tree& tree);
// Normalized to sum 1 (all zeros when there are no splits).
Eigen::VectorXd feature_importance(const Tree& tree);
// Mean of the stages' raw contributions, normalized once.
Eigen::VectorXd feature_importance(const GbtEnsemble& ens);

std::string export_dot(const Tree& tree, const std::vector<std::string>& feature_names);

} // namespace mimic
