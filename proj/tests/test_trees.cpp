#include "mimic/trees.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace mimic;

TEST_CASE("cart_fit splits a two-point classifier at the midpoint") {
    Eigen::MatrixXd X(2, 1);
    X << 0, 1;
    Eigen::VectorXd y(2);
    y << 0, 1;
    TreeConfig cfg;
    cfg.max_depth = -1;
    const Tree t = cart_fit(X, y, cfg, TreeKind::classifier_gini);
    REQUIRE(t.nodes.size() == 3);
    CHECK(t.nodes[0].feature == 0);
    CHECK(t.nodes[0].threshold == doctest::Approx(0.5));
    CHECK(t.n_leaves() == 2);
    const Eigen::VectorXd pred = tree_predict(t, X);
    CHECK(pred(0) == 0.0);
    CHECK(pred(1) == 1.0);
}

TEST_CASE("cart_fit solves XOR with four pure leaves") {
    Eigen::MatrixXd X(4, 2);
    X << 0, 0, 0, 1, 1, 0, 1, 1;
    Eigen::VectorXd y(4);
    y << 0, 1, 1, 0;
    TreeConfig cfg;
    cfg.max_depth = -1;
    const Tree t = cart_fit(X, y, cfg, TreeKind::classifier_gini);
    CHECK(t.n_leaves() == 4);
    const Eigen::VectorXd pred = tree_predict(t, X);
    for (int i = 0; i < 4; ++i) CHECK(pred(i) == y(i));
}

TEST_CASE("cart_fit on a constant target returns a single leaf") {
    Eigen::MatrixXd X(3, 2);
    X << 1, 2, 3, 4, 5, 6;
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(3, 0.7);
    const Tree t = cart_fit(X, y, TreeConfig{}, TreeKind::regressor_mse);
    REQUIRE(t.nodes.size() == 1);
    CHECK(t.nodes[0].value == doctest::Approx(0.7));
}

TEST_CASE("cart_fit with all-constant features returns a leaf, not an error") {
    const Eigen::MatrixXd X = Eigen::MatrixXd::Ones(5, 3);
    Eigen::VectorXd y(5);
    y << 0, 1, 0, 1, 1;
    const Tree t = cart_fit(X, y, TreeConfig{}, TreeKind::classifier_gini);
    CHECK(t.nodes.size() == 1);
    CHECK(t.nodes[0].value == doctest::Approx(0.6));
}

TEST_CASE("cart_fit rejects empty data") {
    Eigen::MatrixXd X(0, 2);
    Eigen::VectorXd y(0);
    CHECK_THROWS(cart_fit(X, y, TreeConfig{}, TreeKind::classifier_gini));
}

TEST_CASE("unlimited-depth classifier is exact on conflict-free data") {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    testutil::separable_binary(80, 4, 21, X, y);
    TreeConfig cfg;
    cfg.max_depth = -1;
    const Tree t = cart_fit(X, y, cfg, TreeKind::classifier_gini);
    const Eigen::VectorXd pred = tree_predict(t, X);
    for (Eigen::Index i = 0; i < y.size(); ++i) CHECK(pred(i) == y(i));
}

TEST_CASE("shifting one feature shifts only that feature's thresholds") {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    testutil::random_regression(60, 3, 5, X, y);
    TreeConfig cfg;
    cfg.max_depth = 4;
    const Tree base = cart_fit(X, y, cfg, TreeKind::regressor_mse);
    Eigen::MatrixXd X2 = X;
    X2.col(1).array() += 10.0;
    const Tree shifted = cart_fit(X2, y, cfg, TreeKind::regressor_mse);
    REQUIRE(base.nodes.size() == shifted.nodes.size());
    for (std::size_t i = 0; i < base.nodes.size(); ++i) {
        CHECK(base.nodes[i].feature == shifted.nodes[i].feature);
        CHECK(base.nodes[i].left == shifted.nodes[i].left);
        if (base.nodes[i].feature == 1)
            CHECK(shifted.nodes[i].threshold == doctest::Approx(base.nodes[i].threshold + 10.0));
        else if (base.nodes[i].feature >= 0)
            CHECK(shifted.nodes[i].threshold == doctest::Approx(base.nodes[i].threshold));
    }
}

TEST_CASE("gbt_fit reproduces a constant target exactly") {
    Eigen::MatrixXd X(4, 1);
    X << 1, 2, 3, 4;
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(4, 0.25);
    const GbtEnsemble e = gbt_fit(X, y, TreeConfig{});
    const Eigen::VectorXd pred = gbt_predict(e, X);
    for (int i = 0; i < 4; ++i) CHECK(pred(i) == doctest::Approx(0.25));
}

TEST_CASE("gbt_fit with one full-shrinkage stage matches the hand computation") {
    Eigen::MatrixXd X(4, 1);
    X << 0, 1, 2, 3;
    Eigen::VectorXd y(4);
    y << 0, 0, 1, 1;
    TreeConfig cfg;
    cfg.n_stages = 1;
    cfg.shrinkage = 1.0;
    cfg.max_depth = 1;
    const GbtEnsemble e = gbt_fit(X, y, cfg);
    CHECK(e.base_score == doctest::Approx(0.5));
    REQUIRE(e.stages.size() == 1);
    CHECK(e.stages[0].nodes[0].threshold == doctest::Approx(1.5));
    const Eigen::VectorXd pred = gbt_predict(e, X);
    CHECK(pred(0) == doctest::Approx(0.0));
    CHECK(pred(1) == doctest::Approx(0.0));
    CHECK(pred(2) == doctest::Approx(1.0));
    CHECK(pred(3) == doctest::Approx(1.0));
}

TEST_CASE("gbt training MSE is non-increasing over 100 stages") {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
        Eigen::MatrixXd X;
        Eigen::VectorXd y;
        testutil::random_regression(120, 5, seed, X, y);
        const GbtEnsemble e = gbt_fit(X, y, TreeConfig{});
        REQUIRE(e.train_mse.size() == 101);
        for (std::size_t m = 1; m < e.train_mse.size(); ++m)
            CHECK(e.train_mse[m] <= e.train_mse[m - 1] + 1e-12);
    }
}

TEST_CASE("every gbt stage respects depth <= 3 and <= 8 leaves") {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    testutil::random_regression(150, 6, 9, X, y);
    const GbtEnsemble e = gbt_fit(X, y, TreeConfig{});
    for (const Tree& t : e.stages) {
        CHECK(t.depth() <= 3);
        CHECK(t.n_leaves() <= 8);
    }
}

TEST_CASE("ensemble prediction is base plus shrinkage times stage sum") {
    GbtEnsemble e;
    e.base_score = 0.3;
    e.shrinkage = 0.1;
    e.n_features = 1;
    Tree leaf;
    leaf.kind = TreeKind::regressor_mse;
    leaf.n_features = 1;
    leaf.nodes.push_back({-1, 0.0, -1, -1, 1.0, 4, 0.0});
    e.stages.push_back(leaf);
    Eigen::MatrixXd X(1, 1);
    X << 42.0;
    CHECK(gbt_predict(e, X)(0) == doctest::Approx(0.4));
}

TEST_CASE("single split puts all importance on the split feature") {
    Eigen::MatrixXd X(4, 5);
    X.setZero();
    X.col(3) << 0, 0, 1, 1;
    Eigen::VectorXd y(4);
    y << 0, 0, 1, 1;
    TreeConfig cfg;
    cfg.max_depth = -1;
    const Tree t = cart_fit(X, y, cfg, TreeKind::classifier_gini);
    const Eigen::VectorXd imp = feature_importance(t);
    CHECK(imp(3) == doctest::Approx(1.0));
    CHECK(imp.sum() == doctest::Approx(1.0));
}

TEST_CASE("gbt importance sums to 1 and matches a brute-force node walk") {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    testutil::random_regression(100, 4, 13, X, y);
    const GbtEnsemble e = gbt_fit(X, y, TreeConfig{});
    const Eigen::VectorXd imp = feature_importance(e);
    CHECK(imp.sum() == doctest::Approx(1.0).epsilon(1e-9));

    // brute force: re-accumulate (n/N)*decrease over every internal node
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(4);
    for (const Tree& t : e.stages) {
        const double n_root = static_cast<double>(t.nodes[0].n_samples);
        for (std::size_t i = 0; i < t.nodes.size(); ++i) {
            const TreeNode& nd = t.nodes[i];
            if (nd.feature < 0) continue;
            const TreeNode& l = t.nodes[static_cast<std::size_t>(nd.left)];
            const TreeNode& r = t.nodes[static_cast<std::size_t>(nd.right)];
            const double n = static_cast<double>(nd.n_samples);
            const double dec = nd.impurity -
                               (static_cast<double>(l.n_samples) / n) * l.impurity -
                               (static_cast<double>(r.n_samples) / n) * r.impurity;
            acc(nd.feature) += (n / n_root) * dec;
        }
    }
    acc /= static_cast<double>(e.stages.size());
    acc /= acc.sum();
    for (int j = 0; j < 4; ++j) CHECK(imp(j) == doctest::Approx(acc(j)).epsilon(1e-9));
}

TEST_CASE("importance recovers a planted informative feature") {
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto rng = make_rng(seed);
        std::normal_distribution<double> g(0.0, 1.0);
        Eigen::MatrixXd X(100, 6);
        Eigen::VectorXd y(100);
        for (int i = 0; i < 100; ++i) {
            for (int j = 0; j < 6; ++j) X(i, j) = g(rng);
            y(i) = X(i, 2) > 0 ? 1.0 : 0.0;
        }
        const GbtEnsemble e = gbt_fit(X, y, TreeConfig{});
        Eigen::Index best;
        feature_importance(e).maxCoeff(&best);
        hits += best == 2;
    }
    CHECK(hits >= 9);
}

TEST_CASE("export_dot renders a single leaf as one node") {
    Eigen::MatrixXd X(2, 1);
    X << 1, 2;
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(2, 0.5);
    const Tree t = cart_fit(X, y, TreeConfig{}, TreeKind::regressor_mse);
    const std::string dot = export_dot(t, {"x0"});
    CHECK(dot.find("digraph") != std::string::npos);
    CHECK(dot.find("n0") != std::string::npos);
    CHECK(dot.find("n1") == std::string::npos);
    CHECK(dot.find("->") == std::string::npos);
}

TEST_CASE("export_dot depth-1 tree has 3 nodes, 2 labeled edges, 4-decimal threshold") {
    Eigen::MatrixXd X(2, 1);
    X << 0, 1;
    Eigen::VectorXd y(2);
    y << 0, 1;
    TreeConfig cfg;
    cfg.max_depth = 1;
    const Tree t = cart_fit(X, y, cfg, TreeKind::classifier_gini);
    const std::string dot = export_dot(t, {"x0"});
    CHECK(dot.find("x0 <= 0.5000") != std::string::npos);
    CHECK(dot.find("n0 -> n1") != std::string::npos);
    CHECK(dot.find("n0 -> n2") != std::string::npos);
    CHECK(dot.find("true") != std::string::npos);
    CHECK(dot.find("false") != std::string::npos);
    // stable ids under re-export
    CHECK(dot == export_dot(t, {"x0"}));
}

TEST_CASE("gbt_fit rejects empty data and bad config") {
    Eigen::MatrixXd X(0, 1);
    Eigen::VectorXd y(0);
    CHECK_THROWS(gbt_fit(X, y, TreeConfig{}));
    TreeConfig bad;
    bad.shrinkage = 0.0;
    Eigen::MatrixXd X2(2, 1);
    X2 << 0, 1;
    Eigen::VectorXd y2(2);
    y2 << 0, 1;
    CHECK_THROWS_AS(gbt_fit(X2, y2, bad), std::invalid_argument);
}
