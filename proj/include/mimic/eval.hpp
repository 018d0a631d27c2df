#pragma once

#include "mimic/data.hpp"
#include "mimic/distill.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace mimic {

// Mann-Whitney AUC: fraction of (positive, negative) pairs where the positive
// outranks the negative, ties counted as 0.5. Throws on single-class labels.
double auc(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels);

struct MethodSpec {
    enum class Family { logreg, linsvm, dt, gbt, nn, lr_nn, mimic };
    std::string id;
    Family family = Family::gbt;
    TeacherKind teacher = TeacherKind::dnn; // nn / lr_nn / mimic
    Pipeline pipeline = Pipeline::p2;       // mimic
    StudentKind student = StudentKind::gbt; // mimic
    std::string group() const;              // "Baseline" | "NN-based" | "Mimic"
};

// ids: logreg, linsvm, dt, gbt, dnn, sda, lstm, lr-dnn, lr-sda, lr-lstm,
//      gbtmimic-<teacher>-<p1|p2>, dtmimic-<teacher>-<p1|p2>
MethodSpec parse_method(const std::string& id);

struct CvResult {
    std::string method_id;
    Task task = Task::mor;
    FeatureView view = FeatureView::all;
    int trials = 5;
    int folds = 5;
    std::vector<double> fold_aucs; // trials*folds entries, NaN where skipped
    std::vector<int> skipped_folds;
    double auc_mean = 0;
    double auc_std = 0;
};

// Seeded shuffle split into `folds` near-equal test folds; together they
// cover 0..n_samples-1 exactly once.
std::vector<std::vector<int>> cv_partition(int n_samples, int folds, std::uint64_t trial_seed);

CvResult cross_validate(const Dataset& imputed, const std::string& method, Task task,
                        FeatureView view, int trials, int folds, std::uint64_t seed,
                        std::vector<Eigen::VectorXd>* fold_importances = nullptr);

struct BenchCell {
    std::string method;
    FeatureView view = FeatureView::all;
    Task task = Task::mor;
};

nlohmann::ordered_json run_benchmark(const Dataset& imputed, const std::vector<BenchCell>& cells,
                                     int trials, int folds, std::uint64_t seed, int n_threads = 1);
std::string render_benchmark_table(const nlohmann::ordered_json& report);

struct ImportanceReport {
    std::vector<std::string> feature_names;
    Eigen::VectorXd scores; // sums to 1 when any model splits
    std::vector<std::pair<std::string, double>> top_k;
};

ImportanceReport aggregate_importance(const std::vector<Eigen::VectorXd>& per_model_importance,
                                      const std::vector<std::string>& feature_names, int k);

nlohmann::ordered_json to_json(const CvResult& r);
nlohmann::ordered_json to_json(const ImportanceReport& r);

} // namespace mimic
