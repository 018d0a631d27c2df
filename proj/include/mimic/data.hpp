#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace mimic {

enum class VarKind { binary, continuous };
enum class Task { mor, vfd };
enum class FeatureView { all, temporal_only, static_plus_day0 };

std::string to_string(Task t);
std::string to_string(FeatureView v);
Task task_from_string(const std::string& s);
FeatureView view_from_string(const std::string& s);

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Static matrix N x Q plus temporal tensor N x T x P stored row-major as
// N x (P*T) with column index var*T + day. Masks are true where the value
// is unobserved.
struct Dataset {
    Eigen::MatrixXd statics;  // N x Q
    Eigen::MatrixXd temporal; // N x (P*T)
    BoolMatrix static_mask;   // N x Q
    BoolMatrix temporal_mask; // N x (P*T)
    int t_steps = 0;
    std::vector<VarKind> static_kinds;
    std::vector<std::string> static_names;   // Q base names
    std::vector<std::string> temporal_names; // P base names
    std::map<Task, Eigen::VectorXd> labels;  // values in {0,1}, length N

    Eigen::Index n() const { return statics.rows(); }
    int q() const { return static_cast<int>(statics.cols()); }
    int p() const { return static_cast<int>(temporal_names.size()); }
    int temporal_col(int var, int day) const { return var * t_steps + day; }
    bool any_missing() const;

    Dataset subset(const std::vector<int>& rows) const;
};

struct DesignMatrix {
    Eigen::MatrixXd values; // N x D
    std::vector<std::string> column_names;
    std::vector<int> dropped_columns; // indices into the view's pre-drop ordering
    int d() const { return static_cast<int>(values.cols()); }
};

struct SynthConfig {
    int n_samples = 400;
    int q_static = 27;
    int p_temporal = 21;
    int t_steps = 4;
    double missing_rate = 0.1343;
    int n_informative_temporal = 3;
    int n_informative_static = 2;
    double label_noise = 0.05;
    std::uint64_t seed = 0;

    void validate() const; // throws std::invalid_argument naming the field
};

Dataset load_dataset(const std::string& path);
void save_dataset_csv(const Dataset& ds, const std::string& path);

Dataset impute_missing(const Dataset& ds);
DesignMatrix flatten(const Dataset& ds, FeatureView view);
Dataset synth_generate(const SynthConfig& cfg);

} // namespace mimic
