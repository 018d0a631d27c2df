#pragma once

#include "mimic/data.hpp"
#include "mimic/linear.hpp"
#include "mimic/neural.hpp"
#include "mimic/trees.hpp"

#include <variant>

namespace mimic {

enum class TeacherKind { dnn, sda, lstm };
enum class Pipeline { p1, p2 };
enum class StudentKind { gbt, dt };

std::string to_string(TeacherKind k);
std::string to_string(Pipeline p);
TeacherKind teacher_from_string(const std::string& s);

struct TeacherSpec {
    TeacherKind kind = TeacherKind::dnn;
    bool with_lr_head = false; // true = the LR-* pipeline-1 variant
    TrainConfig train_config;
};

struct TrainedTeacher {
    TeacherKind kind;
    std::variant<MlpModel, SdaModel, LstmModel> model;
};

// Inputs an lstm teacher consumes: the raw temporal tensor, never the
// flattened design matrix.
struct TeacherInputs {
    const Eigen::MatrixXd& X;    // N x D design matrix (dnn/sda)
    const Eigen::MatrixXd& X_ts; // N x (P*T) temporal tensor (lstm)
    int p = 0;
    int t = 0;
};

TrainedTeacher train_teacher(const TeacherSpec& spec, const TeacherInputs& in,
                             const Eigen::VectorXd& y);
Eigen::MatrixXd extract_features(const TrainedTeacher& teacher, const TeacherInputs& in);
Eigen::VectorXd predict_soft(const TrainedTeacher& teacher, const TeacherInputs& in);

struct SoftTargetStats {
    double min = 0, max = 0, mean = 0;
};

struct MimicModel {
    std::variant<GbtEnsemble, Tree> student;
    TeacherSpec teacher;
    Pipeline pipeline = Pipeline::p2;
    StudentKind student_kind = StudentKind::gbt;
    SoftTargetStats soft_target_stats;
};

// Fit a tree student on already-computed soft targets; the student only ever
// sees the raw design matrix and these targets.
MimicModel mimic_fit(const DesignMatrix& X, const Eigen::VectorXd& soft_targets,
                     const TeacherSpec& teacher, Pipeline pipeline, const TreeConfig& student_cfg,
                     StudentKind student = StudentKind::gbt);

// teacher features -> logistic regression -> soft scores -> tree student on raw X
MimicModel distill_pipeline1(const DesignMatrix& X, const TeacherInputs& teacher_in,
                             const Eigen::VectorXd& y, const TeacherSpec& teacher,
                             const TreeConfig& student_cfg,
                             StudentKind student = StudentKind::gbt);
// teacher soft scores -> tree student on raw X
MimicModel distill_pipeline2(const DesignMatrix& X, const TeacherInputs& teacher_in,
                             const Eigen::VectorXd& y, const TeacherSpec& teacher,
                             const TreeConfig& student_cfg,
                             StudentKind student = StudentKind::gbt);

// Raw student outputs (unclamped regression values).
Eigen::VectorXd mimic_predict(const MimicModel& m, const Eigen::MatrixXd& X);
// Report-time view clamped to [0,1].
Eigen::VectorXd mimic_predict_clamped(const MimicModel& m, const Eigen::MatrixXd& X);

struct FidelityReport {
    double mse = 0;
    double pearson_r = 0;
    double rank_agreement = 0; // Kendall tau
};

FidelityReport fidelity_report(const Eigen::VectorXd& student_scores,
                               const Eigen::VectorXd& teacher_scores);

} // namespace mimic
