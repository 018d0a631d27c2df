#include "mimic/distill.hpp"
#include "mimic/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace mimic {

std::string to_string(TeacherKind k) {
    switch (k) {
    case TeacherKind::dnn: return "dnn";
    case TeacherKind::sda: return "sda";
    default: return "lstm";
    }
}

std::string to_string(Pipeline p) { return p == Pipeline::p1 ? "p1" : "p2"; }

TeacherKind teacher_from_string(const std::string& s) {
    if (s == "dnn" || s == "mlp") return TeacherKind::dnn;
    if (s == "sda") return TeacherKind::sda;
    if (s == "lstm") return TeacherKind::lstm;
    throw std::invalid_argument("unknown teacher '" + s + "' (expected dnn|sda|lstm)");
}

TrainedTeacher train_teacher(const TeacherSpec& spec, const TeacherInputs& in,
                             const Eigen::VectorXd& y) {
    switch (spec.kind) {
    case TeacherKind::dnn: return {spec.kind, train_mlp(in.X, y, spec.train_config)};
    case TeacherKind::sda: return {spec.kind, train_sda(in.X, y, spec.train_config)};
    default: return {spec.kind, train_lstm(in.X_ts, in.p, in.t, y, spec.train_config)};
    }
}

Eigen::MatrixXd extract_features(const TrainedTeacher& teacher, const TeacherInputs& in) {
    switch (teacher.kind) {
    case TeacherKind::dnn: return mlp_extract(std::get<MlpModel>(teacher.model), in.X);
    case TeacherKind::sda: return sda_extract(std::get<SdaModel>(teacher.model), in.X);
    default: return lstm_extract(std::get<LstmModel>(teacher.model), in.X_ts);
    }
}

Eigen::VectorXd predict_soft(const TrainedTeacher& teacher, const TeacherInputs& in) {
    switch (teacher.kind) {
    case TeacherKind::dnn: return mlp_predict(std::get<MlpModel>(teacher.model), in.X);
    case TeacherKind::sda: return sda_predict(std::get<SdaModel>(teacher.model), in.X);
    default: return lstm_predict(std::get<LstmModel>(teacher.model), in.X_ts);
    }
}

namespace {

SoftTargetStats stats_of(const Eigen::VectorXd& v) {
    return {v.minCoeff(), v.maxCoeff(), v.mean()};
}

} // namespace

MimicModel mimic_fit(const DesignMatrix& X, const Eigen::VectorXd& soft_targets,
                     const TeacherSpec& teacher, Pipeline pipeline, const TreeConfig& cfg,
                     StudentKind student) {
    MimicModel m;
    m.teacher = teacher;
    m.pipeline = pipeline;
    m.student_kind = student;
    m.soft_target_stats = stats_of(soft_targets);
    if (student == StudentKind::gbt) {
        m.student = gbt_fit(X.values, soft_targets, cfg);
    } else {
        // DT-mimic ablation: a single unlimited-depth regression tree
        TreeConfig dt_cfg = cfg;
        dt_cfg.max_depth = -1;
        m.student = cart_fit(X.values, soft_targets, dt_cfg, TreeKind::regressor_mse);
    }
    return m;
}

MimicModel distill_pipeline1(const DesignMatrix& X, const TeacherInputs& teacher_in,
                             const Eigen::VectorXd& y, const TeacherSpec& teacher,
                             const TreeConfig& student_cfg, StudentKind student) {
    if (!teacher.with_lr_head)
        throw std::invalid_argument("distill_pipeline1 requires teacher.with_lr_head = true");
    const TrainedTeacher trained = train_teacher(teacher, teacher_in, y);
    const Eigen::MatrixXd features = extract_features(trained, teacher_in);
    LinearConfig lr_cfg;
    lr_cfg.seed = teacher.train_config.seed;
    const LinearModel lr = train_logreg(features, y, lr_cfg);
    const Eigen::VectorXd y_c = linear_predict(lr, features);
    return mimic_fit(X, y_c, teacher, Pipeline::p1, student_cfg, student);
}

MimicModel distill_pipeline2(const DesignMatrix& X, const TeacherInputs& teacher_in,
                             const Eigen::VectorXd& y, const TeacherSpec& teacher,
                             const TreeConfig& student_cfg, StudentKind student) {
    if (teacher.with_lr_head)
        throw std::invalid_argument("distill_pipeline2 requires teacher.with_lr_head = false");
    const TrainedTeacher trained = train_teacher(teacher, teacher_in, y);
    const Eigen::VectorXd y_nn = predict_soft(trained, teacher_in);
    return mimic_fit(X, y_nn, teacher, Pipeline::p2, student_cfg, student);
}

Eigen::VectorXd mimic_predict(const MimicModel& m, const Eigen::MatrixXd& X) {
    if (std::holds_alternative<GbtEnsemble>(m.student))
        return gbt_predict(std::get<GbtEnsemble>(m.student), X);
    return tree_predict(std::get<Tree>(m.student), X);
}

Eigen::VectorXd mimic_predict_clamped(const MimicModel& m, const Eigen::MatrixXd& X) {
    return mimic_predict(m, X).cwiseMax(0.0).cwiseMin(1.0);
}

FidelityReport fidelity_report(const Eigen::VectorXd& student_scores,
                               const Eigen::VectorXd& teacher_scores) {
    const auto n = student_scores.size();
    if (n != teacher_scores.size())
        throw std::invalid_argument("fidelity_report: score length mismatch");
    if (n < 2) throw std::invalid_argument("fidelity_report: need at least 2 rows");

    FidelityReport r;
    r.mse = (student_scores - teacher_scores).squaredNorm() / static_cast<double>(n);

    const double ms = student_scores.mean(), mt = teacher_scores.mean();
    const Eigen::VectorXd ds = student_scores.array() - ms;
    const Eigen::VectorXd dt = teacher_scores.array() - mt;
    const double denom = std::sqrt(ds.squaredNorm() * dt.squaredNorm());
    r.pearson_r = denom > 0 ? ds.dot(dt) / denom : 0.0;

    // Kendall tau-b, O(n^2) — evaluation sets here are small
    long concordant = 0, discordant = 0, ties_s = 0, ties_t = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double a = student_scores(i) - student_scores(j);
            const double b = teacher_scores(i) - teacher_scores(j);
            if (a == 0) ++ties_s;
            if (b == 0) ++ties_t;
            if (a != 0 && b != 0) ((a > 0) == (b > 0) ? concordant : discordant)++;
        }
    const double n0 = static_cast<double>(n) * (static_cast<double>(n) - 1) / 2.0;
    const double d1 = n0 - static_cast<double>(ties_s);
    const double d2 = n0 - static_cast<double>(ties_t);
    r.rank_agreement = (d1 > 0 && d2 > 0)
                           ? static_cast<double>(concordant - discordant) / std::sqrt(d1 * d2)
                           : 0.0;
    return r;
}

} // namespace mimic
