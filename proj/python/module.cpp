#include "mimic/data.hpp"
#include "mimic/distill.hpp"
#include "mimic/eval.hpp"
#include "mimic/neural.hpp"
#include "mimic/serialize.hpp"
#include "mimic/trees.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace mimic;

namespace {

py::object json_to_py(const nlohmann::ordered_json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

Dataset make_synth(int n_samples, int q_static, int p_temporal, int t_steps, double missing_rate,
                   int n_informative_temporal, int n_informative_static, double label_noise,
                   std::uint64_t seed) {
    SynthConfig cfg;
    cfg.n_samples = n_samples;
    cfg.q_static = q_static;
    cfg.p_temporal = p_temporal;
    cfg.t_steps = t_steps;
    cfg.missing_rate = missing_rate;
    cfg.n_informative_temporal = n_informative_temporal;
    cfg.n_informative_static = n_informative_static;
    cfg.label_noise = label_noise;
    cfg.seed = seed;
    return synth_generate(cfg);
}

TreeConfig make_tree_config(int max_depth, int n_stages, double shrinkage, int min_samples_split,
                            std::uint64_t seed) {
    TreeConfig cfg;
    cfg.max_depth = max_depth;
    cfg.n_stages = n_stages;
    cfg.shrinkage = shrinkage;
    cfg.min_samples_split = min_samples_split;
    cfg.seed = seed;
    return cfg;
}

py::dict distill_run(const Dataset& imputed, const std::string& teacher,
                     const std::string& pipeline, const std::string& task,
                     const std::string& view, const std::string& student, std::uint64_t seed) {
    if (imputed.any_missing())
        throw std::invalid_argument("distill: dataset has missing values; impute first");
    const FeatureView v = view_from_string(view);
    const Task tk = task_from_string(task);
    const DesignMatrix dm = flatten(imputed, v);
    const DesignMatrix ts = flatten(imputed, FeatureView::temporal_only);
    const TeacherInputs tin{dm.values, ts.values, imputed.p(), imputed.t_steps};
    const Eigen::VectorXd& y = imputed.labels.at(tk);

    TrainConfig tcfg;
    tcfg.seed = seed;
    TeacherSpec spec;
    spec.kind = teacher_from_string(teacher);
    if (spec.kind == TeacherKind::lstm) tcfg.optimizer = Optimizer::rmsprop;
    spec.with_lr_head = pipeline == "p1";
    spec.train_config = tcfg;
    TreeConfig scfg;
    scfg.seed = seed;
    const StudentKind sk = student == "dt" ? StudentKind::dt : StudentKind::gbt;
    if (sk == StudentKind::dt) scfg.max_depth = -1;

    const MimicModel mm = pipeline == "p1"
                              ? distill_pipeline1(dm, tin, y, spec, scfg, sk)
                              : distill_pipeline2(dm, tin, y, spec, scfg, sk);

    // fidelity against freshly recomputed soft targets (same seed => same teacher)
    const TrainedTeacher t = train_teacher(spec, tin, y);
    Eigen::VectorXd targets;
    if (pipeline == "p1") {
        LinearConfig lcfg;
        lcfg.seed = seed;
        const LinearModel lr = train_logreg(extract_features(t, tin), y, lcfg);
        targets = linear_predict(lr, extract_features(t, tin));
    } else {
        targets = predict_soft(t, tin);
    }
    const FidelityReport fr = fidelity_report(mimic_predict(mm, dm.values), targets);

    py::dict out;
    out["model"] = json_to_py(to_json(mm));
    out["feature_names"] = dm.column_names;
    out["importance"] = std::holds_alternative<GbtEnsemble>(mm.student)
                            ? feature_importance(std::get<GbtEnsemble>(mm.student))
                            : feature_importance(std::get<Tree>(mm.student));
    out["student_scores"] = mimic_predict_clamped(mm, dm.values);
    out["teacher_scores"] = targets;
    out["fidelity"] = py::dict(py::arg("mse") = fr.mse, py::arg("pearson_r") = fr.pearson_r,
                               py::arg("rank_agreement") = fr.rank_agreement);
    return out;
}

} // namespace

PYBIND11_MODULE(_mimiclearn, m) {
    m.doc() = "Mimic-learning core: deep teachers distilled into gradient-boosted trees";

    py::class_<Dataset>(m, "Dataset")
        .def_property_readonly("n", &Dataset::n)
        .def_property_readonly("q", &Dataset::q)
        .def_property_readonly("p", &Dataset::p)
        .def_property_readonly("t_steps", [](const Dataset& d) { return d.t_steps; })
        .def_property_readonly("statics", [](const Dataset& d) { return d.statics; })
        .def_property_readonly("temporal", [](const Dataset& d) { return d.temporal; })
        .def_property_readonly("static_names", [](const Dataset& d) { return d.static_names; })
        .def_property_readonly("temporal_names", [](const Dataset& d) { return d.temporal_names; })
        .def("labels",
             [](const Dataset& d, const std::string& task) {
                 return d.labels.at(task_from_string(task));
             },
             py::arg("task"))
        .def("any_missing", &Dataset::any_missing);

    m.def("synth", &make_synth, py::arg("n_samples") = 400, py::arg("q_static") = 27,
          py::arg("p_temporal") = 21, py::arg("t_steps") = 4, py::arg("missing_rate") = 0.1343,
          py::arg("n_informative_temporal") = 3, py::arg("n_informative_static") = 2,
          py::arg("label_noise") = 0.05, py::arg("seed") = 0,
          "Generate a synthetic static+temporal clinical-style dataset");
    m.def("load_dataset", &load_dataset, py::arg("path"));
    m.def("save_dataset_csv", &save_dataset_csv, py::arg("dataset"), py::arg("path"));
    m.def("impute_missing", &impute_missing, py::arg("dataset"));
    m.def("flatten",
          [](const Dataset& ds, const std::string& view) {
              const DesignMatrix dm = flatten(ds, view_from_string(view));
              return py::make_tuple(dm.values, dm.column_names);
          },
          py::arg("dataset"), py::arg("view") = "all",
          "Flatten to (values, column_names); views: all, temporal_only, static_plus_day0");

    m.def("auc", &auc, py::arg("scores"), py::arg("labels"),
          "Mann-Whitney AUC with ties counted as half");

    m.def("cross_validate",
          [](const Dataset& imputed, const std::string& method, const std::string& task,
             const std::string& view, int trials, int folds, std::uint64_t seed) {
              return json_to_py(to_json(cross_validate(imputed, method,
                                                       task_from_string(task),
                                                       view_from_string(view), trials, folds,
                                                       seed)));
          },
          py::arg("dataset"), py::arg("method"), py::arg("task") = "mor",
          py::arg("view") = "all", py::arg("trials") = 5, py::arg("folds") = 5,
          py::arg("seed") = 0);

    m.def("run_benchmark",
          [](const Dataset& imputed,
             const std::vector<std::tuple<std::string, std::string, std::string>>& cells,
             int trials, int folds, std::uint64_t seed, int threads) {
              std::vector<BenchCell> cs;
              for (const auto& [method, view, task] : cells)
                  cs.push_back({method, view_from_string(view), task_from_string(task)});
              return json_to_py(run_benchmark(imputed, cs, trials, folds, seed, threads));
          },
          py::arg("dataset"), py::arg("cells"), py::arg("trials") = 5, py::arg("folds") = 5,
          py::arg("seed") = 0, py::arg("threads") = 1,
          "cells: list of (method, view, task) triples");

    m.def("distill", &distill_run, py::arg("dataset"), py::arg("teacher") = "dnn",
          py::arg("pipeline") = "p2", py::arg("task") = "mor", py::arg("view") = "all",
          py::arg("student") = "gbt", py::arg("seed") = 0,
          "Train a teacher and distill it into a tree student; returns model, fidelity and "
          "importances");

    m.def("gbt_fit_export_dot",
          [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
             const std::vector<std::string>& names, int stage, int max_depth, int n_stages,
             double shrinkage, int min_samples_split, std::uint64_t seed) {
              const GbtEnsemble e =
                  gbt_fit(X, y, make_tree_config(max_depth, n_stages, shrinkage,
                                                 min_samples_split, seed));
              if (stage < 0 || stage >= static_cast<int>(e.stages.size()))
                  throw std::invalid_argument("stage out of range");
              return export_dot(e.stages[static_cast<std::size_t>(stage)], names);
          },
          py::arg("X"), py::arg("y"), py::arg("feature_names") = std::vector<std::string>{},
          py::arg("stage") = 0, py::arg("max_depth") = 3, py::arg("n_stages") = 100,
          py::arg("shrinkage") = 0.1, py::arg("min_samples_split") = 2, py::arg("seed") = 0,
          "Fit a GBT and render one stage as DOT");

    m.def("gradient_check_mlp", &gradient_check_mlp, py::arg("d_in"), py::arg("hidden"),
          py::arg("n_samples"), py::arg("seed"), py::arg("eps") = 1e-5);
    m.def("gradient_check_sda", &gradient_check_sda, py::arg("d_in"), py::arg("hidden"),
          py::arg("noise_rate"), py::arg("n_samples"), py::arg("seed"), py::arg("eps") = 1e-5);
    m.def("gradient_check_lstm", &gradient_check_lstm, py::arg("p"), py::arg("h"), py::arg("t"),
          py::arg("n_samples"), py::arg("seed"), py::arg("eps") = 1e-5);
}
