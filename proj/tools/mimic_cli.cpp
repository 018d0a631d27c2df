// Single-binary frontend: synth / train / distill / bench / importance /
// export-tree / gradcheck. Every subcommand writes run.json with the fully
// resolved config so a run can be reproduced from its output directory alone.
//
// Exit codes: 0 success, 1 validation error (message names the field),
// 2 runtime failure.

#include "mimic/data.hpp"
#include "mimic/distill.hpp"
#include "mimic/eval.hpp"
#include "mimic/serialize.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

ordered_json load_config(const std::string& path) {
    if (path.empty()) return ordered_json::object();
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("config: cannot open '" + path + "'");
    ordered_json j;
    f >> j;
    if (!j.is_object()) throw std::invalid_argument("config: top-level JSON object required");
    return j;
}

// flags win over the config file, the config file wins over defaults
template <class T>
void overlay(const CLI::Option* opt, const ordered_json& cfg, const std::string& field, T& value) {
    if (opt && opt->count() > 0) return;
    if (cfg.contains(field)) value = cfg.at(field).get<T>();
}

void write_json(const fs::path& path, const ordered_json& j) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    f << j.dump(2) << "\n";
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    f << text;
}

ordered_json read_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("model: cannot open '" + path + "'");
    ordered_json j;
    f >> j;
    return j;
}

fs::path prepare_out(const std::string& dir) {
    fs::path p(dir);
    fs::create_directories(p);
    return p;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"interpretable mimic learning toolkit"};
    app.require_subcommand(1);

    // shared flags, registered per subcommand
    struct Shared {
        std::string config;
        std::string out = ".";
        std::uint64_t seed = 0;
        CLI::Option* seed_opt = nullptr;
    };
    auto add_shared = [](CLI::App* cmd, Shared& s) {
        cmd->add_option("--config", s.config, "JSON config file (flags override it)");
        cmd->add_option("-o,--out", s.out, "output directory");
        s.seed_opt = cmd->add_option("--seed", s.seed, "root seed");
    };

    int exit_code = 0;

    // ---- synth ----
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset CSV");
    Shared synth_sh;
    add_shared(synth, synth_sh);
    mimic::SynthConfig scfg;
    auto* o_n = synth->add_option("--n_samples", scfg.n_samples);
    auto* o_q = synth->add_option("--q_static", scfg.q_static);
    auto* o_p = synth->add_option("--p_temporal", scfg.p_temporal);
    auto* o_t = synth->add_option("--t_steps", scfg.t_steps);
    auto* o_mr = synth->add_option("--missing_rate", scfg.missing_rate);
    auto* o_nit = synth->add_option("--n_informative_temporal", scfg.n_informative_temporal);
    auto* o_nis = synth->add_option("--n_informative_static", scfg.n_informative_static);
    auto* o_ln = synth->add_option("--label_noise", scfg.label_noise);
    synth->callback([&] {
        const ordered_json cfg = load_config(synth_sh.config);
        overlay(o_n, cfg, "n_samples", scfg.n_samples);
        overlay(o_q, cfg, "q_static", scfg.q_static);
        overlay(o_p, cfg, "p_temporal", scfg.p_temporal);
        overlay(o_t, cfg, "t_steps", scfg.t_steps);
        overlay(o_mr, cfg, "missing_rate", scfg.missing_rate);
        overlay(o_nit, cfg, "n_informative_temporal", scfg.n_informative_temporal);
        overlay(o_nis, cfg, "n_informative_static", scfg.n_informative_static);
        overlay(o_ln, cfg, "label_noise", scfg.label_noise);
        overlay(synth_sh.seed_opt, cfg, "seed", synth_sh.seed);
        scfg.seed = synth_sh.seed;
        scfg.validate();

        const fs::path out = prepare_out(synth_sh.out);
        const mimic::Dataset ds = mimic::synth_generate(scfg);
        mimic::save_dataset_csv(ds, (out / "data.csv").string());

        ordered_json run;
        run["command"] = "synth";
        run["config"] = {{"n_samples", scfg.n_samples},
                         {"q_static", scfg.q_static},
                         {"p_temporal", scfg.p_temporal},
                         {"t_steps", scfg.t_steps},
                         {"missing_rate", scfg.missing_rate},
                         {"n_informative_temporal", scfg.n_informative_temporal},
                         {"n_informative_static", scfg.n_informative_static},
                         {"label_noise", scfg.label_noise},
                         {"seed", scfg.seed}};
        run["outputs"] = {"data.csv"};
        write_json(out / "run.json", run);
    });

    // ---- train ----
    auto* train = app.add_subcommand("train", "train a single model on a dataset CSV");
    Shared train_sh;
    add_shared(train, train_sh);
    std::string tr_data, tr_method = "gbt", tr_task = "mor", tr_view = "all";
    mimic::TrainConfig tr_nn;
    mimic::TreeConfig tr_tree;
    train->add_option("--data", tr_data, "dataset CSV")->required();
    auto* o_meth = train->add_option("--method", tr_method,
                                     "logreg|linsvm|dt|gbt|dnn|sda|lstm");
    auto* o_task = train->add_option("--task", tr_task, "mor|vfd");
    auto* o_view = train->add_option("--view", tr_view, "all|temporal_only|static_plus_day0");
    auto* o_ep = train->add_option("--epochs", tr_nn.epochs);
    auto* o_lr = train->add_option("--learning_rate", tr_nn.learning_rate);
    auto* o_bs = train->add_option("--batch_size", tr_nn.batch_size);
    auto* o_ns = train->add_option("--n_stages", tr_tree.n_stages);
    auto* o_sk = train->add_option("--shrinkage", tr_tree.shrinkage);
    auto* o_md = train->add_option("--max_depth", tr_tree.max_depth);
    train->callback([&] {
        const ordered_json cfg = load_config(train_sh.config);
        overlay(o_meth, cfg, "method", tr_method);
        overlay(o_task, cfg, "task", tr_task);
        overlay(o_view, cfg, "view", tr_view);
        overlay(o_ep, cfg, "epochs", tr_nn.epochs);
        overlay(o_lr, cfg, "learning_rate", tr_nn.learning_rate);
        overlay(o_bs, cfg, "batch_size", tr_nn.batch_size);
        overlay(o_ns, cfg, "n_stages", tr_tree.n_stages);
        overlay(o_sk, cfg, "shrinkage", tr_tree.shrinkage);
        overlay(o_md, cfg, "max_depth", tr_tree.max_depth);
        overlay(train_sh.seed_opt, cfg, "seed", train_sh.seed);
        tr_nn.seed = train_sh.seed;
        tr_tree.seed = train_sh.seed;
        tr_nn.validate();
        tr_tree.validate();
        const mimic::MethodSpec spec = mimic::parse_method(tr_method); // validates the name
        const mimic::Task task = mimic::task_from_string(tr_task);
        const mimic::FeatureView view = mimic::view_from_string(tr_view);

        const mimic::Dataset ds = mimic::impute_missing(mimic::load_dataset(tr_data));
        const mimic::DesignMatrix dm = mimic::flatten(ds, view);
        const Eigen::VectorXd& y = ds.labels.at(task);

        const fs::path out = prepare_out(train_sh.out);
        ordered_json model_json;
        ordered_json log;
        Eigen::VectorXd scores;
        switch (spec.family) {
        case mimic::MethodSpec::Family::logreg: {
            mimic::LinearConfig lc;
            lc.seed = tr_nn.seed;
            const mimic::LinearModel m = mimic::train_logreg(dm.values, y, lc);
            model_json = mimic::to_json(m);
            log["loss_history"] = m.loss_history;
            log["converged"] = m.converged;
            scores = mimic::linear_predict(m, dm.values);
            break;
        }
        case mimic::MethodSpec::Family::linsvm: {
            mimic::LinearConfig lc;
            lc.seed = tr_nn.seed;
            const mimic::LinearModel m = mimic::train_linsvm(dm.values, y, lc);
            model_json = mimic::to_json(m);
            log["converged"] = m.converged;
            scores = mimic::linear_predict(m, dm.values);
            break;
        }
        case mimic::MethodSpec::Family::dt: {
            mimic::TreeConfig tc = tr_tree;
            if (o_md->count() == 0 && !cfg.contains("max_depth")) tc.max_depth = -1;
            const mimic::Tree t =
                mimic::cart_fit(dm.values, y, tc, mimic::TreeKind::classifier_gini);
            model_json = mimic::to_json(t);
            log["n_leaves"] = t.n_leaves();
            log["depth"] = t.depth();
            scores = mimic::tree_predict(t, dm.values);
            break;
        }
        case mimic::MethodSpec::Family::gbt: {
            const mimic::GbtEnsemble e = mimic::gbt_fit(dm.values, y, tr_tree);
            model_json = mimic::to_json(e);
            log["train_mse"] = e.train_mse;
            scores = mimic::gbt_predict(e, dm.values);
            break;
        }
        default: {
            if (spec.family != mimic::MethodSpec::Family::nn)
                throw std::invalid_argument(
                    "method: train handles single models; use 'distill' for mimic methods");
            mimic::TrainConfig nn = tr_nn;
            if (spec.teacher == mimic::TeacherKind::lstm) nn.optimizer = mimic::Optimizer::rmsprop;
            const mimic::TeacherInputs in{dm.values, ds.temporal, ds.p(), ds.t_steps};
            const mimic::TrainedTeacher t = mimic::train_teacher({spec.teacher, false, nn}, in, y);
            if (std::holds_alternative<mimic::MlpModel>(t.model))
                model_json = mimic::to_json(std::get<mimic::MlpModel>(t.model));
            else if (std::holds_alternative<mimic::SdaModel>(t.model))
                model_json = mimic::to_json(std::get<mimic::SdaModel>(t.model));
            else
                model_json = mimic::to_json(std::get<mimic::LstmModel>(t.model));
            scores = mimic::predict_soft(t, in);
            break;
        }
        }
        log["train_auc"] = mimic::auc(scores, y);
        write_json(out / "model.json", model_json);
        write_json(out / "train_log.json", log);

        ordered_json run;
        run["command"] = "train";
        run["config"] = {{"data", tr_data},     {"method", tr_method},
                         {"task", tr_task},     {"view", tr_view},
                         {"epochs", tr_nn.epochs}, {"learning_rate", tr_nn.learning_rate},
                         {"batch_size", tr_nn.batch_size}, {"n_stages", tr_tree.n_stages},
                         {"shrinkage", tr_tree.shrinkage}, {"max_depth", tr_tree.max_depth},
                         {"seed", train_sh.seed}};
        run["outputs"] = {"model.json", "train_log.json"};
        write_json(out / "run.json", run);
    });

    // ---- distill ----
    auto* distill = app.add_subcommand("distill", "run a mimic pipeline end to end");
    Shared di_sh;
    add_shared(distill, di_sh);
    std::string di_data, di_teacher = "dnn", di_pipeline = "p2", di_student = "gbt",
                di_task = "mor", di_view = "all";
    mimic::TrainConfig di_nn;
    mimic::TreeConfig di_tree;
    distill->add_option("--data", di_data, "dataset CSV")->required();
    auto* d_te = distill->add_option("--teacher", di_teacher, "dnn|sda|lstm");
    auto* d_pi = distill->add_option("--pipeline", di_pipeline, "p1|p2");
    auto* d_st = distill->add_option("--student", di_student, "gbt|dt");
    auto* d_ta = distill->add_option("--task", di_task, "mor|vfd");
    auto* d_vi = distill->add_option("--view", di_view, "all|temporal_only|static_plus_day0");
    auto* d_ep = distill->add_option("--epochs", di_nn.epochs);
    auto* d_lr = distill->add_option("--learning_rate", di_nn.learning_rate);
    auto* d_ns = distill->add_option("--n_stages", di_tree.n_stages);
    auto* d_sk = distill->add_option("--shrinkage", di_tree.shrinkage);
    distill->callback([&] {
        const ordered_json cfg = load_config(di_sh.config);
        overlay(d_te, cfg, "teacher", di_teacher);
        overlay(d_pi, cfg, "pipeline", di_pipeline);
        overlay(d_st, cfg, "student", di_student);
        overlay(d_ta, cfg, "task", di_task);
        overlay(d_vi, cfg, "view", di_view);
        overlay(d_ep, cfg, "epochs", di_nn.epochs);
        overlay(d_lr, cfg, "learning_rate", di_nn.learning_rate);
        overlay(d_ns, cfg, "n_stages", di_tree.n_stages);
        overlay(d_sk, cfg, "shrinkage", di_tree.shrinkage);
        overlay(di_sh.seed_opt, cfg, "seed", di_sh.seed);

        if (di_pipeline != "p1" && di_pipeline != "p2")
            throw std::invalid_argument("pipeline: expected p1|p2, got '" + di_pipeline + "'");
        if (di_student != "gbt" && di_student != "dt")
            throw std::invalid_argument("student: expected gbt|dt, got '" + di_student + "'");
        di_nn.seed = di_sh.seed;
        di_tree.seed = di_sh.seed;
        di_nn.validate();
        di_tree.validate();
        const mimic::TeacherKind teacher = mimic::teacher_from_string(di_teacher);
        const mimic::Task task = mimic::task_from_string(di_task);
        const mimic::FeatureView view = mimic::view_from_string(di_view);
        const bool p1 = di_pipeline == "p1";
        const mimic::StudentKind student =
            di_student == "gbt" ? mimic::StudentKind::gbt : mimic::StudentKind::dt;

        const mimic::Dataset ds = mimic::impute_missing(mimic::load_dataset(di_data));
        const mimic::DesignMatrix dm = mimic::flatten(ds, view);
        const Eigen::VectorXd& y = ds.labels.at(task);
        const mimic::TeacherInputs in{dm.values, ds.temporal, ds.p(), ds.t_steps};

        mimic::TrainConfig nn = di_nn;
        if (teacher == mimic::TeacherKind::lstm) nn.optimizer = mimic::Optimizer::rmsprop;
        const mimic::TeacherSpec spec{teacher, p1, nn};
        const mimic::MimicModel mm =
            p1 ? mimic::distill_pipeline1(dm, in, y, spec, di_tree, student)
               : mimic::distill_pipeline2(dm, in, y, spec, di_tree, student);

        // fidelity against the teacher's own soft scores on the training rows
        const mimic::TrainedTeacher t = mimic::train_teacher(spec, in, y);
        Eigen::VectorXd target;
        if (p1) {
            const Eigen::MatrixXd feats = mimic::extract_features(t, in);
            mimic::LinearConfig lr_cfg;
            lr_cfg.seed = nn.seed;
            target = mimic::linear_predict(mimic::train_logreg(feats, y, lr_cfg), feats);
        } else {
            target = mimic::predict_soft(t, in);
        }
        const mimic::FidelityReport rep =
            mimic::fidelity_report(mimic::mimic_predict(mm, dm.values), target);

        const fs::path out = prepare_out(di_sh.out);
        write_json(out / "mimic_model.json", mimic::to_json(mm));
        ordered_json fj;
        fj["mse"] = rep.mse;
        fj["pearson_r"] = rep.pearson_r;
        fj["rank_agreement"] = rep.rank_agreement;
        fj["student_train_auc"] = mimic::auc(mimic::mimic_predict_clamped(mm, dm.values), y);
        fj["teacher_train_auc"] = mimic::auc(target, y);
        write_json(out / "fidelity.json", fj);

        ordered_json run;
        run["command"] = "distill";
        run["config"] = {{"data", di_data},       {"teacher", di_teacher},
                         {"pipeline", di_pipeline}, {"student", di_student},
                         {"task", di_task},       {"view", di_view},
                         {"epochs", di_nn.epochs}, {"learning_rate", di_nn.learning_rate},
                         {"n_stages", di_tree.n_stages}, {"shrinkage", di_tree.shrinkage},
                         {"seed", di_sh.seed}};
        run["outputs"] = {"mimic_model.json", "fidelity.json"};
        write_json(out / "run.json", run);
    });

    // ---- bench ----
    auto* bench = app.add_subcommand("bench", "cross-validated benchmark matrix");
    Shared be_sh;
    add_shared(bench, be_sh);
    std::string be_data;
    std::vector<std::string> be_methods{"logreg", "gbt"};
    std::vector<std::string> be_views{"all"};
    std::vector<std::string> be_tasks{"mor"};
    int be_trials = 5, be_folds = 5, be_threads = 1;
    bench->add_option("--data", be_data, "dataset CSV")->required();
    auto* b_me = bench->add_option("--methods", be_methods, "method ids")->delimiter(',');
    auto* b_vi = bench->add_option("--views", be_views, "feature views")->delimiter(',');
    auto* b_ta = bench->add_option("--tasks", be_tasks, "tasks")->delimiter(',');
    auto* b_tr = bench->add_option("--trials", be_trials);
    auto* b_fo = bench->add_option("--folds", be_folds);
    auto* b_th = bench->add_option("--threads", be_threads);
    bench->callback([&] {
        const ordered_json cfg = load_config(be_sh.config);
        overlay(b_me, cfg, "methods", be_methods);
        overlay(b_vi, cfg, "views", be_views);
        overlay(b_ta, cfg, "tasks", be_tasks);
        overlay(b_tr, cfg, "trials", be_trials);
        overlay(b_fo, cfg, "folds", be_folds);
        overlay(b_th, cfg, "threads", be_threads);
        overlay(be_sh.seed_opt, cfg, "seed", be_sh.seed);
        if (be_trials < 1) throw std::invalid_argument("trials: must be >= 1");
        if (be_folds < 2) throw std::invalid_argument("folds: must be >= 2");
        if (be_threads < 1) throw std::invalid_argument("threads: must be >= 1");

        std::vector<mimic::BenchCell> cells;
        if (cfg.contains("cells")) {
            for (const auto& c : cfg.at("cells"))
                cells.push_back({c.at("method").get<std::string>(),
                                 mimic::view_from_string(c.at("view").get<std::string>()),
                                 mimic::task_from_string(c.at("task").get<std::string>())});
        } else {
            for (const auto& m : be_methods)
                for (const auto& v : be_views)
                    for (const auto& t : be_tasks)
                        cells.push_back({m, mimic::view_from_string(v),
                                         mimic::task_from_string(t)});
        }
        for (const auto& c : cells) mimic::parse_method(c.method); // validate early

        const mimic::Dataset ds = mimic::impute_missing(mimic::load_dataset(be_data));
        const ordered_json report =
            mimic::run_benchmark(ds, cells, be_trials, be_folds, be_sh.seed, be_threads);

        const fs::path out = prepare_out(be_sh.out);
        write_json(out / "report.json", report);
        write_text(out / "table.txt", mimic::render_benchmark_table(report));

        ordered_json run;
        run["command"] = "bench";
        run["config"] = {{"data", be_data},   {"trials", be_trials}, {"folds", be_folds},
                         {"threads", be_threads}, {"seed", be_sh.seed}};
        run["config"]["cells"] = report.at("config_echo").at("cells");
        run["outputs"] = {"report.json", "table.txt"};
        write_json(out / "run.json", run);
    });

    // ---- importance ----
    auto* imp = app.add_subcommand("importance", "aggregate CV fold importances");
    Shared im_sh;
    add_shared(imp, im_sh);
    std::string im_data, im_method = "gbt", im_task = "mor", im_view = "all";
    int im_trials = 5, im_folds = 5, im_topk = 10;
    imp->add_option("--data", im_data, "dataset CSV")->required();
    auto* i_me = imp->add_option("--method", im_method, "dt|gbt|gbtmimic-*|dtmimic-*");
    auto* i_ta = imp->add_option("--task", im_task);
    auto* i_vi = imp->add_option("--view", im_view);
    auto* i_tr = imp->add_option("--trials", im_trials);
    auto* i_fo = imp->add_option("--folds", im_folds);
    auto* i_tk = imp->add_option("--top_k", im_topk);
    imp->callback([&] {
        const ordered_json cfg = load_config(im_sh.config);
        overlay(i_me, cfg, "method", im_method);
        overlay(i_ta, cfg, "task", im_task);
        overlay(i_vi, cfg, "view", im_view);
        overlay(i_tr, cfg, "trials", im_trials);
        overlay(i_fo, cfg, "folds", im_folds);
        overlay(i_tk, cfg, "top_k", im_topk);
        overlay(im_sh.seed_opt, cfg, "seed", im_sh.seed);
        const mimic::MethodSpec spec = mimic::parse_method(im_method);
        if (spec.family != mimic::MethodSpec::Family::dt &&
            spec.family != mimic::MethodSpec::Family::gbt &&
            spec.family != mimic::MethodSpec::Family::mimic)
            throw std::invalid_argument("method: importance requires a tree-structured method");
        const mimic::Task task = mimic::task_from_string(im_task);
        const mimic::FeatureView view = mimic::view_from_string(im_view);

        const mimic::Dataset ds = mimic::impute_missing(mimic::load_dataset(im_data));
        std::vector<Eigen::VectorXd> fold_imps;
        const mimic::CvResult cv = mimic::cross_validate(ds, im_method, task, view, im_trials,
                                                         im_folds, im_sh.seed, &fold_imps);
        if (fold_imps.empty()) throw std::runtime_error("no fold produced a fitted model");
        const mimic::DesignMatrix dm = mimic::flatten(ds, view);
        const mimic::ImportanceReport rep =
            mimic::aggregate_importance(fold_imps, dm.column_names, im_topk);

        const fs::path out = prepare_out(im_sh.out);
        ordered_json ij = mimic::to_json(rep);
        ij["cv"] = mimic::to_json(cv);
        write_json(out / "importance.json", ij);

        ordered_json run;
        run["command"] = "importance";
        run["config"] = {{"data", im_data}, {"method", im_method}, {"task", im_task},
                         {"view", im_view}, {"trials", im_trials}, {"folds", im_folds},
                         {"top_k", im_topk}, {"seed", im_sh.seed}};
        run["outputs"] = {"importance.json"};
        write_json(out / "run.json", run);
    });

    // ---- export-tree ----
    auto* expt = app.add_subcommand("export-tree", "emit a DOT file for a serialized tree");
    Shared ex_sh;
    add_shared(expt, ex_sh);
    std::string ex_model;
    int ex_stage = 0;
    std::vector<std::string> ex_names;
    expt->add_option("--model", ex_model, "serialized tree/ensemble/mimic JSON")->required();
    auto* e_st = expt->add_option("--stage", ex_stage, "ensemble stage index");
    expt->add_option("--feature_names", ex_names, "column names")->delimiter(',');
    expt->callback([&] {
        const ordered_json cfg = load_config(ex_sh.config);
        overlay(e_st, cfg, "stage", ex_stage);
        const ordered_json mj = read_json(ex_model);
        if (!mj.contains("kind")) throw std::invalid_argument("model: missing 'kind' tag");
        const std::string kind = mj.at("kind").get<std::string>();

        mimic::Tree tree;
        if (kind == "tree") {
            tree = mimic::tree_from_json(mj);
        } else if (kind == "gbt") {
            const mimic::GbtEnsemble e = mimic::gbt_from_json(mj);
            if (ex_stage < 0 || ex_stage >= static_cast<int>(e.stages.size()))
                throw std::invalid_argument("stage: index out of range (ensemble has " +
                                            std::to_string(e.stages.size()) + " stages)");
            tree = e.stages[static_cast<std::size_t>(ex_stage)];
        } else if (kind == "mimic") {
            const mimic::MimicModel m = mimic::mimic_from_json(mj);
            if (std::holds_alternative<mimic::Tree>(m.student)) {
                tree = std::get<mimic::Tree>(m.student);
            } else {
                const auto& e = std::get<mimic::GbtEnsemble>(m.student);
                if (ex_stage < 0 || ex_stage >= static_cast<int>(e.stages.size()))
                    throw std::invalid_argument("stage: index out of range (ensemble has " +
                                                std::to_string(e.stages.size()) + " stages)");
                tree = e.stages[static_cast<std::size_t>(ex_stage)];
            }
        } else {
            throw std::invalid_argument("model: kind '" + kind + "' has no tree to export");
        }

        const fs::path out = prepare_out(ex_sh.out);
        write_text(out / "tree.dot", mimic::export_dot(tree, ex_names));

        ordered_json run;
        run["command"] = "export-tree";
        run["config"] = {{"model", ex_model}, {"stage", ex_stage}};
        run["outputs"] = {"tree.dot"};
        write_json(out / "run.json", run);
    });

    // ---- gradcheck ----
    auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient check");
    Shared gc_sh;
    add_shared(gc, gc_sh);
    std::string gc_model = "mlp";
    int gc_inputs = 7, gc_hidden = 5, gc_steps = 3, gc_samples = 6;
    double gc_noise = 0.2;
    auto* g_mo = gc->add_option("--model", gc_model, "mlp|sda|lstm");
    auto* g_in = gc->add_option("--inputs", gc_inputs, "input dimension");
    auto* g_hi = gc->add_option("--hidden", gc_hidden, "hidden units");
    auto* g_st = gc->add_option("--steps", gc_steps, "time steps (lstm)");
    auto* g_sa = gc->add_option("--samples", gc_samples, "batch rows");
    auto* g_no = gc->add_option("--noise", gc_noise, "masking rate (sda)");
    gc->callback([&] {
        const ordered_json cfg = load_config(gc_sh.config);
        overlay(g_mo, cfg, "model", gc_model);
        overlay(g_in, cfg, "inputs", gc_inputs);
        overlay(g_hi, cfg, "hidden", gc_hidden);
        overlay(g_st, cfg, "steps", gc_steps);
        overlay(g_sa, cfg, "samples", gc_samples);
        overlay(g_no, cfg, "noise", gc_noise);
        overlay(gc_sh.seed_opt, cfg, "seed", gc_sh.seed);
        if (gc_inputs < 1 || gc_hidden < 1 || gc_steps < 1 || gc_samples < 1)
            throw std::invalid_argument("inputs/hidden/steps/samples: must be >= 1");

        double err = 0;
        if (gc_model == "mlp")
            err = mimic::gradient_check_mlp(gc_inputs, {gc_hidden, gc_hidden}, gc_samples,
                                            gc_sh.seed);
        else if (gc_model == "sda")
            err = mimic::gradient_check_sda(gc_inputs, gc_hidden, gc_noise, gc_samples,
                                            gc_sh.seed);
        else if (gc_model == "lstm")
            err = mimic::gradient_check_lstm(gc_inputs, gc_hidden, gc_steps, gc_samples,
                                             gc_sh.seed);
        else
            throw std::invalid_argument("model: expected mlp|sda|lstm, got '" + gc_model + "'");

        std::cout << "max relative error: " << err << "\n";
        const fs::path out = prepare_out(gc_sh.out);
        ordered_json run;
        run["command"] = "gradcheck";
        run["config"] = {{"model", gc_model},   {"inputs", gc_inputs}, {"hidden", gc_hidden},
                         {"steps", gc_steps},   {"samples", gc_samples}, {"noise", gc_noise},
                         {"seed", gc_sh.seed}};
        run["result"] = {{"max_relative_error", err}};
        write_json(out / "run.json", run);
        if (err >= 1e-4) throw std::runtime_error("gradient check failed: max relative error " +
                                                  std::to_string(err));
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1; // flag/usage problems are validation errors
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return exit_code;
}
