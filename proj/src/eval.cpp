#include "mimic/eval.hpp"
#include "mimic/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace mimic {

double auc(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels) {
    const auto n = scores.size();
    if (n != labels.size()) throw std::invalid_argument("auc: size mismatch");
    long n_pos = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (labels(i) != 0.0 && labels(i) != 1.0)
            throw std::invalid_argument("auc: labels must be binary");
        if (labels(i) == 1.0) ++n_pos;
    }
    const long n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) throw std::invalid_argument("auc: single-class labels");

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return scores(a) < scores(b); });

    // rank-sum with average ranks for ties
    double rank_sum_pos = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores(order[j + 1]) == scores(order[i])) ++j;
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k)
            if (labels(order[k]) == 1.0) rank_sum_pos += avg_rank;
        i = j + 1;
    }
    const double np = static_cast<double>(n_pos);
    return (rank_sum_pos - np * (np + 1) / 2.0) / (np * static_cast<double>(n_neg));
}

std::string MethodSpec::group() const {
    switch (family) {
    case Family::logreg:
    case Family::linsvm:
    case Family::dt:
    case Family::gbt: return "Baseline";
    case Family::nn:
    case Family::lr_nn: return "NN-based";
    default: return "Mimic";
    }
}

MethodSpec parse_method(const std::string& id) {
    MethodSpec s;
    s.id = id;
    if (id == "logreg") s.family = MethodSpec::Family::logreg;
    else if (id == "linsvm") s.family = MethodSpec::Family::linsvm;
    else if (id == "dt") s.family = MethodSpec::Family::dt;
    else if (id == "gbt") s.family = MethodSpec::Family::gbt;
    else if (id == "dnn" || id == "sda" || id == "lstm") {
        s.family = MethodSpec::Family::nn;
        s.teacher = teacher_from_string(id);
    } else if (id.rfind("lr-", 0) == 0) {
        s.family = MethodSpec::Family::lr_nn;
        s.teacher = teacher_from_string(id.substr(3));
    } else if (id.rfind("gbtmimic-", 0) == 0 || id.rfind("dtmimic-", 0) == 0) {
        s.family = MethodSpec::Family::mimic;
        s.student = id[0] == 'g' ? StudentKind::gbt : StudentKind::dt;
        const std::string rest = id.substr(id.find('-') + 1);
        const auto dash = rest.rfind('-');
        if (dash == std::string::npos)
            throw std::invalid_argument("bad mimic method id '" + id +
                                        "' (expected <kind>mimic-<teacher>-<p1|p2>)");
        s.teacher = teacher_from_string(rest.substr(0, dash));
        const std::string p = rest.substr(dash + 1);
        if (p == "p1") s.pipeline = Pipeline::p1;
        else if (p == "p2") s.pipeline = Pipeline::p2;
        else throw std::invalid_argument("bad pipeline '" + p + "' in method id '" + id + "'");
    } else {
        throw std::invalid_argument("unknown method id '" + id + "'");
    }
    return s;
}

namespace {

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& X, const std::vector<int>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
    return out;
}

Eigen::VectorXd take(const Eigen::VectorXd& y, const std::vector<int>& rows) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Eigen::Index>(i)) = y(rows[i]);
    return out;
}

struct FoldData {
    Eigen::MatrixXd X_tr, X_te;     // design-matrix view
    Eigen::MatrixXd Xts_tr, Xts_te; // temporal tensor rows
    Eigen::VectorXd y_tr;
    int p = 0, t = 0;
};

// trains the named method on the fold and scores the held-out rows;
// fills *importance for tree-structured models
Eigen::VectorXd fit_and_score(const MethodSpec& m, const FoldData& fd, std::uint64_t sub_seed,
                              Eigen::VectorXd* importance) {
    const DesignMatrix dm_tr{fd.X_tr, {}, {}};
    const TeacherInputs tin{fd.X_tr, fd.Xts_tr, fd.p, fd.t};
    const TeacherInputs tin_te{fd.X_te, fd.Xts_te, fd.p, fd.t};

    switch (m.family) {
    case MethodSpec::Family::logreg: {
        LinearConfig cfg;
        cfg.seed = sub_seed;
        return linear_predict(train_logreg(fd.X_tr, fd.y_tr, cfg), fd.X_te);
    }
    case MethodSpec::Family::linsvm: {
        LinearConfig cfg;
        cfg.seed = sub_seed;
        return linear_predict(train_linsvm(fd.X_tr, fd.y_tr, cfg), fd.X_te);
    }
    case MethodSpec::Family::dt: {
        TreeConfig cfg;
        cfg.max_depth = -1;
        cfg.seed = sub_seed;
        const Tree t = cart_fit(fd.X_tr, fd.y_tr, cfg, TreeKind::classifier_gini);
        if (importance) *importance = feature_importance(t);
        return tree_predict(t, fd.X_te);
    }
    case MethodSpec::Family::gbt: {
        TreeConfig cfg;
        cfg.seed = sub_seed;
        const GbtEnsemble e = gbt_fit(fd.X_tr, fd.y_tr, cfg);
        if (importance) *importance = feature_importance(e);
        return gbt_predict(e, fd.X_te);
    }
    case MethodSpec::Family::nn: {
        TrainConfig cfg;
        cfg.seed = sub_seed;
        if (m.teacher == TeacherKind::lstm) cfg.optimizer = Optimizer::rmsprop;
        const TrainedTeacher t = train_teacher({m.teacher, false, cfg}, tin, fd.y_tr);
        return predict_soft(t, tin_te);
    }
    case MethodSpec::Family::lr_nn: {
        TrainConfig cfg;
        cfg.seed = sub_seed;
        if (m.teacher == TeacherKind::lstm) cfg.optimizer = Optimizer::rmsprop;
        const TrainedTeacher t = train_teacher({m.teacher, true, cfg}, tin, fd.y_tr);
        LinearConfig lr_cfg;
        lr_cfg.seed = sub_seed;
        const LinearModel lr = train_logreg(extract_features(t, tin), fd.y_tr, lr_cfg);
        return linear_predict(lr, extract_features(t, tin_te));
    }
    default: {
        TrainConfig tcfg;
        tcfg.seed = sub_seed;
        if (m.teacher == TeacherKind::lstm) tcfg.optimizer = Optimizer::rmsprop;
        TreeConfig scfg;
        scfg.seed = sub_seed;
        const TeacherSpec spec{m.teacher, m.pipeline == Pipeline::p1, tcfg};
        const MimicModel mm = m.pipeline == Pipeline::p1
                                  ? distill_pipeline1(dm_tr, tin, fd.y_tr, spec, scfg, m.student)
                                  : distill_pipeline2(dm_tr, tin, fd.y_tr, spec, scfg, m.student);
        if (importance) {
            *importance = std::holds_alternative<GbtEnsemble>(mm.student)
                              ? feature_importance(std::get<GbtEnsemble>(mm.student))
                              : feature_importance(std::get<Tree>(mm.student));
        }
        return mimic_predict_clamped(mm, fd.X_te);
    }
    }
}

bool method_has_importance(const MethodSpec& m) {
    return m.family == MethodSpec::Family::dt || m.family == MethodSpec::Family::gbt ||
           m.family == MethodSpec::Family::mimic;
}

} // namespace

std::vector<std::vector<int>> cv_partition(int n_samples, int folds, std::uint64_t trial_seed) {
    if (n_samples < folds || folds < 2)
        throw std::invalid_argument("cv_partition: need n_samples >= folds >= 2");
    std::vector<int> perm(static_cast<std::size_t>(n_samples));
    std::iota(perm.begin(), perm.end(), 0);
    auto rng = make_rng(trial_seed);
    std::shuffle(perm.begin(), perm.end(), rng);

    std::vector<std::vector<int>> out(static_cast<std::size_t>(folds));
    std::size_t offset = 0;
    for (int fold = 0; fold < folds; ++fold) {
        const std::size_t size =
            static_cast<std::size_t>(n_samples / folds) + (fold < n_samples % folds ? 1u : 0u);
        out[static_cast<std::size_t>(fold)].assign(perm.begin() + static_cast<long>(offset),
                                                   perm.begin() + static_cast<long>(offset + size));
        offset += size;
    }
    return out;
}

CvResult cross_validate(const Dataset& imputed, const std::string& method, Task task,
                        FeatureView view, int trials, int folds, std::uint64_t seed,
                        std::vector<Eigen::VectorXd>* fold_importances) {
    if (trials < 1 || folds < 2) throw std::invalid_argument("cross_validate: need trials>=1, folds>=2");
    if (imputed.any_missing())
        throw std::invalid_argument("cross_validate: dataset must be imputed first");
    const MethodSpec spec = parse_method(method);
    const auto n = static_cast<int>(imputed.n());
    if (n < folds) throw std::invalid_argument("cross_validate: fewer samples than folds");

    const DesignMatrix dm = flatten(imputed, view);
    const Eigen::VectorXd& y = imputed.labels.at(task);
    const Eigen::MatrixXd& X_ts = imputed.temporal;

    CvResult res;
    res.method_id = method;
    res.task = task;
    res.view = view;
    res.trials = trials;
    res.folds = folds;

    const std::uint64_t cell_key =
        derive_seed(seed, {hash64(method), static_cast<std::uint64_t>(task),
                           static_cast<std::uint64_t>(view)});
    for (int trial = 0; trial < trials; ++trial) {
        const auto parts = cv_partition(
            n, folds, derive_seed(cell_key, {hash64("shuffle"), static_cast<std::uint64_t>(trial)}));

        for (int fold = 0; fold < folds; ++fold) {
            const std::vector<int>& test = parts[static_cast<std::size_t>(fold)];
            std::vector<int> train;
            train.reserve(static_cast<std::size_t>(n) - test.size());
            for (int f = 0; f < folds; ++f)
                if (f != fold)
                    train.insert(train.end(), parts[static_cast<std::size_t>(f)].begin(),
                                 parts[static_cast<std::size_t>(f)].end());

            const Eigen::VectorXd y_te = take(y, test);
            const bool single_class = (y_te.array() == y_te(0)).all();
            if (single_class) {
                res.fold_aucs.push_back(std::numeric_limits<double>::quiet_NaN());
                res.skipped_folds.push_back(trial * folds + fold);
                continue;
            }

            FoldData fd{take_rows(dm.values, train), take_rows(dm.values, test),
                        take_rows(X_ts, train),      take_rows(X_ts, test),
                        take(y, train),              imputed.p(),
                        imputed.t_steps};
            const std::uint64_t sub_seed = derive_seed(
                cell_key, {static_cast<std::uint64_t>(trial), static_cast<std::uint64_t>(fold)});
            Eigen::VectorXd imp;
            const Eigen::VectorXd scores =
                fit_and_score(spec, fd, sub_seed, fold_importances ? &imp : nullptr);
            res.fold_aucs.push_back(auc(scores, y_te));
            if (fold_importances && method_has_importance(spec)) fold_importances->push_back(imp);
        }
    }

    double sum = 0;
    long valid = 0;
    for (double a : res.fold_aucs)
        if (std::isfinite(a)) {
            sum += a;
            ++valid;
        }
    res.auc_mean = valid > 0 ? sum / static_cast<double>(valid) : 0.0;
    double ss = 0;
    for (double a : res.fold_aucs)
        if (std::isfinite(a)) ss += (a - res.auc_mean) * (a - res.auc_mean);
    res.auc_std = valid > 1 ? std::sqrt(ss / static_cast<double>(valid - 1)) : 0.0;
    return res;
}

nlohmann::ordered_json to_json(const CvResult& r) {
    nlohmann::ordered_json j;
    j["method"] = r.method_id;
    j["view"] = to_string(r.view);
    j["task"] = to_string(r.task);
    j["trials"] = r.trials;
    j["folds"] = r.folds;
    j["auc_mean"] = r.auc_mean;
    j["auc_std"] = r.auc_std;
    j["fold_aucs"] = r.fold_aucs; // NaN serializes as null
    j["skipped_folds"] = r.skipped_folds;
    return j;
}

nlohmann::ordered_json run_benchmark(const Dataset& imputed, const std::vector<BenchCell>& cells,
                                     int trials, int folds, std::uint64_t seed, int n_threads) {
    struct CellOut {
        std::optional<CvResult> result;
        std::string error;
    };
    std::vector<CellOut> outs(cells.size());

    auto run_cell = [&](std::size_t i) {
        try {
            outs[i].result =
                cross_validate(imputed, cells[i].method, cells[i].task, cells[i].view, trials,
                               folds, seed);
        } catch (const std::exception& e) {
            outs[i].error = e.what();
        }
    };

    if (n_threads <= 1 || cells.size() <= 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        const auto workers = std::min<std::size_t>(static_cast<std::size_t>(n_threads), cells.size());
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1))
                    run_cell(i);
            });
        for (auto& th : pool) th.join();
    }

    nlohmann::ordered_json report;
    report["config_echo"]["seed"] = seed;
    report["config_echo"]["trials"] = trials;
    report["config_echo"]["folds"] = folds;
    auto& jcells = report["config_echo"]["cells"] = nlohmann::ordered_json::array();
    for (const auto& c : cells)
        jcells.push_back({{"method", c.method}, {"view", to_string(c.view)}, {"task", to_string(c.task)}});

    report["cells"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (outs[i].result) {
            report["cells"].push_back(to_json(*outs[i].result));
        } else {
            nlohmann::ordered_json j;
            j["method"] = cells[i].method;
            j["view"] = to_string(cells[i].view);
            j["task"] = to_string(cells[i].task);
            j["error"] = outs[i].error;
            report["cells"].push_back(j);
        }
    }

    report["diffs"] = nlohmann::ordered_json::array();
    auto mean_of = [&](std::size_t i) -> std::optional<double> {
        if (!outs[i].result) return std::nullopt;
        return outs[i].result->auc_mean;
    };
    for (std::size_t i = 0; i < cells.size(); ++i)
        for (std::size_t j = i + 1; j < cells.size(); ++j) {
            const auto a = mean_of(i), b = mean_of(j);
            if (!a || !b) continue;
            if (cells[i].method == cells[j].method && cells[i].task == cells[j].task &&
                cells[i].view != cells[j].view) {
                report["diffs"].push_back({{"kind", "view_diff"},
                                           {"method", cells[i].method},
                                           {"task", to_string(cells[i].task)},
                                           {"view_a", to_string(cells[i].view)},
                                           {"view_b", to_string(cells[j].view)},
                                           {"auc_diff", *a - *b}});
            } else if (cells[i].task == cells[j].task && cells[i].view == cells[j].view) {
                // GBTmimic minus DTmimic for matching teacher and pipeline
                MethodSpec ma, mb;
                try {
                    ma = parse_method(cells[i].method);
                    mb = parse_method(cells[j].method);
                } catch (const std::exception&) {
                    continue;
                }
                if (ma.family == MethodSpec::Family::mimic && mb.family == MethodSpec::Family::mimic &&
                    ma.teacher == mb.teacher && ma.pipeline == mb.pipeline &&
                    ma.student != mb.student) {
                    const bool a_is_gbt = ma.student == StudentKind::gbt;
                    report["diffs"].push_back(
                        {{"kind", "mimic_diff"},
                         {"teacher", to_string(ma.teacher)},
                         {"pipeline", to_string(ma.pipeline)},
                         {"task", to_string(cells[i].task)},
                         {"view", to_string(cells[i].view)},
                         {"auc_diff", a_is_gbt ? *a - *b : *b - *a}});
                }
            }
        }
    return report;
}

std::string render_benchmark_table(const nlohmann::ordered_json& report) {
    std::ostringstream os;
    const char* groups[] = {"Baseline", "NN-based", "Mimic"};
    for (const char* g : groups) {
        bool header = false;
        for (const auto& c : report.at("cells")) {
            if (c.contains("error")) continue;
            const MethodSpec spec = parse_method(c.at("method").get<std::string>());
            if (spec.group() != g) continue;
            if (!header) {
                os << "== " << g << " ==\n";
                header = true;
            }
            char line[160];
            std::snprintf(line, sizeof(line), "%-22s %-18s %-4s AUC %.4f (%.4f)\n",
                          c.at("method").get<std::string>().c_str(),
                          c.at("view").get<std::string>().c_str(),
                          c.at("task").get<std::string>().c_str(), c.at("auc_mean").get<double>(),
                          c.at("auc_std").get<double>());
            os << line;
        }
    }
    bool dheader = false;
    for (const auto& d : report.at("diffs")) {
        if (!dheader) {
            os << "== Diffs ==\n";
            dheader = true;
        }
        if (d.at("kind") == "view_diff") {
            char line[200];
            std::snprintf(line, sizeof(line), "%-22s %-4s %s - %s: %+.4f\n",
                          d.at("method").get<std::string>().c_str(),
                          d.at("task").get<std::string>().c_str(),
                          d.at("view_a").get<std::string>().c_str(),
                          d.at("view_b").get<std::string>().c_str(),
                          d.at("auc_diff").get<double>());
            os << line;
        } else {
            char line[200];
            std::snprintf(line, sizeof(line), "GBTmimic - DTmimic (%s, %s, %s): %+.4f\n",
                          d.at("teacher").get<std::string>().c_str(),
                          d.at("pipeline").get<std::string>().c_str(),
                          d.at("task").get<std::string>().c_str(), d.at("auc_diff").get<double>());
            os << line;
        }
    }
    return os.str();
}

ImportanceReport aggregate_importance(const std::vector<Eigen::VectorXd>& per_model_importance,
                                      const std::vector<std::string>& feature_names, int k) {
    if (per_model_importance.empty())
        throw std::invalid_argument("aggregate_importance: empty model list");
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(per_model_importance.front().size());
    for (const auto& v : per_model_importance) {
        if (v.size() != acc.size())
            throw std::invalid_argument("aggregate_importance: feature-space mismatch");
        const double s = v.sum();
        acc += s > 0 ? (v / s).eval() : v;
    }
    acc /= static_cast<double>(per_model_importance.size());
    const double total = acc.sum();
    if (total > 0) acc /= total;

    ImportanceReport rep;
    rep.feature_names = feature_names;
    rep.scores = acc;
    std::vector<int> order(static_cast<std::size_t>(acc.size()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return acc(a) > acc(b); });
    const int kk = std::min<int>(k, static_cast<int>(order.size()));
    for (int i = 0; i < kk; ++i) {
        const int f = order[static_cast<std::size_t>(i)];
        rep.top_k.emplace_back(f < static_cast<int>(feature_names.size())
                                   ? feature_names[static_cast<std::size_t>(f)]
                                   : "x" + std::to_string(f),
                               acc(f));
    }
    return rep;
}

nlohmann::ordered_json to_json(const ImportanceReport& r) {
    nlohmann::ordered_json j;
    j["features"] = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < r.scores.size(); ++i)
        j["features"].push_back({{"name", r.feature_names[static_cast<std::size_t>(i)]},
                                 {"score", r.scores(i)}});
    j["top_k"] = nlohmann::ordered_json::array();
    for (const auto& [name, score] : r.top_k)
        j["top_k"].push_back({{"name", name}, {"score", score}});
    return j;
}

} // namespace mimic
