#include "mimic/data.hpp"
#include "mimic/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mimic {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

double parse_cell(const std::string& cell, const std::string& col, std::size_t row) {
    double v = 0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last)
        throw std::invalid_argument("non-numeric cell in column '" + col + "', data row " +
                                    std::to_string(row) + ": '" + cell + "'");
    return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

std::string to_string(Task t) { return t == Task::mor ? "mor" : "vfd"; }

std::string to_string(FeatureView v) {
    switch (v) {
    case FeatureView::all: return "all";
    case FeatureView::temporal_only: return "temporal_only";
    default: return "static_plus_day0";
    }
}

Task task_from_string(const std::string& s) {
    if (s == "mor" || s == "MOR") return Task::mor;
    if (s == "vfd" || s == "VFD") return Task::vfd;
    throw std::invalid_argument("unknown task '" + s + "' (expected mor|vfd)");
}

FeatureView view_from_string(const std::string& s) {
    if (s == "all") return FeatureView::all;
    if (s == "temporal_only") return FeatureView::temporal_only;
    if (s == "static_plus_day0") return FeatureView::static_plus_day0;
    throw std::invalid_argument("unknown view '" + s + "'");
}

bool Dataset::any_missing() const {
    return statics.hasNaN() || temporal.hasNaN();
}

Dataset Dataset::subset(const std::vector<int>& rows) const {
    Dataset out = *this;
    const auto m = static_cast<Eigen::Index>(rows.size());
    out.statics.resize(m, statics.cols());
    out.temporal.resize(m, temporal.cols());
    out.static_mask.resize(m, static_mask.cols());
    out.temporal_mask.resize(m, temporal_mask.cols());
    for (auto& [task, y] : out.labels) y.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const int r = rows[static_cast<std::size_t>(i)];
        out.statics.row(i) = statics.row(r);
        out.temporal.row(i) = temporal.row(r);
        out.static_mask.row(i) = static_mask.row(r);
        out.temporal_mask.row(i) = temporal_mask.row(r);
        for (auto& [task, y] : out.labels) y(i) = labels.at(task)(r);
    }
    return out;
}

void SynthConfig::validate() const {
    if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
    if (q_static < 0) throw std::invalid_argument("q_static must be >= 0");
    if (p_temporal < 1) throw std::invalid_argument("p_temporal must be >= 1");
    if (t_steps < 1) throw std::invalid_argument("t_steps must be >= 1");
    if (missing_rate < 0 || missing_rate >= 1)
        throw std::invalid_argument("missing_rate must be in [0,1)");
    if (n_informative_temporal < 0 || n_informative_temporal > p_temporal)
        throw std::invalid_argument("n_informative_temporal must be in [0, p_temporal]");
    if (n_informative_static < 0 || n_informative_static > q_static)
        throw std::invalid_argument("n_informative_static must be in [0, q_static]");
    if (label_noise < 0 || label_noise >= 0.5)
        throw std::invalid_argument("label_noise must be in [0, 0.5)");
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open dataset file '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty file '" + path + "'");
    const auto header = split_csv_line(line);
    if (header.size() < 3 || header[0] != "patient_id" || header[1] != "label_mor" ||
        header[2] != "label_vfd")
        throw std::invalid_argument(
            "malformed header: expected columns patient_id,label_mor,label_vfd,...");

    // column -> (kind, variable index, day)
    struct ColRef { bool is_static; int var; int day; };
    std::vector<ColRef> refs;
    std::vector<std::string> static_names, temporal_names;
    std::map<std::string, int> temporal_index;
    std::set<std::string> seen;
    for (std::size_t c = 3; c < header.size(); ++c) {
        const std::string& h = header[c];
        if (!seen.insert(h).second)
            throw std::invalid_argument("malformed header: duplicate column '" + h + "'");
        if (h.rfind("s_", 0) == 0) {
            static_names.push_back(h.substr(2));
            refs.push_back({true, static_cast<int>(static_names.size()) - 1, 0});
        } else if (h.rfind("t_", 0) == 0) {
            const auto pos = h.rfind("_d");
            if (pos == std::string::npos || pos <= 2)
                throw std::invalid_argument("malformed header: bad temporal column '" + h + "'");
            const std::string base = h.substr(2, pos - 2);
            int day = -1;
            const char* ds = h.data() + pos + 2;
            auto [p, ec] = std::from_chars(ds, h.data() + h.size(), day);
            if (ec != std::errc{} || p != h.data() + h.size() || day < 0)
                throw std::invalid_argument("malformed header: bad day suffix in '" + h + "'");
            auto it = temporal_index.find(base);
            if (it == temporal_index.end()) {
                temporal_index.emplace(base, static_cast<int>(temporal_names.size()));
                temporal_names.push_back(base);
                it = temporal_index.find(base);
            }
            refs.push_back({false, it->second, day});
        } else {
            throw std::invalid_argument("malformed header: unrecognized column '" + h + "'");
        }
    }

    int t_steps = 0;
    for (const auto& r : refs)
        if (!r.is_static) t_steps = std::max(t_steps, r.day + 1);
    if (!temporal_names.empty()) {
        // every temporal variable must carry exactly days 0..T-1
        std::vector<std::vector<bool>> have(temporal_names.size(),
                                            std::vector<bool>(static_cast<std::size_t>(t_steps)));
        for (const auto& r : refs)
            if (!r.is_static) have[static_cast<std::size_t>(r.var)][static_cast<std::size_t>(r.day)] = true;
        for (std::size_t j = 0; j < temporal_names.size(); ++j)
            for (int d = 0; d < t_steps; ++d)
                if (!have[j][static_cast<std::size_t>(d)])
                    throw std::invalid_argument("malformed header: temporal variable '" +
                                                temporal_names[j] + "' is missing day " +
                                                std::to_string(d));
    }

    std::vector<std::vector<std::string>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw std::invalid_argument("row " + std::to_string(lineno) + " has " +
                                        std::to_string(cells.size()) + " cells, expected " +
                                        std::to_string(header.size()));
        rows.push_back(std::move(cells));
    }

    const auto n = static_cast<Eigen::Index>(rows.size());
    const int q = static_cast<int>(static_names.size());
    const int p = static_cast<int>(temporal_names.size());

    Dataset ds;
    ds.t_steps = t_steps;
    ds.static_names = static_names;
    ds.temporal_names = temporal_names;
    ds.statics.setConstant(n, q, kNaN);
    ds.temporal.setConstant(n, p * t_steps, kNaN);
    ds.static_mask.setConstant(n, q, true);
    ds.temporal_mask.setConstant(n, p * t_steps, true);
    Eigen::VectorXd y_mor(n), y_vfd(n);

    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        for (int li = 1; li <= 2; ++li) {
            const std::string& col = header[static_cast<std::size_t>(li)];
            const double v = parse_cell(r[static_cast<std::size_t>(li)], col, static_cast<std::size_t>(i) + 1);
            if (v != 0.0 && v != 1.0)
                throw std::invalid_argument("label column '" + col + "' contains value outside {0,1}");
            (li == 1 ? y_mor : y_vfd)(i) = v;
        }
        for (std::size_t c = 3; c < header.size(); ++c) {
            const std::string& cell = r[c];
            if (cell.empty()) continue; // missing
            const double v = parse_cell(cell, header[c], static_cast<std::size_t>(i) + 1);
            const auto& ref = refs[c - 3];
            if (ref.is_static) {
                ds.statics(i, ref.var) = v;
                ds.static_mask(i, ref.var) = false;
            } else {
                const int col = ref.var * t_steps + ref.day;
                ds.temporal(i, col) = v;
                ds.temporal_mask(i, col) = false;
            }
        }
    }
    ds.labels[Task::mor] = y_mor;
    ds.labels[Task::vfd] = y_vfd;

    // Tag static variables: observed value set exactly {0,1} => binary.
    ds.static_kinds.resize(static_cast<std::size_t>(q), VarKind::continuous);
    for (int j = 0; j < q; ++j) {
        std::set<double> vals;
        for (Eigen::Index i = 0; i < n; ++i)
            if (!ds.static_mask(i, j)) vals.insert(ds.statics(i, j));
        if (vals == std::set<double>{0.0, 1.0})
            ds.static_kinds[static_cast<std::size_t>(j)] = VarKind::binary;
    }
    return ds;
}

void save_dataset_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open '" + path + "' for writing");
    out << "patient_id,label_mor,label_vfd";
    for (const auto& s : ds.static_names) out << ",s_" << s;
    for (int j = 0; j < ds.p(); ++j)
        for (int d = 0; d < ds.t_steps; ++d) out << ",t_" << ds.temporal_names[static_cast<std::size_t>(j)] << "_d" << d;
    out << "\n";
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
        out << i << ',' << format_double(ds.labels.at(Task::mor)(i)) << ','
            << format_double(ds.labels.at(Task::vfd)(i));
        for (int j = 0; j < ds.q(); ++j) {
            out << ',';
            if (!ds.static_mask(i, j)) out << format_double(ds.statics(i, j));
        }
        for (int j = 0; j < ds.p(); ++j)
            for (int d = 0; d < ds.t_steps; ++d) {
                const int c = ds.temporal_col(j, d);
                out << ',';
                if (!ds.temporal_mask(i, c)) out << format_double(ds.temporal(i, c));
            }
        out << "\n";
    }
}

Dataset impute_missing(const Dataset& ds) {
    Dataset out = ds;
    const auto n = ds.n();

    for (int j = 0; j < ds.q(); ++j) {
        long n_obs = 0, n_one = 0;
        double sum = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (ds.static_mask(i, j)) continue;
            ++n_obs;
            sum += ds.statics(i, j);
            if (ds.statics(i, j) == 1.0) ++n_one;
        }
        if (n_obs == 0)
            throw std::invalid_argument("static variable '" + ds.static_names[static_cast<std::size_t>(j)] +
                                        "' has no observed values");
        double fill;
        if (ds.static_kinds[static_cast<std::size_t>(j)] == VarKind::binary) {
            // majority of observed values, tie -> 0
            fill = (2 * n_one > n_obs) ? 1.0 : 0.0;
        } else {
            fill = sum / static_cast<double>(n_obs);
        }
        for (Eigen::Index i = 0; i < n; ++i)
            if (ds.static_mask(i, j)) out.statics(i, j) = fill;
    }

    // temporal variables: empirical mean pooled over samples and days
    for (int j = 0; j < ds.p(); ++j) {
        long n_obs = 0;
        double sum = 0;
        for (int d = 0; d < ds.t_steps; ++d) {
            const int c = ds.temporal_col(j, d);
            for (Eigen::Index i = 0; i < n; ++i) {
                if (ds.temporal_mask(i, c)) continue;
                ++n_obs;
                sum += ds.temporal(i, c);
            }
        }
        if (n_obs == 0)
            throw std::invalid_argument("temporal variable '" + ds.temporal_names[static_cast<std::size_t>(j)] +
                                        "' has no observed values");
        const double fill = sum / static_cast<double>(n_obs);
        for (int d = 0; d < ds.t_steps; ++d) {
            const int c = ds.temporal_col(j, d);
            for (Eigen::Index i = 0; i < n; ++i)
                if (ds.temporal_mask(i, c)) out.temporal(i, c) = fill;
        }
    }
    return out;
}

DesignMatrix flatten(const Dataset& ds, FeatureView view) {
    if (ds.any_missing())
        throw std::invalid_argument("flatten requires an imputed dataset (missing values present)");

    struct Col { bool is_static; int idx; std::string name; };
    std::vector<Col> cols;
    const bool statics_in = view != FeatureView::temporal_only;
    if (statics_in)
        for (int j = 0; j < ds.q(); ++j)
            cols.push_back({true, j, "s_" + ds.static_names[static_cast<std::size_t>(j)]});
    const int days = view == FeatureView::static_plus_day0 ? 1 : ds.t_steps;
    for (int j = 0; j < ds.p(); ++j)
        for (int d = 0; d < days; ++d)
            cols.push_back({false, ds.temporal_col(j, d),
                            "t_" + ds.temporal_names[static_cast<std::size_t>(j)] + "_d" + std::to_string(d)});

    const auto n = ds.n();
    DesignMatrix dm;
    std::vector<int> keep;
    for (int c = 0; c < static_cast<int>(cols.size()); ++c) {
        const auto& col = cols[static_cast<std::size_t>(c)];
        const auto v = col.is_static ? ds.statics.col(col.idx) : ds.temporal.col(col.idx);
        bool constant = true;
        for (Eigen::Index i = 1; i < n && constant; ++i) constant = v(i) == v(0);
        if (constant && n > 0)
            dm.dropped_columns.push_back(c);
        else
            keep.push_back(c);
    }
    dm.values.resize(n, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
        const auto& col = cols[static_cast<std::size_t>(keep[k])];
        dm.values.col(static_cast<Eigen::Index>(k)) =
            col.is_static ? ds.statics.col(col.idx) : ds.temporal.col(col.idx);
        dm.column_names.push_back(col.name);
    }
    return dm;
}

Dataset synth_generate(const SynthConfig& cfg) {
    cfg.validate();
    auto rng = make_rng(derive_seed(cfg.seed, {hash64("synth")}));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    const Eigen::Index n = cfg.n_samples;
    const int q = cfg.q_static, p = cfg.p_temporal, t = cfg.t_steps;

    Dataset ds;
    ds.t_steps = t;
    ds.statics.setZero(n, q);
    ds.temporal.setZero(n, p * t);
    ds.static_mask.setConstant(n, q, false);
    ds.temporal_mask.setConstant(n, p * t, false);
    ds.static_kinds.resize(static_cast<std::size_t>(q));
    for (int j = 0; j < q; ++j) ds.static_names.push_back("var" + std::to_string(j));
    for (int j = 0; j < p; ++j) ds.temporal_names.push_back("sig" + std::to_string(j));

    Eigen::VectorXd latent(n);
    for (Eigen::Index i = 0; i < n; ++i) latent(i) = gauss(rng);

    // static block: informative variables first (continuous, tied to the latent),
    // then alternating binary/continuous noise
    for (int j = 0; j < q; ++j) {
        if (j < cfg.n_informative_static) {
            ds.static_kinds[static_cast<std::size_t>(j)] = VarKind::continuous;
            for (Eigen::Index i = 0; i < n; ++i)
                ds.statics(i, j) = 0.8 * latent(i) + 0.6 * gauss(rng);
        } else if ((j - cfg.n_informative_static) % 2 == 0) {
            ds.static_kinds[static_cast<std::size_t>(j)] = VarKind::binary;
            const double rate = 0.2 + 0.6 * unif(rng);
            for (Eigen::Index i = 0; i < n; ++i)
                ds.statics(i, j) = unif(rng) < rate ? 1.0 : 0.0;
        } else {
            ds.static_kinds[static_cast<std::size_t>(j)] = VarKind::continuous;
            const double mu = gauss(rng);
            for (Eigen::Index i = 0; i < n; ++i) ds.statics(i, j) = mu + gauss(rng);
        }
    }

    // temporal block: informative variables carry a day-trend whose slope tracks
    // the latent risk, with the trend direction alternating between variables.
    // Values are compressed so recurrent-gate pre-activations stay in their
    // sensitive range.
    const double ts = 0.25;
    Eigen::VectorXd signal = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < p; ++j) {
        if (j < cfg.n_informative_temporal) {
            const double sign = (j % 2 == 0) ? 1.0 : -1.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double aligned = 0.8 * latent(i) + 0.3 * gauss(rng);
                const double slope = sign * aligned;
                const double base = 0.5 * gauss(rng);
                for (int d = 0; d < t; ++d)
                    ds.temporal(i, ds.temporal_col(j, d)) = ts * (base + slope * d + 0.2 * gauss(rng));
                signal(i) += aligned;
            }
        } else {
            const double level = gauss(rng);
            for (Eigen::Index i = 0; i < n; ++i) {
                const double shift = level + 0.8 * gauss(rng);
                for (int d = 0; d < t; ++d)
                    ds.temporal(i, ds.temporal_col(j, d)) = ts * (shift + 0.5 * gauss(rng));
            }
        }
    }
    // statics carry only a minor share of the label signal; the dominant signal
    // lives in the temporal trends
    for (int j = 0; j < cfg.n_informative_static; ++j) signal += 0.15 * ds.statics.col(j);

    double mu = 0, sd = 1;
    if (n > 1) {
        mu = signal.mean();
        const double var = (signal.array() - mu).square().sum() / static_cast<double>(n - 1);
        sd = var > 0 ? std::sqrt(var) : 1.0;
    }
    const Eigen::VectorXd score = (signal.array() - mu) / sd;

    auto logistic = [](double a) { return 1.0 / (1.0 + std::exp(-a)); };
    Eigen::VectorXd y_mor(n), y_vfd(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double y = unif(rng) < logistic(2.2 * score(i)) ? 1.0 : 0.0;
        if (unif(rng) < cfg.label_noise) y = 1.0 - y;
        y_mor(i) = y;
        const double corr = 0.75 * score(i) + 0.66 * gauss(rng);
        double yv = unif(rng) < logistic(2.2 * (corr - 0.3)) ? 1.0 : 0.0;
        if (unif(rng) < cfg.label_noise) yv = 1.0 - yv;
        y_vfd(i) = yv;
    }
    ds.labels[Task::mor] = y_mor;
    ds.labels[Task::vfd] = y_vfd;

    if (cfg.missing_rate > 0) {
        for (Eigen::Index i = 0; i < n; ++i)
            for (int j = 0; j < q; ++j)
                if (unif(rng) < cfg.missing_rate) {
                    ds.statics(i, j) = kNaN;
                    ds.static_mask(i, j) = true;
                }
        for (Eigen::Index i = 0; i < n; ++i)
            for (int c = 0; c < p * t; ++c)
                if (unif(rng) < cfg.missing_rate) {
                    ds.temporal(i, c) = kNaN;
                    ds.temporal_mask(i, c) = true;
                }
    }
    return ds;
}

} // namespace mimic
