#include "mimic/data.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

using namespace mimic;

namespace {

std::string write_temp(const std::string& text) {
    static int counter = 0;
    const auto path = std::filesystem::temp_directory_path() /
                      ("mimic_data_test_" + std::to_string(counter++) + ".csv");
    std::ofstream f(path);
    f << text;
    return path.string();
}

// Q=27, P=21, T=4 with two all-zero day-0 temporal columns.
Dataset paper_shaped_dataset() {
    Dataset ds;
    ds.t_steps = 4;
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g(0.0, 1.0);
    const int n = 12, q = 27, p = 21;
    for (int i = 0; i < q; ++i) {
        ds.static_names.push_back("s" + std::to_string(i));
        ds.static_kinds.push_back(VarKind::continuous);
    }
    for (int i = 0; i < p; ++i) ds.temporal_names.push_back("v" + std::to_string(i));
    ds.statics.resize(n, q);
    ds.temporal.resize(n, p * 4);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < q; ++j) ds.statics(i, j) = g(rng);
        for (int j = 0; j < p * 4; ++j) ds.temporal(i, j) = g(rng);
    }
    ds.temporal.col(ds.temporal_col(0, 0)).setZero();
    ds.temporal.col(ds.temporal_col(1, 0)).setZero();
    ds.static_mask = BoolMatrix::Constant(n, q, false);
    ds.temporal_mask = BoolMatrix::Constant(n, p * 4, false);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y(i) = i % 2;
    ds.labels[Task::mor] = y;
    ds.labels[Task::vfd] = y;
    return ds;
}

} // namespace

TEST_CASE("load_dataset maps empty cells to the missing mask") {
    const auto path = write_temp("patient_id,label_mor,label_vfd,s_age,t_map_d0,t_map_d1\n"
                                 "1,0,0,10,,2\n"
                                 "2,1,0,20,3,4\n"
                                 "3,1,1,30,5,6\n");
    const Dataset ds = load_dataset(path);
    CHECK(ds.n() == 3);
    CHECK(ds.q() == 1);
    CHECK(ds.p() == 1);
    CHECK(ds.t_steps == 2);
    CHECK(ds.temporal_mask(0, ds.temporal_col(0, 0)));
    CHECK_FALSE(ds.temporal_mask(0, ds.temporal_col(0, 1)));
    CHECK_FALSE(ds.static_mask(0, 0));
    CHECK(std::isnan(ds.temporal(0, ds.temporal_col(0, 0))));
    std::remove(path.c_str());
}

TEST_CASE("load_dataset reads label columns verbatim") {
    const auto path = write_temp("patient_id,label_mor,label_vfd,s_age\n"
                                 "1,0,1,10\n2,1,1,20\n3,1,0,30\n");
    const Dataset ds = load_dataset(path);
    CHECK(ds.labels.at(Task::mor)(0) == 0.0);
    CHECK(ds.labels.at(Task::mor)(1) == 1.0);
    CHECK(ds.labels.at(Task::mor)(2) == 1.0);
    std::remove(path.c_str());
}

TEST_CASE("load_dataset infers binary vs continuous from observed values") {
    const auto path = write_temp("patient_id,label_mor,label_vfd,s_a,s_b\n"
                                 "1,0,0,0,0.2\n2,1,0,1,1.0\n3,1,1,1,0.2\n");
    const Dataset ds = load_dataset(path);
    CHECK(ds.static_kinds[0] == VarKind::binary);
    CHECK(ds.static_kinds[1] == VarKind::continuous);
    std::remove(path.c_str());
}

TEST_CASE("load_dataset rejects malformed input with named columns") {
    const auto bad_header = write_temp("patient_id,label_mor,s_age\n1,0,10\n");
    CHECK_THROWS_WITH(load_dataset(bad_header), doctest::Contains("header"));
    std::remove(bad_header.c_str());

    const auto bad_cell = write_temp("patient_id,label_mor,label_vfd,s_age\n1,0,0,abc\n");
    CHECK_THROWS_WITH(load_dataset(bad_cell), doctest::Contains("s_age"));
    std::remove(bad_cell.c_str());

    const auto bad_label = write_temp("patient_id,label_mor,label_vfd,s_age\n1,2,0,10\n");
    CHECK_THROWS_WITH(load_dataset(bad_label), doctest::Contains("label_mor"));
    std::remove(bad_label.c_str());
}

TEST_CASE("impute_missing fills binary majority and continuous mean") {
    Dataset ds = testutil::tiny_dataset();
    // binary column observed [1,1,0] + one missing -> majority 1
    ds.statics(3, 0) = std::nan("");
    ds.static_mask(3, 0) = true;
    // continuous column observed [10,20] + two missing -> mean 15
    ds.statics(2, 1) = std::nan("");
    ds.statics(3, 1) = std::nan("");
    ds.static_mask(2, 1) = true;
    ds.static_mask(3, 1) = true;

    const Dataset out = impute_missing(ds);
    CHECK(out.statics(3, 0) == 1.0);
    CHECK(out.statics(2, 1) == doctest::Approx(15.0));
    CHECK(out.statics(3, 1) == doctest::Approx(15.0));
    CHECK_FALSE(out.any_missing());
    // original missingness is still recorded
    CHECK(out.static_mask(3, 0));
}

TEST_CASE("impute_missing breaks binary majority ties toward 0") {
    Dataset ds = testutil::tiny_dataset();
    // observed {1,1,0,0} is already tied; knock one out to observe [1,0,0] -> 0,
    // then rebuild the exact tie [1,0] with two missing
    ds.statics(1, 0) = std::nan("");
    ds.statics(2, 0) = std::nan("");
    ds.static_mask(1, 0) = true;
    ds.static_mask(2, 0) = true; // observed values: row0=1, row3=0
    const Dataset out = impute_missing(ds);
    CHECK(out.statics(1, 0) == 0.0);
    CHECK(out.statics(2, 0) == 0.0);
}

TEST_CASE("impute_missing pools temporal means over all days") {
    Dataset ds = testutil::tiny_dataset();
    // temporal values 1..8, remove the 8 -> mean of remaining 1..7 is 4
    ds.temporal(3, 1) = std::nan("");
    ds.temporal_mask(3, 1) = true;
    const Dataset out = impute_missing(ds);
    CHECK(out.temporal(3, 1) == doctest::Approx(4.0));
}

TEST_CASE("impute_missing is idempotent") {
    Dataset ds = testutil::tiny_dataset();
    ds.statics(0, 1) = std::nan("");
    ds.static_mask(0, 1) = true;
    const Dataset once = impute_missing(ds);
    const Dataset twice = impute_missing(once);
    CHECK(once.statics == twice.statics);
    CHECK(once.temporal == twice.temporal);
}

TEST_CASE("impute_missing rejects a fully unobserved variable") {
    Dataset ds = testutil::tiny_dataset();
    for (int i = 0; i < 4; ++i) {
        ds.statics(i, 1) = std::nan("");
        ds.static_mask(i, 1) = true;
    }
    CHECK_THROWS(impute_missing(ds));
}

TEST_CASE("flatten reproduces the 27 + 21*4 - 2 = 109 layout") {
    const Dataset ds = paper_shaped_dataset();
    const DesignMatrix all = flatten(ds, FeatureView::all);
    CHECK(all.d() == 109);
    CHECK(all.dropped_columns.size() == 2);

    const DesignMatrix temporal = flatten(ds, FeatureView::temporal_only);
    CHECK(temporal.d() == 21 * 4 - 2);
}

TEST_CASE("flatten static_plus_day0 keeps Q + P columns when nothing is constant") {
    const Dataset ds = impute_missing(testutil::tiny_dataset());
    const DesignMatrix dm = flatten(ds, FeatureView::static_plus_day0);
    CHECK(dm.d() == ds.q() + ds.p());
    CHECK(dm.dropped_columns.empty());
    CHECK(dm.column_names.size() == 3);
}

TEST_CASE("flatten orders static columns then variable-major temporal columns") {
    const Dataset ds = impute_missing(testutil::tiny_dataset());
    const DesignMatrix dm = flatten(ds, FeatureView::all);
    REQUIRE(dm.column_names.size() == 4);
    CHECK(dm.column_names[0] == "s_sex");
    CHECK(dm.column_names[1] == "s_age");
    CHECK(dm.column_names[2] == "t_map_d0");
    CHECK(dm.column_names[3] == "t_map_d1");
    CHECK(dm.values(2, 0) == 0.0);
    CHECK(dm.values(2, 3) == 6.0);
}

TEST_CASE("flatten recovers every non-dropped entry exactly") {
    const Dataset ds = paper_shaped_dataset();
    const DesignMatrix dm = flatten(ds, FeatureView::all);
    // walk original columns, skipping dropped ones, and compare values
    std::size_t drop_ptr = 0;
    int out_col = 0;
    const int total = ds.q() + ds.p() * ds.t_steps;
    for (int col = 0; col < total; ++col) {
        if (drop_ptr < dm.dropped_columns.size() && dm.dropped_columns[drop_ptr] == col) {
            ++drop_ptr;
            continue;
        }
        for (Eigen::Index i = 0; i < ds.n(); ++i) {
            const double orig = col < ds.q() ? ds.statics(i, col) : ds.temporal(i, col - ds.q());
            CHECK(dm.values(i, out_col) == orig);
        }
        ++out_col;
    }
    CHECK(out_col == dm.d());
}

TEST_CASE("flatten rejects unimputed data") {
    Dataset ds = testutil::tiny_dataset();
    ds.statics(0, 1) = std::nan("");
    ds.static_mask(0, 1) = true;
    CHECK_THROWS(flatten(ds, FeatureView::all));
}

TEST_CASE("synth_generate is deterministic for a fixed seed") {
    SynthConfig cfg;
    cfg.seed = 7;
    cfg.n_samples = 60;
    const Dataset a = synth_generate(cfg);
    const Dataset b = synth_generate(cfg);
    CHECK((a.statics.array() == b.statics.array() ||
           (a.statics.array().isNaN() && b.statics.array().isNaN()))
              .all());
    CHECK((a.temporal.array() == b.temporal.array() ||
           (a.temporal.array().isNaN() && b.temporal.array().isNaN()))
              .all());
    CHECK(a.labels.at(Task::mor) == b.labels.at(Task::mor));
    CHECK(a.labels.at(Task::vfd) == b.labels.at(Task::vfd));
    CHECK(a.static_mask == b.static_mask);
    CHECK(a.temporal_mask == b.temporal_mask);
}

TEST_CASE("synth_generate with missing_rate 0 plants no missing cells") {
    SynthConfig cfg;
    cfg.missing_rate = 0.0;
    cfg.n_samples = 50;
    const Dataset ds = synth_generate(cfg);
    CHECK_FALSE(ds.any_missing());
    CHECK_FALSE(ds.static_mask.any());
    CHECK_FALSE(ds.temporal_mask.any());
}

TEST_CASE("synth_generate default config hits the target missing rate") {
    const Dataset ds = synth_generate(SynthConfig{});
    long missing = 0, total = 0;
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
        for (int j = 0; j < ds.q(); ++j, ++total) missing += ds.static_mask(i, j);
        for (int j = 0; j < ds.p() * ds.t_steps; ++j, ++total) missing += ds.temporal_mask(i, j);
    }
    const double rate = static_cast<double>(missing) / static_cast<double>(total);
    CHECK(std::abs(rate - 0.1343) < 0.01);
}

TEST_CASE("synth_generate validates its config") {
    SynthConfig cfg;
    cfg.n_informative_temporal = 50; // > p_temporal
    CHECK_THROWS_AS(synth_generate(cfg), std::invalid_argument);
    cfg = SynthConfig{};
    cfg.missing_rate = 1.5;
    CHECK_THROWS_AS(synth_generate(cfg), std::invalid_argument);
    cfg = SynthConfig{};
    cfg.label_noise = 0.7;
    CHECK_THROWS_AS(synth_generate(cfg), std::invalid_argument);
}

TEST_CASE("save/load round-trips a dataset including missing cells") {
    SynthConfig cfg;
    cfg.n_samples = 40;
    cfg.seed = 3;
    const Dataset ds = synth_generate(cfg);
    const auto path = (std::filesystem::temp_directory_path() / "mimic_roundtrip.csv").string();
    save_dataset_csv(ds, path);
    const Dataset back = load_dataset(path);
    CHECK(back.n() == ds.n());
    CHECK(back.q() == ds.q());
    CHECK(back.p() == ds.p());
    CHECK(back.t_steps == ds.t_steps);
    CHECK(back.static_mask == ds.static_mask);
    CHECK(back.temporal_mask == ds.temporal_mask);
    CHECK(back.labels.at(Task::mor) == ds.labels.at(Task::mor));
    for (Eigen::Index i = 0; i < ds.n(); ++i)
        for (int j = 0; j < ds.q(); ++j)
            if (!ds.static_mask(i, j)) CHECK(back.statics(i, j) == ds.statics(i, j));
    for (Eigen::Index i = 0; i < ds.n(); ++i)
        for (int j = 0; j < ds.p() * ds.t_steps; ++j)
            if (!ds.temporal_mask(i, j)) CHECK(back.temporal(i, j) == ds.temporal(i, j));
    std::remove(path.c_str());
}
