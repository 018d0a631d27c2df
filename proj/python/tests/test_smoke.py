"""Smoke tests for the python bindings.

Run with PYTHONPATH pointing at the directory containing the built
_mimiclearn extension (ctest wires this up automatically).
"""

import math

import numpy as np
import pytest

import _mimiclearn as ml


def small_dataset(missing=0.0, seed=3):
    return ml.synth(
        n_samples=120,
        q_static=4,
        p_temporal=3,
        t_steps=3,
        missing_rate=missing,
        n_informative_temporal=1,
        n_informative_static=1,
        seed=seed,
    )


def test_synth_shapes_and_determinism():
    ds = small_dataset()
    assert (ds.n, ds.q, ds.p, ds.t_steps) == (120, 4, 3, 3)
    assert ds.statics.shape == (120, 4)
    assert ds.temporal.shape == (120, 9)
    assert not ds.any_missing()
    ds2 = small_dataset()
    np.testing.assert_array_equal(ds.statics, ds2.statics)
    np.testing.assert_array_equal(ds.labels("mor"), ds2.labels("mor"))
    assert set(np.unique(ds.labels("vfd"))) <= {0.0, 1.0}


def test_impute_and_flatten():
    ds = small_dataset(missing=0.2)
    assert ds.any_missing()
    imp = ml.impute_missing(ds)
    assert not imp.any_missing()
    values, names = ml.flatten(imp, "all")
    assert values.shape[0] == 120
    assert len(names) == values.shape[1]
    assert names[0].startswith("s_")
    t_values, t_names = ml.flatten(imp, "temporal_only")
    assert all(n.startswith("t_") for n in t_names)
    assert t_values.shape[1] <= values.shape[1]


def test_csv_round_trip(tmp_path):
    ds = small_dataset(missing=0.1)
    path = str(tmp_path / "data.csv")
    ml.save_dataset_csv(ds, path)
    back = ml.load_dataset(path)
    assert back.n == ds.n
    np.testing.assert_array_equal(back.labels("mor"), ds.labels("mor"))


def test_auc():
    assert ml.auc(np.array([0.1, 0.4, 0.35, 0.8]), np.array([0.0, 0, 1, 1])) == 0.75
    with pytest.raises(Exception):
        ml.auc(np.array([0.1, 0.2]), np.array([1.0, 1.0]))  # single class


def test_cross_validate_report():
    imp = ml.impute_missing(small_dataset())
    rep = ml.cross_validate(imp, "gbt", task="mor", view="all", trials=2, folds=5, seed=7)
    assert rep["method"] == "gbt"
    assert len(rep["fold_aucs"]) == 10
    assert 0.0 <= rep["auc_mean"] <= 1.0


def test_run_benchmark_deterministic():
    imp = ml.impute_missing(small_dataset())
    cells = [("logreg", "all", "mor"), ("dt", "temporal_only", "vfd")]
    a = ml.run_benchmark(imp, cells, trials=1, folds=5, seed=5, threads=1)
    b = ml.run_benchmark(imp, cells, trials=1, folds=5, seed=5, threads=2)
    assert a == b
    assert len(a["cells"]) == 2


def test_distill_fidelity():
    imp = ml.impute_missing(small_dataset())
    out = ml.distill(imp, teacher="dnn", pipeline="p2", task="mor", seed=1)
    fid = out["fidelity"]
    assert fid["mse"] >= 0.0
    assert fid["pearson_r"] > 0.5  # student tracks its teacher on train data
    imp_scores = np.asarray(out["importance"])
    assert math.isclose(imp_scores.sum(), 1.0, abs_tol=1e-9)
    assert len(out["feature_names"]) == imp_scores.shape[0]
    assert np.all(np.asarray(out["student_scores"]) >= 0.0)
    assert np.all(np.asarray(out["student_scores"]) <= 1.0)


def test_export_dot():
    imp = ml.impute_missing(small_dataset())
    values, names = ml.flatten(imp, "all")
    dot = ml.gbt_fit_export_dot(values, imp.labels("mor"), names, stage=0)
    assert dot.startswith("digraph")
    assert "->" in dot and dot.rstrip().endswith("}")


def test_gradient_checks():
    assert ml.gradient_check_mlp(5, [4, 4], 6, 1) < 1e-4
    assert ml.gradient_check_sda(5, 3, 0.2, 6, 2) < 1e-4
    assert ml.gradient_check_lstm(3, 4, 2, 5, 3) < 1e-4
