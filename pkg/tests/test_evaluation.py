import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qfploc.features import RssVector
from qfploc.fingerprint import Location, Sample, build_fingerprint
from qfploc.evaluation import (
    complexity_report,
    error_cdf,
    error_quantiles,
    evaluate,
    swap_test_gate_count,
    sweep_shots,
    sweep_table,
    write_cdf_csv,
)
from qfploc.swaptest import SwapTestConfig
from qfploc.testbed import TestbedConfig, generate_testbed


@pytest.fixture(scope="module")
def world():
    cfg = TestbedConfig(width=150, height=100, grid_step=25, num_test_points=25, seed=2)
    fp_samples, test = generate_testbed(cfg)
    return build_fingerprint(fp_samples, "difference"), test


def sort_quantile(errors, q):
    e = sorted(errors)
    h = (len(e) - 1) * q
    lo = int(np.floor(h))
    hi = min(lo + 1, len(e) - 1)
    return e[lo] + (h - lo) * (e[hi] - e[lo])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0, 1000), min_size=1, max_size=60))
def test_quantiles_match_sort(errors):
    q1, med, q3 = error_quantiles(errors)
    for got, q in ((q1, 0.25), (med, 0.5), (q3, 0.75)):
        assert got == pytest.approx(sort_quantile(errors, q), rel=1e-12, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0, 1000), min_size=1, max_size=60))
def test_cdf_valid(errors):
    cdf = error_cdf(errors)
    xs = [e for e, _ in cdf]
    fs = [f for _, f in cdf]
    assert xs == sorted(set(xs))
    assert all(0 < f <= 1 for f in fs) and fs == sorted(fs)
    assert fs[-1] == 1.0
    for e, f in cdf:
        assert f == pytest.approx(np.mean(np.asarray(errors) <= e))


def test_self_localization_noise_free():
    cfg = TestbedConfig(width=100, height=100, grid_step=25, shadowing_sigma=0, rss_resolution=0,
                        test_layout="grid", seed=1)
    fp_samples, test = generate_testbed(cfg)
    fp = build_fingerprint(fp_samples, "difference")
    rep = evaluate(fp, test)
    assert rep.median == 0.0 and rep.q3 == 0.0


def test_quantum_exact_equals_oracle(world):
    fp, test = world
    q = evaluate(fp, test, "quantum-exact")
    c = evaluate(fp, test, "classical-oracle")
    assert np.array_equal(q.errors, c.errors)
    assert q.estimates == c.estimates


def test_counters(world):
    fp, test = world
    m, n = len(fp), fp.num_qubits
    rep = evaluate(fp, test, "quantum-exact")
    assert rep.counters["queries"] == len(test)
    assert rep.counters["swap_tests"] == len(test) * m
    assert rep.counters["gate_ops"] == len(test) * m * (n + 2)
    assert rep.counters["classical_ops"] == 0
    c = evaluate(fp, test, "classical-oracle")
    assert c.counters["classical_ops"] == len(test) * m * 28
    s = evaluate(fp, test, "quantum-sampled", SwapTestConfig(64, 1))
    assert s.counters["gate_ops"] == len(test) * m * (n + 2) * 64


def test_degenerate_queries_skipped(world):
    fp, test = world
    flat = Sample(Location("flat", 0, 0), RssVector([-70.0] * 8, test[0].rss.rp_ids))
    rep = evaluate(fp, [flat] + list(test))
    assert rep.skipped == ["flat"]
    assert rep.counters["queries"] == len(test)
    with pytest.raises(ValueError):
        evaluate(fp, [])


def test_workers_do_not_change_results(world):
    fp, test = world
    cfg = SwapTestConfig(128, 3)
    a = evaluate(fp, test, "quantum-sampled", cfg, workers=1)
    b = evaluate(fp, test, "quantum-sampled", cfg, workers=3)
    assert a.to_dict() == b.to_dict()


def test_sweep_matches_standalone_evaluate(world):
    fp, test = world
    sweep = sweep_shots(fp, test, [0, 16, 64], seed=5)
    assert sweep[0].to_dict() == evaluate(fp, test).to_dict()
    for k in (16, 64):
        alone = evaluate(fp, test, "quantum-sampled", SwapTestConfig(k, 5))
        assert sweep[k].to_dict() == alone.to_dict()
        assert np.array_equal(sweep[k].errors, alone.errors)


def test_sweep_repeats_pool(world):
    fp, test = world
    sweep = sweep_shots(fp, test, [16], seed=5, repeats=3)
    assert sweep[16].counters["queries"] == 3 * len(test)
    assert sweep_table(sweep)[0]["shots"] == 16


@pytest.mark.parametrize("bad", [[], [64, 16], [-1, 4]])
def test_sweep_validation(world, bad):
    fp, test = world
    with pytest.raises(ValueError):
        sweep_shots(fp, test, bad)


def test_large_k_within_three_sigma_of_exact(world):
    fp, test = world
    exact = evaluate(fp, test[:1]).errors
    sweep = sweep_shots(fp, test[:1], [0, 1 << 20], seed=3)
    assert np.array_equal(sweep[1 << 20].errors, exact)


def test_complexity_rows():
    rows = {r["num_rps"]: r for r in complexity_report([8, 10, 100], 50)}
    assert swap_test_gate_count(8) == 12
    assert rows[8]["features"] == 28 and rows[8]["register_qubits"] == 5 and rows[8]["circuit_qubits"] == 11
    assert rows[8]["classical_ops"] == 50 * 28 and rows[8]["quantum_ops"] == 50 * 12
    assert rows[100]["classical_ops"] / rows[10]["classical_ops"] == 110
    assert rows[100]["quantum_ops"] / rows[10]["quantum_ops"] == 2
    doubled = complexity_report([8], 100)[0]
    assert doubled["classical_ops"] == 2 * rows[8]["classical_ops"]
    assert doubled["quantum_ops"] == 2 * rows[8]["quantum_ops"]
    with pytest.raises(ValueError):
        complexity_report([1], 10)


def test_cdf_csv(tmp_path):
    path = tmp_path / "cdf.csv"
    write_cdf_csv(error_cdf([3.0, 1.0, 1.0, 2.0]), path)
    rows = list(csv.DictReader(open(path)))
    assert [(float(r["error_m"]), float(r["fraction"])) for r in rows] == [(1, 0.5), (2, 0.75), (3, 1.0)]
