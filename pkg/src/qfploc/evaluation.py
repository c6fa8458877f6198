"""End-to-end evaluation: error CDFs, quantiles, shot sweeps, cost tables.

Quantiles use linear interpolation between order statistics (numpy's default
``"linear"`` method).  The CDF table lists every distinct sorted error with the
fraction of queries at or below it.
"""
from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .features import DegenerateFeatureError, num_qubits_for, transform
from .fingerprint import (
    Fingerprint,
    FingerprintError,
    MatchReport,
    Sample,
    derive_seed,
    localization_error,
    match_features,
)
from .swaptest import SwapTestConfig, sampled_result

log = logging.getLogger(__name__)


@dataclass
class EvaluationReport:
    errors: np.ndarray
    q1: float
    median: float
    q3: float
    cdf: list[tuple[float, float]]
    matcher: str
    shots: int
    counters: dict = field(default_factory=dict)
    skipped: list[str] = field(default_factory=list)
    estimates: list[str] = field(default_factory=list)

    def to_dict(self, config_echo: dict | None = None) -> dict:
        return {
            "config_echo": config_echo or {"matcher": self.matcher, "shots": self.shots},
            "quantiles": {"q1": self.q1, "median": self.median, "q3": self.q3},
            "cdf": [[e, f] for e, f in self.cdf],
            "counters": dict(self.counters),
            "skipped": list(self.skipped),
        }


def error_cdf(errors) -> list[tuple[float, float]]:
    e = np.sort(np.asarray(errors, dtype=float))
    if e.size == 0:
        return []
    values, counts = np.unique(e, return_counts=True)
    frac = np.cumsum(counts) / e.size
    frac[-1] = 1.0
    return [(float(v), float(f)) for v, f in zip(values, frac)]


def error_quantiles(errors) -> tuple[float, float, float]:
    q = np.quantile(np.asarray(errors, dtype=float), [0.25, 0.5, 0.75], method="linear")
    return float(q[0]), float(q[1]), float(q[2])


def _features_or_none(sample: Sample, fp: Fingerprint):
    if tuple(sample.rss.rp_ids) != fp.rp_ids:
        raise FingerprintError(f"test sample {sample.location.id!r} has a different RP ordering")
    try:
        return transform(sample.rss, fp.mode)
    except DegenerateFeatureError:
        log.warning("skipping %s: degenerate %s features", sample.location.id, fp.mode)
        return None


def _queries(fp: Fingerprint, test_samples: list[Sample]) -> list:
    if not test_samples:
        raise ValueError("empty test set")
    return [_features_or_none(s, fp) for s in test_samples]


def _run_matches(fp, queries, config, matcher, prep, workers) -> dict[int, MatchReport]:
    fp.prepared(prep)

    def one(qid):
        return match_features(fp, queries[qid], config, matcher, query_id=qid, prep=prep)

    usable = [i for i, q in enumerate(queries) if q is not None]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return dict(zip(usable, pool.map(one, usable)))
    return {i: one(i) for i in usable}


def _summarize(fp, test_samples, queries, reports, matcher, shots) -> EvaluationReport:
    errors, estimates = [], []
    skipped = [s.location.id for s, q in zip(test_samples, queries) if q is None]
    swap_tests = gate_ops = amplitudes = 0
    for qid in sorted(reports):
        report = reports[qid]
        errors.append(localization_error(report.estimated, test_samples[qid].location))
        estimates.append(report.estimated.id)
        if matcher != "classical-oracle":
            swap_tests += len(report.scores)
            gate_ops += sum(r.gate_ops for _, r in report.scores)
            # online register + joint (2n+1)-qubit state per location
            amplitudes += (1 << fp.num_qubits) + len(report.scores) * (1 << (2 * fp.num_qubits + 1))
    if not errors:
        raise ValueError("no usable test samples")
    q1, med, q3 = error_quantiles(errors)
    classical_ops = len(errors) * len(fp) * fp.entries[0].features.length
    counters = {
        "queries": len(errors),
        "locations": len(fp),
        "swap_tests": swap_tests,
        "gate_ops": gate_ops,
        "amplitudes_touched": amplitudes,
        "classical_ops": classical_ops if matcher == "classical-oracle" else 0,
    }
    return EvaluationReport(
        np.asarray(errors), q1, med, q3, error_cdf(errors), matcher, shots, counters, skipped, estimates
    )


def evaluate(
    fp: Fingerprint,
    test_samples: list[Sample],
    matcher: str = "quantum-exact",
    config: SwapTestConfig = SwapTestConfig(shots=0),
    prep: str = "circuit",
    workers: int = 1,
) -> EvaluationReport:
    """Localize every test sample and summarize the errors.

    Queries whose features are degenerate (e.g. all-equal RSS under power
    difference) are skipped and listed in ``report.skipped``.  Per-query seeds
    depend only on the query's position, so ``workers`` never changes results.
    """
    queries = _queries(fp, test_samples)
    reports = _run_matches(fp, queries, config, matcher, prep, workers)
    shots = 0 if matcher == "quantum-exact" else config.shots
    return _summarize(fp, test_samples, queries, reports, matcher, shots)


def _resample(report: MatchReport, shots: int, seed: int, query_id: int, rep: int) -> MatchReport:
    results = [
        sampled_result(r.p_one, shots, derive_seed(seed, query_id, j, rep), r.gate_ops)
        for j, (_, r) in enumerate(report.scores)
    ]
    best = int(np.argmax([r.similarity for r in results]))
    scores = [(loc, r) for (loc, _), r in zip(report.scores, results)]
    return MatchReport(scores[best][0], scores, "quantum-sampled", best)


def sweep_shots(
    fp: Fingerprint,
    test_samples: list[Sample],
    shot_counts,
    seed: int = 0,
    prep: str = "circuit",
    workers: int = 1,
    repeats: int = 1,
) -> dict[int, EvaluationReport]:
    """One report per shot count; ``0`` means exact readout.

    The swap-test circuits are simulated once per (query, location); each
    shot count then draws its measurements from those ancilla probabilities
    with the same per-location seeds :func:`evaluate` would use, so with
    ``repeats=1`` every report equals a standalone
    ``evaluate(..., "quantum-sampled", ...)`` run.  ``repeats > 1`` pools that
    many independent shot-noise replicates of the test set into each sampled
    report (replicate ``r`` uses ``derive_seed(seed, query, entry, r)``).
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    shot_counts = [int(k) for k in shot_counts]
    if not shot_counts:
        raise ValueError("shot_counts must be non-empty")
    if shot_counts != sorted(shot_counts) or shot_counts[0] < 0:
        raise ValueError("shot_counts must be ascending and non-negative")
    queries = _queries(fp, test_samples)
    exact = _run_matches(fp, queries, SwapTestConfig(0, seed), "quantum-exact", prep, workers)
    out = {}
    for k in shot_counts:
        if k == 0:
            out[k] = _summarize(fp, test_samples, queries, exact, "quantum-exact", 0)
            continue
        pooled_samples, pooled_queries, pooled = [], [], {}
        for r in range(repeats):
            for qid, rep in exact.items():
                pooled[len(pooled_samples)] = _resample(rep, k, seed, qid, r)
                pooled_samples.append(test_samples[qid])
                pooled_queries.append(queries[qid])
        out[k] = _summarize(fp, pooled_samples, pooled_queries, pooled, "quantum-sampled", k)
    return out


def sweep_table(reports: dict[int, EvaluationReport]) -> list[dict]:
    return [
        {"shots": k, "q1": r.q1, "median": r.median, "q3": r.q3}
        for k, r in sorted(reports.items())
    ]


def swap_test_gate_count(num_rps: int) -> int:
    """Per-location quantum cost used in the scaling table: ``2*n + 2``."""
    return 2 * num_qubits_for(comb(num_rps, 2)) + 2


def complexity_report(n_values, m: int) -> list[dict]:
    rows = []
    for n_rps in n_values:
        if n_rps < 2:
            raise ValueError(f"need at least 2 RPs, got {n_rps}")
        features = comb(n_rps, 2)
        qubits = num_qubits_for(features)
        rows.append(
            {
                "num_rps": n_rps,
                "locations": m,
                "features": features,
                "register_qubits": qubits,
                "circuit_qubits": 2 * qubits + 1,
                "classical_ops": m * features,
                "quantum_ops": m * swap_test_gate_count(n_rps),
            }
        )
    return rows


def write_rows_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if not rows:
            return
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)


def write_cdf_csv(cdf, path) -> None:
    write_rows_csv([{"error_m": e, "fraction": f} for e, f in cdf], path)
