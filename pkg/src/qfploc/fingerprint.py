"""Offline fingerprint construction and online 1-NN matching.

Matching scores a query against every fingerprint location and returns the
highest-scoring one (ties go to the lowest entry index).  Three matchers share
the same contract:

``quantum-exact``
    swap-test circuit, ancilla probability read exactly.
``quantum-sampled``
    swap-test circuit, ``K`` measured shots per location.
``classical-oracle``
    squared dot product of the feature vectors.
"""
from __future__ import annotations

import hashlib
import json
import struct
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np

from .features import MODES, FeatureVector, RssVector, transform
from .stateprep import PREPARERS, PreparedRegister
from .swaptest import SwapTestConfig, SwapTestResult, run_swap_test

MATCHERS = ("quantum-exact", "quantum-sampled", "classical-oracle")

FORMAT_NAME = "qfploc-fingerprint"
FORMAT_VERSION = 1


class FingerprintError(ValueError):
    """Inconsistent or incompatible fingerprint data."""


@dataclass(frozen=True)
class Location:
    id: str
    x: float
    y: float

    def __post_init__(self):
        if not (np.isfinite(self.x) and np.isfinite(self.y)):
            raise ValueError(f"location {self.id!r} has non-finite coordinates")


class Sample(NamedTuple):
    location: Location
    rss: RssVector
    device: str = "default"


@dataclass(frozen=True)
class FingerprintEntry:
    location: Location
    features: FeatureVector


@dataclass
class Fingerprint:
    entries: list[FingerprintEntry]
    mode: str
    rp_ids: tuple
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.entries:
            raise FingerprintError("a fingerprint needs at least one entry")
        dims = {e.features.dimension for e in self.entries}
        modes = {e.features.mode for e in self.entries}
        if len(dims) != 1 or modes != {self.mode}:
            raise FingerprintError(f"entries disagree on dimension {dims} or mode {modes}")
        self.rp_ids = tuple(self.rp_ids)
        self._prepared: dict[str, list[PreparedRegister]] = {}

    def __len__(self):
        return len(self.entries)

    @property
    def dimension(self) -> int:
        return self.entries[0].features.dimension

    @property
    def num_qubits(self) -> int:
        return self.entries[0].features.num_qubits

    def prepared(self, prep: str = "circuit") -> list[PreparedRegister]:
        """Encoded registers for every entry, built once and cached."""
        if prep not in self._prepared:
            fn = PREPARERS[prep]
            self._prepared[prep] = [fn(e.features) for e in self.entries]
        return self._prepared[prep]

    def save(self, path) -> None:
        Path(path).write_text(dumps_fingerprint(self), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "Fingerprint":
        return loads_fingerprint(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class MatchReport:
    estimated: Location
    scores: list[tuple[Location, SwapTestResult]]
    matcher: str
    best_index: int

    @property
    def similarities(self) -> np.ndarray:
        return np.array([r.similarity for _, r in self.scores])


def build_fingerprint(samples: Iterable, mode: str, metadata: dict | None = None) -> Fingerprint:
    """One entry per distinct location id; repeated samples are averaged in dBm."""
    if mode not in MODES:
        raise ValueError(f"unknown feature mode {mode!r}")
    groups: "OrderedDict[str, list]" = OrderedDict()
    locations: dict[str, Location] = {}
    rp_ids = None
    for loc, rss, *_ in samples:
        if rp_ids is None:
            rp_ids = rss.rp_ids
        elif rss.rp_ids != rp_ids:
            raise FingerprintError(
                f"sample at {loc.id!r} has RP ordering {rss.rp_ids}, expected {rp_ids}"
            )
        groups.setdefault(loc.id, []).append(rss.values)
        locations.setdefault(loc.id, loc)
    if rp_ids is None:
        raise FingerprintError("no samples given")

    entries = [
        FingerprintEntry(locations[lid], transform(RssVector(np.mean(vals, axis=0), rp_ids), mode))
        for lid, vals in groups.items()
    ]
    meta = {"aggregation": "mean-dbm", "num_samples": sum(len(v) for v in groups.values())}
    meta.update(metadata or {})
    return Fingerprint(entries, mode, rp_ids, meta)


def classical_similarity(a, b) -> float:
    a = a.features if isinstance(a, FeatureVector) else np.asarray(a, dtype=float)
    b = b.features if isinstance(b, FeatureVector) else np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.dot(a, b) ** 2)


def localization_error(estimated: Location, truth: Location) -> float:
    return float(np.hypot(estimated.x - truth.x, estimated.y - truth.y))


def derive_seed(base_seed: int, query_id: int, entry: int, replicate: int = 0) -> int:
    """Stable 63-bit seed: BLAKE2b-64 of the four values packed as little-endian int64."""
    packed = struct.pack("<4q", base_seed, query_id, entry, replicate)
    digest = hashlib.blake2b(packed, digest_size=8).digest()
    return int.from_bytes(digest, "little") >> 1


def _classical_result(sim: float) -> SwapTestResult:
    return SwapTestResult(sim, 0.5 * (1.0 + sim), 0, 0, "classical", sim, 0)


def score_entries(
    fp: Fingerprint,
    query: FeatureVector,
    config: SwapTestConfig,
    matcher: str,
    query_id: int = 0,
    prep: str = "circuit",
) -> list[SwapTestResult]:
    if matcher == "classical-oracle":
        return [_classical_result(classical_similarity(query, e.features)) for e in fp.entries]
    if matcher not in MATCHERS:
        raise ValueError(f"unknown matcher {matcher!r}; expected one of {MATCHERS}")
    if matcher == "quantum-sampled" and config.shots == 0:
        raise ValueError("quantum-sampled matcher needs shots >= 1")
    online = PREPARERS[prep](query)
    results = []
    for j, reg in enumerate(fp.prepared(prep)):
        if matcher == "quantum-exact":
            cfg = SwapTestConfig(shots=0)
        else:
            cfg = SwapTestConfig(config.shots, derive_seed(config.seed, query_id, j), config.resimulate)
        results.append(run_swap_test(online, reg, cfg))
    return results


def _check_online(fp: Fingerprint, online: RssVector) -> None:
    if tuple(online.rp_ids) != fp.rp_ids:
        raise FingerprintError(
            f"online RP ordering {tuple(online.rp_ids)} does not match fingerprint {fp.rp_ids}"
        )


def localize(
    fp: Fingerprint,
    online: RssVector,
    config: SwapTestConfig = SwapTestConfig(),
    matcher: str = "quantum-sampled",
    query_id: int = 0,
    prep: str = "circuit",
) -> MatchReport:
    _check_online(fp, online)
    query = transform(online, fp.mode)
    return match_features(fp, query, config, matcher, query_id, prep)


def match_features(
    fp: Fingerprint,
    query: FeatureVector,
    config: SwapTestConfig = SwapTestConfig(),
    matcher: str = "quantum-sampled",
    query_id: int = 0,
    prep: str = "circuit",
) -> MatchReport:
    if query.dimension != fp.dimension:
        raise FingerprintError(f"query dimension {query.dimension} != fingerprint {fp.dimension}")
    results = score_entries(fp, query, config, matcher, query_id, prep)
    best = int(np.argmax([r.similarity for r in results]))  # first max wins ties
    scores = [(e.location, r) for e, r in zip(fp.entries, results)]
    return MatchReport(fp.entries[best].location, scores, matcher, best)


def localize_many(
    fp: Fingerprint,
    queries: list[RssVector],
    config: SwapTestConfig = SwapTestConfig(),
    matcher: str = "quantum-sampled",
    workers: int = 1,
    prep: str = "circuit",
) -> list[MatchReport]:
    """Localize a batch; ``query_id`` is the position in ``queries``."""
    fp.prepared(prep)  # warm the cache before fanning out
    jobs = [(i, q) for i, q in enumerate(queries)]

    def one(job):
        i, q = job
        return localize(fp, q, config, matcher, query_id=i, prep=prep)

    if workers <= 1:
        return [one(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, jobs))


def fingerprint_to_dict(fp: Fingerprint) -> dict:
    first = fp.entries[0].features
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "mode": fp.mode,
        "rp_ids": list(fp.rp_ids),
        "dimension": first.dimension,
        "num_qubits": first.num_qubits,
        "feature_length": first.length,
        "metadata": fp.metadata,
        "entries": [
            {
                "id": e.location.id,
                "x": e.location.x,
                "y": e.location.y,
                "features": e.features.features.tolist(),
            }
            for e in fp.entries
        ],
    }


def dumps_fingerprint(fp: Fingerprint) -> str:
    return json.dumps(fingerprint_to_dict(fp), indent=1) + "\n"


def loads_fingerprint(text: str) -> Fingerprint:
    doc = json.loads(text)
    if doc.get("format") != FORMAT_NAME:
        raise FingerprintError(f"not a fingerprint file (format={doc.get('format')!r})")
    if doc.get("version") != FORMAT_VERSION:
        raise FingerprintError(f"unsupported fingerprint version {doc.get('version')!r}")
    mode, n, length = doc["mode"], doc["num_qubits"], doc["feature_length"]
    entries = []
    for row in doc["entries"]:
        feats = np.array(row["features"], dtype=float)
        if len(feats) != doc["dimension"]:
            raise FingerprintError(f"entry {row['id']!r} has {len(feats)} features")
        entries.append(
            FingerprintEntry(
                Location(row["id"], float(row["x"]), float(row["y"])),
                FeatureVector(feats, mode, n, length),
            )
        )
    return Fingerprint(entries, mode, tuple(doc["rp_ids"]), doc.get("metadata", {}))
