"""Device-independent RSS feature transforms.

RSS values are used as reported, in dBm (log scale, usually negative).  Pairs
are taken in lexicographic order ``(0,1), (0,2), ..., (N-2,N-1)`` with the
lower index in the numerator/minuend.  Every transform L2-normalizes the
unpadded feature vector and then zero-pads it to the next power of two so it
can be amplitude-encoded.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil, comb, log2
from typing import Sequence

import numpy as np

MISSING_RSS_DBM = -110.0

MODES = ("ratio", "difference", "raw")


class DegenerateFeatureError(ValueError):
    """The transform produced a vector that cannot be normalized."""


@dataclass(frozen=True)
class RssVector:
    values: np.ndarray
    rp_ids: tuple = field(default=())

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or len(values) < 2:
            raise ValueError(f"an RSS vector needs at least 2 readings, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("RSS values must be finite (impute unheard RPs first)")
        rp_ids = tuple(self.rp_ids) or tuple(range(len(values)))
        if len(rp_ids) != len(values):
            raise ValueError(f"{len(rp_ids)} rp ids for {len(values)} readings")
        object.__setattr__(self, "rp_ids", rp_ids)

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class FeatureVector:
    features: np.ndarray
    mode: str
    num_qubits: int
    length: int  # before padding

    @property
    def dimension(self) -> int:
        return len(self.features)

    @property
    def unpadded(self) -> np.ndarray:
        return self.features[: self.length]


def impute_missing(values, sentinel: float = MISSING_RSS_DBM) -> np.ndarray:
    """Replace NaN/None readings (unheard RPs) by ``sentinel``."""
    arr = np.array([np.nan if v is None else v for v in values], dtype=float)
    arr[np.isnan(arr)] = sentinel
    return arr


def num_qubits_for(length: int) -> int:
    """Register width for ``length`` features; at least one qubit."""
    return max(1, ceil(log2(length)))


def pair_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(n, k=1)


def pair_count(n: int) -> int:
    return comb(n, 2)


def _values(rss: RssVector | Sequence[float]) -> np.ndarray:
    if isinstance(rss, RssVector):
        return rss.values
    return RssVector(rss).values


def encode(raw_features: np.ndarray, mode: str) -> FeatureVector:
    """Normalize and zero-pad a feature vector."""
    raw_features = np.asarray(raw_features, dtype=float)
    norm = np.linalg.norm(raw_features)
    if norm == 0.0 or not np.isfinite(norm):
        raise DegenerateFeatureError(f"{mode} features have norm {norm}; cannot encode")
    n = num_qubits_for(len(raw_features))
    padded = np.zeros(1 << n)
    padded[: len(raw_features)] = raw_features / norm
    return FeatureVector(padded, mode, n, len(raw_features))


def power_ratio(rss) -> FeatureVector:
    values = _values(rss)
    i, j = pair_indices(len(values))
    if np.any(values[j] == 0.0):
        raise ZeroDivisionError("power ratio undefined for a 0 dBm denominator")
    return encode(values[i] / values[j], "ratio")


def power_difference(rss) -> FeatureVector:
    values = _values(rss)
    i, j = pair_indices(len(values))
    return encode(values[i] - values[j], "difference")


def raw_rss(rss) -> FeatureVector:
    return encode(_values(rss), "raw")


TRANSFORMS = {"ratio": power_ratio, "difference": power_difference, "raw": raw_rss}


def transform(rss, mode: str) -> FeatureVector:
    try:
        fn = TRANSFORMS[mode]
    except KeyError:
        raise ValueError(f"unknown feature mode {mode!r}; expected one of {MODES}") from None
    return fn(rss)
