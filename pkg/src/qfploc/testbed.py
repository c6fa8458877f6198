"""Synthetic radio testbed and CSV sample I/O.

RSS follows the log-distance path-loss model

    rss = tx_power - 10 * exponent * log10(max(d, 1 m)) + N(0, shadowing_sigma)

Fingerprint samples sit at the centres of a regular grid; test samples are
drawn uniformly over the area (or on the grid centres, for self-localization
checks).  Readings are rounded to ``rss_resolution`` dB, as phone APIs report
integer dBm.
"""
from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .features import MISSING_RSS_DBM, RssVector
from .fingerprint import Location, Sample

CSV_COLUMNS = ("point_id", "x", "y", "rp_id", "rss_dbm", "device_id")


class DataError(ValueError):
    """Malformed or inconsistent input data."""


@dataclass
class TestbedConfig:
    width: float = 500.0
    height: float = 400.0
    num_rps: int = 8
    rp_positions: list | str = "uniform-random"
    path_loss_exponent: float = 3.0
    tx_power: float = -30.0
    shadowing_sigma: float = 4.0
    grid_step: float = 25.0
    num_test_points: int = 200
    test_layout: str = "random"  # or "grid"
    samples_per_cell: int = 1
    rss_resolution: float = 1.0  # 0 disables rounding
    seed: int = 0

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0 or self.grid_step <= 0:
            raise ValueError("area dimensions and grid step must be positive")
        if self.num_rps < 2:
            raise ValueError(f"need at least 2 RPs, got {self.num_rps}")
        if self.shadowing_sigma < 0:
            raise ValueError("shadowing sigma must be >= 0")
        if self.test_layout not in ("random", "grid"):
            raise ValueError(f"unknown test layout {self.test_layout!r}")
        if not isinstance(self.rp_positions, str) and len(self.rp_positions) != self.num_rps:
            raise ValueError(f"{len(self.rp_positions)} RP positions for {self.num_rps} RPs")

    @classmethod
    def from_dict(cls, d: dict) -> "TestbedConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown testbed options: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class DeviceProfile:
    name: str = "reference"
    gain_offset: float = 0.0
    per_rp_jitter_sigma: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.gain_offset) or self.per_rp_jitter_sigma < 0:
            raise ValueError(f"invalid device profile {self!r}")


@dataclass
class Testbed:
    config: TestbedConfig
    rp_positions: np.ndarray
    rp_ids: tuple
    fingerprint_samples: list[Sample] = field(default_factory=list)
    test_samples: list[Sample] = field(default_factory=list)

    __test__ = False

    def __iter__(self):
        # allows ``fp_samples, test_samples = generate_testbed(cfg)``
        return iter((self.fingerprint_samples, self.test_samples))


def path_loss_rss(tx_power: float, exponent: float, distance) -> np.ndarray:
    d = np.maximum(np.asarray(distance, dtype=float), 1.0)
    return tx_power - 10.0 * exponent * np.log10(d)


def grid_points(config: TestbedConfig) -> np.ndarray:
    xs = np.arange(config.grid_step / 2, config.width, config.grid_step)
    ys = np.arange(config.grid_step / 2, config.height, config.grid_step)
    gx, gy = np.meshgrid(xs, ys, indexing="xy")
    return np.column_stack([gx.ravel(), gy.ravel()])


def _quantize(values: np.ndarray, resolution: float) -> np.ndarray:
    if resolution <= 0:
        return values
    return np.round(values / resolution) * resolution


def _measure(points, rps, config, rng) -> np.ndarray:
    d = np.linalg.norm(points[:, None, :] - rps[None, :, :], axis=2)
    rss = path_loss_rss(config.tx_power, config.path_loss_exponent, d)
    if config.shadowing_sigma > 0:
        rss = rss + rng.normal(0.0, config.shadowing_sigma, size=rss.shape)
    return _quantize(rss, config.rss_resolution)


def generate_testbed(config: TestbedConfig) -> Testbed:
    rng = np.random.default_rng(config.seed)
    if isinstance(config.rp_positions, str):
        if config.rp_positions != "uniform-random":
            raise ValueError(f"unknown RP placement {config.rp_positions!r}")
        rps = rng.uniform([0, 0], [config.width, config.height], size=(config.num_rps, 2))
    else:
        rps = np.asarray(config.rp_positions, dtype=float)
    rp_ids = tuple(f"rp{k}" for k in range(config.num_rps))

    cells = grid_points(config)
    fp_samples = []
    for _ in range(config.samples_per_cell):
        rss = _measure(cells, rps, config, rng)
        for k, (pt, row) in enumerate(zip(cells, rss)):
            loc = Location(f"cell{k}", float(pt[0]), float(pt[1]))
            fp_samples.append(Sample(loc, RssVector(row, rp_ids), "reference"))

    if config.test_layout == "grid":
        test_pts = cells
    else:
        test_pts = rng.uniform([0, 0], [config.width, config.height], size=(config.num_test_points, 2))
    test_rss = _measure(test_pts, rps, config, rng)
    test_samples = [
        Sample(Location(f"test{k}", float(pt[0]), float(pt[1])), RssVector(row, rp_ids), "reference")
        for k, (pt, row) in enumerate(zip(test_pts, test_rss))
    ]
    return Testbed(config, rps, rp_ids, fp_samples, test_samples)


def apply_device(samples: list[Sample], profile: DeviceProfile, seed: int = 0) -> list[Sample]:
    """Offset every reading by ``gain_offset`` dB plus per-reading Gaussian jitter."""
    rng = np.random.default_rng(seed)
    out = []
    for s in samples:
        values = s.rss.values + profile.gain_offset
        if profile.per_rp_jitter_sigma > 0:
            values = values + rng.normal(0.0, profile.per_rp_jitter_sigma, size=values.shape)
        out.append(Sample(s.location, RssVector(values, s.rss.rp_ids), profile.name))
    return out


def write_csv(samples: list[Sample], path) -> None:
    """Long format, one row per (sample, RP).  Repeated scans of one point get a ``scan`` column."""
    scans: dict[tuple, int] = {}
    rows = []
    for s in samples:
        key = (s.location.id, s.device)
        scan = scans.get(key, -1) + 1
        scans[key] = scan
        for rp, v in zip(s.rss.rp_ids, s.rss.values):
            rows.append([s.location.id, repr(s.location.x), repr(s.location.y), rp, repr(float(v)), s.device, scan])
    with_scan = any(r[-1] for r in rows)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS + (("scan",) if with_scan else ()))
        for r in rows:
            w.writerow(r if with_scan else r[:-1])


def ingest_csv(path, rp_ids=None, sentinel: float = MISSING_RSS_DBM) -> list[Sample]:
    """Parse a long-format CSV into samples.

    A sample is keyed by ``(point_id, device_id, scan)``; ``scan`` is an
    optional column (default 0).  RP columns missing from a sample, or rows
    with an empty ``rss_dbm``, get ``sentinel``.  When ``rp_ids`` is given it
    fixes the RP universe and order and any other id is an error; otherwise the
    order of first appearance is used.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        missing = [c for c in CSV_COLUMNS if c not in header]
        if missing:
            raise DataError(f"{path}:1: missing columns {missing}")
        col = {name: header.index(name) for name in header}

        fixed = rp_ids is not None
        universe = list(rp_ids) if fixed else []
        order: list[tuple] = []
        points: dict[tuple, tuple[float, float]] = {}
        readings: dict[tuple, dict] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                pid = row[col["point_id"]]
                x, y = float(row[col["x"]]), float(row[col["y"]])
                rp = row[col["rp_id"]]
                raw = row[col["rss_dbm"]].strip()
                rss = float(raw) if raw else np.nan
                device = row[col["device_id"]]
                scan = int(row[col["scan"]]) if "scan" in col and row[col["scan"]].strip() else 0
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
            if not (np.isfinite(x) and np.isfinite(y)) or np.isinf(rss):
                raise DataError(f"{path}:{lineno}: non-finite value")
            if rp not in universe:
                if fixed:
                    raise DataError(f"{path}:{lineno}: unknown rp_id {rp!r}")
                universe.append(rp)
            key = (pid, device, scan)
            if key not in points:
                order.append(key)
                points[key] = (x, y)
                readings[key] = {}
            elif points[key] != (x, y):
                raise DataError(f"{path}:{lineno}: point {pid!r} has inconsistent coordinates")
            if rp in readings[key]:
                raise DataError(f"{path}:{lineno}: duplicate reading for {pid!r}/{rp!r}")
            readings[key][rp] = rss

    if len(universe) < 2:
        raise DataError(f"{path}: need readings from at least 2 RPs, found {universe}")
    samples = []
    for key in order:
        vals = np.array([readings[key].get(rp, np.nan) for rp in universe])
        vals[np.isnan(vals)] = sentinel
        x, y = points[key]
        samples.append(Sample(Location(key[0], x, y), RssVector(vals, tuple(universe)), key[1]))
    return samples
