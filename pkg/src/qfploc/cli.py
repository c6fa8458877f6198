"""Command-line interface.

Every subcommand reads an optional JSON config (``--config``); explicit flags
override it, and ``QFPLOC_SEED`` overrides the config's base seed (a
``--seed`` flag still wins).  Exit codes: 0 success, 2 configuration error,
3 data error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

from .evaluation import (
    complexity_report,
    evaluate,
    sweep_shots,
    sweep_table,
    write_cdf_csv,
    write_rows_csv,
)
from .features import MODES, DegenerateFeatureError
from .fingerprint import MATCHERS, Fingerprint, FingerprintError, build_fingerprint, localize_many
from .swaptest import DEFAULT_SHOTS, SwapTestConfig
from .testbed import (
    DataError,
    DeviceProfile,
    TestbedConfig,
    apply_device,
    generate_testbed,
    ingest_csv,
    write_csv,
)

SEED_ENV = "QFPLOC_SEED"

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 2, 3

DEFAULTS = {
    "seed": 0,
    "mode": "difference",
    "matcher": "quantum-exact",
    "shots": DEFAULT_SHOTS,
    "shot_counts": [16, 64, 256, 1024, 4096, 16384],
    "repeats": 1,
    "workers": 1,
    "prep": "circuit",
    "testbed": {},
    "device": {},
    "n_values": [2, 4, 8, 16, 32, 64, 100],
    "m": 100,
}

log = logging.getLogger("qfploc")


class ConfigError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def load_config(args: argparse.Namespace) -> dict:
    cfg = json.loads(json.dumps(DEFAULTS))
    if args.config:
        try:
            user = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(user, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(user) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(user)
    env_seed = os.environ.get(SEED_ENV)
    if env_seed is not None:
        try:
            cfg["seed"] = int(env_seed)
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {env_seed!r}") from None
    for key in ("seed", "mode", "matcher", "shots", "shot_counts", "repeats", "workers", "prep", "n_values", "m"):
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    if cfg["mode"] not in MODES:
        raise ConfigError(f"mode must be one of {MODES}")
    if cfg["matcher"] not in MATCHERS:
        raise ConfigError(f"matcher must be one of {MATCHERS}")
    if cfg["prep"] not in ("circuit", "direct"):
        raise ConfigError("prep must be 'circuit' or 'direct'")
    if cfg["shots"] < 0:
        raise ConfigError("shots must be >= 0")
    return cfg


def _swap_config(cfg: dict) -> SwapTestConfig:
    return SwapTestConfig(shots=cfg["shots"], seed=cfg["seed"])


def _load_fp(path) -> Fingerprint:
    try:
        return Fingerprint.load(path)
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise DataError(f"cannot load fingerprint {path}: {exc}") from None


def _dump_json(obj, path) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def cmd_generate(args, cfg) -> None:
    tb_cfg = dict(cfg["testbed"])
    tb_cfg.setdefault("seed", cfg["seed"])
    try:
        testbed_config = TestbedConfig.from_dict(tb_cfg)
        profile = DeviceProfile(**cfg["device"]) if cfg["device"] else DeviceProfile()
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    tb = generate_testbed(testbed_config)
    test = apply_device(tb.test_samples, profile, seed=testbed_config.seed + 1)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(tb.fingerprint_samples, out / "fingerprint_samples.csv")
    write_csv(test, out / "test_samples.csv")
    _dump_json(
        {
            "testbed": testbed_config.to_dict(),
            "device": {"name": profile.name, "gain_offset": profile.gain_offset,
                       "per_rp_jitter_sigma": profile.per_rp_jitter_sigma},
            "rp_ids": list(tb.rp_ids),
            "rp_positions": tb.rp_positions.tolist(),
        },
        out / "testbed.json",
    )


def cmd_build_fp(args, cfg) -> None:
    samples = ingest_csv(args.samples)
    fp = build_fingerprint(samples, cfg["mode"], {"source": Path(args.samples).name})
    fp.save(args.out)


def cmd_localize(args, cfg) -> None:
    fp = _load_fp(args.fingerprint)
    samples = ingest_csv(args.samples, rp_ids=fp.rp_ids)
    reports = localize_many(
        fp, [s.rss for s in samples], _swap_config(cfg), cfg["matcher"], cfg["workers"], cfg["prep"]
    )
    fh = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow(["point_id", "estimated_id", "x", "y", "score"])
        for s, rep in zip(samples, reports):
            best = rep.scores[rep.best_index][1]
            w.writerow([s.location.id, rep.estimated.id, repr(rep.estimated.x),
                        repr(rep.estimated.y), repr(best.similarity)])
    finally:
        if fh is not sys.stdout:
            fh.close()


def _config_echo(cfg: dict, keys) -> dict:
    return {k: cfg[k] for k in keys}


def cmd_evaluate(args, cfg) -> None:
    fp = _load_fp(args.fingerprint)
    samples = ingest_csv(args.samples, rp_ids=fp.rp_ids)
    report = evaluate(fp, samples, cfg["matcher"], _swap_config(cfg), cfg["prep"], cfg["workers"])
    echo = _config_echo(cfg, ("matcher", "shots", "seed", "prep"))
    echo.update(mode=fp.mode, locations=len(fp), test_points=len(samples))
    _dump_json(report.to_dict(echo), args.out)
    if args.cdf_out:
        write_cdf_csv(report.cdf, args.cdf_out)


def cmd_sweep_shots(args, cfg) -> None:
    fp = _load_fp(args.fingerprint)
    samples = ingest_csv(args.samples, rp_ids=fp.rp_ids)
    reports = sweep_shots(
        fp, samples, cfg["shot_counts"], cfg["seed"], cfg["prep"], cfg["workers"], cfg["repeats"]
    )
    write_rows_csv(sweep_table(reports), args.out)


def cmd_complexity(args, cfg) -> None:
    try:
        rows = complexity_report(cfg["n_values"], cfg["m"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if args.out:
        write_rows_csv(rows, args.out)
    else:
        w = csv.DictWriter(sys.stdout, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qfploc", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *extra):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int)
        for name in extra:
            if name == "matcher":
                p.add_argument("--matcher", choices=MATCHERS)
                p.add_argument("--shots", type=int)
                p.add_argument("--prep", choices=("circuit", "direct"))
                p.add_argument("--workers", type=int)
            elif name == "mode":
                p.add_argument("--mode", choices=MODES)

    p = sub.add_parser("generate", help="synthesize fingerprint and test CSVs")
    common(p)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("build-fp", help="build a fingerprint JSON from a samples CSV")
    common(p, "mode")
    p.add_argument("--samples", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_fp)

    p = sub.add_parser("localize", help="estimate the location of every sample")
    common(p, "matcher")
    p.add_argument("--fingerprint", required=True)
    p.add_argument("--samples", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_localize)

    p = sub.add_parser("evaluate", help="error quantiles and CDF over a test set")
    common(p, "matcher")
    p.add_argument("--fingerprint", required=True)
    p.add_argument("--samples", required=True)
    p.add_argument("--out", default="-")
    p.add_argument("--cdf-out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep-shots", help="median error versus number of shots")
    common(p)
    p.add_argument("--fingerprint", required=True)
    p.add_argument("--samples", required=True)
    p.add_argument("--shot-counts", dest="shot_counts", type=_int_list)
    p.add_argument("--repeats", type=int)
    p.add_argument("--prep", choices=("circuit", "direct"))
    p.add_argument("--workers", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep_shots)

    p = sub.add_parser("complexity", help="classical vs quantum matching cost table")
    common(p)
    p.add_argument("--n-values", dest="n_values", type=_int_list)
    p.add_argument("--m", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_complexity)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args)
        args.func(args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, FingerprintError, DegenerateFeatureError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
