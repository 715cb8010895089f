"""Command-line front end: ``dealer-sim simulate|sweep|analyze``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional

from . import __version__
from .analysis import (
    LoadError,
    load_external_series,
    predicted_drift,
    read_tick_csv,
    trend_report,
    write_tick_csv,
)
from .engine import run
from .params import ConfigError, ModelParams, RunConfig
from .scenarios import UnknownPresetError, check_sweep_lists, preset, sweep

log = logging.getLogger("dealer_sim")

EXIT_OK, EXIT_RUN_FAILED, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
SEED_ENV = "DEALER_SIM_SEED"
MANIFEST_FORMAT = "dealer-sim-manifest/1"

_FIELD_TYPES = {
    "n_dealers": int, "spread": float, "greed": float, "expectation_half_width": float,
    "eps_buyer": float, "eps_seller": float, "policy": str, "seller_term_mode": str,
    "seed": int, "max_steps": int, "target_deals": int, "record_every_step": bool,
    "mu_window": int,
}


class UsageError(Exception):
    pass


def _coerce(key: str, text: str):
    if key not in _FIELD_TYPES:
        raise UsageError(f"unknown key {key!r} in --set; valid keys: {', '.join(sorted(_FIELD_TYPES))}")
    kind = _FIELD_TYPES[key]
    if text.lower() in ("none", "null", "") and key in ("mu_window", "target_deals"):
        return None
    try:
        if kind is bool:
            if text.lower() in ("1", "true", "yes", "on"):
                return True
            if text.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        return kind(text)
    except ValueError:
        raise UsageError(f"cannot parse {key}={text!r} as {kind.__name__}") from None


def parse_overrides(items) -> dict:
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--set expects key=value, got {item!r}")
        out[key.strip()] = _coerce(key.strip(), value.strip())
    return out


def load_config_file(path) -> dict:
    """Flat JSON mapping of config keys, or a run manifest (uses its ``config``)."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    if data.get("format") == MANIFEST_FORMAT:
        data = data["config"]
    return data


def resolve_config(preset_name: Optional[str], config_path: Optional[str], overrides: dict,
                   seed: Optional[int]) -> RunConfig:
    """Merge sources; seed priority is --seed, --set/config file, env, preset default."""
    if bool(preset_name) == bool(config_path):
        raise UsageError("give exactly one of --preset or --config")
    if preset_name:
        try:
            base = preset(preset_name).config.to_dict()
        except UnknownPresetError as exc:
            raise UsageError(str(exc)) from None
        explicit_seed = False
    else:
        loaded = load_config_file(config_path)
        base = {**RunConfig(ModelParams()).to_dict(), **loaded}
        explicit_seed = "seed" in loaded
    if SEED_ENV in os.environ and not explicit_seed and "seed" not in overrides:
        try:
            base["seed"] = int(os.environ[SEED_ENV])
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer") from None
    base.update(overrides)
    if seed is not None:
        base["seed"] = seed
    try:
        return RunConfig.from_dict(base)
    except (ConfigError, TypeError) as exc:
        raise UsageError(f"invalid config: {exc}") from None


def manifest_path(csv_path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.stem + ".manifest.json")


def build_manifest(series, preset_name=None, overrides=None) -> dict:
    return {
        "format": MANIFEST_FORMAT,
        "generator": f"dealer_sim {__version__}",
        "preset": preset_name,
        "overrides": overrides or {},
        "config": series.config_echo.to_dict(),
        "rng_algorithm": series.rng_algorithm,
        "kernel_backend": series.backend,
        "final_state_digest": series.final_state_digest,
        "initial_sum_bids": series.initial_sum_bids,
        "n_deals": len(series.records),
        "warnings": series.warnings,
    }


def write_run(series, out_path, preset_name=None, overrides=None) -> None:
    write_tick_csv(series, out_path)
    with open(manifest_path(out_path), "w", encoding="utf-8") as fh:
        json.dump(build_manifest(series, preset_name, overrides), fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_simulate(args) -> int:
    try:
        overrides = parse_overrides(args.set)
        config = resolve_config(args.preset, args.config, overrides, args.seed)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = args.out or f"{args.preset or Path(args.config).stem}_seed{config.params.seed}.csv"
    series = run(config)
    if args.seed is not None:
        overrides["seed"] = args.seed
    try:
        write_run(series, out, args.preset, overrides)
    except OSError as exc:
        print(f"error: cannot write {out}: {exc}", file=sys.stderr)
        return EXIT_IO
    for w in series.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"wrote {len(series.records)} deals to {out} (digest {series.final_state_digest})")
    return EXIT_OK


def _parse_list(text: str, kind):
    items = [t.strip() for t in text.split(",") if t.strip()]
    try:
        return [kind(t) for t in items]
    except ValueError:
        raise UsageError(f"cannot parse list {text!r}") from None


def _sweep_job(job):
    config, csv_path, preset_name = job
    series = run(config)
    write_run(series, csv_path, preset_name, {"eps_buyer": config.params.eps_buyer,
                                              "seed": config.params.seed})
    return trend_report(series, predicted_drift(config.params)).to_dict()


SUMMARY_COLUMNS = (
    "preset", "eps_buyer", "seed", "status", "csv", "n_deals", "ols_slope", "ols_intercept",
    "r_squared", "detrended_range", "price_std", "seller_count_min", "seller_count_max",
    "seller_count_mean", "mu_convergence", "conservation_residual", "degenerate", "error",
)


def cmd_sweep(args) -> int:
    try:
        eps_values = _parse_list(args.eps, float)
        seeds = _parse_list(args.seeds, int)
        check_sweep_lists(eps_values, seeds)
        overrides = parse_overrides(args.set)
        base = resolve_config(args.preset, None, overrides, None)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    out_dir = Path(args.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create {out_dir}: {exc}", file=sys.stderr)
        return EXIT_IO

    rows, jobs = [], []
    for eps in eps_values:
        for seed in seeds:
            name = f"{args.preset}_eps{eps!r}_seed{seed}.csv"
            row = {"preset": args.preset, "eps_buyer": repr(eps), "seed": seed, "csv": name}
            rows.append(row)
            try:
                (config,) = sweep(base, [eps], [seed])
            except ConfigError as exc:
                row.update(status="failed", error=str(exc))
                print(f"error: run {name} failed: {exc}", file=sys.stderr)
                continue
            jobs.append((row, (config, out_dir / name, args.preset)))

    if jobs:
        workers = args.jobs or min(len(jobs), os.cpu_count() or 1)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_sweep_job, job) for _, job in jobs]
            for (row, _), fut in zip(jobs, futures):
                try:
                    row.update(fut.result(), status="ok")
                except Exception as exc:  # reported per run
                    row.update(status="failed", error=str(exc))
                    print(f"error: run {row['csv']} failed: {exc}", file=sys.stderr)

    summary = out_dir / f"{args.preset}_summary.csv"
    try:
        with open(summary, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS, lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow({k: _fmt(row.get(k)) for k in SUMMARY_COLUMNS})
    except OSError as exc:
        print(f"error: cannot write {summary}: {exc}", file=sys.stderr)
        return EXIT_IO
    failed = sum(r["status"] != "ok" for r in rows)
    print(f"{len(rows) - failed}/{len(rows)} runs ok; summary in {summary}")
    return EXIT_RUN_FAILED if failed else EXIT_OK


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_report(report) -> str:
    d = report.to_dict()
    width = max(len(k) for k in d)
    lines = []
    for key, value in d.items():
        if value is None:
            text = "n/a"
        elif isinstance(value, float):
            text = f"{value:.6g}"
        else:
            text = str(value)
        lines.append(f"{key:<{width}}  {text}")
    return "\n".join(lines)


def cmd_analyze(args) -> int:
    path = Path(args.path)
    try:
        if args.external:
            report = trend_report(load_external_series(path, args.max_bad_fraction).to_table())
        else:
            initial, drift = None, args.drift
            mpath = manifest_path(path)
            if mpath.exists():
                try:
                    manifest = json.loads(mpath.read_text(encoding="utf-8"))
                except json.JSONDecodeError as exc:
                    raise LoadError(f"manifest {mpath} is not valid JSON: {exc}") from None
                initial = manifest.get("initial_sum_bids")
                if drift is None:
                    drift = predicted_drift(RunConfig.from_dict(manifest["config"]).params)
            table = read_tick_csv(path, initial_sum_bids=initial)
            if len(table) == 0:
                raise LoadError(f"{path} has no deal rows")
            report = trend_report(table, drift or 0.0)
    except (LoadError, UsageError, ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(format_report(report))
    if args.json:
        print(json.dumps(report.to_dict(), sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dealer-sim", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one simulation and write a tick CSV")
    sim.add_argument("--preset")
    sim.add_argument("--config", help="JSON config or run manifest")
    sim.add_argument("--set", action="append", metavar="KEY=VALUE", default=[])
    sim.add_argument("--seed", type=int)
    sim.add_argument("-o", "--out")
    sim.set_defaults(func=cmd_simulate)

    sw = sub.add_parser("sweep", help="run a preset over eps_buyer values and seeds")
    sw.add_argument("--preset", required=True)
    sw.add_argument("--eps", required=True, help="comma-separated eps_buyer values")
    sw.add_argument("--seeds", required=True, help="comma-separated seeds")
    sw.add_argument("--set", action="append", metavar="KEY=VALUE", default=[])
    sw.add_argument("-o", "--out", "--out-dir", dest="out_dir", default=".")
    sw.add_argument("-j", "--jobs", type=int)
    sw.set_defaults(func=cmd_sweep)

    an = sub.add_parser("analyze", help="print a trend report for a tick CSV")
    an.add_argument("path")
    an.add_argument("--external", action="store_true", help="two-column (index, price) file")
    an.add_argument("--json", action="store_true", help="also print a one-line JSON record")
    an.add_argument("--drift", type=float, help="predicted bid-sum drift per deal")
    an.add_argument("--max-bad-fraction", type=float, default=0.0)
    an.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
