"""Command-line entry point: run simulations, compare platforms, validate configs."""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import PLATFORM_D2D, PLATFORM_FOCAN, __version__
from .baseline import run_d2d
from .config import (
    ConfigError,
    build_d2d_config,
    build_power_model,
    build_sim_config,
    build_topology_from,
    build_workload,
    config_hash,
    load_config,
    normalize,
    validate,
)
from .energy import ASSUMED_DEFAULT_FIELDS, report, write_report_csv
from .engine import SimulationError, run as run_focan

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2

LATENCY_CSV_COLUMNS = (
    "run_id", "task_id", "app_id", "src", "dst",
    "pattern", "status", "arrival_s", "latency_s", "leg_delay_s",
)


def write_latency_csv(result, run_id: str, path: Path) -> None:
    def fmt(value):
        return "" if value is None else f"{value:.6f}"

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(LATENCY_CSV_COLUMNS)
        for rec in result.records:
            writer.writerow(
                [
                    run_id, rec.task_id, rec.app_id, rec.src, rec.dst,
                    rec.pattern, rec.status, fmt(rec.arrival_s),
                    fmt(rec.latency_s), fmt(rec.leg_delay_s),
                ]
            )


def write_manifest(result, run_id, cfg_hash, outputs, started, finished, path: Path) -> None:
    manifest = {
        "run_id": run_id,
        "platform": result.platform,
        "seed": result.seed,
        "config_hash": cfg_hash,
        "horizon_s": result.horizon_s,
        "started_utc": started,
        "finished_utc": finished,
        "outputs": {name: str(p) for name, p in outputs.items()},
        "counters": {
            "arrived": result.arrived,
            "completed": result.completed,
            "failed": result.failed,
            "rejected": result.rejected,
            "in_flight": result.in_flight,
            "connections": result.connections,
            "dropped_packets": result.dropped_packets,
            "cloud_abstracts": result.cloud_abstracts,
        },
        "cpu_total_j": result.ledger.cpu_total_j,
        "net_total_j": result.ledger.net_total_j,
        # These knobs are simulator assumptions, not hardware measurements.
        "assumed_defaults": list(ASSUMED_DEFAULT_FIELDS),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _execute_platform(platform: str, effective: dict):
    topology = build_topology_from(effective)
    workload = build_workload(effective, topology)
    sim_cfg = build_sim_config(effective)
    power = build_power_model(effective)
    if platform == PLATFORM_FOCAN:
        return run_focan(topology, workload, sim_cfg, power)
    return run_d2d(
        build_d2d_config(effective),
        workload,
        topology,
        power,
        horizon_s=sim_cfg.horizon_s,
        seed=sim_cfg.seed,
        app_registry=sim_cfg.app_registry,
        report_round_s=sim_cfg.report_round_s,
    )


def _write_run_outputs(result, effective: dict, out_dir: Path, started: str, finished: str):
    cfg_hash = config_hash(effective)
    run_id = f"{result.platform}-{cfg_hash[:8]}-s{result.seed}"
    out_dir.mkdir(parents=True, exist_ok=True)
    energy_path = out_dir / f"{result.platform}_energy.csv"
    latency_path = out_dir / f"{result.platform}_latency.csv"
    manifest_path = out_dir / f"{result.platform}_manifest.json"

    rows = report(result.ledger, run_id=run_id, horizon_s=result.horizon_s)
    fmt = effective.get("format", "csv")
    if fmt == "json":
        energy_path = energy_path.with_suffix(".json")
        latency_path = latency_path.with_suffix(".json")
        _write_json_reports(result, rows, run_id, energy_path, latency_path)
    else:
        write_report_csv(rows, energy_path)
        write_latency_csv(result, run_id, latency_path)
    outputs = {"energy": energy_path, "latency": latency_path}
    write_manifest(result, run_id, cfg_hash, outputs, started, finished, manifest_path)
    return manifest_path


def _write_json_reports(result, rows, run_id, energy_path, latency_path):
    energy = [
        {
            "run_id": r.run_id, "fn_id": r.fn_id, "comm_type": r.comm_type,
            "cpu_j": r.cpu_j, "net_j": r.net_j, "avg_power_w": r.avg_power_w,
            "round_index": r.round_index,
        }
        for r in rows
    ]
    latency = [
        {
            "run_id": run_id, "task_id": rec.task_id, "app_id": rec.app_id,
            "src": rec.src, "dst": rec.dst, "pattern": rec.pattern,
            "status": rec.status, "arrival_s": rec.arrival_s,
            "latency_s": rec.latency_s, "leg_delay_s": rec.leg_delay_s,
        }
        for rec in result.records
    ]
    energy_path.write_text(json.dumps(energy, indent=2) + "\n", encoding="utf-8")
    latency_path.write_text(json.dumps(latency, indent=2) + "\n", encoding="utf-8")


def _effective_from_args(args) -> dict:
    raw = load_config(args.config)
    overrides = {}
    if getattr(args, "trace", None) is not None:
        overrides["workload.trace"] = args.trace
    if getattr(args, "horizon", None) is not None:
        overrides["horizon_s"] = args.horizon
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    elif "seed" not in raw and os.environ.get("FOCAN_SIM_SEED"):
        overrides["seed"] = int(os.environ["FOCAN_SIM_SEED"])
    effective = normalize(raw, overrides)
    if getattr(args, "format", None):
        effective["format"] = args.format
    violations = validate(effective)
    if violations:
        raise ConfigError(violations)
    return effective


def cmd_run(args) -> int:
    effective = _effective_from_args(args)
    platforms = (
        [PLATFORM_FOCAN, PLATFORM_D2D] if args.platform == "both" else [args.platform]
    )
    out_dir = Path(args.out)
    for platform in platforms:
        started = datetime.now(timezone.utc).isoformat()
        result = _execute_platform(platform, effective)
        finished = datetime.now(timezone.utc).isoformat()
        manifest = _write_run_outputs(result, effective, out_dir, started, finished)
        print(f"{platform}: {result.completed}/{result.arrived} tasks completed, "
              f"manifest {manifest}")
    return EXIT_OK


def _class_power_from_csv(path: Path) -> dict:
    """Per-communication-class average network power rows of an energy CSV."""
    powers = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            if row["comm_type"] and not row["fn_id"] and not row["round_index"]:
                powers[row["comm_type"]] = float(row["avg_power_w"])
    return powers


def compare_rows(focan_manifest: dict, d2d_manifest: dict) -> list:
    """Side-by-side network power metrics, mirroring the per-class breakdown."""
    f_power = _class_power_from_csv(Path(focan_manifest["outputs"]["energy"]))
    d_power = _class_power_from_csv(Path(d2d_manifest["outputs"]["energy"]))
    rows = []
    for comm_type in ("interprimary", "primary", "secondary"):
        fv = f_power.get(comm_type, 0.0)
        dv = d_power.get(comm_type, 0.0)
        rows.append(("avg_power_w", comm_type, fv, dv))
    f_net, d_net = focan_manifest["net_total_j"], d2d_manifest["net_total_j"]
    horizon = focan_manifest["horizon_s"]
    rows.append(("net_total_avg_power_w", "", f_net / horizon, d_net / horizon))
    f_conn = max(focan_manifest["counters"]["connections"], 1)
    d_conn = max(d2d_manifest["counters"]["connections"], 1)
    rows.append(
        ("per_connection_power_w", "", f_net / horizon / f_conn, d_net / horizon / d_conn)
    )
    return rows


def write_compare_csv(rows: list, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["metric", "comm_type", "focan", "d2d", "d2d_over_focan"])
        for metric, comm_type, fv, dv in rows:
            ratio = f"{dv / fv:.6f}" if fv > 0 else ""
            writer.writerow([metric, comm_type, f"{fv:.6f}", f"{dv:.6f}", ratio])


def _load_manifest(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError([f"manifest: file not found: {p}"])
    with open(p, encoding="utf-8") as fh:
        return json.load(fh)


def cmd_compare(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.manifests:
        manifests = [_load_manifest(m) for m in args.manifests]
        by_platform = {m["platform"]: m for m in manifests}
        if set(by_platform) != {PLATFORM_FOCAN, PLATFORM_D2D}:
            raise ConfigError(["compare: need one focan and one d2d manifest"])
        focan_m, d2d_m = by_platform[PLATFORM_FOCAN], by_platform[PLATFORM_D2D]
        for field in ("config_hash", "seed", "horizon_s"):
            if focan_m[field] != d2d_m[field]:
                raise ConfigError([f"compare: mismatched workloads ({field} differs)"])
    else:
        if not args.config:
            raise ConfigError(["compare: need --config or two --manifests"])
        effective = _effective_from_args(args)
        manifest_paths = {}
        for platform in (PLATFORM_FOCAN, PLATFORM_D2D):
            started = datetime.now(timezone.utc).isoformat()
            result = _execute_platform(platform, effective)
            finished = datetime.now(timezone.utc).isoformat()
            manifest_paths[platform] = _write_run_outputs(
                result, effective, out_dir, started, finished
            )
        focan_m = _load_manifest(manifest_paths[PLATFORM_FOCAN])
        d2d_m = _load_manifest(manifest_paths[PLATFORM_D2D])

    rows = compare_rows(focan_m, d2d_m)
    compare_path = out_dir / "comparison.csv"
    write_compare_csv(rows, compare_path)
    print(f"comparison written to {compare_path}")
    return EXIT_OK


def cmd_validate(args) -> int:
    effective = _effective_from_args(args)
    effective.pop("format", None)
    print(json.dumps(effective, indent=2, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="focansim",
        description="Fog-supported smart-city network simulator with a D2D baseline",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--trace", help="two-column CSV trace overriding the config")
        p.add_argument("--seed", type=int, help="RNG seed (fallback: FOCAN_SIM_SEED)")
        p.add_argument("--horizon", type=float, help="simulated seconds")

    p_run = sub.add_parser("run", help="run one platform and write reports")
    common(p_run)
    p_run.add_argument("--platform", choices=["focan", "d2d", "both"], default="focan")
    p_run.add_argument("--out", default="out", help="output directory")
    p_run.add_argument("--format", choices=["csv", "json"], default="csv")
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="run or load both platforms and compare")
    p_cmp.add_argument("--config", help="JSON config file (runs both platforms)")
    p_cmp.add_argument("--manifests", nargs=2, metavar="MANIFEST",
                       help="two existing run manifests to compare")
    p_cmp.add_argument("--trace", help="two-column CSV trace overriding the config")
    p_cmp.add_argument("--seed", type=int, help="RNG seed (fallback: FOCAN_SIM_SEED)")
    p_cmp.add_argument("--horizon", type=float, help="simulated seconds")
    p_cmp.add_argument("--out", default="out", help="output directory")
    p_cmp.add_argument("--format", choices=["csv", "json"], default="csv")
    p_cmp.set_defaults(func=cmd_compare)

    p_val = sub.add_parser("validate", help="check a config and print the effective values")
    common(p_val)
    p_val.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        for violation in exc.violations:
            print(f"config error: {violation}", file=sys.stderr)
        return EXIT_USAGE
    except (SimulationError, OSError, ValueError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
