"""Config loading, defaults, validation, and deterministic hashing.

One JSON file drives both platforms. Precedence is flags > file > defaults;
the seed may also fall back to the FOCAN_SIM_SEED environment variable.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
import random
from pathlib import Path

from .baseline import D2dConfig
from .energy import PowerModel
from .engine import SimConfig
from .routing import TdmaConfig
from .topology import CityTopology, TopologyConfig, build_topology
from .workload import (
    bundled_trace_path,
    load_trace,
    materialize,
    gen_poisson,
    scale_trace,
    uniform_picker,
)


class ConfigError(Exception):
    """Invalid configuration; carries one message per violated field path."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


def default_config() -> dict:
    return {
        "horizon_s": 1000.0,
        "seed": 1,
        "delays": {"t2t_s": 0.002, "tfnt_s": 0.004, "fn2fn_hop_s": 0.006},
        "rtt": {"wireless_s": 0.0005, "wired_s": 0.010},
        "admission_cap_bps": 2.5e9,
        "cores": 6,
        "core_rate_bps": 10e6,
        "cache_capacity": 32,
        "miss_penalty_s": 0.0,
        "auth_latency_s": 0.0,
        "ack_bits": 8000.0,
        "tdma": {"slot_s": 0.001, "slots_per_round": 10, "ttl_rounds": 100},
        "power": {
            "p_idle_w": 105.0,
            "p_max_w": 195.0,
            "nic_wireless_j_per_bit": 2e-7,
            "nic_wired_j_per_bit": 5e-8,
        },
        "report_round_s": 1.0,
        "utilization_sample_s": 1.0,
        "topology": None,  # None selects the built-in demo city
        "workload": {
            "kind": "trace",
            "trace": None,  # None selects the bundled synthetic trace
            "max_rate_bps": 2e7,
            "task_bits": 1e6,
            "cpu_demand_bits": None,
            "rate_tasks_per_s": None,
        },
        "d2d": {
            "link_rate_bps": 11e6,
            "retx_prob": 0.2,
            "timeout_penalty_s": 0.2,
            "max_retries": 7,
        },
        "app_registry": None,
    }


def demo_city(n_clusters: int = 4, things_per_cluster: int = 5, seed: int = 42) -> dict:
    """Deterministic sample city: widely separated FN clusters of things.

    Cluster centers sit on a 100 m grid with 30 m radii, so cross-cluster
    pairs always exceed direct radio reach and must ride the backbone.
    """
    rng = random.Random(seed)
    centers = [(0.0, 0.0), (100.0, 0.0), (0.0, 100.0), (100.0, 100.0), (200.0, 0.0),
               (0.0, 200.0), (200.0, 100.0), (100.0, 200.0), (200.0, 200.0)]
    apps = [f"app-{i}" for i in range(4)]
    fns = []
    things = []
    for c in range(n_clusters):
        cx, cy = centers[c % len(centers)]
        fns.append({"id": f"fn-{c:02d}", "x": cx, "y": cy, "radius": 30.0})
        for k in range(things_per_cluster):
            angle = rng.uniform(0, 2 * math.pi)
            dist = rng.uniform(2.0, 25.0)
            radios = ["wifi"]
            if rng.random() < 0.5:
                radios.append(rng.choice(["bluetooth", "zigbee"]))
            things.append(
                {
                    "id": f"thing-{c:02d}-{k:02d}",
                    "x": round(cx + dist * math.cos(angle), 3),
                    "y": round(cy + dist * math.sin(angle), 3),
                    "radios": radios,
                    "apps": apps,
                }
            )
    return {"things": things, "fns": fns, "fn_edges": None}


def load_config(path: str | Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError([f"config: file not found: {path}"])
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"config: invalid JSON: {exc}"]) from None
    if not isinstance(raw, dict):
        raise ConfigError(["config: top level must be an object"])
    return raw


def normalize(raw: dict, overrides: dict | None = None) -> dict:
    """Merge defaults, file values, and flag overrides into one effective dict."""
    effective = _merge(default_config(), raw)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        node = effective
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value
    if effective["topology"] is None:
        effective["topology"] = demo_city()
    return effective


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def validate(effective: dict) -> list:
    """Schema and invariant checks; returns violation messages with field paths."""
    v = []

    def check(path, ok, message):
        if not ok:
            v.append(f"{path}: {message}")

    def num(path, value, lo=None, hi=None, strict_lo=False, strict_hi=False):
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            v.append(f"{path}: must be a number")
            return
        if lo is not None and (value <= lo if strict_lo else value < lo):
            v.append(f"{path}: must be {'>' if strict_lo else '>='} {lo}")
        if hi is not None and (value >= hi if strict_hi else value > hi):
            v.append(f"{path}: must be {'<' if strict_hi else '<='} {hi}")

    known = set(default_config())
    for key in effective:
        check(f"{key}", key in known, "unknown field")

    num("horizon_s", effective["horizon_s"], lo=0, strict_lo=True)
    check("seed", isinstance(effective["seed"], int), "must be an integer")
    for name in ("t2t_s", "tfnt_s", "fn2fn_hop_s"):
        num(f"delays.{name}", effective["delays"][name], lo=0, strict_lo=True)
    for name in ("wireless_s", "wired_s"):
        num(f"rtt.{name}", effective["rtt"][name], lo=0, strict_lo=True)
    num("admission_cap_bps", effective["admission_cap_bps"], lo=0, strict_lo=True)
    num("cores", effective["cores"], lo=1)
    num("core_rate_bps", effective["core_rate_bps"], lo=0, strict_lo=True)
    num("cache_capacity", effective["cache_capacity"], lo=0)
    num("miss_penalty_s", effective["miss_penalty_s"], lo=0)
    num("auth_latency_s", effective["auth_latency_s"], lo=0)
    num("ack_bits", effective["ack_bits"], lo=0, strict_lo=True)
    num("tdma.slot_s", effective["tdma"]["slot_s"], lo=0, strict_lo=True)
    num("tdma.slots_per_round", effective["tdma"]["slots_per_round"], lo=1)
    num("tdma.ttl_rounds", effective["tdma"]["ttl_rounds"], lo=1)
    power = effective["power"]
    num("power.p_idle_w", power["p_idle_w"], lo=0, strict_lo=True)
    num("power.p_max_w", power["p_max_w"], lo=0, strict_lo=True)
    if isinstance(power["p_idle_w"], (int, float)) and isinstance(power["p_max_w"], (int, float)):
        check("power.p_idle_w", power["p_idle_w"] < power["p_max_w"], "must be < power.p_max_w")
    num("power.nic_wireless_j_per_bit", power["nic_wireless_j_per_bit"], lo=0)
    num("power.nic_wired_j_per_bit", power["nic_wired_j_per_bit"], lo=0)
    num("report_round_s", effective["report_round_s"], lo=0, strict_lo=True)
    num("utilization_sample_s", effective["utilization_sample_s"], lo=0, strict_lo=True)

    wl = effective["workload"]
    check("workload.kind", wl["kind"] in ("trace", "poisson"), "must be 'trace' or 'poisson'")
    num("workload.max_rate_bps", wl["max_rate_bps"], lo=0)
    num("workload.task_bits", wl["task_bits"], lo=0, strict_lo=True)
    if wl["cpu_demand_bits"] is not None:
        num("workload.cpu_demand_bits", wl["cpu_demand_bits"], lo=0)
    if wl["kind"] == "poisson":
        check("workload.rate_tasks_per_s", wl["rate_tasks_per_s"] is not None,
              "required for poisson workloads")
    if wl["rate_tasks_per_s"] is not None:
        num("workload.rate_tasks_per_s", wl["rate_tasks_per_s"], lo=0)

    d2d = effective["d2d"]
    num("d2d.link_rate_bps", d2d["link_rate_bps"], lo=0, strict_lo=True)
    num("d2d.retx_prob", d2d["retx_prob"], lo=0, hi=1, strict_hi=True)
    num("d2d.timeout_penalty_s", d2d["timeout_penalty_s"], lo=0)
    num("d2d.max_retries", d2d["max_retries"], lo=0)

    topo = effective["topology"]
    if not isinstance(topo, dict):
        v.append("topology: must be an object")
    else:
        for i, fn in enumerate(topo.get("fns", [])):
            num(f"topology.fns[{i}].radius", fn.get("radius", 30.0), lo=0, strict_lo=True)
        for i, thing in enumerate(topo.get("things", [])):
            check(
                f"topology.things[{i}].radios",
                bool(thing.get("radios", ["wifi"])),
                "must list at least one radio",
            )
    return v


def config_hash(effective: dict) -> str:
    """Stable hash of the effective config with volatile fields removed.

    The seed is excluded so reruns with a different seed share a hash.
    """
    scrubbed = copy.deepcopy(effective)
    scrubbed.pop("seed", None)
    canon = json.dumps(scrubbed, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def build_topology_from(effective: dict) -> CityTopology:
    raw = copy.deepcopy(effective["topology"])
    for fn in raw.get("fns", []):
        fn.setdefault("cores", effective["cores"])
        fn.setdefault("core_rate", effective["core_rate_bps"])
    return build_topology(TopologyConfig.from_dict(raw))


def build_sim_config(effective: dict) -> SimConfig:
    registry = effective["app_registry"]
    return SimConfig(
        horizon_s=float(effective["horizon_s"]),
        seed=int(effective["seed"]),
        t2t_delay_s=float(effective["delays"]["t2t_s"]),
        tfnt_delay_s=float(effective["delays"]["tfnt_s"]),
        fn2fn_hop_delay_s=float(effective["delays"]["fn2fn_hop_s"]),
        rtt_wireless_s=float(effective["rtt"]["wireless_s"]),
        rtt_wired_s=float(effective["rtt"]["wired_s"]),
        admission_cap_bps=float(effective["admission_cap_bps"]),
        cache_capacity=int(effective["cache_capacity"]),
        miss_penalty_s=float(effective["miss_penalty_s"]),
        auth_latency_s=float(effective["auth_latency_s"]),
        ack_bits=float(effective["ack_bits"]),
        tdma=TdmaConfig(
            slot_duration_s=float(effective["tdma"]["slot_s"]),
            slots_per_round=int(effective["tdma"]["slots_per_round"]),
            ttl_rounds=int(effective["tdma"]["ttl_rounds"]),
        ),
        app_registry=frozenset(registry) if registry is not None else None,
        report_round_s=float(effective["report_round_s"]),
        utilization_sample_s=float(effective["utilization_sample_s"]),
    )


def build_power_model(effective: dict) -> PowerModel:
    power = effective["power"]
    return PowerModel(
        p_idle_w=float(power["p_idle_w"]),
        p_max_w=float(power["p_max_w"]),
        nic_wireless_j_per_bit=float(power["nic_wireless_j_per_bit"]),
        nic_wired_j_per_bit=float(power["nic_wired_j_per_bit"]),
    )


def build_d2d_config(effective: dict) -> D2dConfig:
    d2d = effective["d2d"]
    return D2dConfig(
        link_rate_bps=float(d2d["link_rate_bps"]),
        retx_prob=float(d2d["retx_prob"]),
        timeout_penalty_s=float(d2d["timeout_penalty_s"]),
        max_retries=int(d2d["max_retries"]),
    )


def build_workload(effective: dict, topology: CityTopology):
    """Materialize the arrival series described by the workload section."""
    wl = effective["workload"]
    seed = int(effective["seed"])
    horizon = float(effective["horizon_s"])
    task_bits = float(wl["task_bits"])
    demand = wl["cpu_demand_bits"]
    demand = float(demand) if demand is not None else None
    picker = uniform_picker(list(topology.things))
    if wl["kind"] == "poisson":
        return gen_poisson(
            float(wl["rate_tasks_per_s"]),
            horizon,
            seed,
            picker=picker,
            task_size_bits=task_bits,
            cpu_demand_bits=demand,
        )
    trace = wl["trace"] if wl["trace"] is not None else bundled_trace_path()
    samples = load_trace(trace)
    load = scale_trace(samples, float(wl["max_rate_bps"]))
    return materialize(load, task_bits, picker, seed, horizon_s=horizon, cpu_demand_bits=demand)
