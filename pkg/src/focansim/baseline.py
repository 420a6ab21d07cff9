"""Single-hop D2D comparison platform with lossy retransmitting transport."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .energy import EnergyLedger, PowerModel
from .engine import TaskRecord, SimulationResult, authorize_app
from .topology import CityTopology, CommType, Medium, Thing
from .workload import ArrivalSeries


@dataclass(frozen=True)
class D2dConfig:
    """802.11b-style direct links; channel loss folded into retx_prob."""

    link_rate_bps: float = 11e6
    retx_prob: float = 0.2  # per-attempt failure probability
    timeout_penalty_s: float = 0.2  # added latency per timed-out attempt
    max_retries: int = 7

    def __post_init__(self):
        if self.link_rate_bps <= 0:
            raise ValueError("link_rate_bps must be > 0")
        if not 0.0 <= self.retx_prob < 1.0:
            raise ValueError("retx_prob must be in [0, 1)")
        if self.timeout_penalty_s < 0:
            raise ValueError("timeout_penalty_s must be >= 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


def expected_transmissions(p: float) -> float:
    """Mean attempts to deliver over a channel failing with probability p."""
    if not 0.0 <= p < 1.0:
        raise ValueError(f"retransmission probability {p} must be in [0, 1)")
    return 1.0 / (1.0 - p)


def _sample_attempts(rng: random.Random, p: float, max_attempts: int):
    attempts = 0
    while attempts < max_attempts:
        attempts += 1
        if rng.random() >= p:
            return attempts, True
    return attempts, False


def run_d2d(
    config: D2dConfig,
    workload: ArrivalSeries,
    topology: CityTopology,
    model: PowerModel | None = None,
    horizon_s: float = 1000.0,
    seed: int = 1,
    app_registry: frozenset | None = None,
    report_round_s: float = 1.0,
) -> SimulationResult:
    """Replay the workload over direct thing-to-thing links only.

    Each delivery samples geometric retransmissions from a per-task seeded
    stream, so results are reproducible and coupled across retx_prob values.
    Endpoints beyond single-hop range burn the full retry budget and fail
    (the sender cannot observe the dead channel). No fog servers take part,
    so the platform accrues no CPU energy.
    """
    model = model or PowerModel()
    ledger = EnergyLedger(model=model, round_s=report_round_s)
    result = SimulationResult(platform="d2d", horizon_s=horizon_s, seed=seed, ledger=ledger)
    result.bits_by_class = {ct: 0.0 for ct in CommType}
    max_attempts = config.max_retries + 1
    attempts_total = 0
    timeouts_total = 0

    for task in workload.tasks:
        if task.arrival_s > horizon_s:
            continue
        result.arrived += 1
        src = topology.endpoint(task.src)
        if not isinstance(src, Thing):
            raise ValueError(f"task {task.id!r}: source {task.src!r} is not a thing")
        if not authorize_app(task.app_id, src, app_registry):
            result.rejected += 1
            result.records.append(_record(task, "rejected"))
            continue

        distance = src.pos.distance_to(topology.position_of(task.dst))
        in_range = distance <= topology.wifi_range_m
        rng = random.Random(f"d2d-{seed}-{task.id}")
        if in_range:
            attempts, delivered = _sample_attempts(rng, config.retx_prob, max_attempts)
        else:
            attempts, delivered = max_attempts, False

        ledger.charge_network(
            attempts * task.payload_bits,
            Medium.WIRELESS,
            CommType.PRIMARY,
            topology.cluster_of.get(task.src),
            topology.cluster_of.get(task.dst),
            task.arrival_s,
        )
        result.bits_by_class[CommType.PRIMARY] += attempts * task.payload_bits
        attempts_total += attempts

        if delivered:
            timeouts = attempts - 1
            latency = attempts * (task.payload_bits / config.link_rate_bps)
            latency += timeouts * config.timeout_penalty_s
            result.completed += 1
            result.records.append(_record(task, "completed", latency))
        else:
            timeouts = attempts
            result.failed += 1
            result.records.append(_record(task, "failed"))
        timeouts_total += timeouts

    attempted = result.arrived - result.rejected
    result.extras = {
        "attempts_total": float(attempts_total),
        "attempts_mean": attempts_total / attempted if attempted else 0.0,
        "timeouts_total": float(timeouts_total),
    }
    return result


def _record(task, status: str, latency: float | None = None) -> TaskRecord:
    return TaskRecord(
        task_id=task.id,
        app_id=task.app_id,
        src=task.src,
        dst=task.dst,
        pattern="d2d",
        status=status,
        arrival_s=task.arrival_s,
        latency_s=latency,
        leg_delay_s=None,
    )
