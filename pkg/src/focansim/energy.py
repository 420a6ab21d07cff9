"""CPU and network energy accounting per FN, communication class, and round."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

from .topology import CommLink, CommType, Medium

DEFAULT_P_IDLE_W = 105.0
DEFAULT_P_MAX_W = 195.0
# NIC coefficients are artifact defaults, not measured hardware values.
DEFAULT_NIC_WIRELESS_J_PER_BIT = 2e-7
DEFAULT_NIC_WIRED_J_PER_BIT = 5e-8

ASSUMED_DEFAULT_FIELDS = (
    "power.nic_wireless_j_per_bit",
    "power.nic_wired_j_per_bit",
    "d2d.link_rate_bps",
    "d2d.retx_prob",
    "d2d.timeout_penalty_s",
    "d2d.max_retries",
)


@dataclass(frozen=True)
class PowerModel:
    """Linear idle/peak CPU power plus per-bit NIC energy coefficients."""

    p_idle_w: float = DEFAULT_P_IDLE_W
    p_max_w: float = DEFAULT_P_MAX_W
    nic_wireless_j_per_bit: float = DEFAULT_NIC_WIRELESS_J_PER_BIT
    nic_wired_j_per_bit: float = DEFAULT_NIC_WIRED_J_PER_BIT

    def __post_init__(self):
        if self.p_idle_w >= self.p_max_w:
            raise ValueError("p_idle_w must be < p_max_w")
        if self.nic_wireless_j_per_bit < 0 or self.nic_wired_j_per_bit < 0:
            raise ValueError("NIC coefficients must be >= 0")


def cpu_power(utilization: float, model: PowerModel) -> float:
    """Server power draw in watts at the given utilization fraction."""
    if not 0.0 <= utilization <= 1.0:
        raise ValueError(f"utilization {utilization} outside [0, 1]")
    return model.p_idle_w + (model.p_max_w - model.p_idle_w) * utilization


def network_energy(bits: float, link, model: PowerModel) -> float:
    """Joules to move the given bits over a link (or bare medium)."""
    if bits < 0:
        raise ValueError("bits must be >= 0")
    medium = link.medium if isinstance(link, CommLink) else link
    coeff = (
        model.nic_wired_j_per_bit
        if medium is Medium.WIRED
        else model.nic_wireless_j_per_bit
    )
    return coeff * bits


@dataclass
class EnergyLedger:
    """Accumulated CPU and network joules, also bucketed per report round.

    Network energy for a transmission is split evenly between the two
    attributed FNs (a thing's radio energy lands in its cluster FN's class
    bucket). Halves with no attributable FN go to unattributed_net_j so the
    conservation identity stays exact. Every charge is also appended to
    charge_log for independent cross-checking.
    """

    model: PowerModel = field(default_factory=PowerModel)
    round_s: float = 1.0
    cpu_j: dict = field(default_factory=dict)
    net_j: dict = field(default_factory=dict)
    per_round_j: dict = field(default_factory=dict)
    unattributed_net_j: float = 0.0
    charge_log: list = field(default_factory=list)

    def charge_cpu(self, fn_id: str, utilization: float, interval_s: float, start_s: float) -> float:
        """Charge one FN's CPU draw over an interval of constant utilization."""
        if interval_s <= 0:
            raise ValueError("interval_s must be > 0")
        power = cpu_power(utilization, self.model)
        joules = power * interval_s
        self.cpu_j[fn_id] = self.cpu_j.get(fn_id, 0.0) + joules
        self._spread_rounds(start_s, start_s + interval_s, power)
        self.charge_log.append(joules)
        return joules

    def charge_network(
        self,
        bits: float,
        medium: Medium,
        comm_type: CommType,
        fn_a: str | None,
        fn_b: str | None,
        at_s: float,
    ) -> float:
        """Charge one transmission, splitting it between the attributed FNs."""
        joules = network_energy(bits, medium, self.model)
        if joules == 0.0:
            return 0.0
        for fn_id in (fn_a, fn_b):
            half = joules / 2.0
            if fn_id is None:
                self.unattributed_net_j += half
            else:
                key = (fn_id, comm_type)
                self.net_j[key] = self.net_j.get(key, 0.0) + half
        round_idx = int(at_s / self.round_s)
        self.per_round_j[round_idx] = self.per_round_j.get(round_idx, 0.0) + joules
        self.charge_log.append(joules)
        return joules

    def _spread_rounds(self, t0: float, t1: float, power_w: float) -> None:
        first = int(t0 / self.round_s)
        last = int(math.ceil(t1 / self.round_s))
        for idx in range(first, max(last, first + 1)):
            lo = max(t0, idx * self.round_s)
            hi = min(t1, (idx + 1) * self.round_s)
            if hi > lo:
                self.per_round_j[idx] = self.per_round_j.get(idx, 0.0) + power_w * (hi - lo)

    @property
    def cpu_total_j(self) -> float:
        return sum(self.cpu_j.values())

    @property
    def net_total_j(self) -> float:
        return sum(self.net_j.values()) + self.unattributed_net_j

    @property
    def total_j(self) -> float:
        return self.cpu_total_j + self.net_total_j

    def net_by_class(self) -> dict:
        out = {ct: 0.0 for ct in CommType}
        for (_fn, ct), joules in self.net_j.items():
            out[ct] += joules
        return out


def accumulate(ledger: EnergyLedger, utilizations: dict, interval_s: float, start_s: float = 0.0) -> None:
    """Charge every FN's CPU draw for one interval of known utilizations."""
    for fn_id, u in utilizations.items():
        ledger.charge_cpu(fn_id, u, interval_s, start_s)


@dataclass(frozen=True)
class ReportRow:
    """One energy report line; unused dimensions stay empty in the CSV."""

    run_id: str
    fn_id: str = ""
    comm_type: str = ""
    cpu_j: float | None = None
    net_j: float | None = None
    avg_power_w: float | None = None
    round_index: int | None = None


def report(ledger: EnergyLedger, run_id: str, horizon_s: float) -> list:
    """Aggregate the ledger into report rows.

    Emits per-FN totals, per-communication-class network totals, the grand
    total, and per-round average power. Average power is joules over the
    horizon except for round rows, which average within the round.
    """
    if horizon_s <= 0:
        raise ValueError("horizon_s must be > 0")
    if not (ledger.cpu_j or ledger.net_j or ledger.unattributed_net_j or ledger.per_round_j):
        return []
    rows: list = []
    fn_ids = sorted(set(ledger.cpu_j) | {fn for fn, _ct in ledger.net_j})
    for fn_id in fn_ids:
        cpu = ledger.cpu_j.get(fn_id, 0.0)
        net = sum(j for (fn, _ct), j in ledger.net_j.items() if fn == fn_id)
        rows.append(
            ReportRow(
                run_id=run_id,
                fn_id=fn_id,
                cpu_j=cpu,
                net_j=net,
                avg_power_w=(cpu + net) / horizon_s,
            )
        )
    for ct in CommType:
        net = ledger.net_by_class()[ct]
        rows.append(
            ReportRow(
                run_id=run_id,
                comm_type=ct.value,
                net_j=net,
                avg_power_w=net / horizon_s,
            )
        )
    if ledger.unattributed_net_j > 0.0:
        rows.append(
            ReportRow(
                run_id=run_id,
                fn_id="(unattributed)",
                net_j=ledger.unattributed_net_j,
                avg_power_w=ledger.unattributed_net_j / horizon_s,
            )
        )
    rows.append(
        ReportRow(
            run_id=run_id,
            cpu_j=ledger.cpu_total_j,
            net_j=ledger.net_total_j,
            avg_power_w=ledger.total_j / horizon_s,
        )
    )
    for round_idx in sorted(ledger.per_round_j):
        start = round_idx * ledger.round_s
        covered = min(ledger.round_s, max(horizon_s - start, 0.0)) or ledger.round_s
        rows.append(
            ReportRow(
                run_id=run_id,
                avg_power_w=ledger.per_round_j[round_idx] / covered,
                round_index=round_idx,
            )
        )
    return rows


ENERGY_CSV_COLUMNS = ("run_id", "fn_id", "comm_type", "cpu_j", "net_j", "avg_power_w", "round_index")


def write_report_csv(rows: list, path: str | Path) -> None:
    """Write report rows with the fixed column set, 6-decimal fixed point."""

    def fmt(value) -> str:
        if value is None:
            return ""
        if isinstance(value, float):
            return f"{value:.6f}"
        return str(value)

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ENERGY_CSV_COLUMNS)
        for row in rows:
            writer.writerow(
                [
                    row.run_id,
                    row.fn_id,
                    row.comm_type,
                    fmt(row.cpu_j),
                    fmt(row.net_j),
                    fmt(row.avg_power_w),
                    "" if row.round_index is None else str(row.round_index),
                ]
            )
