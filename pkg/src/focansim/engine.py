"""Discrete-event core: authorize, load, execute, store, and route tasks.

The event loop is strictly single-threaded and deterministic: events are
ordered by (time, kind rank, sequence number). CPU energy is integrated
lazily per FN and is exact because core bookings only change at event times.
"""

from __future__ import annotations

import heapq
import math
from collections import OrderedDict
from dataclasses import dataclass, field
from enum import Enum, IntEnum

from .energy import EnergyLedger, PowerModel
from .routing import NoRouteError, RoutePath, TdmaConfig, find_path, reverse_path
from .topology import CityTopology, CommType, FogNode, Medium, Thing
from .workload import AppTask, ArrivalSeries

_GRID_TOL = 1e-9  # float tolerance when snapping times to the TDMA slot grid


class SimulationError(Exception):
    """Inconsistent configuration or a broken engine invariant."""


class EventKind(IntEnum):
    ARRIVAL = 0
    AUTH_DONE = 1
    LOAD_DONE = 2
    EXEC_DONE = 3
    STORE_DONE = 4
    LINK_DELIVER = 5
    TDMA_ROUND = 6
    CLOUD_ABSTRACT = 7
    END = 8


@dataclass
class Event:
    time_s: float
    kind: EventKind
    task_id: str = ""
    stage: str = ""
    hop_idx: int = 0

    def __post_init__(self):
        if self.time_s < 0:
            raise ValueError("event time must be >= 0")


class LegKind(Enum):
    T2T = "t2t"  # direct thing-to-thing
    TFNT = "tFNt"  # thing relayed through its cluster FN
    FN2FN = "FN2FN"  # backbone hop between FNs


def link_latency(
    kind: LegKind,
    hops: int = 1,
    t2t_s: float = 0.002,
    tfnt_s: float = 0.004,
    fn2fn_hop_s: float = 0.006,
) -> float:
    """Fixed transfer delay of one leg; FN2FN is charged per hop."""
    if kind is LegKind.T2T:
        return t2t_s
    if kind is LegKind.TFNT:
        return tfnt_s
    if hops < 1:
        raise ValueError("FN2FN legs need hops >= 1")
    return fn2fn_hop_s * hops


@dataclass
class SimConfig:
    """Engine knobs; delay and power defaults mirror the documented setup."""

    horizon_s: float = 1000.0
    seed: int = 1
    t2t_delay_s: float = 0.002
    tfnt_delay_s: float = 0.004
    fn2fn_hop_delay_s: float = 0.006
    rtt_wireless_s: float = 0.0005
    rtt_wired_s: float = 0.010
    admission_cap_bps: float = 2.5e9
    cache_capacity: int = 32
    miss_penalty_s: float = 0.0
    auth_latency_s: float = 0.0
    ack_bits: float = 8000.0  # return-path acknowledgment size
    tdma: TdmaConfig = field(default_factory=TdmaConfig)
    app_registry: frozenset | None = None  # None accepts any app id
    report_round_s: float = 1.0
    utilization_sample_s: float = 1.0


def authorize_app(app_id: str, thing: Thing, registry: frozenset | None = None) -> bool:
    """Constant-time check that the thing may run the app."""
    if registry is not None and app_id not in registry:
        return False
    return app_id in thing.authorized_apps


@dataclass
class FnServerState:
    """Mutable per-FN runtime state: cores, app cache, and ingress serializer."""

    fn_id: str
    cores: int
    core_rate: float
    cache_capacity: int
    miss_penalty_s: float = 0.0
    core_busy_until: list = field(default_factory=list)
    cache: OrderedDict = field(default_factory=OrderedDict)
    cache_hits: int = 0
    cache_misses: int = 0
    admitted_bits: float = 0.0
    ingress_free_s: float = 0.0
    admission_log: list = field(default_factory=list)
    last_advance_s: float = 0.0
    last_sample_s: float = 0.0
    sample_busy_accum: float = 0.0
    samples: list = field(default_factory=list)

    def __post_init__(self):
        if not self.core_busy_until:
            self.core_busy_until = [0.0] * self.cores

    @classmethod
    def from_node(cls, fn: FogNode, cfg: SimConfig) -> "FnServerState":
        capacity = fn.storage_capacity if fn.storage_capacity is not None else cfg.cache_capacity
        return cls(
            fn_id=fn.id,
            cores=fn.cores,
            core_rate=fn.core_rate,
            cache_capacity=capacity,
            miss_penalty_s=cfg.miss_penalty_s,
        )

    def utilization(self, now: float) -> float:
        busy = sum(1 for t in self.core_busy_until if t > now)
        return busy / self.cores

    def busy_core_seconds(self, t0: float, t1: float) -> float:
        return sum(max(0.0, min(until, t1) - t0) for until in self.core_busy_until)


def load_application(state: FnServerState, app_id: str) -> float:
    """Bring an app into the FN cache; returns the load latency.

    Cache hit costs nothing and refreshes recency; a miss pays the configured
    penalty and inserts the app, evicting the least recently used one when the
    cache is full.
    """
    if app_id in state.cache:
        state.cache.move_to_end(app_id)
        state.cache_hits += 1
        return 0.0
    state.cache_misses += 1
    if state.cache_capacity > 0:
        if len(state.cache) >= state.cache_capacity:
            state.cache.popitem(last=False)
        state.cache[app_id] = True
    return state.miss_penalty_s


def execute_task(state: FnServerState, task: AppTask, now: float) -> float:
    """Queue the task's CPU demand on the least-loaded core.

    Returns the service time seen by the task: queueing behind that core's
    backlog plus cpu_demand / core_rate. Zero demand completes immediately
    without touching a core.
    """
    if task.cpu_demand_bits == 0:
        return 0.0
    backlog = [max(until, now) for until in state.core_busy_until]
    idx = min(range(state.cores), key=lambda i: (backlog[i], i))
    start = backlog[idx]
    finish = start + task.cpu_demand_bits / state.core_rate
    state.core_busy_until[idx] = finish
    return finish - now


def store_result(state: FnServerState, app_id: str) -> None:
    """Mark the app most recently used in the FN cache; idempotent."""
    if app_id in state.cache:
        state.cache.move_to_end(app_id)
        return
    if state.cache_capacity > 0:
        if len(state.cache) >= state.cache_capacity:
            state.cache.popitem(last=False)
        state.cache[app_id] = True


class PlanKind(Enum):
    DIRECT = "t2t"
    RELAY = "tfnt"
    BACKBONE = "cross"
    TO_FN = "to_fn"


@dataclass(frozen=True)
class RoutePlan:
    """Leg sequence a task will follow, decided before any bits move."""

    kind: PlanKind
    comm_type: CommType | None = None  # class of the direct leg (DIRECT only)
    proc_fn: str | None = None  # FN that loads and executes the app
    store_fn: str | None = None  # FN whose storage registers the result
    path: RoutePath | None = None  # forward FN path for backbone traffic

    @property
    def hops(self) -> int:
        return self.path.h if self.path is not None else 0

    def leg_labels(self) -> list:
        if self.kind is PlanKind.DIRECT:
            return ["t2t"]
        if self.kind is PlanKind.RELAY:
            return ["tFNt"]
        labels = ["t2FN"] + ["FN2FN"] * self.hops
        if self.kind is PlanKind.BACKBONE:
            labels.append("FN2t")
        return labels

    def planned_leg_delay_s(self, cfg: SimConfig) -> float:
        if self.kind is PlanKind.DIRECT:
            return cfg.t2t_delay_s
        if self.kind is PlanKind.RELAY:
            return cfg.tfnt_delay_s
        delay = cfg.tfnt_delay_s + cfg.fn2fn_hop_delay_s * self.hops
        if self.kind is PlanKind.BACKBONE:
            delay += cfg.tfnt_delay_s
        return delay


def dispatch(task: AppTask, topology: CityTopology) -> RoutePlan:
    """Choose the leg sequence for a task.

    Same-cluster pairs talk directly when within radio reach, otherwise
    through their cluster FN. Pairs in different clusters ride the FN
    backbone: up leg, minimum-hop FN path, down leg. Raises NoRouteError when
    no FN chain can bridge the endpoints.
    """
    src_ep = topology.endpoint(task.src)
    if not isinstance(src_ep, Thing):
        raise SimulationError(f"task {task.id!r}: source {task.src!r} is not a thing")
    dst_ep = topology.endpoint(task.dst)
    src_fn = topology.cluster_of[task.src]

    if isinstance(dst_ep, FogNode):
        if src_fn is None:
            raise NoRouteError(task.src, task.dst)
        if dst_ep.id == src_fn:
            return RoutePlan(PlanKind.TO_FN, proc_fn=src_fn, store_fn=src_fn)
        path = find_path(src_fn, dst_ep.id, topology.fn_graph)
        return RoutePlan(PlanKind.TO_FN, proc_fn=src_fn, store_fn=dst_ep.id, path=path)

    if task.src == task.dst:
        comm = CommType.INTERPRIMARY if src_ep.has_short_range else CommType.PRIMARY
        return RoutePlan(PlanKind.DIRECT, comm_type=comm, proc_fn=src_fn, store_fn=src_fn)

    from .topology import classify_link

    comm = classify_link(task.src, task.dst, topology)
    direct_ok = comm in (CommType.INTERPRIMARY, CommType.PRIMARY)
    dst_fn = topology.cluster_of[task.dst]
    same_cluster = src_fn is not None and src_fn == dst_fn

    if same_cluster:
        if direct_ok:
            return RoutePlan(PlanKind.DIRECT, comm_type=comm, proc_fn=src_fn, store_fn=src_fn)
        return RoutePlan(PlanKind.RELAY, proc_fn=src_fn, store_fn=src_fn)
    if src_fn is None or dst_fn is None:
        if direct_ok:
            proc = src_fn if src_fn is not None else dst_fn
            return RoutePlan(PlanKind.DIRECT, comm_type=comm, proc_fn=proc, store_fn=proc)
        raise NoRouteError(task.src, task.dst)
    path = find_path(src_fn, dst_fn, topology.fn_graph)
    return RoutePlan(PlanKind.BACKBONE, proc_fn=src_fn, store_fn=dst_fn, path=path)


@dataclass
class TaskRecord:
    task_id: str
    app_id: str
    src: str
    dst: str
    pattern: str
    status: str
    arrival_s: float
    latency_s: float | None = None
    leg_delay_s: float | None = None


@dataclass
class SimulationResult:
    """Outcome of one run: task records, counters, utilization, and energy."""

    platform: str
    horizon_s: float
    seed: int
    records: list = field(default_factory=list)
    arrived: int = 0
    completed: int = 0
    failed: int = 0
    rejected: int = 0
    in_flight: int = 0
    dropped_packets: int = 0
    acks_delivered: int = 0
    acks_dropped: int = 0
    cloud_abstracts: int = 0
    bits_by_class: dict = field(default_factory=dict)
    utilization: dict = field(default_factory=dict)
    ledger: EnergyLedger = field(default_factory=EnergyLedger)
    extras: dict = field(default_factory=dict)

    @property
    def connections(self) -> int:
        """Tasks that actually attempted communication."""
        return self.arrived - self.rejected


@dataclass
class _TaskRun:
    task: AppTask
    plan: RoutePlan | None = None
    status: str = "pending"
    latency_s: float | None = None


class Simulation:
    """One deterministic run of the fog platform over a task workload."""

    def __init__(
        self,
        topology: CityTopology,
        workload: ArrivalSeries,
        cfg: SimConfig | None = None,
        power: PowerModel | None = None,
    ):
        self.topology = topology
        self.workload = workload
        self.cfg = cfg or SimConfig()
        self.power = power or PowerModel()
        self._validate_workload()

        self.states = {fn.id: FnServerState.from_node(fn, self.cfg) for fn in topology.fns}
        self.ledger = EnergyLedger(model=self.power, round_s=self.cfg.report_round_s)
        self.bits_by_class = {ct: 0.0 for ct in CommType}
        self.counters = {"arrived": 0, "completed": 0, "failed": 0, "rejected": 0}
        self.dropped_packets = 0
        self.acks_delivered = 0
        self.acks_dropped = 0
        self.cloud_abstracts = 0

        self._heap: list = []
        self._seq = 0
        self._now = 0.0
        self._runs: dict = {}
        self._next_free_slot: dict = {}  # undirected link -> next free slot start
        self._rounds_marked: set = set()

    # ------------------------------------------------------------------ setup

    def _validate_workload(self) -> None:
        for task in self.workload.tasks:
            src = self.topology.index.get(task.src)
            if not isinstance(src, Thing):
                raise SimulationError(
                    f"workload references unknown or non-thing source {task.src!r}"
                )
            if task.dst not in self.topology.index:
                raise SimulationError(f"workload references unknown destination {task.dst!r}")

    def _push(self, event: Event) -> None:
        heapq.heappush(self._heap, (event.time_s, int(event.kind), self._seq, event))
        self._seq += 1

    # ------------------------------------------------------------------- run

    def run(self) -> SimulationResult:
        horizon = self.cfg.horizon_s
        for task in self.workload.tasks:
            if task.arrival_s <= horizon:
                self._runs[task.id] = _TaskRun(task=task)
                self._push(Event(task.arrival_s, EventKind.ARRIVAL, task_id=task.id))
        self._push(Event(horizon, EventKind.END))

        while self._heap:
            t, _rank, _seq, event = heapq.heappop(self._heap)
            if t < self._now - _GRID_TOL:
                raise SimulationError(f"event causality violated at t={t}")
            self._now = max(self._now, t)
            if event.kind is EventKind.END:
                break
            self._handle(event)

        for fn_id in self.states:
            self._advance_fn(fn_id, horizon)
            self._flush_sample(fn_id, horizon)
        return self._result()

    def _handle(self, event: Event) -> None:
        handler = {
            EventKind.ARRIVAL: self._on_arrival,
            EventKind.AUTH_DONE: self._on_auth_done,
            EventKind.LOAD_DONE: self._on_load_done,
            EventKind.EXEC_DONE: self._on_exec_done,
            EventKind.STORE_DONE: self._on_store_done,
            EventKind.LINK_DELIVER: self._on_link_deliver,
            EventKind.TDMA_ROUND: self._on_tdma_round,
            EventKind.CLOUD_ABSTRACT: self._on_cloud_abstract,
        }[event.kind]
        handler(event)

    # -------------------------------------------------------------- handlers

    def _on_arrival(self, event: Event) -> None:
        run = self._runs[event.task_id]
        task = run.task
        self.counters["arrived"] += 1
        thing = self.topology.endpoint(task.src)
        if not authorize_app(task.app_id, thing, self.cfg.app_registry):
            run.status = "rejected"
            self.counters["rejected"] += 1
            return
        self._push(
            Event(event.time_s + self.cfg.auth_latency_s, EventKind.AUTH_DONE, task_id=task.id)
        )

    def _on_auth_done(self, event: Event) -> None:
        run = self._runs[event.task_id]
        task = run.task
        try:
            run.plan = dispatch(task, self.topology)
        except NoRouteError:
            self._fail(run)
            return
        plan = run.plan
        t = event.time_s
        if plan.kind in (PlanKind.DIRECT, PlanKind.RELAY):
            if plan.proc_fn is None:
                # Pure P2P between uncovered things: no FN compute available.
                self._push(
                    Event(t + self.cfg.t2t_delay_s, EventKind.LINK_DELIVER,
                          task_id=task.id, stage="final")
                )
                return
            start = t
            if plan.kind is PlanKind.RELAY:
                start = self._admit(plan.proc_fn, t, task.payload_bits)
            self._start_processing(run, plan.proc_fn, start)
        else:
            # Payload leaves the thing toward its cluster FN.
            self._push(
                Event(t + self.cfg.tfnt_delay_s, EventKind.LINK_DELIVER,
                      task_id=task.id, stage="up")
            )

    def _start_processing(self, run: _TaskRun, fn_id: str, t: float) -> None:
        latency = load_application(self.states[fn_id], run.task.app_id)
        self._push(Event(t + latency, EventKind.LOAD_DONE, task_id=run.task.id))

    def _on_load_done(self, event: Event) -> None:
        run = self._runs[event.task_id]
        fn_id = run.plan.proc_fn
        self._advance_fn(fn_id, event.time_s)
        service = execute_task(self.states[fn_id], run.task, event.time_s)
        self._push(Event(event.time_s + service, EventKind.EXEC_DONE, task_id=run.task.id))

    def _on_exec_done(self, event: Event) -> None:
        run = self._runs[event.task_id]
        plan = run.plan
        t = event.time_s
        if plan.kind in (PlanKind.DIRECT, PlanKind.RELAY):
            store_result(self.states[plan.proc_fn], run.task.app_id)
            self._push(Event(t, EventKind.STORE_DONE, task_id=run.task.id))
        elif plan.hops > 0:
            self._send_hop(run, 0, t)
        else:
            # Destination FN is the serving FN itself.
            store_result(self.states[plan.store_fn], run.task.app_id)
            self._push(Event(t, EventKind.STORE_DONE, task_id=run.task.id))

    def _on_store_done(self, event: Event) -> None:
        run = self._runs[event.task_id]
        plan = run.plan
        t = event.time_s
        if plan.kind is PlanKind.DIRECT:
            self._push(
                Event(t + self.cfg.t2t_delay_s, EventKind.LINK_DELIVER,
                      task_id=run.task.id, stage="final")
            )
        elif plan.kind is PlanKind.RELAY:
            self._push(
                Event(t + self.cfg.tfnt_delay_s, EventKind.LINK_DELIVER,
                      task_id=run.task.id, stage="final")
            )
        elif plan.kind is PlanKind.BACKBONE:
            self._push(
                Event(t + self.cfg.tfnt_delay_s, EventKind.LINK_DELIVER,
                      task_id=run.task.id, stage="down")
            )
        else:
            self._complete(run, t)

    def _on_link_deliver(self, event: Event) -> None:
        run = self._runs[event.task_id]
        task = run.task
        plan = run.plan
        t = event.time_s
        if event.stage == "final":
            if plan.kind is PlanKind.RELAY:
                # Two wireless transmissions: thing to FN and FN to thing.
                fn = plan.proc_fn
                self._charge_leg(task.payload_bits, Medium.WIRELESS, CommType.PRIMARY, fn, fn, t)
                self._charge_leg(task.payload_bits, Medium.WIRELESS, CommType.PRIMARY, fn, fn, t)
            else:
                self._charge_leg(
                    task.payload_bits,
                    Medium.WIRELESS,
                    plan.comm_type,
                    self.topology.cluster_of[task.src],
                    self.topology.cluster_of[task.dst],
                    t,
                )
            self._complete(run, t)
        elif event.stage == "up":
            fn = plan.proc_fn
            self._charge_leg(task.payload_bits, Medium.WIRELESS, CommType.PRIMARY, fn, fn, t)
            start = self._admit(fn, t, task.payload_bits)
            self._start_processing(run, fn, start)
        elif event.stage == "hop":
            link = plan.path.links()[event.hop_idx]
            self._charge_leg(
                task.payload_bits, Medium.WIRED, CommType.SECONDARY, link[0], link[1], t
            )
            fn = link[1]
            start = self._admit(fn, t, task.payload_bits)
            if event.hop_idx + 1 < plan.hops:
                self._send_hop(run, event.hop_idx + 1, start)
            else:
                store_result(self.states[plan.store_fn], task.app_id)
                self._push(Event(start, EventKind.STORE_DONE, task_id=task.id))
        elif event.stage == "down":
            fn = plan.store_fn
            self._charge_leg(task.payload_bits, Medium.WIRELESS, CommType.PRIMARY, fn, fn, t)
            self._complete(run, t)
        elif event.stage == "ack":
            links = reverse_path(plan.path).links()
            link = links[event.hop_idx]
            self._charge_leg(
                self.cfg.ack_bits, Medium.WIRED, CommType.SECONDARY, link[0], link[1], t
            )
            if event.hop_idx + 1 < len(links):
                self._send_ack(run, event.hop_idx + 1, t)
            else:
                self.acks_delivered += 1
        else:
            raise SimulationError(f"unknown link stage {event.stage!r}")

    def _on_tdma_round(self, event: Event) -> None:
        pass  # marker only; slot accounting happens at allocation time

    def _on_cloud_abstract(self, event: Event) -> None:
        self.cloud_abstracts += 1

    # ------------------------------------------------------------- mechanics

    def _send_hop(self, run: _TaskRun, hop_idx: int, t: float) -> None:
        link = run.plan.path.links()[hop_idx]
        slot = self._alloc_slot(link, t)
        if slot is None:
            self.dropped_packets += 1
            self._fail(run)
            return
        self._push(
            Event(slot + self.cfg.fn2fn_hop_delay_s, EventKind.LINK_DELIVER,
                  task_id=run.task.id, stage="hop", hop_idx=hop_idx)
        )

    def _send_ack(self, run: _TaskRun, hop_idx: int, t: float) -> None:
        links = reverse_path(run.plan.path).links()
        slot = self._alloc_slot(links[hop_idx], t)
        if slot is None:
            self.acks_dropped += 1
            return
        self._push(
            Event(slot + self.cfg.fn2fn_hop_delay_s, EventKind.LINK_DELIVER,
                  task_id=run.task.id, stage="ack", hop_idx=hop_idx)
        )

    def _alloc_slot(self, link: tuple, t: float) -> float | None:
        """Earliest free TDMA slot for the link at or after t, within the TTL.

        Slot starts lie on the global grid of slot_duration_s. A packet whose
        first free slot would start T or more rounds after its request round
        is dropped.
        """
        tdma = self.cfg.tdma
        key = tuple(sorted(link))
        grid = math.ceil((t - _GRID_TOL) / tdma.slot_duration_s) * tdma.slot_duration_s
        start = max(self._next_free_slot.get(key, 0.0), grid)
        round_len = tdma.round_duration_s
        deadline = (math.floor((t + _GRID_TOL) / round_len) + tdma.ttl_rounds) * round_len
        if start >= deadline - _GRID_TOL:
            return None
        self._next_free_slot[key] = start + tdma.slot_duration_s
        round_idx = int((start + _GRID_TOL) / round_len)
        if (key, round_idx) not in self._rounds_marked:
            self._rounds_marked.add((key, round_idx))
            self._push(Event(max(start, t), EventKind.TDMA_ROUND))
        return start

    def _admit(self, fn_id: str, t: float, bits: float) -> float:
        """Serialize ingress so admitted traffic never exceeds the cap."""
        state = self.states[fn_id]
        start = max(t, state.ingress_free_s)
        state.ingress_free_s = start + bits / self.cfg.admission_cap_bps
        state.admitted_bits += bits
        state.admission_log.append((start, bits))
        return start

    def _charge_leg(
        self,
        bits: float,
        medium: Medium,
        comm_type: CommType,
        fn_a: str | None,
        fn_b: str | None,
        t: float,
    ) -> None:
        self.ledger.charge_network(bits, medium, comm_type, fn_a, fn_b, t)
        self.bits_by_class[comm_type] += bits

    def _advance_fn(self, fn_id: str, t: float) -> None:
        """Integrate one FN's CPU energy up to t; exact for linear power."""
        state = self.states[fn_id]
        dt = t - state.last_advance_s
        if dt <= 0:
            return
        busy = state.busy_core_seconds(state.last_advance_s, t)
        u = min(max(busy / (state.cores * dt), 0.0), 1.0)
        self.ledger.charge_cpu(fn_id, u, dt, state.last_advance_s)
        state.last_advance_s = t
        state.sample_busy_accum += busy
        if t - state.last_sample_s >= self.cfg.utilization_sample_s:
            self._flush_sample(fn_id, t)

    def _flush_sample(self, fn_id: str, t: float) -> None:
        state = self.states[fn_id]
        span = t - state.last_sample_s
        if span <= _GRID_TOL:
            return
        u = min(max(state.sample_busy_accum / (state.cores * span), 0.0), 1.0)
        state.samples.append((t, u))
        state.last_sample_s = t
        state.sample_busy_accum = 0.0

    def _complete(self, run: _TaskRun, t: float) -> None:
        run.status = "completed"
        run.latency_s = t - run.task.arrival_s
        self.counters["completed"] += 1
        if run.plan.hops > 0:
            self._push(Event(t, EventKind.CLOUD_ABSTRACT, task_id=run.task.id))
            self._send_ack(run, 0, t)

    def _fail(self, run: _TaskRun) -> None:
        run.status = "failed"
        self.counters["failed"] += 1

    # --------------------------------------------------------------- results

    def _result(self) -> SimulationResult:
        result = SimulationResult(
            platform="focan",
            horizon_s=self.cfg.horizon_s,
            seed=self.cfg.seed,
            arrived=self.counters["arrived"],
            completed=self.counters["completed"],
            failed=self.counters["failed"],
            rejected=self.counters["rejected"],
            dropped_packets=self.dropped_packets,
            acks_delivered=self.acks_delivered,
            acks_dropped=self.acks_dropped,
            cloud_abstracts=self.cloud_abstracts,
            bits_by_class=dict(self.bits_by_class),
            ledger=self.ledger,
        )
        result.in_flight = result.arrived - result.completed - result.failed - result.rejected
        for fn in self.topology.fns:
            result.utilization[fn.id] = list(self.states[fn.id].samples)
        for task in self.workload.tasks:
            if task.id not in self._runs:
                continue
            run = self._runs[task.id]
            status = run.status if run.status != "pending" else "in_flight"
            plan = run.plan
            result.records.append(
                TaskRecord(
                    task_id=task.id,
                    app_id=task.app_id,
                    src=task.src,
                    dst=task.dst,
                    pattern=plan.kind.value if plan is not None else "",
                    status=status,
                    arrival_s=task.arrival_s,
                    latency_s=run.latency_s,
                    leg_delay_s=plan.planned_leg_delay_s(self.cfg) if plan is not None else None,
                )
            )
        return result


def run(
    topology: CityTopology,
    workload: ArrivalSeries,
    cfg: SimConfig | None = None,
    power: PowerModel | None = None,
) -> SimulationResult:
    """Run one fog-platform simulation; deterministic per (config, seed)."""
    return Simulation(topology, workload, cfg, power).run()
