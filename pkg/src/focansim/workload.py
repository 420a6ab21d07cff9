"""Traffic ingestion: normalized I/O traces and synthetic Poisson arrivals."""

from __future__ import annotations

import bisect
import csv
import math
import random
import warnings
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

DEFAULT_TASK_BITS = 1_000_000  # 1 Mb payload per task
BUNDLED_TRACE = "synthetic_messenger_trace.csv"


@dataclass(frozen=True)
class TraceSample:
    """One normalized load sample: time in seconds, level in [0, 1]."""

    t_s: float
    level: float


@dataclass(frozen=True)
class AppTask:
    """One application request between two endpoints.

    cpu_demand_bits is the work queued on an FN core, measured in bits at the
    core processing rate.
    """

    id: str
    app_id: str
    src: str
    dst: str
    payload_bits: float
    cpu_demand_bits: float
    arrival_s: float

    def __post_init__(self):
        if self.payload_bits <= 0:
            raise ValueError(f"task {self.id!r}: payload_bits must be > 0")
        if self.cpu_demand_bits < 0:
            raise ValueError(f"task {self.id!r}: cpu_demand_bits must be >= 0")


@dataclass(frozen=True)
class ArrivalSeries:
    """Time-ordered task arrivals within a horizon."""

    tasks: tuple
    horizon_s: float

    def __post_init__(self):
        last = 0.0
        for task in self.tasks:
            if task.arrival_s < last:
                raise ValueError("tasks must be time-ordered")
            if task.arrival_s > self.horizon_s:
                raise ValueError(f"task {task.id!r} arrives after the horizon")
            last = task.arrival_s


def load_trace(path: str | Path) -> list:
    """Parse a two-column CSV "t_seconds,level" into trace samples.

    A non-numeric first row is treated as a header and skipped. Levels must
    lie in [0, 1] and times must be non-decreasing; violations raise a
    ValueError carrying the file line number. An empty file yields an empty
    series with a warning.
    """
    samples: list = []
    last_t = -math.inf
    with open(path, newline="", encoding="utf-8") as fh:
        for line_no, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < 2:
                raise ValueError(f"{path}: line {line_no}: expected 't,level'")
            try:
                t = float(row[0])
                level = float(row[1])
            except ValueError:
                if line_no == 1:
                    continue  # header row
                raise ValueError(f"{path}: line {line_no}: non-numeric value") from None
            if not 0.0 <= level <= 1.0:
                raise ValueError(
                    f"{path}: line {line_no}: level {level} outside [0, 1]"
                )
            if t < last_t:
                raise ValueError(f"{path}: line {line_no}: time {t} not monotone")
            last_t = t
            samples.append(TraceSample(t_s=t, level=level))
    if not samples:
        warnings.warn(f"trace {path} contains no samples", stacklevel=2)
    return samples


@dataclass(frozen=True)
class OfferedLoad:
    """Piecewise-constant offered load in bits/second.

    The level of the latest sample at or before t applies; before the first
    sample the first level applies, after the last sample the last level.
    """

    times: tuple
    levels: tuple
    max_rate_bps: float

    def __call__(self, t: float) -> float:
        if not self.times:
            return 0.0
        idx = bisect.bisect_right(self.times, t) - 1
        return self.levels[max(idx, 0)] * self.max_rate_bps

    @property
    def breakpoints(self) -> tuple:
        return self.times


def scale_trace(samples: list, max_rate_bps: float) -> OfferedLoad:
    """Scale a normalized trace to an offered-load function of time."""
    if max_rate_bps < 0:
        raise ValueError("max_rate_bps must be >= 0")
    return OfferedLoad(
        times=tuple(s.t_s for s in samples),
        levels=tuple(s.level for s in samples),
        max_rate_bps=max_rate_bps,
    )


def fixed_picker(app_id: str, src: str, dst: str):
    """Picker that always yields the same (app, src, dst) triple."""

    def pick(_rng: random.Random):
        return app_id, src, dst

    return pick


def uniform_picker(things: list):
    """Picker drawing a uniform ordered pair of distinct things.

    The app id is drawn uniformly from the source's authorized apps; a thing
    with no authorized apps yields a sentinel app that the engine rejects.
    """
    ids = sorted(t.id for t in things)
    apps = {t.id: sorted(t.authorized_apps) for t in things}
    if len(ids) < 2:
        raise ValueError("uniform_picker needs at least two things")

    def pick(rng: random.Random):
        src = rng.choice(ids)
        dst = rng.choice(ids)
        while dst == src:
            dst = rng.choice(ids)
        choices = apps[src]
        app_id = rng.choice(choices) if choices else "unauthorized-app"
        return app_id, src, dst

    return pick


def materialize(
    load: OfferedLoad,
    task_size_bits: float,
    picker,
    seed: int,
    horizon_s: float | None = None,
    cpu_demand_bits: float | None = None,
) -> ArrivalSeries:
    """Turn an offered-load curve into discrete Poisson task arrivals.

    The instantaneous arrival rate is load(t) / task_size_bits. Generation is
    exact for the piecewise-constant load (fresh exponential draw at each
    breakpoint) and fully determined by the seed.
    """
    if task_size_bits <= 0:
        raise ValueError("task_size_bits must be > 0")
    if horizon_s is None:
        horizon_s = load.breakpoints[-1] if load.breakpoints else 0.0
    rng = random.Random(seed)
    demand = task_size_bits if cpu_demand_bits is None else cpu_demand_bits

    boundaries = sorted({0.0, horizon_s, *(t for t in load.breakpoints if 0.0 < t < horizon_s)})
    tasks = []
    for start, end in zip(boundaries, boundaries[1:]):
        rate = load(start) / task_size_bits
        if rate <= 0.0:
            continue
        t = start
        while True:
            t += rng.expovariate(rate)
            if t >= end:
                break
            app_id, src, dst = picker(rng)
            tasks.append(
                AppTask(
                    id=f"task-{len(tasks):06d}",
                    app_id=app_id,
                    src=src,
                    dst=dst,
                    payload_bits=task_size_bits,
                    cpu_demand_bits=demand,
                    arrival_s=t,
                )
            )
    return ArrivalSeries(tasks=tuple(tasks), horizon_s=horizon_s)


def gen_poisson(
    rate: float,
    duration_s: float,
    seed: int,
    picker=None,
    task_size_bits: float = DEFAULT_TASK_BITS,
    cpu_demand_bits: float | None = None,
) -> ArrivalSeries:
    """Homogeneous Poisson arrivals at the given rate in tasks/second."""
    if rate < 0:
        raise ValueError("rate must be >= 0")
    if picker is None:
        picker = fixed_picker("app-0", "thing-0", "thing-1")
    load = OfferedLoad(times=(0.0,), levels=(1.0,), max_rate_bps=rate * task_size_bits)
    return materialize(
        load,
        task_size_bits,
        picker,
        seed,
        horizon_s=duration_s,
        cpu_demand_bits=cpu_demand_bits,
    )


def make_synthetic_trace(n: int = 1000, seed: int = 7) -> list:
    """Bursty normalized trace shaped like an enterprise messaging workload.

    A slow diurnal swell plus autocorrelated noise and occasional spikes,
    clipped to [0, 1]. Deterministic per seed; used to ship a reproducible
    stand-in for proprietary datacenter traces.
    """
    rng = random.Random(seed)
    samples = []
    noise = 0.0
    for i in range(n):
        base = 0.35 + 0.25 * math.sin(2 * math.pi * i / max(n, 1))
        noise = 0.85 * noise + rng.gauss(0.0, 0.06)
        spike = rng.uniform(0.25, 0.55) if rng.random() < 0.02 else 0.0
        level = min(1.0, max(0.0, base + noise + spike))
        samples.append(TraceSample(t_s=float(i), level=round(level, 6)))
    return samples


def write_trace_csv(samples: list, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t_seconds", "level"])
        for s in samples:
            writer.writerow([f"{s.t_s:.6f}", f"{s.level:.6f}"])


def bundled_trace_path() -> Path:
    """Filesystem path of the trace CSV shipped with the package."""
    return Path(resources.files("focansim.data") / BUNDLED_TRACE)
