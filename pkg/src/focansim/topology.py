"""Static city model: things, fog nodes, clusters, and the FN backbone graph.

The topology is built once from a config and is immutable afterwards, so a
single instance can be shared by any number of concurrent simulation runs.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Iterable

RADIO_BLUETOOTH = "bluetooth"
RADIO_ZIGBEE = "zigbee"
RADIO_WIFI = "wifi"
KNOWN_RADIOS = frozenset({RADIO_BLUETOOTH, RADIO_ZIGBEE, RADIO_WIFI})
SHORT_RANGE_RADIOS = frozenset({RADIO_BLUETOOTH, RADIO_ZIGBEE})

DEFAULT_SHORT_RANGE_M = 10.0  # bluetooth/zigbee reach
DEFAULT_WIFI_RANGE_M = 30.0
DEFAULT_COVERAGE_RADIUS_M = 30.0
DEFAULT_CORES = 6
DEFAULT_CORE_RATE_BPS = 10e6  # per-core task service rate
DEFAULT_RAM_PER_CORE_BYTES = 6_000_000_000  # metadata only, never constrains execution

RTT_WIRELESS_S = 0.0005
RTT_WIRED_S = 0.010
BANDWIDTH_WIRED_BPS = 1e9  # gigabit ethernet backbone switch
BANDWIDTH_WIFI_BPS = 54e6
BANDWIDTH_SHORT_BPS = 2e6  # bluetooth/zigbee class


class CommType(Enum):
    """Communication class of a link between two endpoints."""

    INTERPRIMARY = "interprimary"
    PRIMARY = "primary"
    SECONDARY = "secondary"


class Medium(Enum):
    WIRED = "wired"
    WIRELESS = "wireless"


@dataclass(frozen=True)
class Position:
    """Planar location in meters."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"position coordinates must be finite, got ({self.x}, {self.y})")

    def distance_to(self, other: "Position") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class Thing:
    """An end device with one or more radios and a set of authorized apps."""

    id: str
    pos: Position
    radios: frozenset = frozenset({RADIO_WIFI})
    authorized_apps: frozenset = frozenset()

    def __post_init__(self):
        if not self.radios:
            raise ValueError(f"thing {self.id!r} must have at least one radio")
        unknown = set(self.radios) - KNOWN_RADIOS
        if unknown:
            raise ValueError(f"thing {self.id!r} has unknown radios {sorted(unknown)}")

    @property
    def has_short_range(self) -> bool:
        return bool(set(self.radios) & SHORT_RANGE_RADIOS)

    @property
    def has_wifi(self) -> bool:
        return RADIO_WIFI in self.radios


@dataclass(frozen=True)
class FogNode:
    """An edge server cluster point serving things within its coverage radius."""

    id: str
    pos: Position
    coverage_radius: float = DEFAULT_COVERAGE_RADIUS_M
    cores: int = DEFAULT_CORES
    core_rate: float = DEFAULT_CORE_RATE_BPS
    ram_per_core: int = DEFAULT_RAM_PER_CORE_BYTES
    storage_capacity: int | None = None  # app-cache slots; None defers to SimConfig
    neighbors: frozenset = frozenset()

    def __post_init__(self):
        if self.coverage_radius <= 0:
            raise ValueError(f"fn {self.id!r}: coverage_radius must be > 0")
        if self.cores < 1:
            raise ValueError(f"fn {self.id!r}: cores must be >= 1")
        if self.core_rate <= 0:
            raise ValueError(f"fn {self.id!r}: core_rate must be > 0")


@dataclass(frozen=True)
class CommLink:
    """A realizable direct link between two endpoints.

    The round-trip time is fixed by the medium: 0.5 ms wireless, 10 ms wired.
    Only FN-to-FN (secondary) links may be wired.
    """

    endpoint_a: str
    endpoint_b: str
    comm_type: CommType
    medium: Medium
    bandwidth: float
    one_way_delay: float
    rtt: float = 0.0

    def __post_init__(self):
        if self.one_way_delay <= 0:
            raise ValueError("one_way_delay must be > 0")
        expected_rtt = RTT_WIRED_S if self.medium is Medium.WIRED else RTT_WIRELESS_S
        if self.rtt == 0.0:
            object.__setattr__(self, "rtt", expected_rtt)
        elif self.rtt != expected_rtt:
            raise ValueError(f"rtt for {self.medium.value} links is fixed at {expected_rtt}")
        if self.medium is Medium.WIRED and self.comm_type is not CommType.SECONDARY:
            raise ValueError("only secondary FN-to-FN links may be wired")


@dataclass(frozen=True)
class TopologyConfig:
    """Input placement of things and FNs plus the range thresholds."""

    things: tuple = ()
    fns: tuple = ()
    fn_edges: tuple | None = None  # explicit FN adjacency; None means full switch mesh
    short_range_m: float = DEFAULT_SHORT_RANGE_M
    wifi_range_m: float = DEFAULT_WIFI_RANGE_M

    @classmethod
    def from_dict(cls, raw: dict) -> "TopologyConfig":
        things = tuple(
            Thing(
                id=str(t["id"]),
                pos=Position(float(t["x"]), float(t["y"])),
                radios=frozenset(t.get("radios", [RADIO_WIFI])),
                authorized_apps=frozenset(t.get("apps", [])),
            )
            for t in raw.get("things", [])
        )
        fns = tuple(
            FogNode(
                id=str(f["id"]),
                pos=Position(float(f["x"]), float(f["y"])),
                coverage_radius=float(f.get("radius", DEFAULT_COVERAGE_RADIUS_M)),
                cores=int(f.get("cores", DEFAULT_CORES)),
                core_rate=float(f.get("core_rate", DEFAULT_CORE_RATE_BPS)),
                ram_per_core=int(f.get("ram_per_core", DEFAULT_RAM_PER_CORE_BYTES)),
                storage_capacity=(
                    int(f["storage_capacity"]) if f.get("storage_capacity") is not None else None
                ),
            )
            for f in raw.get("fns", [])
        )
        edges = raw.get("fn_edges")
        fn_edges = tuple((str(a), str(b)) for a, b in edges) if edges is not None else None
        return cls(
            things=things,
            fns=fns,
            fn_edges=fn_edges,
            short_range_m=float(raw.get("short_range_m", DEFAULT_SHORT_RANGE_M)),
            wifi_range_m=float(raw.get("wifi_range_m", DEFAULT_WIFI_RANGE_M)),
        )

    @classmethod
    def from_json(cls, path: str | Path) -> "TopologyConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class CityTopology:
    """Immutable placement of things and FNs with clustering and FN adjacency.

    ``cluster_of`` maps every thing id to its serving FN id, or None when the
    thing is outside all coverage radii (uncovered). ``fn_graph`` is the
    undirected, loop-free FN adjacency.
    """

    things: tuple
    fns: tuple
    cluster_of: dict
    fn_graph: dict
    short_range_m: float = DEFAULT_SHORT_RANGE_M
    wifi_range_m: float = DEFAULT_WIFI_RANGE_M
    index: dict = field(default_factory=dict, repr=False)

    def endpoint(self, endpoint_id: str):
        try:
            return self.index[endpoint_id]
        except KeyError:
            raise KeyError(f"unknown endpoint {endpoint_id!r}") from None

    def is_fn(self, endpoint_id: str) -> bool:
        return isinstance(self.endpoint(endpoint_id), FogNode)

    def position_of(self, endpoint_id: str) -> Position:
        return self.endpoint(endpoint_id).pos

    def fn_of(self, thing_id: str) -> str | None:
        """Serving FN id of a thing, or None when uncovered."""
        ep = self.endpoint(thing_id)
        if isinstance(ep, FogNode):
            return ep.id
        return self.cluster_of[thing_id]


def build_topology(config: TopologyConfig) -> CityTopology:
    """Build the city model: cluster every thing and wire the FN graph.

    Deterministic for identical configs. Raises ValueError on a duplicate id
    (things and FNs share one namespace) or on an fn_edges entry referencing
    an unknown FN.
    """
    seen: set = set()
    for ep in itertools.chain(config.things, config.fns):
        if ep.id in seen:
            raise ValueError(f"duplicate id: {ep.id!r}")
        seen.add(ep.id)

    fn_graph = _build_fn_graph(config)
    fns = tuple(
        replace(fn, neighbors=frozenset(fn_graph[fn.id])) for fn in config.fns
    )
    index: dict = {t.id: t for t in config.things}
    index.update({fn.id: fn for fn in fns})

    topo = CityTopology(
        things=config.things,
        fns=fns,
        cluster_of={},
        fn_graph=fn_graph,
        short_range_m=config.short_range_m,
        wifi_range_m=config.wifi_range_m,
        index=index,
    )
    for thing in config.things:
        topo.cluster_of[thing.id] = assign_cluster(thing, topo)
    return topo


def _build_fn_graph(config: TopologyConfig) -> dict:
    graph: dict = {fn.id: set() for fn in config.fns}
    if config.fn_edges is None:
        # Single ethernet switch: every FN pair is one hop apart.
        for a, b in itertools.combinations(graph, 2):
            graph[a].add(b)
            graph[b].add(a)
    else:
        for a, b in config.fn_edges:
            if a not in graph or b not in graph:
                raise ValueError(f"fn_edges references unknown FN in ({a!r}, {b!r})")
            if a == b:
                raise ValueError(f"fn_edges contains self-loop on {a!r}")
            graph[a].add(b)
            graph[b].add(a)
    return {fn_id: frozenset(neigh) for fn_id, neigh in graph.items()}


def assign_cluster(thing: Thing, topology: CityTopology) -> str | None:
    """Nearest FN whose coverage radius reaches the thing; None when uncovered.

    Ties on distance break to the lowest FN id so clustering is reproducible.
    """
    candidates = []
    for fn in topology.fns:
        d = thing.pos.distance_to(fn.pos)
        if d <= fn.coverage_radius:
            candidates.append((d, fn.id))
    if not candidates:
        return None
    return min(candidates)[1]


def classify_link(a: str, b: str, topology: CityTopology) -> CommType:
    """Communication class for a pair of endpoints.

    Thing pairs in short range with bluetooth/zigbee on both sides are
    interprimary; wifi within medium range (thing-thing or thing-FN) is
    primary; FN pairs are secondary. Anything out of direct wireless reach is
    secondary as well: it must ride the FN backbone.
    """
    ep_a = topology.endpoint(a)
    ep_b = topology.endpoint(b)
    if isinstance(ep_a, FogNode) and isinstance(ep_b, FogNode):
        return CommType.SECONDARY
    d = ep_a.pos.distance_to(ep_b.pos)
    if isinstance(ep_a, Thing) and isinstance(ep_b, Thing):
        if d <= topology.short_range_m and ep_a.has_short_range and ep_b.has_short_range:
            return CommType.INTERPRIMARY
        if d <= topology.wifi_range_m and ep_a.has_wifi and ep_b.has_wifi:
            return CommType.PRIMARY
        return CommType.SECONDARY
    thing = ep_a if isinstance(ep_a, Thing) else ep_b
    if d <= topology.wifi_range_m and thing.has_wifi:
        return CommType.PRIMARY
    return CommType.SECONDARY


def fn_adjacency(topology: CityTopology) -> dict:
    """The FN adjacency map. Requires at least one FN."""
    if not topology.fns:
        raise ValueError("topology has no FNs")
    return topology.fn_graph


def build_link(a: str, b: str, topology: CityTopology) -> CommLink:
    """Construct the direct CommLink between two endpoints.

    Only realizable single-segment links can be built: FN-FN pairs (wired
    switch) and wireless pairs within radio reach. Raises ValueError for a
    pair that would need multi-segment routing.
    """
    comm_type = classify_link(a, b, topology)
    ep_a = topology.endpoint(a)
    ep_b = topology.endpoint(b)
    if isinstance(ep_a, FogNode) and isinstance(ep_b, FogNode):
        return CommLink(a, b, CommType.SECONDARY, Medium.WIRED, BANDWIDTH_WIRED_BPS, 0.006)
    if comm_type is CommType.SECONDARY:
        raise ValueError(f"no direct link between {a!r} and {b!r}; route via FNs")
    bandwidth = (
        BANDWIDTH_SHORT_BPS if comm_type is CommType.INTERPRIMARY else BANDWIDTH_WIFI_BPS
    )
    delay = 0.002 if isinstance(ep_a, Thing) and isinstance(ep_b, Thing) else 0.004
    return CommLink(a, b, comm_type, Medium.WIRELESS, bandwidth, delay)
