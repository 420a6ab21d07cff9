"""Minimum-hop routing over the FN backbone and TDMA packet scheduling."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum

FORWARD = 1  # source FN toward destination FN
RETURN = 0  # acknowledgment path back to the source FN


class NoRouteError(Exception):
    """Destination FN unreachable from the source FN."""

    def __init__(self, src: str, dst: str):
        super().__init__(f"no route from {src!r} to {dst!r}")
        self.src = src
        self.dst = dst


@dataclass(frozen=True)
class RoutePath:
    """Ordered FN hop list; h is the hop count (edges traversed)."""

    hops: tuple
    direction: int = FORWARD

    def __post_init__(self):
        if not self.hops:
            raise ValueError("path must contain at least one FN")
        if self.direction not in (FORWARD, RETURN):
            raise ValueError(f"direction must be {FORWARD} or {RETURN}")

    @property
    def h(self) -> int:
        return len(self.hops) - 1

    def links(self) -> list:
        """Consecutive (fn, fn) pairs along the path."""
        return list(zip(self.hops, self.hops[1:]))


def find_path(src: str, dst: str, graph: dict) -> RoutePath:
    """Minimum-hop path from src to dst, labeled forward.

    Among all minimum-hop paths the lexicographically smallest id sequence is
    returned, which makes routing deterministic. Raises NoRouteError when dst
    is unreachable.
    """
    if src not in graph:
        raise KeyError(f"unknown FN {src!r}")
    if dst not in graph:
        raise KeyError(f"unknown FN {dst!r}")
    if src == dst:
        return RoutePath(hops=(src,), direction=FORWARD)

    dist = _bfs_distances(dst, graph)
    if src not in dist:
        raise NoRouteError(src, dst)

    # Greedy walk: at each step take the smallest-id neighbor that still lies
    # on some shortest path. This realizes the lexicographic tie-break.
    hops = [src]
    current = src
    while current != dst:
        step = dist[current] - 1
        current = min(n for n in graph[current] if dist.get(n) == step)
        hops.append(current)
    return RoutePath(hops=tuple(hops), direction=FORWARD)


def _bfs_distances(root: str, graph: dict) -> dict:
    dist = {root: 0}
    queue = deque([root])
    while queue:
        node = queue.popleft()
        for neigh in graph[node]:
            if neigh not in dist:
                dist[neigh] = dist[node] + 1
                queue.append(neigh)
    return dist


def reverse_path(path: RoutePath) -> RoutePath:
    """The return path: hops reversed, direction flipped to the return label.

    Only a forward path can be reversed; reversing twice is an error rather
    than a round-trip.
    """
    if path.direction != FORWARD:
        raise ValueError("path is already a return path")
    return RoutePath(hops=tuple(reversed(path.hops)), direction=RETURN)


@dataclass(frozen=True)
class TdmaConfig:
    """Slot grid for FN-to-FN links: slots per round and the TTL in rounds."""

    slot_duration_s: float = 0.001
    slots_per_round: int = 10
    ttl_rounds: int = 100

    def __post_init__(self):
        if self.slot_duration_s <= 0:
            raise ValueError("slot_duration_s must be > 0")
        if self.slots_per_round <= 0:
            raise ValueError("slots_per_round must be > 0")
        if self.ttl_rounds <= 0:
            raise ValueError("ttl_rounds must be > 0")

    @property
    def round_duration_s(self) -> float:
        return self.slot_duration_s * self.slots_per_round


class PacketClass(Enum):
    PRIMARY_TASK = "primary_task"
    SECONDARY_TASK = "secondary_task"


# Secondary-class packets go first within the same arrival instant.
_CLASS_RANK = {PacketClass.SECONDARY_TASK: 0, PacketClass.PRIMARY_TASK: 1}


@dataclass(frozen=True)
class Packet:
    """One payload unit queued for a specific FN-to-FN link."""

    id: str
    task_id: str
    link: tuple
    size_bits: float
    klass: PacketClass = PacketClass.SECONDARY_TASK
    arrival_s: float = 0.0

    def __post_init__(self):
        if self.size_bits <= 0:
            raise ValueError(f"packet {self.id!r}: size_bits must be > 0")
        if len(self.link) != 2 or self.link[0] == self.link[1]:
            raise ValueError(f"packet {self.id!r}: link must join two distinct FNs")


@dataclass(frozen=True)
class TdmaSchedule:
    """Slot assignments keyed by (round, slot, link) plus the dropped set.

    Rounds are 1-based; slots are 0-based within a round. Every input packet
    is either assigned within the TTL or dropped.
    """

    assignments: dict
    dropped: frozenset

    def rounds_used(self) -> int:
        return max((key[0] for key in self.assignments), default=0)

    def slot_of(self, packet_id: str):
        for key, pid in self.assignments.items():
            if pid == packet_id:
                return key
        return None


def tdma_schedule(packets: list, config: TdmaConfig) -> TdmaSchedule:
    """Assign packets to exclusive (round, slot, link) cells under the TTL.

    Packets are served FIFO by arrival time, secondary class before primary
    within the same instant. Each link offers slots_per_round cells per round;
    a packet that cannot be placed within ttl_rounds rounds is dropped.
    """
    ordered = sorted(
        packets,
        key=lambda p: (p.arrival_s, _CLASS_RANK[p.klass]),
    )
    assignments: dict = {}
    dropped = set()
    used_per_link: dict = {}
    for packet in ordered:
        position = used_per_link.get(packet.link, 0)
        round_idx = position // config.slots_per_round + 1
        if round_idx > config.ttl_rounds:
            dropped.add(packet.id)
            continue
        slot_idx = position % config.slots_per_round
        assignments[(round_idx, slot_idx, packet.link)] = packet.id
        used_per_link[packet.link] = position + 1
    return TdmaSchedule(assignments=assignments, dropped=frozenset(dropped))
