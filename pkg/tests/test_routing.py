import itertools
import random

import pytest

from focansim.routing import (
    FORWARD,
    RETURN,
    NoRouteError,
    Packet,
    PacketClass,
    RoutePath,
    TdmaConfig,
    find_path,
    reverse_path,
    tdma_schedule,
)


def graph_from_edges(nodes, edges):
    graph = {n: set() for n in nodes}
    for a, b in edges:
        graph[a].add(b)
        graph[b].add(a)
    return graph


def enumerate_simple_paths(graph, src, dst):
    """Oracle: every simple path from src to dst by exhaustive DFS."""
    paths = []
    stack = [(src, [src])]
    while stack:
        node, path = stack.pop()
        if node == dst:
            paths.append(path)
            continue
        for neigh in graph[node]:
            if neigh not in path:
                stack.append((neigh, path + [neigh]))
    return paths


def random_connected_graph(rng, n):
    nodes = [f"fn{i}" for i in range(n)]
    edges = set()
    shuffled = nodes[:]
    rng.shuffle(shuffled)
    for a, b in zip(shuffled, shuffled[1:]):  # random spanning tree
        edges.add(tuple(sorted((a, b))))
    for a, b in itertools.combinations(nodes, 2):
        if rng.random() < 0.3:
            edges.add(tuple(sorted((a, b))))
    return graph_from_edges(nodes, edges)


class TestFindPath:
    def test_line_graph(self):
        graph = graph_from_edges("ABC", [("A", "B"), ("B", "C")])
        path = find_path("A", "C", graph)
        assert path.hops == ("A", "B", "C")
        assert path.h == 2
        assert path.direction == FORWARD

    def test_identity_path(self):
        graph = graph_from_edges("A", [])
        path = find_path("A", "A", graph)
        assert path.hops == ("A",)
        assert path.h == 0

    def test_cycle_tie_breaks_lexicographically(self):
        graph = graph_from_edges("ABCD", [("A", "B"), ("B", "C"), ("C", "D"), ("D", "A")])
        # Oracle: enumerate all simple paths, both candidates have h=2.
        shortest = min(len(p) for p in enumerate_simple_paths(graph, "A", "C"))
        assert shortest - 1 == 2
        path = find_path("A", "C", graph)
        assert path.hops == ("A", "B", "C")

    def test_unreachable_raises_with_endpoints(self):
        graph = graph_from_edges("AB", [])
        with pytest.raises(NoRouteError) as err:
            find_path("A", "B", graph)
        assert err.value.src == "A"
        assert err.value.dst == "B"

    def test_unknown_node_raises(self):
        with pytest.raises(KeyError):
            find_path("A", "Z", {"A": set()})

    def test_optimality_against_enumeration(self):
        for seed in range(60):
            rng = random.Random(seed)
            graph = random_connected_graph(rng, rng.randint(2, 8))
            nodes = sorted(graph)
            src, dst = rng.sample(nodes, 2)
            all_paths = enumerate_simple_paths(graph, src, dst)
            if not all_paths:
                with pytest.raises(NoRouteError):
                    find_path(src, dst, graph)
                continue
            best = min(len(p) - 1 for p in all_paths)
            path = find_path(src, dst, graph)
            assert path.h == best
            # Among min-hop paths, ours is the lexicographically smallest.
            candidates = sorted(tuple(p) for p in all_paths if len(p) - 1 == best)
            assert path.hops == candidates[0]

    def test_consecutive_hops_adjacent(self):
        for seed in range(20):
            rng = random.Random(1000 + seed)
            graph = random_connected_graph(rng, 6)
            src, dst = rng.sample(sorted(graph), 2)
            try:
                path = find_path(src, dst, graph)
            except NoRouteError:
                continue
            for a, b in path.links():
                assert b in graph[a]


class TestReversePath:
    def test_reverses_and_relabels(self):
        path = RoutePath(hops=("A", "B", "C"), direction=FORWARD)
        back = reverse_path(path)
        assert back.hops == ("C", "B", "A")
        assert back.h == path.h
        assert back.direction == RETURN

    def test_identity_path_reverses(self):
        back = reverse_path(RoutePath(hops=("A",)))
        assert back.hops == ("A",)
        assert back.direction == RETURN

    def test_double_reverse_is_an_error(self):
        back = reverse_path(RoutePath(hops=("A", "B")))
        with pytest.raises(ValueError):
            reverse_path(back)

    def test_preserves_adjacency(self):
        graph = graph_from_edges("ABCD", [("A", "B"), ("B", "C"), ("C", "D")])
        back = reverse_path(find_path("A", "D", graph))
        for a, b in back.links():
            assert b in graph[a]


def packet(pid, link, arrival=0.0, klass=PacketClass.SECONDARY_TASK):
    return Packet(id=pid, task_id="task", link=link, size_bits=1e6, klass=klass, arrival_s=arrival)


def check_schedule(schedule, packets, config):
    """Oracle checks: exclusivity, TTL bound, and exact partition."""
    seen_cells = set()
    assigned = set()
    for (rnd, slot, link), pid in schedule.assignments.items():
        assert (rnd, slot, link) not in seen_cells
        seen_cells.add((rnd, slot, link))
        assert 1 <= rnd <= config.ttl_rounds
        assert 0 <= slot < config.slots_per_round
        assigned.add(pid)
    all_ids = {p.id for p in packets}
    assert assigned | set(schedule.dropped) == all_ids
    assert assigned & set(schedule.dropped) == set()


class TestTdma:
    def test_exact_fit_uses_rounds_1_2_3(self):
        link = ("A", "B")
        config = TdmaConfig(slot_duration_s=0.001, slots_per_round=1, ttl_rounds=3)
        packets = [packet(f"p{i}", link) for i in range(3)]
        schedule = tdma_schedule(packets, config)
        assert schedule.dropped == frozenset()
        rounds = sorted(rnd for rnd, _s, _l in schedule.assignments)
        assert rounds == [1, 2, 3]

    def test_pigeonhole_drops_fourth(self):
        link = ("A", "B")
        config = TdmaConfig(slot_duration_s=0.001, slots_per_round=1, ttl_rounds=3)
        packets = [packet(f"p{i}", link, arrival=i * 0.001) for i in range(4)]
        schedule = tdma_schedule(packets, config)
        assert len(schedule.assignments) == 3
        assert schedule.dropped == frozenset({"p3"})

    def test_two_links_fit_without_conflicts(self):
        config = TdmaConfig(slot_duration_s=0.001, slots_per_round=2, ttl_rounds=2)
        packets = [packet(f"a{i}", ("A", "B")) for i in range(3)]
        packets += [packet(f"b{i}", ("B", "C")) for i in range(3)]
        # Feasibility oracle: each link offers 2 slots x 2 rounds = 4 >= 3.
        schedule = tdma_schedule(packets, config)
        assert schedule.dropped == frozenset()
        check_schedule(schedule, packets, config)

    def test_secondary_class_goes_first_within_instant(self):
        link = ("A", "B")
        config = TdmaConfig(slot_duration_s=0.001, slots_per_round=1, ttl_rounds=1)
        packets = [
            packet("prim", link, klass=PacketClass.PRIMARY_TASK),
            packet("sec", link, klass=PacketClass.SECONDARY_TASK),
        ]
        schedule = tdma_schedule(packets, config)
        assert schedule.assignments[(1, 0, link)] == "sec"
        assert schedule.dropped == frozenset({"prim"})

    def test_zero_slots_config_rejected(self):
        with pytest.raises(ValueError):
            TdmaConfig(slot_duration_s=0.001, slots_per_round=0, ttl_rounds=1)

    def test_randomized_properties(self):
        for seed in range(30):
            rng = random.Random(seed)
            links = [("A", "B"), ("B", "C"), ("C", "D"), ("A", "D"), ("B", "D")]
            config = TdmaConfig(
                slot_duration_s=0.001,
                slots_per_round=rng.randint(1, 4),
                ttl_rounds=rng.randint(1, 10),
            )
            packets = [
                packet(f"p{i}", rng.choice(links), arrival=rng.uniform(0, 0.05))
                for i in range(rng.randint(0, 200))
            ]
            schedule = tdma_schedule(packets, config)
            check_schedule(schedule, packets, config)

    def test_packet_validation(self):
        with pytest.raises(ValueError):
            Packet(id="p", task_id="t", link=("A", "A"), size_bits=10)
        with pytest.raises(ValueError):
            Packet(id="p", task_id="t", link=("A", "B"), size_bits=0)
