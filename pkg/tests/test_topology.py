import math
import random

import pytest

from focansim.topology import (
    CommType,
    FogNode,
    Medium,
    Position,
    Thing,
    TopologyConfig,
    assign_cluster,
    build_link,
    build_topology,
    classify_link,
    fn_adjacency,
)


def make_topology(things=(), fns=(), fn_edges=None, short_range=10.0, wifi_range=30.0):
    return build_topology(
        TopologyConfig(
            things=tuple(things),
            fns=tuple(fns),
            fn_edges=fn_edges,
            short_range_m=short_range,
            wifi_range_m=wifi_range,
        )
    )


def thing(tid, x, y, radios=("wifi",), apps=("app",)):
    return Thing(tid, Position(x, y), frozenset(radios), frozenset(apps))


def fn(fid, x, y, radius=30.0):
    return FogNode(fid, Position(x, y), coverage_radius=radius)


def random_topology(rng, n_things=10, n_fns=4, extent=80.0):
    things = [
        thing(
            f"t{i:02d}",
            rng.uniform(0, extent),
            rng.uniform(0, extent),
            radios=rng.choice([("wifi",), ("wifi", "bluetooth"), ("bluetooth",), ("zigbee", "wifi")]),
        )
        for i in range(n_things)
    ]
    fns = [fn(f"f{i}", rng.uniform(0, extent), rng.uniform(0, extent)) for i in range(n_fns)]
    return make_topology(things, fns)


class TestClustering:
    def test_single_fn_in_range(self):
        topo = make_topology([thing("t0", 5, 0)], [fn("f0", 0, 0)])
        assert topo.cluster_of["t0"] == "f0"

    def test_out_of_range_is_uncovered(self):
        topo = make_topology([thing("t0", 100, 0)], [fn("f0", 0, 0)])
        assert topo.cluster_of["t0"] is None

    def test_nearest_fn_wins(self):
        # Oracle: distances to both FNs, the smaller must be chosen.
        topo = make_topology([thing("t0", 4, 0)], [fn("f0", 0, 0), fn("f1", 10, 0)])
        d0 = math.hypot(4 - 0, 0)
        d1 = math.hypot(4 - 10, 0)
        assert d0 < d1
        assert topo.cluster_of["t0"] == "f0"

    def test_exact_fn_position(self):
        topo = make_topology([thing("t0", 7, 7)], [fn("f0", 7, 7)])
        assert topo.cluster_of["t0"] == "f0"

    def test_equidistant_breaks_to_lower_id(self):
        topo = make_topology([thing("t0", 15, 0)], [fn("f1", 30, 0), fn("f0", 0, 0)])
        # Exhaustive comparison confirms the tie, then the id rule applies.
        d = {f.id: math.hypot(15 - f.pos.x, f.pos.y) for f in topo.fns}
        assert d["f0"] == d["f1"]
        assert topo.cluster_of["t0"] == "f0"

    def test_duplicate_id_rejected_with_offender(self):
        with pytest.raises(ValueError, match="dup"):
            make_topology([thing("dup", 0, 0), thing("dup", 1, 1)], [fn("f0", 0, 0)])

    def test_rebuild_is_deterministic(self):
        rng = random.Random(3)
        cfg = TopologyConfig(
            things=tuple(
                thing(f"t{i}", rng.uniform(0, 50), rng.uniform(0, 50)) for i in range(12)
            ),
            fns=tuple(fn(f"f{i}", rng.uniform(0, 50), rng.uniform(0, 50)) for i in range(3)),
        )
        first = build_topology(cfg)
        second = build_topology(cfg)
        assert first.cluster_of == second.cluster_of
        assert first.fn_graph == second.fn_graph

    def test_never_clustered_beyond_radius(self):
        for seed in range(20):
            topo = random_topology(random.Random(seed))
            for t in topo.things:
                fn_id = topo.cluster_of[t.id]
                if fn_id is not None:
                    serving = topo.endpoint(fn_id)
                    assert t.pos.distance_to(serving.pos) <= serving.coverage_radius

    def test_assign_cluster_matches_build(self):
        topo = random_topology(random.Random(11))
        for t in topo.things:
            assert assign_cluster(t, topo) == topo.cluster_of[t.id]


class TestClassification:
    def test_bluetooth_pair_close_is_interprimary(self):
        topo = make_topology(
            [thing("a", 0, 0, radios=("bluetooth",)), thing("b", 2, 0, radios=("bluetooth",))],
            [fn("f0", 0, 0)],
        )
        assert classify_link("a", "b", topo) is CommType.INTERPRIMARY

    def test_thing_to_fn_wifi_is_primary(self):
        topo = make_topology([thing("a", 20, 0)], [fn("f0", 0, 0)])
        assert classify_link("a", "f0", topo) is CommType.PRIMARY

    def test_fn_to_fn_is_secondary(self):
        topo = make_topology([], [fn("f0", 0, 0), fn("f1", 50, 0)])
        assert classify_link("f0", "f1", topo) is CommType.SECONDARY

    def test_distant_things_fall_back_to_secondary(self):
        topo = make_topology(
            [thing("a", 0, 0), thing("b", 200, 0)], [fn("f0", 0, 0), fn("f1", 200, 0)]
        )
        assert classify_link("a", "b", topo) is CommType.SECONDARY

    def test_wifi_only_pair_close_is_primary_not_interprimary(self):
        topo = make_topology([thing("a", 0, 0), thing("b", 2, 0)], [fn("f0", 0, 0)])
        assert classify_link("a", "b", topo) is CommType.PRIMARY

    def test_unknown_endpoint_raises(self):
        topo = make_topology([thing("a", 0, 0)], [fn("f0", 0, 0)])
        with pytest.raises(KeyError):
            classify_link("a", "ghost", topo)

    def test_symmetry_over_random_topologies(self):
        for seed in range(10):
            topo = random_topology(random.Random(seed), n_things=12, n_fns=3)
            ids = [t.id for t in topo.things] + [f.id for f in topo.fns]
            for i, a in enumerate(ids):
                for b in ids[i + 1 :]:
                    assert classify_link(a, b, topo) is classify_link(b, a, topo)

    def test_range_implications_brute_force(self):
        # Interprimary implies short range; primary implies wifi range.
        for seed in range(10):
            topo = random_topology(random.Random(100 + seed), n_things=14, n_fns=4)
            ids = [t.id for t in topo.things] + [f.id for f in topo.fns]
            for i, a in enumerate(ids):
                for b in ids[i + 1 :]:
                    ct = classify_link(a, b, topo)
                    d = topo.position_of(a).distance_to(topo.position_of(b))
                    if ct is CommType.INTERPRIMARY:
                        assert d <= topo.short_range_m
                    elif ct is CommType.PRIMARY:
                        assert d <= topo.wifi_range_m


class TestFnGraph:
    def test_default_switch_is_complete_graph(self):
        topo = make_topology([], [fn("a", 0, 0), fn("b", 10, 0), fn("c", 20, 0)])
        graph = fn_adjacency(topo)
        assert graph == {"a": {"b", "c"}, "b": {"a", "c"}, "c": {"a", "b"}}

    def test_single_fn_has_no_edges(self):
        topo = make_topology([], [fn("a", 0, 0)])
        assert fn_adjacency(topo) == {"a": frozenset()}

    def test_explicit_line_is_echoed(self):
        topo = make_topology(
            [], [fn("a", 0, 0), fn("b", 10, 0), fn("c", 20, 0)], fn_edges=(("a", "b"), ("b", "c"))
        )
        graph = fn_adjacency(topo)
        assert graph["a"] == {"b"}
        assert graph["b"] == {"a", "c"}
        assert graph["c"] == {"b"}

    def test_no_fns_raises(self):
        topo = make_topology([thing("a", 0, 0)], [])
        with pytest.raises(ValueError):
            fn_adjacency(topo)

    def test_graph_is_undirected_and_loop_free(self):
        topo = random_topology(random.Random(5), n_fns=5)
        for node, neighbors in topo.fn_graph.items():
            assert node not in neighbors
            for other in neighbors:
                assert node in topo.fn_graph[other]

    def test_neighbors_attached_to_nodes(self):
        topo = make_topology([], [fn("a", 0, 0), fn("b", 10, 0)], fn_edges=(("a", "b"),))
        assert topo.endpoint("a").neighbors == {"b"}


class TestTypes:
    def test_position_must_be_finite(self):
        with pytest.raises(ValueError):
            Position(float("nan"), 0.0)

    def test_thing_needs_a_radio(self):
        with pytest.raises(ValueError):
            Thing("t", Position(0, 0), frozenset())

    def test_fog_node_invariants(self):
        with pytest.raises(ValueError):
            FogNode("f", Position(0, 0), coverage_radius=0.0)
        with pytest.raises(ValueError):
            FogNode("f", Position(0, 0), cores=0)

    def test_wired_rtt_fixed(self):
        topo = make_topology([], [fn("a", 0, 0), fn("b", 10, 0)])
        link = build_link("a", "b", topo)
        assert link.medium is Medium.WIRED
        assert link.rtt == 0.010

    def test_wireless_rtt_fixed(self):
        topo = make_topology([thing("a", 0, 0), thing("b", 2, 0)], [fn("f0", 0, 0)])
        link = build_link("a", "b", topo)
        assert link.medium is Medium.WIRELESS
        assert link.rtt == 0.0005

    def test_build_link_rejects_multi_segment_pairs(self):
        topo = make_topology(
            [thing("a", 0, 0), thing("b", 500, 0)], [fn("f0", 0, 0), fn("f1", 500, 0)]
        )
        with pytest.raises(ValueError):
            build_link("a", "b", topo)
