import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ringcoord.mapper import TableSet
from ringcoord.sim import (SINK, DisconnectedSinkError, PropagationConfig, ProtocolConfig,
                           bfs_rings, build_links, compute_all_coordinates, place_nodes,
                           run_initialization, topology_from_points)

R = 10.0


def layered_counts(adj, hops):
    """Direct graph computation of (inner, same, outer) neighbour counts by hop layer."""
    out = {}
    for v in range(1, len(adj)):
        if hops[v] < 1:
            continue
        c = [0, 0, 0]
        for u in adj[v]:
            diff = hops[u] - hops[v]
            if diff in (-1, 0, 1) and hops[u] >= 0:
                c[diff + 1] += 1
        out[v] = tuple(c)
    return out


def test_place_nodes_deterministic_and_in_bounds():
    a = place_nodes(50, 50, 50, (25, 25), seed=1)
    b = place_nodes(50, 50, 50, (25, 25), seed=1)
    np.testing.assert_array_equal(a.positions, b.positions)
    assert a.count == 50
    pts = a.positions[1:]
    assert ((pts >= 0) & (pts < 50)).all()
    assert tuple(a.positions[0]) == (25.0, 25.0)


def test_place_nodes_sizes():
    assert place_nodes(750, seed=3).count == 750
    one = place_nodes(1, 1.0, 1.0, (0.5, 0.5), seed=0)
    assert one.count == 1 and ((one.positions[1] >= 0) & (one.positions[1] < 1)).all()


@pytest.mark.parametrize("kwargs", [dict(count=0), dict(count=5, width=0.0), dict(count=5, height=-1.0)])
def test_place_nodes_invalid(kwargs):
    with pytest.raises(ValueError):
        place_nodes(**kwargs)


def test_freespace_threshold():
    topo = topology_from_points([[10.0, 0.0], [20.0001, 0.0]], sink=(0.0, 0.0))
    adj = build_links(topo, PropagationConfig("freespace", R))
    assert adj[0] == [1]
    assert adj[1] == [0]  # 10.0001 away from node 1
    assert adj[2] == []


def test_shadowing_sigma0_equals_freespace():
    topo = place_nodes(300, seed=11)
    free = build_links(topo, PropagationConfig("freespace", R))
    shadow = build_links(topo, PropagationConfig("shadowing", R, sigma=0.0), seed=5)
    assert free == shadow


def test_shadowing_link_probability_at_range():
    # threshold equals the mean received power at d = R, so each pair links with probability 1/2
    topo = topology_from_points([[R, 0.0]], sink=(0.0, 0.0))
    prop = PropagationConfig("shadowing", R, eta=3.0, sigma=4.0)
    trials = 10**4
    links = sum(bool(build_links(topo, prop, seed=s)[0]) for s in range(trials))
    assert abs(links / trials - 0.5) <= 3 * math.sqrt(0.25 / trials)


def test_links_symmetric_under_shadowing():
    topo = place_nodes(200, seed=2)
    adj = build_links(topo, PropagationConfig("shadowing", R), seed=9)
    for v, nbrs in enumerate(adj):
        for u in nbrs:
            assert v in adj[u]
    assert adj == build_links(topo, PropagationConfig("shadowing", R), seed=9)


def figure4():
    # sink - D - C - {A, B}: D hears the sink and C; C hears D, A and B
    pts = {"D": (8.0, 0.0), "C": (16.0, 0.0), "A": (23.0, 6.0), "B": (23.0, -6.0)}
    topo = topology_from_points(list(pts.values()), sink=(0.0, 0.0))
    ids = {name: i + 1 for i, name in enumerate(pts)}
    return topo, ids


def test_figure4_trace():
    topo, ids = figure4()
    adj = build_links(topo, PropagationConfig("freespace", R))
    assert sorted(adj[ids["C"]]) == sorted([ids["D"], ids["A"], ids["B"]])
    out = run_initialization(topo, adj, log=True)
    rings = {k: int(out.ring[v]) for k, v in ids.items()}
    assert rings == {"D": 1, "C": 2, "A": 3, "B": 3}
    census = {k: (int(out.inner[v]), int(out.same[v]), int(out.outer[v])) for k, v in ids.items()}
    assert census == {"D": (1, 0, 1), "C": (1, 0, 2), "A": (1, 0, 0), "B": (1, 0, 0)}
    assert out.messages_sent.tolist() == [1, 1, 1, 1, 1]
    assert all(out.listen_periods[v] == 3 for v in ids.values())
    kinds = [e[1] for e in out.events]
    assert kinds.count("packet") == 5 and kinds.count("preamble") == 5
    # the sink's packet comes first and makes D ring 1
    assert out.events[0][1:3] == ("preamble", SINK)
    assert out.event_log_lines()[0] == "time,event,node,detail"


@given(seed=st.integers(0, 10**6), count=st.integers(5, 120),
       model=st.sampled_from(["freespace", "shadowing"]))
@settings(max_examples=40)
def test_wave_matches_bfs_and_layered_counts(seed, count, model):
    topo = place_nodes(count, seed=seed)
    adj = build_links(topo, PropagationConfig(model, R), seed=seed + 1)
    try:
        out = run_initialization(topo, adj)
    except DisconnectedSinkError as exc:
        assert (exc.outcome.ring[1:] == -1).all()
        return
    hops = bfs_rings(adj)
    np.testing.assert_array_equal(out.ring, hops)
    counts = layered_counts(adj, hops)
    for v in out.initialized_nodes:
        c = out.census(v)
        assert (c.count_inner, c.count_same, c.count_outer) == counts[v]
        assert c.count_inner >= 1
        assert out.messages_sent[v] == 1
        assert out.listen_periods[v] == 3
    reachable = len(out.initialized_nodes)
    assert out.messages_sent.sum() == reachable + 1
    assert out.preambles_sent.sum() == reachable + 1


def test_disconnected_sink():
    topo = topology_from_points([[30.0, 0.0], [35.0, 0.0]], sink=(0.0, 0.0))
    adj = build_links(topo, PropagationConfig())
    with pytest.raises(DisconnectedSinkError) as info:
        run_initialization(topo, adj)
    assert (info.value.outcome.ring[1:] == -1).all()
    assert info.value.outcome.initialized_nodes == []


def test_unreachable_nodes_stay_uninitialized():
    topo = topology_from_points([[5.0, 0.0], [40.0, 0.0]], sink=(0.0, 0.0))
    adj = build_links(topo, PropagationConfig())
    out = run_initialization(topo, adj)
    assert out.ring[2] == -1 and out.initialized_nodes == [1]


def test_max_rings_caps_the_wave():
    topo = topology_from_points([[8.0, 0.0], [16.0, 0.0], [24.0, 0.0]], sink=(0.0, 0.0))
    adj = build_links(topo, PropagationConfig())
    out = run_initialization(topo, adj, ProtocolConfig(max_rings=2))
    assert out.ring.tolist() == [0, 1, 2, -1]


def same_census(a, b):
    return all((getattr(a, f) == getattr(b, f)).all() for f in ("ring", "inner", "same", "outer"))


def union_bound(adj):
    """Packet pairs that could share a slot at some receiver; divided by S it bounds P(any loss)."""
    hops = bfs_rings(adj)
    total = 0
    for v in range(len(adj)):
        if hops[v] < 0:
            continue
        for phase in {hops[u] for u in adj[v]} | {hops[v]}:
            m = sum(1 for u in adj[v] if hops[u] == phase) + (hops[v] == phase)
            total += math.comb(m, 2)
    return total


def test_contention_converges_to_wave():
    match_1e4, match_1e5, bound, runs = 0, 0, 0.0, 0
    for seed in range(200):
        topo = place_nodes(50, seed=seed)
        adj = build_links(topo, PropagationConfig())
        if not adj[SINK]:
            continue
        runs += 1
        wave = run_initialization(topo, adj)
        c4 = run_initialization(topo, adj, ProtocolConfig("contention", 10**4), seed=seed)
        c5 = run_initialization(topo, adj, ProtocolConfig("contention", 10**5), seed=seed)
        match_1e4 += same_census(wave, c4)
        match_1e5 += same_census(wave, c5)
        bound += min(1.0, union_bound(adj) / 10**4)
    assert match_1e4 / runs >= 1 - bound / runs
    assert match_1e5 / runs > 0.99


def test_contention_undercount_grows_with_load():
    topo = place_nodes(300, seed=4)
    adj = build_links(topo, PropagationConfig())
    wave = run_initialization(topo, adj)
    full = (wave.inner + wave.same + wave.outer).sum()
    heard = []
    for slots in (4, 16, 64, 1024):
        tot = 0
        for s in range(5):
            out = run_initialization(topo, adj, ProtocolConfig("contention", slots), seed=s)
            tot += (out.inner + out.same + out.outer).sum()
        heard.append(tot / 5)
    assert heard == sorted(heard)
    assert heard[-1] <= full


def test_contention_nodes_have_inner_neighbor_and_listen_at_least_three():
    topo = place_nodes(200, seed=8)
    adj = build_links(topo, PropagationConfig())
    out = run_initialization(topo, adj, ProtocolConfig("contention", 8), seed=3)
    for v in out.initialized_nodes:
        assert out.inner[v] >= 1
        assert out.messages_sent[v] == 1
        assert out.listen_periods[v] >= 3


def test_contention_deterministic():
    topo = place_nodes(150, seed=5)
    adj = build_links(topo, PropagationConfig())
    a = run_initialization(topo, adj, ProtocolConfig("contention", 8), seed=21)
    b = run_initialization(topo, adj, ProtocolConfig("contention", 8), seed=21)
    assert same_census(a, b)
    np.testing.assert_array_equal(a.listen_periods, b.listen_periods)


def test_compute_all_coordinates_ring_separation():
    topo = place_nodes(200, seed=1)
    adj = build_links(topo, PropagationConfig())
    out = run_initialization(topo, adj)
    tables = TableSet(R)
    coords = compute_all_coordinates(out, tables)
    assert set(coords) == set(out.initialized_nodes)
    for v, m in coords.items():
        assert math.floor(m.coordinate / R) + 1 == out.ring[v]
    again = compute_all_coordinates(run_initialization(topo, build_links(topo, PropagationConfig())), tables)
    assert {v: m.coordinate for v, m in again.items()} == {v: m.coordinate for v, m in coords.items()}


def test_ring1_pure_inner_coordinate():
    topo = topology_from_points([[3.0, 0.0]], sink=(0.0, 0.0))
    adj = build_links(topo, PropagationConfig())
    coords = compute_all_coordinates(run_initialization(topo, adj), TableSet(R))
    assert 0.0 <= coords[1].coordinate < R


def test_propagation_config_validation():
    with pytest.raises(ValueError):
        PropagationConfig("two-ray")
    with pytest.raises(ValueError):
        ProtocolConfig("csma")
    with pytest.raises(ValueError):
        ProtocolConfig(slots=0)
