from collections import deque

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treegroom.topology import (TopologyError, build_topology, complete_binary, from_parents, load_topology,
                                route, save_topology, star)


def bfs_nodes(topo, i, j):
    adj = {v: set() for v in range(topo.n)}
    for c in range(1, topo.n):
        adj[c].add(topo.parent[c])
        adj[topo.parent[c]].add(c)
    prev = {i: None}
    q = deque([i])
    while q:
        u = q.popleft()
        for v in sorted(adj[u]):
            if v not in prev:
                prev[v] = u
                q.append(v)
    out = [j]
    while out[-1] != i:
        out.append(prev[out[-1]])
    return tuple(reversed(out))


def link_pairs(topo, path):
    return [topo.directed_links[l] for l in path.links]


def test_star_parents_and_interior():
    t = build_topology("star", 4)
    assert t.parent == (None, 0, 0, 0)
    assert t.interior_nodes == {0}
    assert t.leaves == {1, 2, 3}


def test_complete_binary_children():
    t = build_topology("complete_binary", 7)
    assert t.children[0] == (1, 2)
    assert t.children[1] == (3, 4)
    assert t.children[2] == (5, 6)


def test_parent_vector_interior_by_child_count():
    t = build_topology("parent_vector", parents={1: 0, 2: 1, 3: 1})
    # root with a single child still relays traffic
    assert t.interior_nodes == {0, 1}
    assert t.leaves == {2, 3}


@pytest.mark.parametrize("parents, node", [
    ([None, 2, 1], 1),
    ([None, 0, 3, 2], 2),
])
def test_cycle_rejected_naming_node(parents, node):
    with pytest.raises(TopologyError, match=f"node {node}"):
        from_parents(parents)


def test_disconnected_rejected():
    with pytest.raises(TopologyError, match="node 2"):
        from_parents({1: 0, 3: 1})


def test_route_star():
    t = star(4)
    p = route(t, 1, 2)
    assert link_pairs(t, p) == [(1, 0), (0, 2)]
    assert p.intermediate == (0,)


@pytest.mark.parametrize("i, j, expected", [
    (3, 4, [(3, 1), (1, 4)]),
    (3, 5, [(3, 1), (1, 0), (0, 2), (2, 5)]),
])
def test_route_binary_matches_bfs(i, j, expected):
    t = complete_binary(7)
    p = route(t, i, j)
    assert link_pairs(t, p) == expected
    assert p.nodes == bfs_nodes(t, i, j)


def test_route_self_rejected():
    with pytest.raises(TopologyError):
        route(star(3), 1, 1)


def test_link_ids_child_edge_order():
    t = complete_binary(4)
    assert t.directed_links == ((0, 1), (1, 0), (0, 2), (2, 0), (1, 3), (3, 1))


@st.composite
def trees(draw):
    n = draw(st.integers(2, 16))
    kind = draw(st.sampled_from(["star", "complete_binary", "random"]))
    if kind == "random":
        return from_parents([None] + [draw(st.integers(0, c - 1)) for c in range(1, n)])
    return build_topology(kind, n)


@settings(max_examples=60, deadline=None)
@given(trees())
def test_route_properties(t):
    single_hop = 0
    for i in range(t.n):
        for j in range(t.n):
            if i == j:
                continue
            p = route(t, i, j)
            assert 1 <= len(p) <= t.n - 1
            assert (p.source, p.destination) == (i, j)
            assert p.nodes == bfs_nodes(t, i, j)
            assert len(set(p.nodes)) == len(p.nodes)
            back = route(t, j, i)
            assert back.nodes == p.nodes[::-1]
            assert [t.directed_links[l] for l in back.links] == [
                (b, a) for a, b in reversed(link_pairs(t, p))]
            single_hop += len(p) == 1
    assert single_hop == 2 * (t.n - 1)
    assert sorted(t.link_index) == sorted(t.directed_links)
    for a, b in t.directed_links:
        assert (b, a) in t.link_index


def test_json_round_trip(tmp_path):
    for t in (star(5), complete_binary(9), from_parents([None, 0, 1, 1, 3])):
        save_topology(t, tmp_path / "t.json")
        u = load_topology(tmp_path / "t.json")
        assert u.parent == t.parent and u.kind == t.kind


def test_bound_family():
    assert star(3).bound_family == "star"
    assert complete_binary(15).bound_family == "binary"
    assert from_parents([None, 0, 0, 0, 1]).bound_family == "irregular"
    assert from_parents([None, 0, 1, 1]).bound_family == "binary"
