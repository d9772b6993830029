"""Tree and star physical topologies with unique-route lookup.

Nodes are labelled ``0 .. n-1`` and node 0 is the root (the hub of a star).
Every physical edge joins a child ``c`` to ``parent[c]`` and carries two
directed links. Link ids are assigned in (child-edge, direction) order::

    link 2*(c-1)     : parent[c] -> c   (downstream)
    link 2*(c-1) + 1 : c -> parent[c]   (upstream)
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

__all__ = [
    "TopologyError",
    "TreeTopology",
    "DirectedPath",
    "build_topology",
    "route",
    "star",
    "complete_binary",
    "from_parents",
    "load_topology",
    "save_topology",
]

KINDS = ("star", "complete_binary", "parent_vector")


class TopologyError(ValueError):
    pass


@dataclass(frozen=True)
class DirectedPath:
    """Ordered directed links from ``source`` to ``destination``."""

    links: tuple[int, ...]
    nodes: tuple[int, ...]

    @property
    def source(self) -> int:
        return self.nodes[0]

    @property
    def destination(self) -> int:
        return self.nodes[-1]

    @property
    def intermediate(self) -> tuple[int, ...]:
        return self.nodes[1:-1]

    def __len__(self) -> int:
        return len(self.links)


@dataclass(frozen=True)
class TreeTopology:
    """Immutable rooted tree.

    ``parent[0]`` is ``None``; every other entry names the parent node.
    ``kind`` records how the tree was built and selects the bound formulas.
    """

    n: int
    parent: tuple[int | None, ...]
    kind: str = "parent_vector"
    _routes: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        _check_parents(self.n, self.parent)
        if self.kind not in KINDS:
            raise TopologyError(f"unknown topology kind {self.kind!r}")

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        kids: list[list[int]] = [[] for _ in range(self.n)]
        for c in range(1, self.n):
            kids[self.parent[c]].append(c)
        return tuple(tuple(k) for k in kids)

    @cached_property
    def depth(self) -> tuple[int, ...]:
        d = [0] * self.n
        for v in self._topological():
            if v:
                d[v] = d[self.parent[v]] + 1
        return tuple(d)

    def _topological(self) -> list[int]:
        order, stack = [], [0]
        while stack:
            v = stack.pop()
            order.append(v)
            stack.extend(reversed(self.children[v]))
        return order

    @cached_property
    def interior_nodes(self) -> frozenset[int]:
        # a root with one child still relays traffic, so it counts
        return frozenset(v for v in range(self.n) if self.children[v])

    @cached_property
    def leaves(self) -> frozenset[int]:
        return frozenset(range(self.n)) - self.interior_nodes

    @cached_property
    def directed_links(self) -> tuple[tuple[int, int], ...]:
        links = []
        for c in range(1, self.n):
            p = self.parent[c]
            links.append((p, c))
            links.append((c, p))
        return tuple(links)

    @cached_property
    def link_index(self) -> dict[tuple[int, int], int]:
        return {pair: i for i, pair in enumerate(self.directed_links)}

    @property
    def n_links(self) -> int:
        return 2 * (self.n - 1)

    def link_id(self, tail: int, head: int) -> int:
        try:
            return self.link_index[(tail, head)]
        except KeyError:
            raise TopologyError(f"no link {tail}->{head}") from None

    @property
    def is_star(self) -> bool:
        return all(p == 0 for p in self.parent[1:])

    @property
    def is_binary(self) -> bool:
        return all(len(c) <= 2 for c in self.children)

    @property
    def bound_family(self) -> str:
        """``"star"``, ``"binary"`` or ``"irregular"``; picks the W_max/M_max formulas."""
        if self.kind == "star" or (self.kind == "parent_vector" and self.is_star):
            return "star"
        if self.kind == "complete_binary" or self.is_binary:
            return "binary"
        return "irregular"

    def route(self, i: int, j: int) -> DirectedPath:
        return route(self, i, j)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n": self.n, "parents": list(self.parent)}


def _check_parents(n: int, parent: Sequence[int | None]) -> None:
    if n < 2:
        raise TopologyError(f"need at least 2 nodes, got n={n}")
    if len(parent) != n:
        raise TopologyError(f"parent vector has {len(parent)} entries for n={n}")
    if parent[0] is not None:
        raise TopologyError("node 0 is the root and must have no parent")
    for v in range(1, n):
        p = parent[v]
        if p is None or not isinstance(p, int) or not 0 <= p < n or p == v:
            raise TopologyError(f"node {v} has invalid parent {p!r}")
    # every node must reach the root without revisiting anything
    for v in range(1, n):
        seen = {v}
        u = parent[v]
        while u != 0:
            if u in seen:
                raise TopologyError(f"cycle through node {v} in parent vector")
            seen.add(u)
            u = parent[u]


def route(topo: TreeTopology, i: int, j: int) -> DirectedPath:
    """Unique simple path from ``i`` to ``j``, found by walking both ends up to their LCA."""
    if i == j:
        raise TopologyError(f"no route from node {i} to itself")
    if not (0 <= i < topo.n and 0 <= j < topo.n):
        raise TopologyError(f"nodes ({i}, {j}) out of range for n={topo.n}")
    cached = topo._routes.get((i, j))
    if cached is not None:
        return cached

    depth, parent = topo.depth, topo.parent
    up, down = [i], [j]
    a, b = i, j
    while depth[a] > depth[b]:
        a = parent[a]
        up.append(a)
    while depth[b] > depth[a]:
        b = parent[b]
        down.append(b)
    while a != b:
        a, b = parent[a], parent[b]
        up.append(a)
        down.append(b)
    nodes = tuple(up + down[-2::-1])
    links = tuple(topo.link_index[(u, v)] for u, v in zip(nodes, nodes[1:]))
    path = DirectedPath(links, nodes)
    topo._routes[(i, j)] = path
    return path


def star(n: int) -> TreeTopology:
    return TreeTopology(n, (None,) + (0,) * (n - 1), kind="star")


def complete_binary(n: int) -> TreeTopology:
    return TreeTopology(n, (None,) + tuple((i - 1) // 2 for i in range(1, n)), kind="complete_binary")


def from_parents(parents: Iterable[int | None] | dict[int, int]) -> TreeTopology:
    """Build from a parent vector (``None``/-1 for the root) or a child->parent mapping."""
    if isinstance(parents, dict):
        n = max(max(parents), max(parents.values())) + 1
        vec: list[int | None] = [None] * n
        for c, p in parents.items():
            vec[c] = p
        for v in range(1, n):
            if vec[v] is None:
                raise TopologyError(f"node {v} is disconnected (no parent given)")
    else:
        vec = [None if p is None or p == -1 else int(p) for p in parents]
    return TreeTopology(len(vec), tuple(vec), kind="parent_vector")


def build_topology(kind: str, n: int | None = None, parents=None) -> TreeTopology:
    if kind == "star":
        return star(int(n))
    if kind in ("complete_binary", "binary", "tree"):
        return complete_binary(int(n))
    if kind == "parent_vector":
        if parents is None:
            raise TopologyError("parent_vector topology needs a parent list")
        topo = from_parents(parents)
        if n is not None and topo.n != n:
            raise TopologyError(f"parent vector describes {topo.n} nodes, expected {n}")
        return topo
    raise TopologyError(f"unknown topology kind {kind!r}")


def topology_from_dict(d: dict) -> TreeTopology:
    kind = d.get("kind", "parent_vector")
    parents = d.get("parents")
    if parents is not None:
        topo = from_parents(parents)
        if kind in KINDS and kind != "parent_vector":
            expected = build_topology(kind, topo.n)
            if expected.parent != topo.parent:
                raise TopologyError(f"parents do not match a {kind} topology")
            return expected
        return topo
    return build_topology(kind, d.get("n"))


def load_topology(path) -> TreeTopology:
    with open(path) as fh:
        return topology_from_dict(json.load(fh))


def save_topology(topo: TreeTopology, path) -> None:
    Path(path).write_text(json.dumps(topo.to_dict(), indent=2) + "\n")
