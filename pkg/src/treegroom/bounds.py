"""Lower and upper bounds on wavelengths and ADMs for an instance on a tree."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .topology import TreeTopology
from .traffic import TrafficInstance, demand_index

__all__ = ["LinkLoadSummary", "NodeTraffic", "BoundsReport", "link_loads", "node_add_drop",
           "bounds_report", "w_max", "m_max"]


def _ceil_div(a, g: int):
    return -(-np.asarray(a) // g)


@dataclass(frozen=True)
class LinkLoadSummary:
    """Per father-child edge loads.

    ``down[m, e]`` is the father->child load of edge ``e`` (the edge above
    node ``e+1``) in pattern ``m``; ``up`` is the child->father direction.
    """

    edges: tuple[tuple[int, int], ...]
    down: np.ndarray
    up: np.ndarray

    @property
    def down_max(self) -> np.ndarray:
        return self.down.max(axis=0)

    @property
    def up_max(self) -> np.ndarray:
        return self.up.max(axis=0)

    def load(self, tail: int, head: int) -> int:
        """Max-over-patterns load of the directed link ``tail -> head``."""
        for e, (p, c) in enumerate(self.edges):
            if (p, c) == (tail, head):
                return int(self.down_max[e])
            if (c, p) == (tail, head):
                return int(self.up_max[e])
        raise KeyError(f"no link {tail}->{head}")


@dataclass(frozen=True)
class NodeTraffic:
    """``sigma[m, s]``: units terminating at ``s``; ``tau[m, s]``: units originating."""

    sigma_m: np.ndarray
    tau_m: np.ndarray

    @property
    def sigma(self) -> np.ndarray:
        return self.sigma_m.max(axis=0)

    @property
    def tau(self) -> np.ndarray:
        return self.tau_m.max(axis=0)


@dataclass(frozen=True)
class BoundsReport:
    w_min: int
    m_min: int
    w_max: int | None
    m_max: int
    family: str

    def to_dict(self) -> dict:
        return {"W_min": self.w_min, "M_min": self.m_min, "W_max": self.w_max,
                "M_max": self.m_max, "family": self.family}

    def table(self) -> str:
        w_max = "undefined (not a binary tree or star)" if self.w_max is None else str(self.w_max)
        rows = [("W_min", str(self.w_min)), ("W_max", w_max),
                ("M_min", str(self.m_min)), ("M_max", str(self.m_max))]
        return "\n".join(f"{k:<6} {v}" for k, v in rows)


def link_loads(instance: TrafficInstance, topology: TreeTopology) -> LinkLoadSummary:
    idx = demand_index(topology.n)
    demands = instance.demand_matrix()
    totals = np.zeros((instance.M, topology.n_links), np.int64)
    for k, (i, j) in enumerate(idx.pairs):
        if demands[k].any():
            for link in topology.route(i, j).links:
                totals[:, link] += demands[k]
    edges = tuple((topology.parent[c], c) for c in range(1, topology.n))
    return LinkLoadSummary(edges, totals[:, 0::2], totals[:, 1::2])


def node_add_drop(instance: TrafficInstance) -> NodeTraffic:
    pats = instance.patterns
    return NodeTraffic(sigma_m=pats.sum(axis=1), tau_m=pats.sum(axis=2))


def w_max(topology: TreeTopology) -> int | None:
    n = topology.n
    family = topology.bound_family
    if family == "star":
        return n - 1
    if family == "binary":
        return (n * n - 1) // 4 if n % 2 else n * n // 4
    return None


def m_max(topology: TreeTopology, w_min: int) -> int:
    n = topology.n
    if topology.bound_family == "star":
        return n * w_min
    return n * (n - 1)


def bounds_report(instance: TrafficInstance, topology: TreeTopology) -> BoundsReport:
    if instance.n != topology.n:
        raise ValueError(f"instance has n={instance.n}, topology has n={topology.n}")
    g = instance.g
    loads = link_loads(instance, topology)
    traffic = node_add_drop(instance)
    node_need = _ceil_div(np.maximum(traffic.sigma, traffic.tau), g)
    interior = sorted(topology.interior_nodes)
    w_min = int(max(
        _ceil_div(loads.down_max, g).max(initial=0),
        _ceil_div(loads.up_max, g).max(initial=0),
        node_need[interior].max(initial=0),
    ))
    m_min = int(node_need.sum())
    return BoundsReport(w_min, m_min, w_max(topology), m_max(topology, w_min), topology.bound_family)
