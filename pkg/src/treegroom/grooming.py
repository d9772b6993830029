"""Grooming state: wavelengths, loads, drop nodes and fragment placements.

``GroomingState`` is the mutable working state of one decoding pass. Its
methods are thin wrappers over the compiled primitives in ``_kernels`` so the
decoder and interactive use go through exactly the same arithmetic.

Capacity model: on every wavelength and in every pattern, each directed link
carries at most ``g`` units, and each node may originate at most ``g`` and
terminate at most ``g`` units. Cut segments terminate electronically at the
cut node, so they count against its add/drop capacity too.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from . import _kernels as K
from .topology import TreeTopology
from .traffic import TrafficInstance, demand_index

__all__ = [
    "Fragment",
    "WavelengthState",
    "GroomingState",
    "RouteTable",
    "Outcome",
    "route_table",
    "DEFAULT_MAX_PARTS",
]

DEFAULT_MAX_PARTS = 4

KIND_NAMES = {K.WHOLE: "whole", K.PART: "part", K.SEG_SRC: "segment", K.SEG_DST: "segment"}

REFUSALS = {
    K.REFUSED_BUDGET: "divide budget exhausted",
    K.REFUSED_ENDPOINT: "an endpoint is not a drop node of the wavelength",
    K.REFUSED_NO_SPARE: "no spare capacity on the route in some pattern",
    K.REFUSED_SHORT: "single-link demand cannot be cut",
    K.REFUSED_NO_PARTNER: "no partner wavelength drops both the cut node and the far endpoint",
    K.REFUSED_NO_ROOM: "cut segments do not fit their wavelengths",
}


@dataclass(frozen=True)
class Fragment:
    """One placed piece of a demand.

    ``kind`` is ``"whole"``, ``"part"`` or ``"segment"``. Parts are numbered
    by ``ordinal``; segments have ``side`` ``"source"`` (source -> cut node)
    or ``"destination"`` (cut node -> destination). ``wavelength`` is 1-based.
    """

    demand: int
    source: int
    dest: int
    kind: str
    wavelength: int
    amounts: tuple[int, ...]
    ordinal: int = 0
    cut_node: int | None = None
    side: str | None = None

    @property
    def identity(self) -> tuple:
        if self.kind == "segment":
            return (self.demand, "segment", self.side)
        return (self.demand, self.kind, self.ordinal)

    @property
    def endpoints(self) -> tuple[int, int]:
        """Nodes where this fragment enters and leaves the wavelength electronically."""
        if self.kind != "segment":
            return self.source, self.dest
        if self.side == "source":
            return self.source, self.cut_node
        return self.cut_node, self.dest

    def to_dict(self) -> dict:
        d = {
            "demand": self.demand,
            "source": self.source,
            "dest": self.dest,
            "kind": self.kind,
            "ordinal": self.ordinal,
            "wavelength": self.wavelength,
            "amounts": list(self.amounts),
        }
        if self.kind == "segment":
            d["cut_node"] = self.cut_node
            d["side"] = self.side
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Fragment":
        return cls(
            demand=int(d["demand"]),
            source=int(d["source"]),
            dest=int(d["dest"]),
            kind=str(d["kind"]),
            wavelength=int(d["wavelength"]),
            amounts=tuple(int(x) for x in d["amounts"]),
            ordinal=int(d.get("ordinal", 0)),
            cut_node=None if d.get("cut_node") is None else int(d["cut_node"]),
            side=d.get("side"),
        )


@dataclass
class WavelengthState:
    """Snapshot of one wavelength. ``link_load`` has shape ``(M, L)``."""

    id: int
    drop_nodes: frozenset[int]
    link_load: np.ndarray
    node_add: np.ndarray
    node_drop: np.ndarray

    @property
    def adms(self) -> int:
        return len(self.drop_nodes)


class RouteTable(NamedTuple):
    src: np.ndarray
    dst: np.ndarray
    rlen: np.ndarray
    rlinks: np.ndarray
    rnodes: np.ndarray


@lru_cache(maxsize=64)
def _route_table(topo: TreeTopology) -> RouteTable:
    n = topo.n
    idx = demand_index(n)
    N = len(idx)
    src = np.empty(N, np.int64)
    dst = np.empty(N, np.int64)
    rlen = np.empty(N, np.int64)
    rlinks = np.full((N, max(n - 1, 1)), -1, np.int64)
    rnodes = np.full((N, n), -1, np.int64)
    for k, (i, j) in enumerate(idx.pairs):
        path = topo.route(i, j)
        src[k], dst[k], rlen[k] = i, j, len(path)
        rlinks[k, : len(path)] = path.links
        rnodes[k, : len(path.nodes)] = path.nodes
    for arr in (src, dst, rlen, rlinks, rnodes):
        arr.setflags(write=False)
    return RouteTable(src, dst, rlen, rlinks, rnodes)


def route_table(topo: TreeTopology) -> RouteTable:
    """Per-demand routes as flat arrays, in demand-index order."""
    return _route_table(topo)


class Outcome(NamedTuple):
    """Result of a splitting attempt; falsy when refused."""

    fragments: tuple[Fragment, ...]
    reason: str | None = None

    def __bool__(self) -> bool:
        return bool(self.fragments)


class GroomingState:
    """Mutable grooming state for one instance on one topology.

    Wavelength ids are 1-based; ``add_wavelength`` opens the next one.
    """

    def __init__(self, instance: TrafficInstance, topology: TreeTopology,
                 max_parts: int = DEFAULT_MAX_PARTS):
        if instance.n != topology.n:
            raise ValueError(f"instance has n={instance.n}, topology has n={topology.n}")
        self.instance = instance
        self.topology = topology
        self.max_parts = int(max_parts)
        self.g = int(instance.g)
        self.routes = route_table(topology)
        demands = instance.demand_matrix()
        N, M = demands.shape
        n, L = topology.n, topology.n_links
        self.rem = demands.astype(np.int64).copy()
        self.nparts = np.zeros(N, np.int64)
        self.load = np.zeros((0, M, L), np.int64)
        self.nadd = np.zeros((0, M, n), np.int64)
        self.ndrop = np.zeros((0, M, n), np.int64)
        self.drops = np.zeros((0, n), np.bool_)
        F = N * (self.max_parts + 2) + 1
        self.frag = np.zeros((F, 7), np.int64)
        self.famt = np.zeros((F, M), np.int64)
        self.meta = np.zeros(1, np.int64)

    # -- wavelengths -------------------------------------------------------

    @property
    def n_wavelengths(self) -> int:
        return self.drops.shape[0]

    def add_wavelength(self) -> int:
        M, L = self.load.shape[1:]
        n = self.drops.shape[1]
        self.load = np.concatenate([self.load, np.zeros((1, M, L), np.int64)])
        self.nadd = np.concatenate([self.nadd, np.zeros((1, M, n), np.int64)])
        self.ndrop = np.concatenate([self.ndrop, np.zeros((1, M, n), np.int64)])
        self.drops = np.concatenate([self.drops, np.zeros((1, n), np.bool_)])
        return self.n_wavelengths

    def wavelength(self, w: int) -> WavelengthState:
        x = self._w(w)
        return WavelengthState(
            id=w,
            drop_nodes=frozenset(int(v) for v in np.flatnonzero(self.drops[x])),
            link_load=self.load[x].copy(),
            node_add=self.nadd[x].copy(),
            node_drop=self.ndrop[x].copy(),
        )

    @property
    def wavelengths(self) -> list[WavelengthState]:
        return [self.wavelength(w) for w in range(1, self.n_wavelengths + 1)]

    def _w(self, w: int) -> int:
        if not 1 <= w <= self.n_wavelengths:
            raise IndexError(f"wavelength {w} does not exist (have {self.n_wavelengths})")
        return w - 1

    def _k(self, demand) -> int:
        if isinstance(demand, tuple):
            return demand_index(self.topology.n).index(*demand)
        return int(demand)

    # -- demands -------------------------------------------------------------

    def remaining(self, demand) -> tuple[int, ...]:
        return tuple(int(x) for x in self.rem[self._k(demand)])

    def is_open(self, demand) -> bool:
        return bool(self.rem[self._k(demand)].any())

    def open_demands(self) -> list[int]:
        return [int(k) for k in np.flatnonzero(self.rem.any(axis=1))]

    # -- primitives ----------------------------------------------------------

    def adm_delta(self, w: int, i: int, j: int) -> int:
        if i == j:
            raise ValueError("demand endpoints must differ")
        return int(K.adm_delta(self.drops, self._w(w), i, j))

    def fits_whole(self, w: int, demand) -> bool:
        r = self.routes
        return bool(K.fits_whole(self.load, self.nadd, self.ndrop, self.g, self._w(w), self._k(demand),
                                 self.rem, r.src, r.dst, r.rlen, r.rlinks))

    def place_whole(self, w: int, demand) -> Fragment:
        k = self._k(demand)
        if not self.is_open(k):
            raise RuntimeError(f"demand {k} has nothing left to place")
        if not self.fits_whole(w, k):
            raise RuntimeError(f"demand {k} does not fit whole on wavelength {w}")
        r = self.routes
        start = int(self.meta[0])
        K.place_whole(self.load, self.nadd, self.ndrop, self.drops, self.rem, self.nparts,
                      self.frag, self.famt, self.meta, self._w(w), k, r.src, r.dst, r.rlen, r.rlinks)
        return self._fragment(start)

    def try_divide(self, w: int, demand) -> Outcome:
        k = self._k(demand)
        if not self.is_open(k):
            return Outcome((), "demand is closed")
        r = self.routes
        start = int(self.meta[0])
        code = K.try_divide(self.load, self.nadd, self.ndrop, self.drops, self.rem, self.nparts,
                            self.frag, self.famt, self.meta, self.g, self._w(w), k, self.max_parts,
                            r.src, r.dst, r.rlen, r.rlinks)
        if code != K.PLACED:
            return Outcome((), REFUSALS[code])
        return Outcome((self._fragment(start),))

    def try_cut(self, w: int, demand) -> Outcome:
        """Cut demand into two segments on ``w`` and an earlier wavelength, if allowed."""
        k = self._k(demand)
        if not self.is_open(k):
            return Outcome((), "demand is closed")
        r = self.routes
        start = int(self.meta[0])
        code = K.try_cut(self.load, self.nadd, self.ndrop, self.drops, self.rem, self.frag,
                         self.famt, self.meta, self.g, self._w(w), k,
                         r.src, r.dst, r.rlen, r.rlinks, r.rnodes)
        if code != K.PLACED:
            return Outcome((), REFUSALS[code])
        return Outcome((self._fragment(start), self._fragment(start + 1)))

    def tally(self) -> tuple[int, int]:
        """(total ADMs, non-empty wavelengths)."""
        return int(self.drops.sum()), int(self.drops.any(axis=1).sum())

    # -- fragments -------------------------------------------------------------

    def _fragment(self, f: int) -> Fragment:
        return fragment_from_row(self.frag[f], self.famt[f], self.routes)

    @property
    def fragments(self) -> list[Fragment]:
        return [self._fragment(f) for f in range(int(self.meta[0]))]


def fragment_from_row(row, amounts, routes: RouteTable) -> Fragment:
    k, kind, ordinal, w, cut = (int(x) for x in row[:5])
    side = None
    if kind == K.SEG_SRC:
        side = "source"
    elif kind == K.SEG_DST:
        side = "destination"
    return Fragment(
        demand=k,
        source=int(routes.src[k]),
        dest=int(routes.dst[k]),
        kind=KIND_NAMES[kind],
        wavelength=w + 1,
        amounts=tuple(int(x) for x in amounts),
        ordinal=ordinal,
        cut_node=None if cut < 0 else cut,
        side=side,
    )
