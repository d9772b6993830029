"""Chromosome decoding: first-fit grooming with reuse, zero-ADM fill and splitting."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels as K
from .grooming import DEFAULT_MAX_PARTS, Fragment, WavelengthState, fragment_from_row, route_table
from .topology import TreeTopology
from .traffic import TrafficInstance

__all__ = [
    "SplitMode",
    "GroomingSolution",
    "decode",
    "decode_fitness",
    "check_chromosome",
    "load_solution",
    "save_solution",
]


class SplitMode(enum.Enum):
    NONE = "none"
    CUT = "cut"
    DIVIDE = "divide"
    SYNTHESIZED = "synthesized"

    @property
    def flags(self) -> int:
        return {
            SplitMode.NONE: 0,
            SplitMode.CUT: K.MODE_CUT,
            SplitMode.DIVIDE: K.MODE_DIVIDE,
            SplitMode.SYNTHESIZED: K.MODE_DIVIDE | K.MODE_CUT,
        }[self]

    @classmethod
    def parse(cls, value) -> "SplitMode":
        if isinstance(value, cls):
            return value
        aliases = {"cutonly": "cut", "divideonly": "divide", "synth": "synthesized", "no": "none"}
        key = str(value).lower().replace("-", "").replace("_", "")
        return cls(aliases.get(key, key))


@dataclass
class GroomingSolution:
    """Decoded phenotype: wavelengths, fragments and the ADM/wavelength tally."""

    n: int
    g: int
    M: int
    mode: SplitMode
    max_parts: int
    chromosome: tuple[int, ...]
    wavelengths: list[WavelengthState]
    fragments: list[Fragment]
    links: tuple[tuple[int, int], ...] = field(default=())
    # tally read from a solution file, checked against the recount by the validator
    reported_tally: tuple[int, int] | None = None

    @property
    def adms(self) -> int:
        return sum(w.adms for w in self.wavelengths)

    @property
    def n_wavelengths(self) -> int:
        return sum(1 for w in self.wavelengths if w.drop_nodes)

    @property
    def fitness(self) -> tuple[int, int]:
        return self.adms, self.n_wavelengths

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "g": self.g,
            "M": self.M,
            "mode": self.mode.value,
            "max_parts": self.max_parts,
            "chromosome": list(self.chromosome),
            "tally": {"adms": self.adms, "wavelengths": self.n_wavelengths},
            "links": [list(p) for p in self.links],
            "wavelengths": [
                {
                    "id": w.id,
                    "drop_nodes": sorted(w.drop_nodes),
                    "link_loads": w.link_load.tolist(),
                }
                for w in self.wavelengths
            ],
            "fragments": [f.to_dict() for f in self.fragments],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GroomingSolution":
        n, M = int(d["n"]), int(d["M"])
        wls = []
        for w in d["wavelengths"]:
            load = np.asarray(w["link_loads"], dtype=np.int64).reshape(M, -1)
            wls.append(WavelengthState(
                id=int(w["id"]),
                drop_nodes=frozenset(int(v) for v in w["drop_nodes"]),
                link_load=load,
                node_add=np.zeros((M, n), np.int64),
                node_drop=np.zeros((M, n), np.int64),
            ))
        return cls(
            n=n,
            g=int(d["g"]),
            M=M,
            mode=SplitMode.parse(d["mode"]),
            max_parts=int(d.get("max_parts", DEFAULT_MAX_PARTS)),
            chromosome=tuple(int(x) for x in d.get("chromosome", ())),
            wavelengths=wls,
            fragments=[Fragment.from_dict(f) for f in d["fragments"]],
            links=tuple(tuple(p) for p in d.get("links", ())),
            reported_tally=(int(d["tally"]["adms"]), int(d["tally"]["wavelengths"])) if "tally" in d else None,
        )


def check_chromosome(chromosome, N: int) -> np.ndarray:
    order = np.asarray(chromosome, dtype=np.int64)
    if order.ndim != 1 or order.size != N or not np.array_equal(np.sort(order), np.arange(N)):
        raise ValueError(f"chromosome is not a permutation of 0..{N - 1}")
    return order


def _kernel_args(instance, topology, mode, max_parts):
    if instance.n != topology.n:
        raise ValueError(f"instance has n={instance.n}, topology has n={topology.n}")
    r = route_table(topology)
    return (instance.demand_matrix(), int(instance.g), SplitMode.parse(mode).flags, int(max_parts),
            int(topology.n), r.src, r.dst, r.rlen, r.rlinks, r.rnodes)


def decode(chromosome, instance: TrafficInstance, topology: TreeTopology,
           mode=SplitMode.NONE, max_parts: int = DEFAULT_MAX_PARTS) -> GroomingSolution:
    """Decode a permutation of demand indices into a full grooming solution.

    Demands that are zero in every pattern are skipped. The result is a pure
    function of the arguments.
    """
    mode = SplitMode.parse(mode)
    order = check_chromosome(chromosome, instance.N)
    args = _kernel_args(instance, topology, mode, max_parts)
    frag, famt, drops, load, nadd, ndrop = K.decode_kernel(order, *args)
    routes = route_table(topology)
    wavelengths = [
        WavelengthState(
            id=w + 1,
            drop_nodes=frozenset(int(v) for v in np.flatnonzero(drops[w])),
            link_load=load[w].copy(),
            node_add=nadd[w].copy(),
            node_drop=ndrop[w].copy(),
        )
        for w in range(drops.shape[0])
    ]
    fragments = [fragment_from_row(frag[f], famt[f], routes) for f in range(frag.shape[0])]
    return GroomingSolution(
        n=instance.n, g=instance.g, M=instance.M, mode=mode, max_parts=int(max_parts),
        chromosome=tuple(int(x) for x in order), wavelengths=wavelengths, fragments=fragments,
        links=topology.directed_links,
    )


class FitnessFunction:
    """Callable ``chromosome -> (adms, wavelengths)`` bound to one problem.

    Skips the permutation check and solution assembly; the GA calls this in
    its inner loop.
    """

    def __init__(self, instance, topology, mode=SplitMode.NONE, max_parts=DEFAULT_MAX_PARTS):
        self._args = _kernel_args(instance, topology, mode, max_parts)

    def __call__(self, order: np.ndarray) -> tuple[int, int]:
        adms, wls = K.fitness_kernel(order, *self._args)
        return int(adms), int(wls)


def decode_fitness(chromosome, instance, topology, mode=SplitMode.NONE,
                   max_parts=DEFAULT_MAX_PARTS) -> tuple[int, int]:
    order = check_chromosome(chromosome, instance.N)
    return FitnessFunction(instance, topology, mode, max_parts)(order)


def save_solution(solution: GroomingSolution, path) -> None:
    Path(path).write_text(json.dumps(solution.to_dict()) + "\n")


def load_solution(path) -> GroomingSolution:
    with open(path) as fh:
        return GroomingSolution.from_dict(json.load(fh))
