"""Dynamic traffic instances: ``M`` demand matrices over ``n`` nodes.

Demand ``k`` is the ordered pair ``(i, j)``, ``i != j``, indexed row-major
with the diagonal skipped: ``k = i*(n-1) + (j if j < i else j-1)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

__all__ = [
    "TrafficError",
    "TrafficInstance",
    "DemandIndex",
    "demand_index",
    "generate_instance",
    "load_instance",
    "save_instance",
]


class TrafficError(ValueError):
    pass


@dataclass(frozen=True)
class DemandIndex:
    n: int
    pairs: tuple[tuple[int, int], ...]

    def __len__(self) -> int:
        return len(self.pairs)

    def pair(self, k: int) -> tuple[int, int]:
        return self.pairs[k]

    def index(self, i: int, j: int) -> int:
        if i == j or not (0 <= i < self.n and 0 <= j < self.n):
            raise TrafficError(f"no demand index for pair ({i}, {j}) with n={self.n}")
        return i * (self.n - 1) + (j if j < i else j - 1)


@lru_cache(maxsize=None)
def demand_index(n: int) -> DemandIndex:
    if n < 2:
        raise TrafficError(f"need at least 2 nodes, got n={n}")
    pairs = tuple((i, j) for i in range(n) for j in range(n) if i != j)
    return DemandIndex(n, pairs)


@dataclass(frozen=True, eq=False)
class TrafficInstance:
    """``patterns`` has shape ``(M, n, n)``; entry ``[m, i, j]`` is r_ij in pattern m."""

    n: int
    M: int
    g: int
    patterns: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        pats = np.array(self.patterns, dtype=np.int64)
        pats.setflags(write=False)
        object.__setattr__(self, "patterns", pats)
        _check_instance(self.n, self.M, self.g, pats)

    @property
    def N(self) -> int:
        return self.n * (self.n - 1)

    @property
    def index(self) -> DemandIndex:
        return demand_index(self.n)

    def demand_matrix(self) -> np.ndarray:
        """Per-demand amounts, shape ``(N, M)``, rows in demand-index order."""
        rows, cols = np.nonzero(~np.eye(self.n, dtype=bool))
        return np.ascontiguousarray(self.patterns[:, rows, cols].T)

    def open_demands(self) -> np.ndarray:
        """Indices of demands nonzero in at least one pattern; all-zero ones need nothing."""
        return np.flatnonzero(self.demand_matrix().any(axis=1))

    def __eq__(self, other):
        if not isinstance(other, TrafficInstance):
            return NotImplemented
        return (self.n, self.M, self.g) == (other.n, other.M, other.g) and np.array_equal(
            self.patterns, other.patterns
        )

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "M": self.M,
            "g": self.g,
            "patterns": self.patterns.tolist(),
            "seed": self.provenance,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrafficInstance":
        try:
            n, M, g = int(d["n"]), int(d["M"]), int(d["g"])
            pats = np.asarray(d["patterns"])
        except (KeyError, TypeError, ValueError) as exc:
            raise TrafficError(f"malformed instance: {exc}") from None
        if pats.dtype.kind not in "iu":
            raise TrafficError("demand entries must be integers")
        return cls(n, M, g, pats, dict(d.get("seed") or {}))


def _check_instance(n: int, M: int, g: int, pats: np.ndarray) -> None:
    if n < 2 or M < 1 or g < 1:
        raise TrafficError(f"invalid sizes n={n}, M={M}, g={g}")
    if pats.shape != (M, n, n):
        raise TrafficError(f"patterns have shape {pats.shape}, expected {(M, n, n)}")
    for m in range(M):
        diag = np.flatnonzero(np.diagonal(pats[m]))
        if diag.size:
            i = int(diag[0])
            raise TrafficError(f"pattern {m}: nonzero diagonal entry at ({i}, {i})")
        bad = np.argwhere((pats[m] < 0) | (pats[m] > g))
        if bad.size:
            i, j = map(int, bad[0])
            raise TrafficError(
                f"pattern {m}: demand ({i}, {j}) = {int(pats[m, i, j])} outside [0, g={g}]"
            )


def _random_matrix(rng: np.random.Generator, n: int, lo: int, hi: int) -> np.ndarray:
    mat = rng.integers(lo, hi, size=(n, n), endpoint=True)
    np.fill_diagonal(mat, 0)
    return mat


def generate_instance(n: int, M: int, g: int, demand_range=(0, 15), seed: int = 0) -> TrafficInstance:
    """Random instance with two extreme patterns and interpolated ones between them.

    The extremes depend only on ``(n, seed)``, so instances that differ only
    in ``M`` or ``g`` share them. Intermediate entries are drawn uniformly
    from ``[min, max]`` of the two extremes.
    """
    lo, hi = map(int, demand_range)
    if M < 1:
        raise TrafficError(f"need at least one pattern, got M={M}")
    if lo < 0 or lo > hi:
        raise TrafficError(f"bad demand range {demand_range}")
    if hi > g:
        raise TrafficError(f"demand range upper bound {hi} exceeds granularity g={g}")

    ext = np.random.default_rng([seed, n])
    first = _random_matrix(ext, n, lo, hi)
    last = _random_matrix(ext, n, lo, hi)
    if M == 1:
        pats = first[None]
    else:
        low, high = np.minimum(first, last), np.maximum(first, last)
        mid = np.random.default_rng([seed, n, M])
        inner = [mid.integers(low, high, endpoint=True) for _ in range(M - 2)]
        pats = np.stack([first, *inner, last])
    prov = {"seed": int(seed), "demand_range": [lo, hi], "generator": "extremes+interpolation"}
    return TrafficInstance(n, M, g, pats, prov)


def load_instance(path) -> TrafficInstance:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise TrafficError(f"{path}: not valid JSON ({exc})") from None
    return TrafficInstance.from_dict(data)


def save_instance(instance: TrafficInstance, path) -> None:
    Path(path).write_text(json.dumps(instance.to_dict()) + "\n")
