"""Independent solution checking and brute-force ground truth for tiny instances.

The validator rebuilds everything from the fragment list alone and routes
with breadth-first search over the undirected tree, deliberately not using
the ancestor walk in ``topology.route``.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict, deque
from dataclasses import dataclass, field

import numpy as np

from .bounds import bounds_report
from .decoder import FitnessFunction, GroomingSolution, SplitMode, decode
from .topology import TreeTopology
from .traffic import TrafficInstance, demand_index

__all__ = ["Check", "ValidationReport", "validate", "OracleResult", "exhaustive_oracle", "bfs_path",
           "ORACLE_MAX_PERMS"]

ORACLE_MAX_PERMS = math.factorial(8)

CHECKS = (
    "capacity",
    "node_capacity",
    "load_consistency",
    "conservation",
    "strict_nonblocking",
    "fragment_shape",
    "drop_nodes",
    "adm_recount",
    "bound_sandwich",
)


@dataclass
class Check:
    name: str
    passed: bool = True
    detail: str = ""

    def fail(self, detail: str) -> None:
        # keep the first counterexample only
        if self.passed:
            self.passed = False
            self.detail = detail


@dataclass
class ValidationReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __bool__(self) -> bool:
        return self.passed

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {"passed": self.passed,
                "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in self.checks]}

    def __str__(self) -> str:
        lines = [f"{'PASS' if c.passed else 'FAIL'}  {c.name}" + (f"  ({c.detail})" if c.detail else "")
                 for c in self.checks]
        lines.append("overall: " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines)


def _adjacency(topology: TreeTopology) -> list[list[int]]:
    adj: list[list[int]] = [[] for _ in range(topology.n)]
    for c in range(1, topology.n):
        p = topology.parent[c]
        adj[p].append(c)
        adj[c].append(p)
    return adj


def bfs_path(adj: list[list[int]], i: int, j: int) -> list[int]:
    prev = {i: None}
    queue = deque([i])
    while queue:
        u = queue.popleft()
        if u == j:
            break
        for v in adj[u]:
            if v not in prev:
                prev[v] = u
                queue.append(v)
    if j not in prev:
        raise ValueError(f"nodes {i} and {j} are not connected")
    path = [j]
    while path[-1] != i:
        path.append(prev[path[-1]])
    return path[::-1]


def validate(solution: GroomingSolution, instance: TrafficInstance, topology: TreeTopology,
             check_bounds: bool = True) -> ValidationReport:
    """Check a solution against every grooming constraint; never raises on bad solutions."""
    checks = {name: Check(name) for name in CHECKS}
    g, M, n = instance.g, instance.M, instance.n
    adj = _adjacency(topology)
    idx = demand_index(n)
    demands = instance.demand_matrix()
    paths: dict[tuple[int, int], list[int]] = {}

    def path(a, b):
        if (a, b) not in paths:
            paths[(a, b)] = bfs_path(adj, a, b)
        return paths[(a, b)]

    loads: dict[int, dict] = defaultdict(lambda: defaultdict(lambda: np.zeros(M, np.int64)))
    adds: dict[int, dict] = defaultdict(lambda: defaultdict(lambda: np.zeros(M, np.int64)))
    drops: dict[int, dict] = defaultdict(lambda: defaultdict(lambda: np.zeros(M, np.int64)))
    endpoints: dict[int, set] = defaultdict(set)
    by_demand: dict[int, list] = defaultdict(list)
    where: dict[tuple, set] = defaultdict(set)
    seen_identity: dict[tuple, int] = defaultdict(int)

    shape = checks["fragment_shape"]
    for frag in solution.fragments:
        amounts = np.asarray(frag.amounts, dtype=np.int64)
        if amounts.shape != (M,) or (amounts < 0).any():
            shape.fail(f"demand {frag.demand}: amounts {list(frag.amounts)} invalid for M={M}")
            continue
        if not 0 <= frag.demand < len(idx) or idx.pair(frag.demand) != (frag.source, frag.dest):
            shape.fail(f"fragment demand {frag.demand} does not match pair ({frag.source}, {frag.dest})")
            continue
        if frag.kind not in ("whole", "part", "segment"):
            shape.fail(f"demand {frag.demand}: unknown fragment kind {frag.kind!r}")
            continue
        full = path(frag.source, frag.dest)
        if frag.kind == "segment":
            if frag.side not in ("source", "destination") or frag.cut_node not in full[1:-1]:
                shape.fail(f"demand {frag.demand}: segment cut at {frag.cut_node}, "
                           f"not an interior node of route {full}")
                continue
        a, b = frag.endpoints
        w = frag.wavelength
        nodes = path(a, b)
        for u, v in zip(nodes, nodes[1:]):
            loads[w][(u, v)] += amounts
        adds[w][a] += amounts
        drops[w][b] += amounts
        endpoints[w].update((a, b))
        by_demand[frag.demand].append(frag)
        where[frag.identity].add(w)
        seen_identity[(frag.identity, w)] += 1

    # capacity: recomputed and reported link loads
    cap = checks["capacity"]
    for w in sorted(loads):
        for (u, v), amt in sorted(loads[w].items()):
            over = np.flatnonzero(amt > g)
            if over.size:
                cap.fail(f"wavelength {w}, pattern {int(over[0])}, link {u}->{v}: load "
                         f"{int(amt[over[0]])} > g={g}")
    reported_links = solution.links or topology.directed_links
    consistency = checks["load_consistency"]
    for wl in solution.wavelengths:
        table = np.asarray(wl.link_load)
        if table.shape != (M, len(reported_links)):
            consistency.fail(f"wavelength {wl.id}: link load table has shape {table.shape}")
            continue
        for m, l in np.argwhere(table > g):
            u, v = reported_links[l]
            cap.fail(f"wavelength {wl.id}, pattern {int(m)}, link {u}->{v}: reported load "
                     f"{int(table[m, l])} > g={g}")
        for l, (u, v) in enumerate(reported_links):
            expect = loads[wl.id][(u, v)] if (u, v) in loads.get(wl.id, {}) else np.zeros(M, np.int64)
            diff = np.flatnonzero(table[:, l] != expect)
            if diff.size:
                m = int(diff[0])
                consistency.fail(f"wavelength {wl.id}, pattern {m}, link {u}->{v}: reported "
                                 f"{int(table[m, l])}, fragments give {int(expect[m])}")

    node_cap = checks["node_capacity"]
    for label, table in (("adds", adds), ("drops", drops)):
        for w in sorted(table):
            for v, amt in sorted(table[w].items()):
                over = np.flatnonzero(amt > g)
                if over.size:
                    node_cap.fail(f"wavelength {w}, pattern {int(over[0])}: node {v} {label} "
                                  f"{int(amt[over[0]])} > g={g}")

    # per-demand shape and conservation
    cons = checks["conservation"]
    for k in range(len(idx)):
        frags = by_demand.get(k, [])
        kinds = [f.kind for f in frags]
        segs = [f for f in frags if f.kind == "segment"]
        parts = [f for f in frags if f.kind == "part"]
        if kinds.count("whole") > 1 or ("whole" in kinds and len(frags) > 1):
            shape.fail(f"demand {k}: a whole fragment must be the only fragment")
        if len(parts) > solution.max_parts:
            shape.fail(f"demand {k}: {len(parts)} parts exceed max_parts={solution.max_parts}")
        if segs:
            sides = sorted(f.side for f in segs)
            cuts = {f.cut_node for f in segs}
            if sides != ["destination", "source"] or len(cuts) != 1:
                shape.fail(f"demand {k}: {len(segs)} segments with sides {sides}, cut nodes {sorted(cuts)}; "
                           "a cut yields exactly one source-side and one destination-side segment")
            elif segs[0].amounts != segs[1].amounts:
                cons.fail(f"demand {k}: the two segments carry different amounts")
        delivered = np.zeros(M, np.int64)
        for f in frags:
            if f.kind != "segment":
                delivered += np.asarray(f.amounts)
        if segs:
            delivered += np.asarray(segs[0].amounts)
        diff = np.flatnonzero(delivered != demands[k])
        if diff.size:
            m = int(diff[0])
            i, j = idx.pair(k)
            cons.fail(f"demand ({i}, {j}) pattern {m}: delivered {int(delivered[m])}, "
                      f"requested {int(demands[k, m])}")

    nonblocking = checks["strict_nonblocking"]
    for identity, wls in sorted(where.items(), key=lambda kv: str(kv[0])):
        if len(wls) > 1:
            nonblocking.fail(f"fragment {identity} placed on wavelengths {sorted(wls)}")
    for (identity, w), count in sorted(seen_identity.items(), key=lambda kv: str(kv[0])):
        if count > 1:
            shape.fail(f"fragment {identity} appears {count} times on wavelength {w}")

    dn = checks["drop_nodes"]
    reported = {wl.id: set(wl.drop_nodes) for wl in solution.wavelengths}
    for w in sorted(set(reported) | set(endpoints)):
        have, need = reported.get(w, set()), endpoints.get(w, set())
        if have != need:
            dn.fail(f"wavelength {w}: drop nodes {sorted(have)}, fragments terminate at {sorted(need)}")

    adms = sum(len(s) for s in endpoints.values())
    n_wl = sum(1 for s in endpoints.values() if s)
    rc = checks["adm_recount"]
    claimed = solution.reported_tally or (solution.adms, solution.n_wavelengths)
    if (adms, n_wl) != tuple(claimed):
        rc.fail(f"recount gives {adms} ADMs / {n_wl} wavelengths, solution claims {tuple(claimed)}")
    elif (adms, n_wl) != (solution.adms, solution.n_wavelengths):
        rc.fail(f"recount gives {adms} ADMs / {n_wl} wavelengths, tables give "
                f"{(solution.adms, solution.n_wavelengths)}")

    sandwich = checks["bound_sandwich"]
    if check_bounds:
        b = bounds_report(instance, topology)
        if n_wl < b.w_min:
            sandwich.fail(f"{n_wl} wavelengths below W_min={b.w_min}")
        if adms < b.m_min:
            sandwich.fail(f"{adms} ADMs below M_min={b.m_min}")
    return ValidationReport(list(checks.values()))


@dataclass(frozen=True)
class OracleResult:
    fitness: tuple[int, int]
    witness: tuple[int, ...]
    permutations: int


def exhaustive_oracle(instance: TrafficInstance, topology: TreeTopology, mode=SplitMode.NONE,
                      max_parts: int = 4, max_perms: int = ORACLE_MAX_PERMS,
                      validate_all: bool = True) -> OracleResult:
    """Decode every permutation and return the best fitness with its first witness.

    Only the decoder's reachable set is searched, not all feasible groomings.
    """
    N = instance.N
    total = math.factorial(N)
    if total > max_perms:
        raise ValueError(f"N={N} demands give {total} permutations; the oracle is limited to {max_perms}")
    fitness = FitnessFunction(instance, topology, mode, max_parts)
    best, witness = None, None
    for perm in itertools.permutations(range(N)):
        order = np.array(perm, dtype=np.int64)
        fit = fitness(order)
        if validate_all:
            sol = decode(order, instance, topology, mode, max_parts)
            report = validate(sol, instance, topology)
            if not report or sol.fitness != fit:
                raise AssertionError(f"permutation {perm} decodes to an invalid solution:\n{report}")
        if best is None or fit < best:
            best, witness = fit, perm
    return OracleResult(best, tuple(witness), total)
