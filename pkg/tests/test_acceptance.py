"""Exit criteria. Each test records one PASS/FAIL line, printed in the terminal summary.

The default-sweep and paper-scale runs dominate the wall time (roughly an hour
on one core).
"""

import dataclasses
import time

import numpy as np
import pytest

from treegroom.bounds import bounds_report, m_max, w_max
from treegroom.decoder import SplitMode, decode
from treegroom.evolution import GaParams, evolve
from treegroom.experiment import CellGroup, ExperimentConfig, run_sweep, summarize
from treegroom.topology import complete_binary, star
from treegroom.traffic import TrafficInstance, generate_instance
from treegroom.verify import exhaustive_oracle, validate

from conftest import ACCEPTANCE_LINES

pytestmark = pytest.mark.acceptance

MODES = [m.value for m in SplitMode]


def verdict(number, title, ok, detail=""):
    line = f"criterion {number} {'PASS' if ok else 'FAIL'}  {title}" + (f": {detail}" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="session")
def default_sweep(tmp_path_factory):
    out = tmp_path_factory.mktemp("default_sweep")
    t0 = time.perf_counter()
    rows, summary = run_sweep(ExperimentConfig(), out)
    print(f"default sweep: {len(rows)} runs in {time.perf_counter() - t0:.0f}s")
    return rows, summary


def test_1_feasibility_suite():
    rng = np.random.default_rng(20240601)
    failures, triples = [], 1200
    for t in range(triples):
        n = int(rng.integers(3, 16))
        topo = star(n) if rng.random() < 0.5 else complete_binary(n)
        M = int(rng.choice([1, 2, 4, 8]))
        g = int(rng.choice([16, 24, 48, 96]))
        mode = MODES[int(rng.integers(len(MODES)))]
        inst = generate_instance(n, M, g, seed=int(rng.integers(2**31)))
        sol = decode(rng.permutation(inst.N), inst, topo, mode)
        report = validate(sol, inst, topo)
        if not report:
            failures.append((t, topo.kind, n, M, g, mode, [c.name for c in report.failures]))
    verdict(1, "feasibility suite", not failures, f"{triples - len(failures)}/{triples} triples valid"
            + (f", first failure {failures[0]}" if failures else ""))


def test_2_bound_sandwich(default_sweep):
    rows, _ = default_sweep
    bad = []
    for r in rows:
        w_ok = r.W_min <= r.wavelengths and (r.W_max is None or r.wavelengths <= r.W_max)
        m_ok = r.M_min <= r.adms <= r.M_max
        if not (w_ok and m_ok):
            bad.append(r)
    detail = f"{len(rows) - len(bad)}/{len(rows)} runs inside bounds"
    if bad:
        by_kind = {}
        for r in bad:
            key = (r.topology, r.mode)
            by_kind[key] = by_kind.get(key, 0) + 1
        worst = max(bad, key=lambda r: r.adms - r.M_max)
        detail += (f"; violations by (topology, mode) {by_kind}; worst {worst.topology} n={worst.n} "
                   f"M={worst.M} g={worst.g} {worst.mode}: ADMs {worst.adms} > M_max {worst.M_max} "
                   f"(W={worst.wavelengths}, W_min={worst.W_min})")
    verdict(2, "bound sandwich", not bad, detail)


def test_3_oracle_equivalence_micro():
    topo = star(3)
    params = dict(mu=20, lambda_offspring=20, generations=30)
    hits = {m: 0 for m in MODES}
    for i in range(20):
        inst = generate_instance(3, 1, 16, seed=i)
        for mode in MODES:
            best = exhaustive_oracle(inst, topo, mode).fitness
            res = evolve(inst, topo, GaParams(seed=i, mode=mode, **params))
            hits[mode] += tuple(res.best_fitness) == best
    pats = np.full((1, 3, 3), 10)
    np.fill_diagonal(pats[0], 0)
    tens = TrafficInstance(3, 1, 16, pats)
    tens_fit = {m: tuple(evolve(tens, topo, GaParams(seed=0, mode=m, **params)).best_fitness) for m in MODES}
    ok = all(h >= 19 for h in hits.values()) and all(f == (6, 2) for f in tens_fit.values())
    verdict(3, "oracle equivalence at micro scale", ok, f"matches per mode {hits}; all-10s {tens_fit}")


def test_4_granularity_trend(default_sweep):
    _, summary = default_sweep
    best = {(s["mode"], s["g"]): s for s in summary
            if s["topology"] == "complete_binary" and s["n"] == 15 and s["M"] == 2}
    gs = [16, 24, 48, 96]
    flagged, broken, not_tight = [], [], []
    for mode in MODES:
        for a, b in zip(gs, gs[1:]):
            x, y = best[(mode, a)], best[(mode, b)]
            if y["wavelengths"] > x["wavelengths"] or y["adms"] > x["adms"] + 1:
                broken.append((mode, a, b))
            elif y["adms"] == x["adms"] + 1:
                flagged.append((mode, a, b))
        s96 = best[(mode, 96)]
        if s96["wavelengths"] != s96["W_min"]:
            not_tight.append((mode, s96["wavelengths"], s96["W_min"]))
    ok = not broken and len(flagged) <= 1 and not not_tight
    series = {m: [(best[(m, g)]["adms"], best[(m, g)]["wavelengths"]) for g in gs] for m in MODES}
    detail = f"best (ADMs, W) over g={gs}: {series}; W_min at g=96 {best[('none', 96)]['W_min']}"
    if flagged:
        detail += f"; flagged +1 ADM ties {flagged}"
    if broken or len(flagged) > 1:
        detail += f"; monotonicity violations {broken + flagged}"
    if not_tight:
        detail += f"; g=96 wavelengths above W_min {not_tight}"
    verdict(4, "granularity trend", ok, detail)


def test_5_splitting_benefit(tmp_path):
    cfg = ExperimentConfig(groups=(CellGroup("complete_binary", (15,), (2,), (24,)),),
                           modes=("none", "divide", "synthesized"), runs_per_cell=10,
                           write_history=False).with_paper_scale()
    t0 = time.perf_counter()
    _, summary = run_sweep(cfg, tmp_path)
    elapsed = time.perf_counter() - t0
    best = {s["mode"]: (s["adms"], s["wavelengths"]) for s in summary}
    base = best["none"]
    verdicts = {}
    for mode in ("divide", "synthesized"):
        a, w = best[mode]
        verdicts[mode] = a <= base[0] and w <= base[1] and a + w < sum(base)
    ok = all(verdicts.values()) and elapsed <= 2 * 3600
    verdict(5, "splitting benefit", ok, f"best-of-10 {best}, dominance {verdicts}, {elapsed:.0f}s")


def _move_in_one_pattern(sol, rng):
    cands = [f for f in sol.fragments if any(f.amounts)]
    frag = cands[int(rng.integers(len(cands)))]
    m = int(rng.choice(np.flatnonzero(frag.amounts)))
    others = [w.id for w in sol.wavelengths if w.id != frag.wavelength] or [frag.wavelength + 1]
    target = others[int(rng.integers(len(others)))]
    stay = tuple(0 if i == m else a for i, a in enumerate(frag.amounts))
    moved = tuple(a if i == m else 0 for i, a in enumerate(frag.amounts))
    frags = [f for f in sol.fragments if f is not frag]
    frags += [dataclasses.replace(frag, amounts=stay), dataclasses.replace(frag, wavelength=target, amounts=moved)]
    return dataclasses.replace(sol, fragments=frags)


def _exceed_parts(sol):
    k = sol.max_parts + 1
    frag = next((f for f in sol.fragments if f.kind in ("whole", "part") and min(f.amounts) >= k), None)
    if frag is None:
        return None
    amounts = np.array(frag.amounts)
    pieces = [np.ones_like(amounts) for _ in range(k - 1)]
    pieces.append(amounts - (k - 1))
    siblings = [f for f in sol.fragments if f.demand == frag.demand and f is not frag]
    start = max((f.ordinal for f in siblings if f.kind == "part"), default=-1) + 1
    new = [dataclasses.replace(frag, kind="part", ordinal=start + o, amounts=tuple(int(x) for x in p))
           for o, p in enumerate(pieces)]
    return dataclasses.replace(sol, fragments=[f for f in sol.fragments if f is not frag] + new)


def _cut_single_link(sol, topo):
    frag = next((f for f in sol.fragments if f.kind == "whole" and len(topo.route(f.source, f.dest)) == 1), None)
    if frag is None:
        return None
    at = frag.dest
    segs = [dataclasses.replace(frag, kind="segment", cut_node=at, side="source"),
            dataclasses.replace(frag, kind="segment", cut_node=at, side="destination")]
    return dataclasses.replace(sol, fragments=[f for f in sol.fragments if f is not frag] + segs)


def test_6_strict_nonblocking_stress():
    rng = np.random.default_rng(6)
    counts = {"moved": [0, 0], "parts": [0, 0], "cut": [0, 0]}
    for t in range(150):
        n = int(rng.integers(4, 12))
        topo = star(n) if t % 2 else complete_binary(n)
        M = int(rng.choice([2, 4, 8]))
        inst = generate_instance(n, M, int(rng.choice([16, 24, 48])), seed=t)
        sol = decode(rng.permutation(inst.N), inst, topo, MODES[t % 4])
        assert validate(sol, inst, topo)
        for key, mutant in (("moved", _move_in_one_pattern(sol, rng)), ("parts", _exceed_parts(sol)),
                            ("cut", _cut_single_link(sol, topo))):
            if mutant is None:
                continue
            counts[key][1] += 1
            counts[key][0] += not validate(mutant, inst, topo)
    ok = all(caught == total and total > 0 for caught, total in counts.values())
    verdict(6, "strict-nonblocking stress", ok,
            ", ".join(f"{k} rejected {c}/{t}" for k, (c, t) in counts.items()))


def test_7_determinism(tmp_path):
    cfg = ExperimentConfig(groups=(CellGroup("star", (5,), (2,), (16,)),
                                   CellGroup("complete_binary", (7,), (2,), (24,))),
                           runs_per_cell=3, base_seed=7)
    run_sweep(cfg, tmp_path / "first")
    run_sweep(cfg, tmp_path / "second")
    a = (tmp_path / "first" / "results.csv").read_bytes()
    b = (tmp_path / "second" / "results.csv").read_bytes()
    verdict(7, "determinism", a == b, f"results.csv {len(a)} bytes, identical={a == b}")


def test_8_bound_spot_values():
    got = {"tree n=15 W_max": w_max(complete_binary(15)), "tree n=14 W_max": w_max(complete_binary(14)),
           "star n=15 W_max": w_max(star(15)), "tree n=15 M_max": m_max(complete_binary(15), 0)}
    want = {"tree n=15 W_max": 56, "tree n=14 W_max": 49, "star n=15 W_max": 14, "tree n=15 M_max": 210}
    verdict(8, "bound spot values", got == want, str(got))
