"""Experiment sweeps: grids of (topology, n, M, g, mode), repeated GA runs, CSV output."""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bounds import bounds_report
from .decoder import SplitMode, save_solution
from .evolution import GaParams, evolve
from .grooming import DEFAULT_MAX_PARTS
from .topology import build_topology
from .traffic import generate_instance
from .verify import validate

__all__ = [
    "ConfigError",
    "SweepValidationError",
    "CellGroup",
    "ExperimentConfig",
    "ResultRow",
    "run_sweep",
    "run_seed",
    "summarize",
    "plot_series",
    "emit_plot_data",
    "read_rows",
    "SEED_ENV",
]

log = logging.getLogger(__name__)

SEED_ENV = "TREEGROOM_SEED"
MODES = tuple(m.value for m in SplitMode)
_KIND_CODE = {"complete_binary": 1, "star": 2, "parent_vector": 3}


class ConfigError(ValueError):
    pass


class SweepValidationError(RuntimeError):
    pass


@dataclass(frozen=True)
class CellGroup:
    topology: str
    n: tuple[int, ...]
    M: tuple[int, ...]
    g: tuple[int, ...]

    def cells(self):
        for n in self.n:
            for M in self.M:
                for g in self.g:
                    yield self.topology, n, M, g


def default_groups() -> tuple[CellGroup, ...]:
    """Default grids: trees vs n at g=16/24, trees vs g at n=15, stars vs n."""
    return (
        CellGroup("complete_binary", (7, 9, 11, 13, 15), (2, 8), (16, 24)),
        CellGroup("complete_binary", (15,), (2,), (16, 24, 48, 96)),
        CellGroup("star", tuple(range(5, 16)), (2,), (16, 24)),
        CellGroup("star", tuple(range(5, 16)), (4,), (24,)),
    )


@dataclass(frozen=True)
class ExperimentConfig:
    groups: tuple[CellGroup, ...] = field(default_factory=default_groups)
    modes: tuple[str, ...] = MODES
    runs_per_cell: int = 10
    base_seed: int = 2024
    demand_range: tuple[int, int] = (0, 15)
    mu: int = 50
    lambda_offspring: int = 50
    pc: float = 0.6
    pm: float = 0.4
    generations: int = 100
    max_parts: int = DEFAULT_MAX_PARTS
    write_history: bool = True
    write_solutions: bool = True

    def __post_init__(self):
        if self.runs_per_cell < 1:
            raise ConfigError("runs_per_cell must be at least 1")
        for m in self.modes:
            try:
                SplitMode.parse(m)
            except ValueError:
                raise ConfigError(f"unknown mode {m!r}") from None
        for grp in self.groups:
            if grp.topology not in ("complete_binary", "star"):
                raise ConfigError(f"sweeps support star and complete_binary, not {grp.topology!r}")
            if not (grp.n and grp.M and grp.g):
                raise ConfigError(f"empty axis in group {grp}")
            if min(grp.g) < self.demand_range[1]:
                raise ConfigError(f"g={min(grp.g)} is below the largest demand {self.demand_range[1]}")

    def with_paper_scale(self) -> "ExperimentConfig":
        return dataclasses.replace(self, mu=200, lambda_offspring=200, generations=500)

    def cells(self) -> list[tuple[str, int, int, int]]:
        seen, out = set(), []
        for grp in self.groups:
            for cell in grp.cells():
                if cell not in seen:
                    seen.add(cell)
                    out.append(cell)
        return out

    def ga_params(self, mode: str, seed: int) -> GaParams:
        return GaParams(mu=self.mu, lambda_offspring=self.lambda_offspring, pc=self.pc, pm=self.pm,
                        generations=self.generations, seed=seed, mode=mode, max_parts=self.max_parts)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["groups"] = [dataclasses.asdict(g) for g in self.groups]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        known = {f.name for f in dataclasses.fields(cls)} | {"paper_scale", "lambda"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        paper = d.pop("paper_scale", False)
        if "lambda" in d:
            d["lambda_offspring"] = d.pop("lambda")
        try:
            if "groups" in d:
                d["groups"] = tuple(
                    CellGroup(str(g["topology"]), *(tuple(int(v) for v in _as_list(g[k])) for k in "nMg"))
                    for g in d["groups"]
                )
            for key in ("modes", "demand_range"):
                if key in d:
                    d[key] = tuple(d[key])
            cfg = cls(**d)
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"bad config: {exc}") from None
        return cfg.with_paper_scale() if paper else cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                return cls.from_dict(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None


def _as_list(v):
    return v if isinstance(v, (list, tuple)) else [v]


@dataclass(frozen=True)
class ResultRow:
    topology: str
    n: int
    M: int
    g: int
    mode: str
    run: int
    seed: int
    adms: int
    wavelengths: int
    W_min: int
    M_min: int
    W_max: int | None
    M_max: int
    generations: int
    wall_time: float = 0.0


# wall time stays out of results.csv so reruns are byte-identical
RESULT_FIELDS = [f.name for f in dataclasses.fields(ResultRow) if f.name != "wall_time"]
SUMMARY_FIELDS = ["topology", "n", "M", "g", "mode", "runs", "best_run", "adms", "wavelengths",
                  "W_min", "M_min", "W_max", "M_max"]


def run_seed(base_seed: int, topology: str, n: int, M: int, g: int, mode: str, run: int) -> int:
    ss = np.random.SeedSequence([base_seed, _KIND_CODE[topology], n, M, g, MODES.index(mode), run])
    return int(ss.generate_state(1, np.uint32)[0])


def _cell_name(topology, n, M, g, mode) -> str:
    return f"{topology}_n{n}_M{M}_g{g}_{mode}"


def run_sweep(config: ExperimentConfig, out_dir=None, progress=None) -> tuple[list[ResultRow], list[dict]]:
    """Run every cell of the grid ``runs_per_cell`` times.

    Returns all per-run rows and the best-of-cell summary. With ``out_dir``,
    writes results.csv, summary.csv, timings.csv, per-run histories and the
    best solution of every cell. A validator failure aborts the sweep.
    """
    base_seed = config.base_seed
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            base_seed = int(env)
        except ValueError:
            raise ConfigError(f"{SEED_ENV}={env!r} is not an integer") from None
        log.info("base seed overridden by %s=%d", SEED_ENV, base_seed)

    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.json").write_text(json.dumps(
            {**config.to_dict(), "base_seed": base_seed}, indent=2) + "\n")
        if config.write_history:
            (out / "history").mkdir(exist_ok=True)
        if config.write_solutions:
            (out / "solutions").mkdir(exist_ok=True)

    rows: list[ResultRow] = []
    for topology, n, M, g in config.cells():
        topo = build_topology(topology, n)
        inst = generate_instance(n, M, g, config.demand_range, seed=base_seed)
        bounds = bounds_report(inst, topo)
        for mode in config.modes:
            mode = SplitMode.parse(mode).value
            name = _cell_name(topology, n, M, g, mode)
            best = None
            for run in range(config.runs_per_cell):
                seed = run_seed(base_seed, topology, n, M, g, mode, run)
                result = evolve(inst, topo, config.ga_params(mode, seed))
                report = validate(result.best, inst, topo)
                if not report:
                    raise SweepValidationError(f"cell {name} run {run}: invalid solution\n{report}")
                row = ResultRow(topology, n, M, g, mode, run, seed, *result.best.fitness,
                                bounds.w_min, bounds.m_min, bounds.w_max, bounds.m_max,
                                len(result.history) - 1, round(result.wall_time, 3))
                rows.append(row)
                if best is None or result.best.fitness < best[0].best.fitness:
                    best = (result, run)
                if out is not None and config.write_history:
                    _write_csv(out / "history" / f"history_{name}_{run}.csv",
                               ["generation", "best_adms", "best_wavelengths", "evals"],
                               [dataclasses.astuple(h) for h in result.history])
                if progress:
                    progress(row)
            if out is not None and config.write_solutions:
                save_solution(best[0].best, out / "solutions" / f"{name}_best.json")

    summary = summarize(rows)
    if out is not None:
        _write_csv(out / "results.csv", RESULT_FIELDS,
                   [[getattr(r, f) for f in RESULT_FIELDS] for r in rows])
        _write_csv(out / "summary.csv", SUMMARY_FIELDS, [[s[f] for f in SUMMARY_FIELDS] for s in summary])
        _write_csv(out / "timings.csv", ["topology", "n", "M", "g", "mode", "run", "wall_time"],
                   [[r.topology, r.n, r.M, r.g, r.mode, r.run, r.wall_time] for r in rows])
    return rows, summary


def summarize(rows) -> list[dict]:
    """Best-of-cell rows, lexicographic on (ADMs, wavelengths), first run on ties."""
    cells: dict[tuple, dict] = {}
    for r in rows:
        r = _as_row_dict(r)
        key = (r["topology"], r["n"], r["M"], r["g"], r["mode"])
        cur = cells.get(key)
        if cur is None:
            cells[key] = {**{k: r[k] for k in SUMMARY_FIELDS if k in r}, "runs": 1, "best_run": r["run"]}
            continue
        cur["runs"] += 1
        if (r["adms"], r["wavelengths"]) < (cur["adms"], cur["wavelengths"]):
            cur.update(adms=r["adms"], wavelengths=r["wavelengths"], best_run=r["run"])
    return list(cells.values())


def _as_row_dict(r) -> dict:
    return dataclasses.asdict(r) if dataclasses.is_dataclass(r) else dict(r)


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(["" if v is None else v for v in row] for row in rows)


def read_rows(path) -> list[dict]:
    """Read results.csv or summary.csv back with integer columns restored."""
    out = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            row = {}
            for k, v in rec.items():
                if k in ("topology", "mode"):
                    row[k] = v
                elif v == "":
                    row[k] = None
                else:
                    row[k] = float(v) if k == "wall_time" else int(v)
            out.append(row)
    return out


# plot data ---------------------------------------------------------------------

_BOUND_COLS = {"adms": ("M_min", "M_max"), "wavelengths": ("W_min", "W_max")}


def plot_series(rows, x: str, metric: str, **fixed) -> dict[str, dict[int, int | None]]:
    """Series keyed by mode plus ``lower``/``upper`` bounds, each mapping x -> value.

    ``rows`` may be per-run rows or a summary; the best value per cell is used.
    Cells absent from ``rows`` are simply missing from the series.
    """
    if x not in ("n", "g", "M"):
        raise ValueError(f"unsupported x axis {x!r}")
    if metric not in _BOUND_COLS:
        raise ValueError(f"unsupported metric {metric!r}")
    chosen = [r for r in map(_as_row_dict, rows) if all(r[k] == v for k, v in fixed.items())]
    best: dict[tuple, dict] = {}
    for r in summarize(chosen) if chosen and "run" in chosen[0] else chosen:
        best[(r["mode"], r[x])] = r
    series: dict[str, dict[int, int | None]] = {}
    lower, upper = {}, {}
    lo_col, hi_col = _BOUND_COLS[metric]
    for (mode, xv), r in sorted(best.items(), key=lambda kv: (MODES.index(kv[0][0]), kv[0][1])):
        series.setdefault(mode, {})[xv] = r[metric]
        lower[xv], upper[xv] = r[lo_col], r[hi_col]
    if series:
        series["lower"] = dict(sorted(lower.items()))
        series["upper"] = dict(sorted(upper.items()))
    return series


def emit_plot_data(rows, out_dir) -> list[Path]:
    """Write one wide CSV per plot panel.

    Node sweeps are grouped by (topology, M, g); granularity sweeps by
    (topology, n, M) whenever more than one g is present.
    """
    rows = [_as_row_dict(r) for r in rows]
    if not rows:
        raise ValueError("no rows to plot")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    panels = []
    for key in sorted({(r["topology"], r["M"], r["g"]) for r in rows}):
        panels.append(("n", dict(zip(("topology", "M", "g"), key))))
    for key in sorted({(r["topology"], r["n"], r["M"]) for r in rows}):
        gs = {r["g"] for r in rows if (r["topology"], r["n"], r["M"]) == key}
        if len(gs) > 1:
            panels.append(("g", dict(zip(("topology", "n", "M"), key))))
    for x, fixed in panels:
        tag = "_".join(f"{k}{v}" if k != "topology" else str(v) for k, v in fixed.items())
        for metric in ("adms", "wavelengths"):
            series = plot_series(rows, x, metric, **fixed)
            xs = sorted({xv for s in series.values() for xv in s})
            cols = [m for m in MODES if m in series] + ["lower", "upper"]
            path = out / f"{metric}_vs_{x}_{tag}.csv"
            _write_csv(path, [x, *cols], [[xv, *(series[c].get(xv) for c in cols)] for xv in xs])
            written.append(path)
    return written
