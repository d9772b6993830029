"""Command line interface.

Exit codes: 0 success, 1 validation failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import sys
from pathlib import Path

from .bounds import bounds_report
from .decoder import SplitMode, decode, load_solution, save_solution
from .evolution import GaParams, evolve
from .experiment import (ConfigError, ExperimentConfig, SweepValidationError, emit_plot_data, read_rows,
                         run_sweep)
from .topology import TopologyError, build_topology, load_topology, save_topology
from .traffic import TrafficError, generate_instance, load_instance, save_instance
from .verify import exhaustive_oracle, validate

log = logging.getLogger("treegroom")

EXIT_OK, EXIT_INVALID, EXIT_CONFIG = 0, 1, 2


def _topology(spec: str, n: int | None):
    if Path(spec).is_file():
        topo = load_topology(spec)
        if n is not None and topo.n != n:
            raise TopologyError(f"{spec} has n={topo.n}, expected {n}")
        return topo
    if n is None:
        raise TopologyError(f"topology {spec!r} is not a file and no node count is known")
    return build_topology(spec, n)


def _chromosome(path: str) -> list[int]:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        return [int(tok) for tok in text.replace(",", " ").split()]
    if isinstance(data, dict):
        data = data["chromosome"]
    return [int(x) for x in data]


def _emit(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def cmd_gen(args) -> int:
    inst = generate_instance(args.n, args.m, args.g, tuple(args.range), seed=args.seed)
    save_instance(inst, args.out)
    if args.topology_out:
        save_topology(build_topology(args.topology, args.n), args.topology_out)
    log.info("wrote %s (n=%d, M=%d, g=%d)", args.out, inst.n, inst.M, inst.g)
    return EXIT_OK


def cmd_decode(args) -> int:
    inst = load_instance(args.instance)
    topo = _topology(args.topology, inst.n)
    sol = decode(_chromosome(args.chromosome), inst, topo, args.mode, args.max_parts)
    if args.out:
        save_solution(sol, args.out)
    else:
        print(json.dumps(sol.to_dict()))
    print(f"ADMs={sol.adms} wavelengths={sol.n_wavelengths}", file=sys.stderr)
    return EXIT_OK


def cmd_run(args) -> int:
    inst = load_instance(args.instance)
    topo = _topology(args.topology, inst.n)
    factory = GaParams.paper_scale if args.paper_scale else GaParams.desk_scale
    overrides = {k: v for k, v in (("mu", args.mu), ("lambda_offspring", args.lam), ("pc", args.pc),
                                   ("pm", args.pm), ("generations", args.gens)) if v is not None}
    params = factory(seed=args.seed, mode=args.mode, max_parts=args.max_parts, **overrides)
    result = evolve(inst, topo, params)
    report = validate(result.best, inst, topo)
    if args.out:
        save_solution(result.best, args.out)
    if args.history:
        with open(args.history, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["generation", "best_adms", "best_wavelengths", "evals"])
            w.writerows(dataclasses.astuple(h) for h in result.history)
    print(f"best ADMs={result.best_fitness.adms} wavelengths={result.best_fitness.wavelengths} "
          f"evals={result.evals} time={result.wall_time:.1f}s")
    if not report:
        print(report, file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def cmd_bounds(args) -> int:
    inst = load_instance(args.instance)
    topo = _topology(args.topology, inst.n)
    report = bounds_report(inst, topo)
    print(json.dumps(report.to_dict()))
    print(report.table())
    return EXIT_OK


def cmd_validate(args) -> int:
    inst = load_instance(args.instance)
    topo = _topology(args.topology, inst.n)
    report = validate(load_solution(args.solution), inst, topo)
    print(report)
    return EXIT_OK if report else EXIT_INVALID


def cmd_oracle(args) -> int:
    inst = load_instance(args.instance)
    topo = _topology(args.topology, inst.n)
    res = exhaustive_oracle(inst, topo, args.mode, args.max_parts, max_perms=args.max_perms)
    _emit({"adms": res.fitness[0], "wavelengths": res.fitness[1], "witness": list(res.witness),
           "permutations": res.permutations}, args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    if args.paper_scale:
        cfg = cfg.with_paper_scale()
    overrides = {k: v for k, v in (("runs_per_cell", args.runs), ("base_seed", args.seed),
                                   ("mu", args.mu), ("lambda_offspring", args.lam),
                                   ("generations", args.gens)) if v is not None}
    if args.modes:
        overrides["modes"] = tuple(args.modes)
    cfg = dataclasses.replace(cfg, **overrides)

    def progress(row):
        log.info("%s n=%d M=%d g=%d %s run %d: ADMs=%d W=%d", row.topology, row.n, row.M, row.g,
                 row.mode, row.run, row.adms, row.wavelengths)

    rows, summary = run_sweep(cfg, args.out, progress=progress)
    emit_plot_data(summary, Path(args.out) / "plots")
    log.info("%d runs, %d cells written to %s", len(rows), len(summary), args.out)
    return EXIT_OK


def cmd_plot(args) -> int:
    paths = emit_plot_data(read_rows(args.results), args.out)
    for p in paths:
        print(p)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="treegroom", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def mode_arg(sp):
        sp.add_argument("--mode", default="none", type=SplitMode.parse,
                        help="none | cut | divide | synthesized")
        sp.add_argument("--max-parts", type=int, default=4)

    g = sub.add_parser("gen", help="generate a random traffic instance")
    g.add_argument("--topology", default="complete_binary", help="star | complete_binary")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m", type=int, required=True, help="number of traffic patterns")
    g.add_argument("--g", type=int, default=16, help="wavelength granularity")
    g.add_argument("--range", type=int, nargs=2, default=(0, 15), metavar=("LO", "HI"))
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--topology-out", help="also write the topology JSON here")
    g.set_defaults(func=cmd_gen)

    d = sub.add_parser("decode", help="decode a single chromosome")
    d.add_argument("--chromosome", required=True)
    d.add_argument("--instance", required=True)
    d.add_argument("--topology", required=True, help="topology JSON file or kind")
    mode_arg(d)
    d.add_argument("--out")
    d.set_defaults(func=cmd_decode)

    r = sub.add_parser("run", help="run the GA on one instance")
    r.add_argument("--instance", required=True)
    r.add_argument("--topology", required=True)
    mode_arg(r)
    r.add_argument("--mu", type=int)
    r.add_argument("--lambda", dest="lam", type=int)
    r.add_argument("--pc", type=float)
    r.add_argument("--pm", type=float)
    r.add_argument("--gens", type=int)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--paper-scale", action="store_true", help="mu=lambda=200, 500 generations")
    r.add_argument("--out", help="best solution JSON")
    r.add_argument("--history", help="per-generation history CSV")
    r.set_defaults(func=cmd_run)

    b = sub.add_parser("bounds", help="wavelength and ADM bounds")
    b.add_argument("--instance", required=True)
    b.add_argument("--topology", required=True)
    b.set_defaults(func=cmd_bounds)

    v = sub.add_parser("validate", help="check a solution file")
    v.add_argument("--solution", required=True)
    v.add_argument("--instance", required=True)
    v.add_argument("--topology", required=True)
    v.set_defaults(func=cmd_validate)

    o = sub.add_parser("oracle", help="exhaustive search over all chromosomes (tiny instances)")
    o.add_argument("--instance", required=True)
    o.add_argument("--topology", default="star")
    mode_arg(o)
    o.add_argument("--max-perms", type=int, default=40320)
    o.add_argument("--out")
    o.set_defaults(func=cmd_oracle)

    s = sub.add_parser("sweep", help="run an experiment grid")
    s.add_argument("--config", help="JSON config; defaults to the built-in grid")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--runs", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--mu", type=int)
    s.add_argument("--lambda", dest="lam", type=int)
    s.add_argument("--gens", type=int)
    s.add_argument("--modes", nargs="+")
    s.add_argument("--paper-scale", action="store_true")
    s.set_defaults(func=cmd_sweep)

    pl = sub.add_parser("plot", help="write plot series from results.csv or summary.csv")
    pl.add_argument("--results", required=True)
    pl.add_argument("--out", required=True)
    pl.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except SweepValidationError as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ConfigError, TopologyError, TrafficError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
