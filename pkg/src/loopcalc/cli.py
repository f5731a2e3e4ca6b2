"""Command-line entry point: ``loopcalc <subcommand> ...`` or ``python -m loopcalc``.

Every subcommand except ``pfseries`` and ``experiment`` prints a JSON
document on stdout. Exit codes: 0 on success, 2 for bad arguments or an
invalid input file, 1 for a numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
import warnings

from .bp import BPConfig, run_bp
from .errors import LoopCalcError
from .experiments import ExperimentConfig, run_experiment, summary_path
from .extended import (
    check_kasteleyn,
    enumerate_perfect_matchings,
    fisher_extend,
    kasteleyn_orient,
    load_extended,
    perfect_matching_sum,
    save_extended,
)
from .forney import contract_log_z, exact_log_z, load_graph, save_graph, two_core
from .ising import IsingParams, ising_grid_forney
from .loops import (
    enumerate_generalized_loops,
    loop_terms,
    search_generalized_loops,
    truncated_loop_series,
    two_regular_filter,
)
from .series import SeriesLimits, pfaffian_term, run_series


def _num(x):
    """JSON-safe float (non-finite values become strings)."""
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else repr(x)


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=1)
    sys.stdout.write("\n")


def _bp_config(args) -> BPConfig:
    return BPConfig(damping=args.damping, tolerance=args.tol, max_iters=args.max_iters,
                    schedule=args.schedule)


def _add_bp_args(p) -> None:
    p.add_argument("--damping", type=float, default=0.5)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--max-iters", type=int, default=10000)
    p.add_argument("--schedule", choices=("sequential", "parallel"), default="sequential")


def cmd_gen_grid(args) -> int:
    params = IsingParams(args.rows, args.cols, args.beta, args.theta, args.mode, args.seed)
    graph = ising_grid_forney(params)
    save_graph(graph, args.out)
    _emit({"out": args.out, "n_nodes": len(graph.nodes), "n_edges": len(graph.edges)})
    return 0


def cmd_exact(args) -> int:
    graph = load_graph(args.inp)
    method = args.method
    if method == "auto":
        method = "enumerate" if len(graph.edges) <= args.max_edges else "contract"
    if method == "enumerate":
        log_z = exact_log_z(graph, max_edges=args.max_edges)
    else:
        log_z = contract_log_z(graph)
    _emit({"log_z": _num(log_z), "method": method, "n_edges": len(graph.edges)})
    return 0


def cmd_bp(args) -> int:
    graph = load_graph(args.inp)
    res = run_bp(graph, _bp_config(args))
    _emit({"bethe_log_z": _num(res.bethe_log_z), "converged": res.converged,
           "iterations": res.iterations, "residual": _num(res.residual)})
    return 0


def cmd_loops(args) -> int:
    graph = load_graph(args.inp)
    bp = run_bp(graph, _bp_config(args))
    core, _ = two_core(graph)
    if args.method == "search":
        loops = search_generalized_loops(core)
    else:
        loops = enumerate_generalized_loops(core, max_edges=args.max_edges)
    if args.two_regular:
        loops = two_regular_filter(loops)
    terms = loop_terms(bp, core, loops)
    if args.truncate is not None:
        terms = terms[:args.truncate]
    partial, running = [], 1.0
    for t in terms:
        running += t.weight
        partial.append(running)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        value = truncated_loop_series(bp, terms)
    _emit({
        "bethe_log_z": _num(bp.bethe_log_z),
        "bp_converged": bp.converged,
        "loops": [{"edges": list(t.loop.edges), "r_C": _num(t.weight)} for t in terms],
        "partial_sums": [_num(s) for s in partial],
        "log_z": _num(value.log_z),
    })
    return 0


def _parse_psi(text: str) -> tuple[int, ...]:
    text = text.strip()
    return tuple(int(x) for x in text.split(",")) if text else ()


def cmd_extend(args) -> int:
    graph = load_graph(args.inp)
    bp = run_bp(graph, _bp_config(args))
    core, _ = two_core(graph)
    ext = fisher_extend(core, bp, _parse_psi(args.psi))
    orient = kasteleyn_orient(ext)
    save_extended(ext, orient, args.out)
    _emit({"out": args.out, "n_ports": ext.n_nodes, "n_edges": len(ext.edges),
           "kasteleyn_ok": check_kasteleyn(orient)})
    return 0


def cmd_matchings(args) -> int:
    ext = load_extended(args.inp)
    out = {"n_ports": ext.n_nodes}
    if ext.n_nodes <= args.max_nodes:
        matchings, total = enumerate_perfect_matchings(ext, max_nodes=args.max_nodes)
        out.update(count=len(matchings), weighted_sum=_num(total),
                   matchings=[list(m) for m in matchings])
    else:
        out.update(count=_num(perfect_matching_sum(ext, unit=True)),
                   weighted_sum=_num(perfect_matching_sum(ext)))
    _emit(out)
    return 0


def cmd_zempty(args) -> int:
    graph = load_graph(args.inp)
    bp = run_bp(graph, _bp_config(args))
    term = pfaffian_term(graph, bp, ())
    z0 = term.z_psi
    _emit({
        "z_empty": _num(z0),
        "bethe_log_z": _num(bp.bethe_log_z),
        "log_z_empty": _num(bp.bethe_log_z + math.log(z0)) if z0 > 0 else None,
        "n_gext": term.n_gext,
        "bp_converged": bp.converged,
        "ms": _num(term.seconds * 1e3),
    })
    return 0


def cmd_pfseries(args) -> int:
    graph = load_graph(args.inp)
    bp = run_bp(graph, _bp_config(args))
    limits = SeriesLimits(args.max_subset_size, args.max_terms,
                          None if args.budget_ms is None else args.budget_ms / 1000.0)
    res = run_series(graph, bp, limits)
    rows = [("psi", "z_psi", "mu_prefactor", "Z_psi", "running_z", "ms")]
    for t, run in zip(res.terms, res.running):
        rows.append((" ".join(map(str, t.psi)), repr(t.z_psi), repr(t.mu_prefactor),
                     repr(t.contribution), repr(run), repr(t.seconds * 1e3)))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(rows)
    _emit({"bethe_log_z": _num(res.bethe_log_z), "z": _num(res.z), "log_z": _num(res.log_z),
           "n_terms": len(res.terms), "n_triplets": res.n_triplets,
           "truncation": res.truncation, "bp_converged": res.bp_converged})
    return 0


def cmd_experiment(args) -> int:
    try:
        config = ExperimentConfig.load(args.config)
    except (OSError, ValueError, TypeError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 2
    config = dataclasses.replace(config, out=args.out or config.out)
    result = run_experiment(config)
    if config.out:
        print(f"wrote {len(result.rows)} rows to {config.out} "
              f"and summary to {summary_path(config.out)}")
    else:
        _emit({"rows": len(result.rows), "summary": result.summary})
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="loopcalc", description="Loop calculus on planar binary models.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-grid", help="random Ising grid as a Forney graph")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--mode", choices=("mixed", "attractive"), default="mixed")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_grid)

    p = sub.add_parser("exact", help="exact log Z by enumeration or contraction")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--max-edges", type=int, default=24)
    p.add_argument("--method", choices=("auto", "enumerate", "contract"), default="auto")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("bp", help="belief propagation and the Bethe log Z")
    p.add_argument("--in", dest="inp", required=True)
    _add_bp_args(p)
    p.set_defaults(func=cmd_bp)

    p = sub.add_parser("loops", help="generalized loops with their weights")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--max-edges", type=int, default=20)
    p.add_argument("--two-regular", action="store_true")
    p.add_argument("--truncate", type=int, default=None)
    p.add_argument("--method", choices=("scan", "search"), default="scan",
                   help="subset scan (capped by --max-edges) or chain backtracking")
    _add_bp_args(p)
    p.set_defaults(func=cmd_loops)

    p = sub.add_parser("extend", help="Fisher-extended graph with Kasteleyn orientation")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--psi", default="")
    p.add_argument("--out", required=True)
    _add_bp_args(p)
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("matchings", help="perfect matchings of an extended graph")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--max-nodes", type=int, default=24)
    p.set_defaults(func=cmd_matchings)

    p = sub.add_parser("zempty", help="2-regular correction z_empty via one Pfaffian")
    p.add_argument("--in", dest="inp", required=True)
    _add_bp_args(p)
    p.set_defaults(func=cmd_zempty)

    p = sub.add_parser("pfseries", help="Pfaffian series in canonical order")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--max-subset-size", type=int, default=None)
    p.add_argument("--max-terms", type=int, default=None)
    p.add_argument("--budget-ms", type=float, default=None)
    p.add_argument("--out", default=None)
    _add_bp_args(p)
    p.set_defaults(func=cmd_pfseries)

    p = sub.add_parser("experiment", help="seeded sweep over random grids")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, KeyError, TypeError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LoopCalcError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2 if isinstance(exc, ValueError) else 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
