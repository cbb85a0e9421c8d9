"""Command-line front end.

Every run prints its resolved seed; supplying --seed reproduces the output
byte for byte.  Exit codes: 0 success/PASS, 1 experiment FAIL, 2 usage
errors (argparse's default).
"""

from __future__ import annotations

import argparse
import json
import secrets
import sys
from pathlib import Path

import numpy as np

from . import gridgraph, lab
from .bounds import bound_geo_sum, bound_negbin_moment
from .gridgraph import LiveGraph, TseitinInstance, build_grid
from .lab import ExperimentConfig
from .restrictions import (GridParams, build_path_atlas, sample_grid_restriction,
                           validate_disjointness)


def _resolve_seed(args) -> int:
    seed = args.seed if args.seed is not None else secrets.randbelow(2 ** 31)
    print(f"seed: {seed}")
    return seed


def _merge_config(args, parser):
    """Values from --config are defaults; explicit flags win."""
    if not getattr(args, "config", None):
        return args
    doc = json.loads(Path(args.config).read_text())
    for key, val in doc.items():
        if not hasattr(args, key):
            parser.error(f"unknown config key {key!r}")
        if parser.get_default(key) == getattr(args, key):
            setattr(args, key, val)
    return args


def _write_output(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_result(result, args) -> int:
    print(result.summary())
    if args.format == "json":
        _write_output(result.to_json() + "\n", args.out)
    else:
        _write_output(result.to_csv(), args.out)
    return 0 if result.ok else 1


def _experiment_parser(sub, name, help_text):
    q = sub.add_parser(name, help=help_text)
    q.add_argument("--config", help="JSON file with defaults; flags win")
    q.add_argument("--n", type=int, default=48)
    q.add_argument("--delta", type=int, default=2)
    q.add_argument("--p", type=float, default=1 / 32)
    q.add_argument("--k", type=int, default=2)
    q.add_argument("--l", dest="ell", type=int, default=1)
    q.add_argument("--s", type=int, default=4)
    q.add_argument("--terms", type=int, default=4)
    q.add_argument("--nvars", type=int, default=20)
    q.add_argument("--t", type=int, nargs="+", default=[2, 3, 4])
    q.add_argument("--trials", type=int, default=10 ** 4)
    q.add_argument("--seed", type=int)
    q.add_argument("--threads", type=int, default=1)
    q.add_argument("--confidence", type=float, default=0.999)
    q.add_argument("--out")
    q.add_argument("--format", choices=["csv", "json"], default="csv")
    return q


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="switchlab",
                                     description="switching-lemma laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    q = sub.add_parser("gen-tseitin", help="emit a grid Tseitin instance as DIMACS")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--charge", choices=["all-one", "all-zero"], default="all-one")
    q.add_argument("--out")

    q = sub.add_parser("sample-restriction", help="sample a grid restriction as JSON")
    q.add_argument("--n", type=int, default=48)
    q.add_argument("--delta", type=int, default=2)
    q.add_argument("--seed", type=int)
    q.add_argument("--out")

    q = sub.add_parser("validate-paths", help="path-atlas disjointness report")
    q.add_argument("--delta", type=int, required=True)
    q.add_argument("--n", type=int, help="defaults to 3 subgrids per axis")

    _experiment_parser(sub, "single-sl", "single switching lemma experiment")
    _experiment_parser(sub, "multi-sl", "uniform multi-switching experiment")
    _experiment_parser(sub, "grid-sl", "grid multi-switching experiment")

    q = sub.add_parser("equiv-suite", help="sampling equivalence and dominance suite")
    q.add_argument("--seed", type=int)
    q.add_argument("--samples", type=int, default=10 ** 4)
    q.add_argument("--skip-dominance", action="store_true")

    q = sub.add_parser("tails", help="appendix tail-bound spot checks")
    q.add_argument("--trials", type=int, default=10 ** 6)
    q.add_argument("--seed", type=int)

    q = sub.add_parser("report", help="pretty-print a result JSON")
    q.add_argument("path")

    args = parser.parse_args(argv)

    if args.command == "gen-tseitin":
        grid = build_grid(args.n)
        charge = (gridgraph.all_one_charge(grid) if args.charge == "all-one"
                  else gridgraph.all_zero_charge(grid))
        inst = TseitinInstance(LiveGraph(grid), charge)
        _write_output(gridgraph.to_dimacs(inst), args.out)
        return 0

    if args.command == "sample-restriction":
        seed = _resolve_seed(args)
        params = GridParams(args.n, args.delta)
        rho = sample_grid_restriction(params, np.random.default_rng(seed))
        _write_output(rho.to_json() + "\n", args.out)
        return 0

    if args.command == "validate-paths":
        n = args.n if args.n else 12 * args.delta ** 2
        report = validate_disjointness(build_path_atlas(GridParams(n, args.delta)))
        print(report.summary())
        return 0 if report.ok else 1

    if args.command in ("single-sl", "multi-sl", "grid-sl"):
        args = _merge_config(args, parser)
        seed = _resolve_seed(args)
        kind = {"single-sl": "single_sl", "multi-sl": "multi_sl",
                "grid-sl": "grid_sl"}[args.command]
        cfg = ExperimentConfig(kind=kind, trials=args.trials, seed=seed,
                               t_values=tuple(args.t), p=args.p, k=args.k,
                               ell=args.ell, s=args.s, terms=args.terms,
                               n_vars=args.nvars, n=args.n, delta=args.delta,
                               confidence=args.confidence)
        result = lab.run_experiment(cfg, threads=args.threads)
        return _emit_result(result, args)

    if args.command == "equiv-suite":
        seed = _resolve_seed(args)
        report = lab.run_equivalence_suite(dominance_samples=args.samples,
                                           seed=seed,
                                           include_dominance=not args.skip_dominance)
        print(report.summary())
        return 0 if report.ok else 1

    if args.command == "tails":
        seed = _resolve_seed(args)
        return _run_tails(args.trials, seed)

    if args.command == "report":
        doc = json.loads(Path(args.path).read_text())
        print(json.dumps(doc, indent=2, sort_keys=True))
        return 0

    parser.error("unreachable")


def _run_tails(trials: int, seed: int) -> int:
    """Empirical spot checks of the two appendix tail bounds."""
    rng = np.random.default_rng(seed)
    ok = True
    for q in (0.5, 0.25):
        for s in (1, 2):
            draws = rng.geometric(q, size=(trials, s)).sum(axis=1).astype(np.float64)
            for t in (1, 2, 3):
                moment = float(np.mean(draws ** t))
                cap = bound_negbin_moment(q, s, t)
                passed = math_log_leq(moment, cap)
                ok &= passed
                print(f"negbin moment q={q} s={s} t={t}: "
                      f"E[X^t]={moment:.4g} bound={format_exp(cap)} "
                      f"{'PASS' if passed else 'FAIL'}")
    for d in (2, 4):
        n, p = 10, 0.5
        sums = rng.geometric(p, size=(trials, n)).sum(axis=1)
        emp = float(np.mean(sums >= d * n / p))
        cap = bound_geo_sum(p, n, d)
        passed = emp <= cap.linear
        ok &= passed
        print(f"geometric-sum tail d={d}: Pr={emp:.3g} bound={cap.linear:.3g} "
              f"{'PASS' if passed else 'FAIL'}")
    return 0 if ok else 1


def math_log_leq(value: float, log_cap: float) -> bool:
    import math
    return value <= 0 or math.log(value) <= log_cap


def format_exp(log_value: float) -> str:
    import math
    if log_value > 700:
        return f"exp({log_value:.3g})"
    return f"{math.exp(log_value):.4g}"


if __name__ == "__main__":
    raise SystemExit(main())
