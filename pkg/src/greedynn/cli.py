"""Command line driver.

Subcommands
-----------
fit      approximate a catalog target function in L2
solve    solve a catalog Neumann problem in the energy norm
compare  error-vs-n series of several dictionary settings, medians over seeds
bounds   dictionary-size bounds for given rate constants

Tables go to stdout and to ``--out``.  ``GREEDYNN_SEED`` overrides
``--seed``.  Exit status: 0 success, 1 runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from .bounds import (RATIO_DECAY, BoundsInput, covering_lower_bound, required_size_deterministic,
                     required_size_randomized, size_ratio_bound)
from .greedy import RunConfig, run
from .problems import PDES, TARGETS
from .report import format_table
from .setup import make_discretization

SEED_ENV = "GREEDYNN_SEED"
DICT_KINDS = {"random": "randomized", "deterministic": "deterministic"}

log = logging.getLogger("greedynn")


class UsageError(Exception):
    pass


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _add_run_args(p, problems):
    p.add_argument("--problem", required=True, choices=sorted(problems))
    p.add_argument("--k", type=_positive_int, default=1, help="ReLU power")
    p.add_argument("--N", type=_positive_int, default=64, help="dictionary size")
    p.add_argument("--n", type=_positive_int, default=256, help="number of neurons")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--algorithm", choices=["oga", "wrga"], default="oga")
    p.add_argument("--M", type=float, default=None, help="l1 budget (wrga only)")
    p.add_argument("--record-every", type=_positive_int, default=None)
    p.add_argument("--baseline", action="store_true", help="also record n=0")
    _add_quad_args(p)
    p.add_argument("--out", type=Path, default=None, help="table file (default: derived from flags)")


def _add_quad_args(p):
    g = p.add_argument_group("quadrature")
    g.add_argument("--quad", choices=["paper", "desk"], default="desk")
    g.add_argument("--cells", type=_positive_int, default=None)
    g.add_argument("--order", type=_positive_int, default=None)
    g.add_argument("--qmc-points", type=_positive_int, default=None)
    g.add_argument("--boundary-cells", type=_positive_int, default=None)
    g.add_argument("--boundary-qmc-points", type=_positive_int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="greedynn", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="L2 fit of a target function")
    _add_run_args(fit, TARGETS)
    fit.add_argument("--dict", choices=sorted(DICT_KINDS), default="random")

    solve = sub.add_parser("solve", help="Neumann problem in the energy norm")
    _add_run_args(solve, PDES)
    solve.add_argument("--dict", choices=sorted(DICT_KINDS), default="random")

    cmp_ = sub.add_parser("compare", help="compare dictionary settings")
    cmp_.add_argument("--problem", required=True, choices=sorted({**TARGETS, **PDES}))
    cmp_.add_argument("--config", action="append", required=True, metavar="KIND:N",
                      help="dictionary setting such as random:64 (repeat, at least twice)")
    cmp_.add_argument("--k", type=_positive_int, default=1)
    cmp_.add_argument("--n", type=_positive_int, default=256)
    cmp_.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    cmp_.add_argument("--record-every", type=_positive_int, default=None)
    _add_quad_args(cmp_)
    cmp_.add_argument("--out", type=Path, default=None)

    bnd = sub.add_parser("bounds", help="dictionary-size bounds")
    bnd.add_argument("--n", type=int, required=True)
    bnd.add_argument("--gamma", type=float, required=True)
    bnd.add_argument("--eta", type=float, default=0.1)
    bnd.add_argument("--k", type=int, default=1)
    bnd.add_argument("--d", type=int, required=True)
    bnd.add_argument("--C", type=float, default=1.0)
    bnd.add_argument("--delta", type=float, default=1.0)
    return parser


def _quad_overrides(args) -> dict:
    return {"cells": args.cells, "order": args.order, "qmc_points": args.qmc_points,
            "boundary_cells": args.boundary_cells, "boundary_qmc_points": args.boundary_qmc_points}


def _seed(args) -> int:
    env = os.environ.get(SEED_ENV)
    if env is None:
        return args.seed
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None


def _emit(table: str, path: Path):
    sys.stdout.write(table)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(table)
    log.info("table written to %s", path)


def _cmd_run(args) -> int:
    if args.algorithm == "wrga" and args.M is None:
        raise UsageError("--algorithm wrga needs --M")
    seed = _seed(args)
    config = RunConfig(algorithm=args.algorithm, dictionary=DICT_KINDS[args.dict], k=args.k, N=args.N,
                       n_max=args.n, seed=seed, M=args.M, record_every=args.record_every,
                       baseline=args.baseline)
    disc = make_discretization(args.problem, args.quad, **_quad_overrides(args))
    state = run(config, disc)
    if state.stop_reason:
        log.warning("stopped early: %s", state.stop_reason)
    out = args.out or Path(f"{args.problem}_{args.algorithm}_{args.dict}_N{args.N}_n{args.n}_seed{seed}.csv")
    _emit(format_table(state.records, with_h1=args.command == "solve"), out)
    return 0


def _parse_config(text: str) -> tuple[str, int]:
    try:
        kind, n = text.split(":")
        n = int(n)
    except ValueError:
        raise UsageError(f"bad --config {text!r}; expected KIND:N such as random:64") from None
    if kind not in DICT_KINDS or n < 1:
        raise UsageError(f"bad --config {text!r}; KIND is random or deterministic, N >= 1")
    return kind, n


def compare_series(problem, configs, k, n_max, seeds, preset="desk", record_every=None, **quad):
    """Median ``err_l2`` per recorded n for each ``(kind, N)`` setting.

    Returns a list of ``(label, {n: err})`` in the order of ``configs``.
    Deterministic settings do not depend on the seed and are run once.
    """
    disc = make_discretization(problem, preset, **quad)
    series = []
    for kind, N in configs:
        runs = []
        for seed in (seeds if kind == "random" else seeds[:1]):
            cfg = RunConfig(dictionary=DICT_KINDS[kind], k=k, N=N, n_max=n_max, seed=seed,
                            record_every=record_every)
            state = run(cfg, disc)
            runs.append({r.n: r.err_l2 for r in state.records})
        ns = sorted(set.intersection(*(set(r) for r in runs)))
        series.append((f"{kind}:{N}", {n: float(np.median([r[n] for r in runs])) for n in ns}))
    return series


def format_series(series) -> str:
    ns = sorted(set.union(*(set(s) for _, s in series)))
    lines = [",".join(["n"] + [label for label, _ in series])]
    for n in ns:
        cells = [f"{s[n]:.5e}" if n in s else "" for _, s in series]
        lines.append(",".join([str(n)] + cells))
    return "\n".join(lines) + "\n"


def _cmd_compare(args) -> int:
    configs = [_parse_config(c) for c in args.config]
    if len(configs) < 2:
        raise UsageError("compare needs at least two --config settings")
    seeds = [int(os.environ[SEED_ENV])] if SEED_ENV in os.environ else args.seeds
    series = compare_series(args.problem, configs, args.k, args.n, seeds, args.quad,
                            args.record_every, **_quad_overrides(args))
    out = args.out or Path(f"{args.problem}_compare_n{args.n}.csv")
    _emit(format_series(series), out)
    return 0


def _cmd_bounds(args) -> int:
    try:
        p = BoundsInput(n=args.n, gamma=args.gamma, eta=args.eta, k=args.k, d=args.d, C=args.C,
                        delta=args.delta)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    n_det = required_size_deterministic(p)
    n_low = covering_lower_bound(p)
    n_rand = required_size_randomized(p)
    rows = [
        ("N_deterministic", n_det),
        ("N_randomized", n_rand),
        ("N_lower", n_low),
        ("N_randomized/N_lower", n_rand / n_low),
        ("log(n/eta)", math.log(p.n / p.eta)),
        ("N_randomized/N_deterministic", n_rand / n_det),
        ("ratio_bound", size_ratio_bound(p.d, p.n, p.eta)),
        ("ratio_decay_per_dim", RATIO_DECAY),
    ]
    sys.stdout.write("quantity,value\n" + "".join(f"{k},{v:.6e}\n" for k, v in rows))
    return 0


COMMANDS = {"fit": _cmd_run, "solve": _cmd_run, "compare": _cmd_compare, "bounds": _cmd_bounds}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # surface module errors as a runtime failure
        print(f"{parser.prog}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
