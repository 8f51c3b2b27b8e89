"""L2 and H1 errors with observed orders for a Neumann problem, one table per seed.

Example
-------
    python3 scripts/neumann_table.py --problem neumann3d-const --k 3 --N 256 --n 512
"""

import argparse
import logging
import time

import numpy as np

from greedynn.greedy import RunConfig, run_oga
from greedynn.report import format_table
from greedynn.setup import make_discretization


def main():
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--problem", default="neumann3d-const")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--N", type=int, default=256)
    p.add_argument("--n", type=int, default=512)
    p.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    p.add_argument("--quad", choices=["paper", "desk"], default="desk")
    p.add_argument("--n-min", type=int, default=64, help="orders averaged over n above this")
    args = p.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    disc = make_discretization(args.problem, args.quad)
    summary = []
    for seed in args.seeds:
        t = time.perf_counter()
        state = run_oga(RunConfig(k=args.k, N=args.N, n_max=args.n, seed=seed), disc)
        print(f"# seed {seed}, {time.perf_counter() - t:.0f}s")
        print(format_table(state.records, with_h1=True))
        tail = [r for r in state.records if r.n > args.n_min]
        summary.append((np.mean([r.order_l2 for r in tail]), np.mean([r.order_h1 for r in tail]),
                        state.records[-1].err_l2, state.records[-1].err_h1))
    l2, h1, e2, eh = np.array(summary).T
    print(f"# mean orders over n > {args.n_min}: L2 {l2.mean():.3f}, H1 {h1.mean():.3f}")
    print(f"# final errors: L2 {', '.join(f'{e:.3e}' for e in e2)}; H1 {', '.join(f'{e:.3e}' for e in eh)}")


if __name__ == "__main__":
    main()
