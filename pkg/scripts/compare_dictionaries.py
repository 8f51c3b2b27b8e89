"""Error against n for randomized and deterministic dictionaries of several sizes.

Writes a CSV with one column per dictionary setting (median over seeds for
randomized ones).

Example
-------
    python3 scripts/compare_dictionaries.py --problem sines3d --random 64 --deterministic 4096 16384
"""

import argparse
import logging
import time
from pathlib import Path

from greedynn.cli import compare_series, format_series


def main():
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--problem", default="sine2d")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--random", type=int, nargs="*", default=[64, 512])
    p.add_argument("--deterministic", type=int, nargs="*", default=[512, 4096])
    p.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    p.add_argument("--quad", choices=["paper", "desk"], default="desk")
    p.add_argument("--out", type=Path, default=None)
    args = p.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    configs = [("random", N) for N in args.random] + [("deterministic", N) for N in args.deterministic]
    t = time.perf_counter()
    series = compare_series(args.problem, configs, args.k, args.n, args.seeds, args.quad)
    table = format_series(series)
    print(table, end="")
    out = args.out or Path(f"compare_{args.problem}_k{args.k}_n{args.n}_{args.quad}.csv")
    out.write_text(table)
    logging.info("%.0fs, written to %s", time.perf_counter() - t, out)


if __name__ == "__main__":
    main()
