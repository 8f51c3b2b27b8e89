"""Dictionary sizes needed by deterministic and randomized dictionaries, by dimension.

Example
-------
    python3 scripts/bounds_report.py --n 256 --gamma 0.5 --eta 0.01 --k 1
"""

import argparse

from greedynn.bounds import (BoundsInput, covering_lower_bound, required_size_deterministic,
                             required_size_randomized, size_ratio_bound)


def main():
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--eta", type=float, default=0.01)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--dims", type=int, nargs="+", default=list(range(1, 11)))
    args = p.parse_args()

    print("d,N_deterministic,N_randomized,N_lower,N_randomized/N_deterministic,ratio_bound")
    for d in args.dims:
        b = BoundsInput(n=args.n, gamma=args.gamma, eta=args.eta, k=args.k, d=d, C=args.C)
        det, rand = required_size_deterministic(b), required_size_randomized(b)
        print(f"{d},{det:.4e},{rand:.4e},{covering_lower_bound(b):.4e},{rand / det:.4e},"
              f"{size_ratio_bound(d, args.n, args.eta):.4e}")


if __name__ == "__main__":
    main()
