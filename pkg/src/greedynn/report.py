"""Convergence tables: records, observed orders, slope fits, CSV output."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, replace

import numpy as np

DEFAULT_CADENCE = (8, 16, 32, 64, 128, 256, 512)


@dataclass(frozen=True)
class ConvergenceRecord:
    n: int
    err_l2: float
    err_h1: float | None = None
    order_l2: float | None = None
    order_h1: float | None = None


def observed_order(n1, e1, n2, e2) -> float | None:
    if n1 <= 0 or n2 <= 0 or n1 == n2 or e1 <= 0 or e2 <= 0:
        return None
    return math.log(e1 / e2) / math.log(n2 / n1)


def with_orders(records) -> list[ConvergenceRecord]:
    """Fill the order columns from successive rows."""
    out = []
    prev = None
    for r in records:
        if prev is None:
            out.append(replace(r, order_l2=None, order_h1=None))
        else:
            o1 = observed_order(prev.n, prev.err_l2, r.n, r.err_l2)
            o2 = None
            if r.err_h1 is not None and prev.err_h1 is not None:
                o2 = observed_order(prev.n, prev.err_h1, r.n, r.err_h1)
            out.append(replace(r, order_l2=o1, order_h1=o2))
        prev = r
    return out


def record_points(n_max: int, every: int | None = None) -> list[int]:
    """Iterations at which errors are recorded; ``n_max`` is always included."""
    if every:
        pts = list(range(every, n_max + 1, every))
    else:
        pts = [n for n in DEFAULT_CADENCE if n <= n_max]
    if not pts or pts[-1] != n_max:
        pts.append(n_max)
    return pts


def fit_slope(ns, errs, n_min: int = 8) -> float:
    """Least-squares slope of log(err) against log(n) over n >= n_min."""
    ns = np.asarray(ns, dtype=float)
    errs = np.asarray(errs, dtype=float)
    keep = (ns >= n_min) & (errs > 0)
    if keep.sum() < 2:
        raise ValueError("need at least two points with n >= n_min to fit a slope")
    slope, _ = np.polyfit(np.log(ns[keep]), np.log(errs[keep]), 1)
    return float(slope)


def _fmt(x) -> str:
    return "" if x is None else f"{x:.5e}"


def format_table(records, with_h1: bool | None = None) -> str:
    """CSV with header ``n,err_l2,order_l2[,err_h1,order_h1]``."""
    records = list(records)
    if with_h1 is None:
        with_h1 = any(r.err_h1 is not None for r in records)
    buf = io.StringIO()
    buf.write("n,err_l2,order_l2" + (",err_h1,order_h1" if with_h1 else "") + "\n")
    for r in records:
        cols = [str(r.n), _fmt(r.err_l2), _fmt(r.order_l2)]
        if with_h1:
            cols += [_fmt(r.err_h1), _fmt(r.order_h1)]
        buf.write(",".join(cols) + "\n")
    return buf.getvalue()


def parse_table(text: str) -> list[ConvergenceRecord]:
    lines = text.strip().splitlines()
    header = lines[0].split(",")
    out = []
    for ln in lines[1:]:
        row = dict(zip(header, ln.split(",")))
        val = lambda key: float(row[key]) if row.get(key) else None
        out.append(ConvergenceRecord(int(row["n"]), val("err_l2"), val("err_h1"),
                                     val("order_l2"), val("order_h1")))
    return out
