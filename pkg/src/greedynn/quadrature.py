"""Quadrature rules on the unit cube [0,1]^d and its faces.

Two volume rules are provided: composite tensor-product Gauss-Legendre
(cube split into ``s^d`` congruent cells, ``p`` points per axis per cell)
and unscrambled Sobol quasi-Monte Carlo with equal weights.  Boundary rules
place a (d-1)-dimensional rule on each of the 2d faces.

Nodes are stored coordinate-major, shape ``(d, n)``, which is the layout the
evaluation kernels stream over.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.stats import qmc

#: hard cap on the number of nodes a single rule may allocate
MAX_NODES = 60_000_000

# scipy ships the Joe-Kuo "new-joe-kuo-6.21201" direction numbers
SOBOL_MAX_DIM = 21201


class QuadratureResourceError(MemoryError):
    """Raised when a requested rule would exceed :data:`MAX_NODES`."""


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and weights for an integral over a (sub)domain of [0,1]^d.

    Attributes
    ----------
    nodes : ndarray, shape (d, n)
        Integration points, coordinate-major.
    weights : ndarray, shape (n,)
        Positive weights; they sum to the measure of the domain.
    kind : str
        ``"composite-gauss"`` or ``"qmc-sobol"``.
    meta : dict
        Construction parameters (subdivisions and order, or point count).
    """

    nodes: np.ndarray
    weights: np.ndarray
    kind: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        nodes = np.ascontiguousarray(np.atleast_2d(self.nodes), dtype=float)
        weights = np.ascontiguousarray(self.weights, dtype=float)
        if nodes.shape[1] != weights.shape[0]:
            raise ValueError("nodes and weights disagree on the node count")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def d(self) -> int:
        return self.nodes.shape[0]

    def __len__(self) -> int:
        return self.weights.shape[0]

    @property
    def key(self) -> tuple:
        """Fingerprint identifying the node set; equal keys mean equal nodes."""
        return (self.kind, self.d, len(self), tuple(sorted(self.meta.items())))

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))

    def dump(self, path) -> None:
        """Write a text dump: header ``d count kind`` then rows ``x_1..x_d w``."""
        table = np.vstack([self.nodes, self.weights[None, :]]).T
        header = f"{self.d} {len(self)} {self.kind}"
        np.savetxt(path, table, header=header, comments="", fmt="%.17g")

    @classmethod
    def load(cls, path) -> "QuadratureRule":
        text = Path(path).read_text().splitlines()
        d, count, kind = text[0].split()
        table = np.loadtxt(text[1:], ndmin=2)
        if table.shape != (int(count), int(d) + 1):
            raise ValueError(f"malformed rule dump {path}")
        return cls(table[:, :-1].T, table[:, -1], kind, {"loaded": str(path)})


def _check_budget(count: int) -> None:
    if count > MAX_NODES:
        raise QuadratureResourceError(
            f"rule would allocate {count} nodes (cap {MAX_NODES})")


def gauss_1d(subdivisions: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule on [0,1]."""
    if subdivisions < 1 or order < 1:
        raise ValueError("subdivisions and order must be >= 1")
    x, w = leggauss(order)
    h = 1.0 / subdivisions
    left = np.arange(subdivisions) * h
    nodes = (left[:, None] + 0.5 * h * (x[None, :] + 1.0)).ravel()
    weights = np.tile(0.5 * h * w, subdivisions)
    return nodes, weights


def composite_gauss(d: int, subdivisions: int, order: int) -> QuadratureRule:
    """Tensor-product composite Gauss-Legendre rule on [0,1]^d.

    Exact for polynomials of degree <= 2*order - 1 in each variable on every
    cell.  ``order`` counts points per axis per cell.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    x1, w1 = gauss_1d(subdivisions, order)
    _check_budget(len(x1) ** d)
    grids = np.meshgrid(*([x1] * d), indexing="ij")
    wgrids = np.meshgrid(*([w1] * d), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids])
    weights = np.prod(np.stack([g.ravel() for g in wgrids]), axis=0)
    return QuadratureRule(nodes, weights, "composite-gauss",
                          {"subdivisions": subdivisions, "order": order})


def sobol_points(d: int, n_points: int) -> np.ndarray:
    """First ``n_points`` of the unscrambled Sobol sequence, shape (d, n).

    The sequence starts at the origin (index 0 convention, no skipping).
    """
    if not 1 <= d <= SOBOL_MAX_DIM:
        raise ValueError(f"Sobol rules support 1 <= d <= {SOBOL_MAX_DIM}")
    if n_points < 1:
        raise ValueError("n_points must be >= 1")
    _check_budget(n_points)
    engine = qmc.Sobol(d, scramble=False)
    with warnings.catch_warnings():
        # non-power-of-two counts are intentional
        warnings.simplefilter("ignore", UserWarning)
        pts = engine.random(n_points)
    return np.ascontiguousarray(pts.T)


def sobol_rule(d: int, n_points: int) -> QuadratureRule:
    """Equal-weight quasi-Monte Carlo rule from the Sobol sequence."""
    nodes = sobol_points(d, n_points)
    weights = np.full(n_points, 1.0 / n_points)
    return QuadratureRule(nodes, weights, "qmc-sobol", {"points": n_points})


@dataclass(frozen=True, eq=False)
class BoundaryRule:
    """Per-face rules on the 2d faces of [0,1]^d.

    Faces are ordered ``(axis 0, x=0), (axis 0, x=1), (axis 1, x=0), ...``.
    ``flat`` concatenates all faces into one rule and ``normals`` holds the
    outward unit normal of every flat node.
    """

    faces: tuple
    face_normals: np.ndarray
    flat: QuadratureRule
    normals: np.ndarray

    @property
    def d(self) -> int:
        return self.flat.d


def _face_rule(d: int, axis: int, side: float, inner: QuadratureRule,
               kind: str, meta: dict) -> QuadratureRule:
    m = len(inner)
    nodes = np.empty((d, m))
    rest = [a for a in range(d) if a != axis]
    nodes[rest, :] = inner.nodes
    nodes[axis, :] = side
    return QuadratureRule(nodes, inner.weights.copy(), kind,
                          dict(meta, axis=axis, side=side))


def boundary_rule(d: int, subdivisions: int | None = None, order: int = 3,
                  qmc_points: int | None = None) -> BoundaryRule:
    """Boundary rule on the faces of [0,1]^d.

    Give either ``subdivisions`` (composite Gauss per face, ``order`` points
    per axis per cell) or ``qmc_points`` (Sobol points per face).
    """
    if d < 2:
        raise ValueError("boundary rules need d >= 2")
    if (subdivisions is None) == (qmc_points is None):
        raise ValueError("give exactly one of subdivisions / qmc_points")
    if subdivisions is not None:
        inner = composite_gauss(d - 1, subdivisions, order)
        kind, meta = "composite-gauss", {"subdivisions": subdivisions, "order": order}
    else:
        inner = sobol_rule(d - 1, qmc_points)
        kind, meta = "qmc-sobol", {"points": qmc_points}
    _check_budget(2 * d * len(inner))

    faces, normals = [], []
    for axis, side in product(range(d), (0.0, 1.0)):
        faces.append(_face_rule(d, axis, side, inner, kind, meta))
        n = np.zeros(d)
        n[axis] = 1.0 if side == 1.0 else -1.0
        normals.append(n)
    face_normals = np.array(normals)

    flat = QuadratureRule(np.hstack([f.nodes for f in faces]),
                          np.concatenate([f.weights for f in faces]),
                          kind, dict(meta, boundary=True))
    node_normals = np.repeat(face_normals, len(inner), axis=0).T.copy()
    return BoundaryRule(tuple(faces), face_normals, flat, node_normals)
