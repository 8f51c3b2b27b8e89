"""Target functions and Neumann test problems on [0,1]^d.

All evaluators take points of shape (d, n) and return values of shape (n,)
or gradients of shape (d, n).

Note on the 2D Gabor target: the modulating cosine is taken along the first
coordinate, ``cos(2 pi m x_1)``, mirroring the 1D formula.  This is an
interpretation; the scalar form written for the 1D case has no unique 2D
reading.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import sympy as sp

GABOR_SIGMA = 0.15
GABOR_M = 8
GAUSS_CENTER = 0.5


@dataclass(frozen=True)
class TargetFunction:
    id: str
    d: int
    u: Callable
    grad: Callable
    description: str = ""


@dataclass(frozen=True)
class PdeInstance:
    """``-div(alpha grad u) + u = f`` in the cube, ``du/dn = g`` on its faces."""

    id: str
    d: int
    alpha: Callable
    f: Callable
    g: Callable | None
    u: Callable
    grad: Callable
    description: str = ""
    alpha_grad: Callable | None = field(default=None, repr=False)


def _const(value):
    return lambda x: np.full(np.shape(x)[1], float(value))


# -- sines ---------------------------------------------------------------

def _sin_product(d, freq=math.pi):
    def u(x):
        return np.prod(np.sin(freq * x), axis=0)

    def grad(x):
        s = np.sin(freq * x)
        c = np.cos(freq * x)
        out = np.empty_like(x, dtype=float)
        for i in range(d):
            others = np.prod(np.delete(s, i, axis=0), axis=0)
            out[i] = freq * c[i] * others
        return out

    return u, grad


def _sine1d():
    return (lambda x: np.sin(2 * math.pi * x[0]),
            lambda x: (2 * math.pi * np.cos(2 * math.pi * x[0]))[None, :])


# -- cosines (Neumann solutions) ----------------------------------------

def _cos_product(d):
    def u(x):
        return np.prod(np.cos(math.pi * x), axis=0)

    def grad(x):
        c = np.cos(math.pi * x)
        s = np.sin(math.pi * x)
        out = np.empty_like(x, dtype=float)
        for i in range(d):
            out[i] = -math.pi * s[i] * np.prod(np.delete(c, i, axis=0), axis=0)
        return out

    return u, grad


# -- Gabor ---------------------------------------------------------------

def _gabor(d):
    s2 = GABOR_SIGMA ** 2
    w = 2 * math.pi * GABOR_M

    def env(x):
        return np.exp(-np.sum((x - 0.5) ** 2, axis=0) / (2 * s2))

    def u(x):
        return env(x) * np.cos(w * x[0])

    def grad(x):
        e = env(x)
        c = np.cos(w * x[0])
        out = -(x - 0.5) / s2 * (e * c)
        out[0] -= e * w * np.sin(w * x[0])
        return out

    return u, grad


# -- Gaussian bump -------------------------------------------------------

def gauss_rate(d: int) -> float:
    return 7.03 / d


def _gaussian(d):
    c = gauss_rate(d)

    def u(x):
        return np.exp(-c * np.sum((x - GAUSS_CENTER) ** 2, axis=0))

    def grad(x):
        return -2 * c * (x - GAUSS_CENTER) * u(x)

    return u, grad


# -- catalog -------------------------------------------------------------

def _targets():
    out = {}
    u, g = _sine1d()
    out["sine1d"] = TargetFunction("sine1d", 1, u, g, "sin(2 pi x)")
    u, g = _gabor(1)
    out["gabor1d"] = TargetFunction("gabor1d", 1, u, g, "Gaussian envelope times cos(16 pi x)")
    u, g = _sin_product(2)
    out["sine2d"] = TargetFunction("sine2d", 2, u, g, "sin(pi x1) sin(pi x2)")
    u, g = _gabor(2)
    out["gabor2d"] = TargetFunction("gabor2d", 2, u, g, "Gaussian envelope times cos(16 pi x1)")
    u, g = _sin_product(3)
    out["sines3d"] = TargetFunction("sines3d", 3, u, g, "prod sin(pi x_i), d=3")
    u, g = _sin_product(4)
    out["sines4d"] = TargetFunction("sines4d", 4, u, g, "prod sin(pi x_i), d=4")
    u, g = _gaussian(4)
    out["gauss4d"] = TargetFunction("gauss4d", 4, u, g, "exp(-c |x-0.5|^2), c=7.03/4")
    u, g = _gaussian(10)
    out["gauss10d"] = TargetFunction("gauss10d", 10, u, g, "exp(-c |x-0.5|^2), c=7.03/10")
    return out


def _neumann_const():
    d = 3
    u, grad = _cos_product(d)
    f = lambda x: (1 + d * math.pi ** 2) * u(x)
    return PdeInstance("neumann3d-const", d, _const(1.0), f, None, u, grad,
                       "alpha=1, u=prod cos(pi x_i)", lambda x: np.zeros_like(x))


def _neumann_osc():
    d = 3
    u, grad = _cos_product(d)
    alpha = lambda x: 0.5 * np.sin(6 * math.pi * x[0]) + 1.0

    def alpha_grad(x):
        out = np.zeros_like(x, dtype=float)
        out[0] = 3 * math.pi * np.cos(6 * math.pi * x[0])
        return out

    def f(x):
        # -div(alpha grad u) + u = alpha (d pi^2) u - alpha'(x1) du/dx1 + u
        uu = u(x)
        du1 = grad(x)[0]
        return alpha(x) * d * math.pi ** 2 * uu - alpha_grad(x)[0] * du1 + uu

    return PdeInstance("neumann3d-osc", d, alpha, f, None, u, grad,
                       "alpha=1+sin(6 pi x1)/2, u=prod cos(pi x_i)", alpha_grad)


def _neumann_gauss(d):
    c = gauss_rate(d)
    u, grad = _gaussian(d)

    def f(x):
        r2 = (x - GAUSS_CENTER) ** 2
        return u(x) * (1 + np.sum(2 * c - 4 * c * c * r2, axis=0))

    def g(x, normal):
        return np.sum(grad(x) * normal, axis=0)

    return PdeInstance(f"neumann{d}d", d, _const(1.0), f, g, u, grad,
                       f"alpha=1, u=exp(-c |x-0.5|^2), c=7.03/{d}",
                       lambda x: np.zeros_like(x))


def _pdes():
    items = [_neumann_const(), _neumann_osc(), _neumann_gauss(4), _neumann_gauss(10)]
    return {p.id: p for p in items}


TARGETS = _targets()
PDES = _pdes()
CATALOG = {**TARGETS, **PDES}


def catalog_lookup(problem_id: str):
    """Return the :class:`TargetFunction` or :class:`PdeInstance` for an id."""
    try:
        return CATALOG[problem_id]
    except KeyError:
        raise KeyError(f"unknown problem {problem_id!r}; "
                       f"known: {', '.join(sorted(CATALOG))}") from None


def normal_derivative(instance, x, normal) -> np.ndarray:
    """``grad u . n`` at boundary points ``x`` with outward normals ``normal``."""
    return np.sum(instance.grad(x) * normal, axis=0)


# -- symbolic manufacturing ---------------------------------------------

def manufacture_rhs(u_expr, alpha_expr, symbols):
    """Source and Neumann data for ``-div(alpha grad u) + u = f``.

    Parameters
    ----------
    u_expr, alpha_expr : sympy expressions in ``symbols``
    symbols : sequence of sympy Symbols ``x_1 .. x_d``

    Returns
    -------
    f : callable
        ``f(x)`` for points of shape (d, n).
    g : callable
        ``g(x, normal)`` giving ``grad u . normal``.
    """
    symbols = list(symbols)
    grad_u = [sp.diff(u_expr, s) for s in symbols]
    div = sum(sp.diff(alpha_expr * gi, s) for gi, s in zip(grad_u, symbols))
    f_expr = sp.simplify(-div + u_expr)
    f_num = sp.lambdify(symbols, f_expr, "numpy")
    grad_num = [sp.lambdify(symbols, gi, "numpy") for gi in grad_u]

    def f(x):
        return np.broadcast_to(f_num(*x), (np.shape(x)[1],)).astype(float)

    def g(x, normal):
        cols = [np.broadcast_to(gn(*x), (np.shape(x)[1],)) for gn in grad_num]
        return np.sum(np.array(cols) * normal, axis=0)

    return f, g


def symbolic_instance(problem_id: str):
    """Sympy ``(u, alpha, symbols)`` for a catalog PDE, for cross-checks."""
    inst = PDES[problem_id]
    xs = sp.symbols(f"x1:{inst.d + 1}", real=True)
    if problem_id.startswith("neumann3d"):
        u = sp.Mul(*[sp.cos(sp.pi * x) for x in xs])
    else:
        c = sp.Rational(703, 100) / inst.d
        u = sp.exp(-c * sum((x - sp.Rational(1, 2)) ** 2 for x in xs))
    alpha = sp.sin(6 * sp.pi * xs[0]) / 2 + 1 if problem_id == "neumann3d-osc" else sp.Integer(1)
    return u, alpha, xs
