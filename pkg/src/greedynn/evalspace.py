"""Neuron evaluation, energy inner products and dictionary scoring.

Two inner products are supported on a quadrature rule:

* ``L2``:       <u, v> = sum_i w_i u_i v_i
* ``elliptic``: a(u, v) = sum_i w_i (alpha_i grad u_i . grad v_i + u_i v_i)

Any linear functional of a neuron that is a quadrature sum of values and
gradients can be written as ``sum_i rho_i s(x_i) + s'(x_i) (gam_i . omega)``.
:class:`Residual` holds such a pair ``(rho, gam)``; inner products with a
residual, Gram rows and right-hand sides are all computed that way through
the same kernel.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _kernels
from .dictionary import Dictionary, DictionaryAtom
from .quadrature import BoundaryRule, QuadratureRule


@dataclass(frozen=True, eq=False)
class FieldSamples:
    """Values (and optionally gradients, shape (d, n)) at a rule's nodes."""

    values: np.ndarray
    gradients: np.ndarray | None = None
    rule_id: tuple | None = None

    def __post_init__(self):
        if self.gradients is not None and self.gradients.shape[1] != self.values.shape[0]:
            raise ValueError("gradient and value node counts differ")

    def __sub__(self, other: "FieldSamples") -> "FieldSamples":
        _same_rule(self, other)
        grads = None
        if self.gradients is not None and other.gradients is not None:
            grads = self.gradients - other.gradients
        return FieldSamples(self.values - other.values, grads, self.rule_id)

    def __neg__(self):
        g = None if self.gradients is None else -self.gradients
        return FieldSamples(-self.values, g, self.rule_id)


def samples_of(func, rule: QuadratureRule, grad=None) -> FieldSamples:
    """Sample callables ``func`` (and ``grad``) on the rule nodes."""
    g = None if grad is None else np.asarray(grad(rule.nodes), dtype=float)
    return FieldSamples(np.asarray(func(rule.nodes), dtype=float), g, rule.key)


@dataclass(frozen=True, eq=False)
class EnergyForm:
    """Inner product and data of the problem.

    For ``kind="L2"`` only ``kind`` matters.  For ``kind="elliptic"``,
    ``alpha`` is the diffusion coefficient, ``f`` the source, ``g(x, normal)``
    the Neumann data (``None`` means zero) and ``boundary`` the face rule
    used for the boundary term ``int alpha g v ds``.
    """

    kind: str = "L2"
    alpha: Callable | None = None
    f: Callable | None = None
    g: Callable | None = None
    boundary: BoundaryRule | None = None

    def __post_init__(self):
        if self.kind not in ("L2", "elliptic"):
            raise ValueError(f"unknown form kind {self.kind!r}")

    @property
    def needs_grad(self) -> bool:
        return self.kind == "elliptic"

    def alpha_at(self, x) -> np.ndarray:
        a = np.ones(np.shape(x)[1]) if self.alpha is None else np.asarray(self.alpha(x), dtype=float)
        if np.any(a <= 0):
            raise ValueError("diffusion coefficient must be positive at every node")
        return a


def _same_rule(a: FieldSamples, b: FieldSamples) -> None:
    if a.rule_id is not None and b.rule_id is not None and a.rule_id != b.rule_id:
        raise ValueError("samples live on different quadrature rules")
    if a.values.shape != b.values.shape:
        raise ValueError("samples have different node counts")


def _relu_k(t, k):
    tp = np.maximum(t, 0.0)
    val = tp ** k
    slope = (t > 0).astype(float) if k == 1 else k * tp ** (k - 1)
    return val, slope


def eval_atom(atom: DictionaryAtom, rule: QuadratureRule, need_grad: bool = False) -> FieldSamples:
    """Sample ``sign * relu(omega . x + b)^k`` and its gradient on a rule.

    For k = 1 the derivative at the kink is taken as 0.
    """
    if atom.k < 1:
        raise ValueError("k must be >= 1")
    omega = np.asarray(atom.omega)
    t = omega @ rule.nodes + atom.b
    val, slope = _relu_k(t, atom.k)
    grads = atom.sign * slope[None, :] * omega[:, None] if need_grad else None
    return FieldSamples(atom.sign * val, grads, rule.key)


def inner_product(fa: FieldSamples, fb: FieldSamples, rule: QuadratureRule,
                  form: EnergyForm | None = None) -> float:
    """Discrete ``L2`` or elliptic inner product of two sampled fields."""
    form = form or EnergyForm()
    _same_rule(fa, fb)
    if fa.rule_id is not None and fa.rule_id != rule.key:
        raise ValueError("samples were not taken on this rule")
    w = rule.weights
    total = float(np.dot(w, fa.values * fb.values))
    if form.needs_grad:
        if fa.gradients is None or fb.gradients is None:
            raise ValueError("elliptic form needs gradients")
        aw = w * form.alpha_at(rule.nodes)
        total += float(np.dot(aw, np.sum(fa.gradients * fb.gradients, axis=0)))
    return total


def norm(fa: FieldSamples, rule: QuadratureRule, form: EnergyForm | None = None) -> float:
    return float(np.sqrt(max(inner_product(fa, fa, rule, form), 0.0)))


def rhs_functional(v: FieldSamples, form: EnergyForm, rule: QuadratureRule,
                   v_boundary: FieldSamples | None = None) -> float:
    """``int f v dx + int alpha g v ds``.

    ``v_boundary`` are the samples of ``v`` on ``form.boundary.flat``; it is
    required whenever the form has Neumann data.
    """
    total = 0.0
    if form.f is not None:
        total += float(np.dot(rule.weights * form.f(rule.nodes), v.values))
    if form.g is not None:
        if form.boundary is None or v_boundary is None:
            raise ValueError("nonzero Neumann data needs a boundary rule and boundary samples")
        br = form.boundary
        x = br.flat.nodes
        gw = br.flat.weights * form.alpha_at(x) * form.g(x, br.normals)
        total += float(np.dot(gw, v_boundary.values))
    return total


@dataclass(frozen=True, eq=False)
class Residual:
    """Linear functional ``v -> sum_i rho_i v(x_i) + gam_i . grad v(x_i)``.

    ``boundary_rho`` adds a values-only term on boundary nodes.
    """

    rho: np.ndarray
    gam: np.ndarray
    boundary_rho: np.ndarray | None = None


def tile_order(X: np.ndarray, block: int = _kernels.BLOCK) -> np.ndarray:
    """Node permutation grouping nearby nodes into runs of about ``block``.

    Nodes are bucketed on a uniform grid of the bounding box and sorted by
    bucket, so each kernel block covers a small box and atoms inactive on
    it are skipped.  The sort is stable, so the order is deterministic.
    """
    d, m = X.shape
    t = max(int((m / block) ** (1.0 / d)), 1)
    lo, hi = X.min(axis=1, keepdims=True), X.max(axis=1, keepdims=True)
    cell = np.minimum(((X - lo) / np.maximum(hi - lo, 1e-300) * t).astype(np.int64), t - 1)
    key = np.ravel_multi_index(tuple(cell), (t,) * d) if t ** d < 2 ** 62 else cell[0]
    return np.argsort(key, kind="stable")


@dataclass(eq=False)
class Discretization:
    """Precomputed weighted node data for one problem on one rule.

    Parameters
    ----------
    rule : QuadratureRule
        Training (volume) rule.
    form : EnergyForm
    target : callable, optional
        For ``L2`` forms: the function being approximated.
    exact, exact_grad : callable, optional
        Reference solution for error reporting (defaults to ``target``).
    """

    rule: QuadratureRule
    form: EnergyForm
    target: Callable | None = None
    exact: Callable | None = None
    exact_grad: Callable | None = None
    _bnodes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        # node arrays are held in tile order: ``self.X == rule.nodes[:, self.order]``
        order = self.order = tile_order(self.rule.nodes)
        X = np.ascontiguousarray(self.rule.nodes[:, order])
        self.X = X
        self.w = self.rule.weights[order]
        self.d, self.m = X.shape
        self.use_grad = self.form.needs_grad
        self.alpha_w = self.w * self.form.alpha_at(X) if self.use_grad else None
        if self.exact is None:
            self.exact = self.target
        if self.form.kind == "L2":
            if self.target is None:
                raise ValueError("L2 problems need a target function")
            self.rho_data = self.w * self.target(X)
        else:
            if self.form.f is None:
                raise ValueError("elliptic problems need a source term f")
            self.rho_data = self.w * self.form.f(X)
        self._bnodes = np.zeros((self.d, 0))
        self.rho_boundary = None
        if self.form.g is not None:
            br = self.form.boundary
            if br is None:
                raise ValueError("nonzero Neumann data needs a boundary rule")
            xb = br.flat.nodes
            self._bnodes = xb
            self.rho_boundary = br.flat.weights * self.form.alpha_at(xb) * self.form.g(xb, br.normals)
        self._empty = np.zeros((0, self.m))
        self.u_exact = self.u_exact_grad = None
        if self.exact is not None:
            self.u_exact = np.asarray(self.exact(X), dtype=float)
            if self.exact_grad is not None:
                self.u_exact_grad = np.asarray(self.exact_grad(X), dtype=float)

    # -- functionals -----------------------------------------------------

    def residual(self, u_vals, u_grads=None) -> Residual:
        """Galerkin residual functional ``v -> l(v) - a(u_n, v)``."""
        rho = self.rho_data - self.w * u_vals
        gam = -self.alpha_w * u_grads if self.use_grad else self._empty
        return Residual(rho, gam, self.rho_boundary)

    def functional_of(self, v_vals, v_grads=None) -> Residual:
        """The functional ``h -> a(v, h)`` for sampled ``v``."""
        rho = self.w * v_vals
        gam = self.alpha_w * v_grads if self.use_grad else self._empty
        return Residual(rho, gam, None)

    def apply(self, functional: Residual, dic: Dictionary) -> np.ndarray:
        """Evaluate a functional on every (unsigned) atom of ``dic``."""
        if len(dic) == 0:
            return np.zeros(0)
        out = _kernels.scores(self.X, functional.rho, functional.gam, dic.omega, dic.b, dic.k)
        if functional.boundary_rho is not None:
            out += _kernels.scores(self._bnodes, functional.boundary_rho,
                                   np.zeros((0, self._bnodes.shape[1])), dic.omega, dic.b, dic.k)
        return out

    def rhs(self, dic: Dictionary) -> np.ndarray:
        """``l(g)`` (L2: ``<u, g>``) for every atom."""
        return self.apply(Residual(self.rho_data, self._empty, self.rho_boundary), dic)

    def synthesize(self, dic: Dictionary, coeffs, X=None):
        """Values and (if the form needs them) gradients of ``sum c_j g_j``."""
        X = self.X if X is None else X
        return _kernels.synthesize(X, dic.omega, dic.b, np.ascontiguousarray(coeffs, dtype=float),
                                   dic.k, self.use_grad)

    def energy_sq(self, vals, grads=None) -> float:
        """Squared energy norm of sampled values."""
        total = float(np.dot(self.w, vals * vals))
        if self.use_grad:
            total += float(np.dot(self.alpha_w, np.sum(grads * grads, axis=0)))
        return total


def score_dictionary(atoms, residual: FieldSamples, rule: QuadratureRule,
                     form: EnergyForm | None = None, return_all: bool = False):
    """Atom maximizing ``|<g, residual>|`` under the form.

    Parameters
    ----------
    atoms : Dictionary or sequence of DictionaryAtom
        Candidates; their stored signs are ignored (both signs compete).
    residual : FieldSamples
        Samples of ``u - u_n`` (with gradients for elliptic forms).

    Returns
    -------
    best_index : int
        Lowest index among maximizers.
    best_value : float
        Signed inner product; its sign is the sign to give the atom.
    scores : ndarray, only if ``return_all``
    """
    form = form or EnergyForm()
    dic = atoms if isinstance(atoms, Dictionary) else Dictionary.from_atoms(atoms)
    if len(dic) == 0:
        raise ValueError("empty dictionary")
    if residual.rule_id is not None and residual.rule_id != rule.key:
        raise ValueError("residual was not sampled on this rule")
    rho = rule.weights * residual.values
    if form.needs_grad:
        if residual.gradients is None:
            raise ValueError("elliptic form needs residual gradients")
        gam = rule.weights * form.alpha_at(rule.nodes) * residual.gradients
    else:
        gam = np.zeros((0, len(rule)))
    s = _kernels.scores(rule.nodes, rho, np.ascontiguousarray(gam), dic.omega, dic.b, dic.k)
    best = int(np.argmax(np.abs(s)))
    if return_all:
        return best, float(s[best]), s
    return best, float(s[best])
