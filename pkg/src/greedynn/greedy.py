"""Orthogonal and relaxed greedy training of shallow ReLU^k networks.

The orthogonal greedy loop alternates

1. score a discrete dictionary against the current residual,
2. take the atom with the largest ``|<g, u - u_{n-1}>|`` (sign resolved),
3. project the target onto the span of the selected atoms.

The dictionary is either a fixed grid (built once) or a fresh uniform sample
every iteration.  The projection keeps the full Gram matrix and an
incrementally extended Cholesky factor; the factor is rebuilt from the
stored Gram matrix every ``refactor_every`` iterations or when the normal
equations drift.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cholesky, solve_triangular

from .dictionary import (Dictionary, DictionaryAtom, ParamSpace,
                         build_deterministic, sample_randomized)
from .evalspace import Discretization, Residual
from .quadrature import QuadratureRule
from .report import ConvergenceRecord, record_points, with_orders

log = logging.getLogger(__name__)

_ALIASES = {
    "oga-deterministic": ("oga", "deterministic"),
    "oga-randomized": ("oga", "randomized"),
}


class CollinearityError(ValueError):
    """The candidate atom is (numerically) in the span of the selected ones."""


@dataclass
class RunConfig:
    """Settings of one greedy run.

    ``algorithm`` is ``"oga"`` or ``"wrga"`` (the combined names
    ``"oga-deterministic"`` / ``"oga-randomized"`` are accepted too) and
    ``dictionary`` is ``"randomized"`` or ``"deterministic"``.
    """

    algorithm: str = "oga"
    dictionary: str = "randomized"
    k: int = 1
    N: int = 64
    n_max: int = 256
    seed: int = 0
    M: float | None = None
    c: float | None = None
    grid_counts: tuple | None = None
    tol_orth: float = 1e-8
    tol_collinear: float = 1e-10
    refactor_every: int = 64
    record_every: int | None = None
    record_at: tuple | None = None
    keep_snapshots: bool = False
    check_orthogonality: bool = True
    baseline: bool = False
    eval_rule: QuadratureRule | None = None

    def __post_init__(self):
        if self.algorithm in _ALIASES:
            self.algorithm, self.dictionary = _ALIASES[self.algorithm]
        if self.algorithm not in ("oga", "wrga"):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.dictionary not in ("randomized", "deterministic"):
            raise ValueError(f"unknown dictionary kind {self.dictionary!r}")
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.algorithm == "wrga" and (self.M is None or self.M <= 0):
            raise ValueError("WRGA needs an l1 budget M > 0")

    def points(self) -> list[int]:
        if self.record_at is not None:
            return sorted({n for n in self.record_at if 1 <= n <= self.n_max})
        return record_points(self.n_max, self.record_every)


class GreedyState:
    """Selected atoms, coefficients and the current approximation at nodes."""

    def __init__(self, disc: Discretization, k: int, capacity: int = 64):
        self.disc = disc
        self.k = k
        d = disc.d
        self.n = 0
        self._phi = np.zeros((capacity, max(d - 1, 0)))
        self._omega = np.zeros((capacity, d))
        self._b = np.zeros(capacity)
        self._sign = np.zeros(capacity)
        self.G = np.zeros((capacity, capacity))
        self.L = np.zeros((capacity, capacity))
        self.rhs = np.zeros(capacity)
        self.z = np.zeros(capacity)
        self.coeffs = np.zeros(0)
        self.u_vals = np.zeros(disc.m)
        self.u_grads = np.zeros((d, disc.m)) if disc.use_grad else None
        self.history: list[dict] = []
        self.records: list[ConvergenceRecord] = []
        self.diagnostics: list[dict] = []
        self.snapshots: list[Residual] = []
        self.selected_idx: list[int] = []
        self.stop_reason: str | None = None
        self.refactorizations = 0

    # -- storage ---------------------------------------------------------

    def _grow(self):
        cap = self._b.shape[0]
        if self.n < cap:
            return
        new = 2 * cap

        def pad(a, shape):
            out = np.zeros(shape)
            out[tuple(slice(0, s) for s in a.shape)] = a
            return out

        self._phi = pad(self._phi, (new, self._phi.shape[1]))
        self._omega = pad(self._omega, (new, self._omega.shape[1]))
        self._b = pad(self._b, (new,))
        self._sign = pad(self._sign, (new,))
        self.G = pad(self.G, (new, new))
        self.L = pad(self.L, (new, new))
        self.rhs = pad(self.rhs, (new,))
        self.z = pad(self.z, (new,))

    def _append(self, dic: Dictionary, idx: int, sign: float):
        self._grow()
        n = self.n
        self._phi[n] = dic.phi[idx]
        self._omega[n] = dic.omega[idx]
        self._b[n] = dic.b[idx]
        self._sign[n] = sign
        self.n += 1

    @property
    def signs(self) -> np.ndarray:
        return self._sign[:self.n]

    @property
    def selected(self) -> Dictionary:
        """Selected atoms without signs."""
        n = self.n
        return Dictionary(self._phi[:n], self._b[:n], self._omega[:n], self.k)

    @property
    def atoms(self) -> list[DictionaryAtom]:
        sel = self.selected
        return [sel.atom(i, int(self._sign[i])) for i in range(self.n)]

    @property
    def effective_coeffs(self) -> np.ndarray:
        """Coefficients of the unsigned atoms."""
        return self.coeffs * self.signs

    @property
    def gram(self) -> np.ndarray:
        return self.G[:self.n, :self.n]

    def residual(self) -> Residual:
        return self.disc.residual(self.u_vals, self.u_grads)

    def l1(self) -> float:
        return float(np.sum(np.abs(self.coeffs)))

    # -- projection ------------------------------------------------------

    def refactor(self):
        """Rebuild the Cholesky factor and coefficients from the stored Gram."""
        n = self.n
        if n == 0:
            return
        self.L[:n, :n] = cholesky(self.G[:n, :n], lower=True)
        self.z[:n] = solve_triangular(self.L[:n, :n], self.rhs[:n], lower=True)
        self._solve_coeffs()
        self.refactorizations += 1

    def _solve_coeffs(self):
        n = self.n
        self.coeffs = solve_triangular(self.L[:n, :n].T, self.z[:n], lower=False)
        vals, grads = self.disc.synthesize(self.selected, self.effective_coeffs)
        self.u_vals = vals
        if self.disc.use_grad:
            self.u_grads = grads

    def normal_residual(self) -> float:
        """Max relative residual of the normal equations ``G c = b``."""
        n = self.n
        if n == 0:
            return 0.0
        r = self.rhs[:n] - self.G[:n, :n] @ self.coeffs
        ref = energy_error(self) if self.disc.u_exact is not None else self.projection_norm()
        scale = np.sqrt(np.diag(self.G[:n, :n])) * max(ref, 1e-300)
        return float(np.max(np.abs(r) / scale))

    def projection_norm(self) -> float:
        """Energy norm of the current approximation, ``|z|``."""
        return float(np.linalg.norm(self.z[:self.n]))

    def discrete_energy(self) -> float:
        """``1/2 a(u_n, u_n) - l(u_n) = -|z|^2 / 2``; non-increasing for OGA."""
        return -0.5 * float(self.z[:self.n] @ self.z[:self.n])

    def dump(self, path=None) -> str:
        """Plain-text network: one line ``coeff phi_1 .. phi_{d-1} b [omega]`` per neuron.

        ``coeff`` multiplies the unsigned atom, so the network is
        ``sum coeff_i relu(omega_i . x + b_i)^k``.
        """
        text = self.selected.to_text(signs=np.ones(self.n))
        head, *rows = text.splitlines()
        c = self.effective_coeffs
        lines = [head] + [repr(float(c[i])) + row[row.index(" "):] for i, row in enumerate(rows)]
        out = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(out)
        return out


def load_network(text: str) -> tuple[Dictionary, np.ndarray]:
    """Read a :meth:`GreedyState.dump` back as ``(atoms, coeffs)``."""
    rows = text.strip().splitlines()
    coeffs = np.array([float(r.split(maxsplit=1)[0]) for r in rows[1:]])
    rebuilt = "\n".join([rows[0]] + ["1" + r[r.index(" "):] for r in rows[1:]])
    dic, _ = Dictionary.from_text(rebuilt)
    return dic, coeffs


def project(state: GreedyState, dic: Dictionary, idx: int, sign: float = 1.0,
            tol_collinear: float = 1e-10) -> GreedyState:
    """Add atom ``sign * dic[idx]`` and project onto the enlarged span.

    Solves ``G c = b`` with ``b_i = l(g_i)`` (``<u, g_i>`` for L2 problems),
    extending the Cholesky factor by one row.  Raises
    :class:`CollinearityError`, leaving ``state`` unchanged, if the part of
    the new atom orthogonal to the current span has squared norm below
    ``tol_collinear`` times its squared norm.
    """
    disc = state.disc
    n = state.n
    one = dic.subset([idx])
    v, gv = disc.synthesize(one, [1.0])
    diag = disc.energy_sq(v, gv)
    if not diag > 0.0:
        raise CollinearityError("atom vanishes on the quadrature nodes")
    if n:
        row = sign * state.signs * disc.apply(disc.functional_of(v, gv), state.selected)
        y = solve_triangular(state.L[:n, :n], row, lower=True)
    else:
        row = y = np.zeros(0)
    s2 = diag - float(y @ y)
    if s2 < tol_collinear * diag:
        raise CollinearityError(f"orthogonal part {s2:.3e} of atom with norm^2 {diag:.3e}")
    b_new = sign * float(disc.rhs(one)[0])

    state._append(dic, idx, sign)
    state.G[n, :n] = row
    state.G[:n, n] = row
    state.G[n, n] = diag
    state.rhs[n] = b_new
    state.L[n, :n] = y
    state.L[n, n] = math.sqrt(s2)
    state.z[n] = (b_new - float(y @ state.z[:n])) / state.L[n, n]
    state._solve_coeffs()
    return state


# -- error reporting -----------------------------------------------------

def _errors(state: GreedyState, eval_rule: QuadratureRule | None):
    disc = state.disc
    if disc.u_exact is None:
        return None, None
    want_h1 = disc.use_grad and disc.u_exact_grad is not None
    if eval_rule is None:
        w = disc.w
        du = disc.u_exact - state.u_vals
        dg = disc.u_exact_grad - state.u_grads if want_h1 else None
    else:
        X = eval_rule.nodes
        w = eval_rule.weights
        if state.n:
            vals, grads = disc.synthesize(state.selected, state.effective_coeffs, X=X)
        else:
            vals, grads = np.zeros(X.shape[1]), np.zeros((disc.d if disc.use_grad else 0, X.shape[1]))
        du = disc.exact(X) - vals
        dg = disc.exact_grad(X) - grads if want_h1 else None
    e2 = math.sqrt(max(float(w @ (du * du)), 0.0))
    eh = math.sqrt(max(float(w @ np.sum(dg * dg, axis=0)), 0.0)) if want_h1 else None
    return e2, eh


def energy_error(state: GreedyState) -> float:
    """``|u - u_n|`` in the energy norm on the training nodes."""
    disc = state.disc
    du = disc.u_exact - state.u_vals
    dg = disc.u_exact_grad - state.u_grads if disc.use_grad else None
    return math.sqrt(max(disc.energy_sq(du, dg), 0.0))


def orthogonality(state: GreedyState) -> float:
    """``max_i |<g_i, u - u_n>| / (|u - u_n| |g_i|)`` through the node kernel."""
    if state.n == 0 or state.disc.u_exact is None:
        return 0.0
    inner = state.signs * state.disc.apply(state.residual(), state.selected)
    norms = np.sqrt(np.diag(state.gram))
    r = energy_error(state)
    if r == 0.0:
        return 0.0
    return float(np.max(np.abs(inner) / (norms * r)))


def _record(state: GreedyState, config: RunConfig, n: int):
    e2, eh = _errors(state, config.eval_rule)
    if e2 is None:
        return
    state.records.append(ConvergenceRecord(n, e2, eh))
    diag = {"n": n, "err_l2": e2, "err_h1": eh, "l1": state.l1()}
    if config.algorithm == "oga" and config.check_orthogonality and state.disc.u_exact is not None:
        diag["orthogonality"] = orthogonality(state)
        diag["energy_error"] = energy_error(state)
    state.diagnostics.append(diag)


# -- drivers -------------------------------------------------------------

def iteration_rng(seed: int, n: int) -> np.random.Generator:
    """Independent generator for iteration ``n`` of a run seeded with ``seed``."""
    return np.random.default_rng([int(seed), int(n)])


def _dictionary_source(config: RunConfig, space: ParamSpace, fixed: Dictionary | None = None):
    if fixed is not None:
        if fixed.k != config.k or fixed.d != space.d:
            raise ValueError(f"fixed dictionary (k={fixed.k}, d={fixed.d}) does not match "
                             f"the run (k={config.k}, d={space.d})")
        return lambda n: fixed, None
    if config.dictionary == "deterministic":
        grid = build_deterministic(space, config.N, config.k, config.grid_counts)
        if grid.degenerate:
            log.warning("N=%d is below the grid dimension; using a single cell", config.N)
        return lambda n: grid.dictionary, grid
    return lambda n: sample_randomized(space, config.N, iteration_rng(config.seed, n), config.k), None


def run_oga(config: RunConfig, disc: Discretization, space: ParamSpace | None = None,
            fixed: Dictionary | None = None) -> GreedyState:
    """Orthogonal greedy algorithm with a deterministic or randomized dictionary.

    Starts from ``u_0 = 0``.  On a collinear selection the next-best atom of
    the same dictionary is tried; if every candidate is rejected the run
    stops early and ``state.stop_reason`` says why.  ``fixed`` replaces the
    configured dictionary by a given one, used at every iteration.
    """
    if config.algorithm != "oga":
        raise ValueError("run_oga needs algorithm='oga'")
    space = space or ParamSpace.unit_cube(disc.d, config.c)
    state = GreedyState(disc, config.k, capacity=min(config.n_max, 1024))
    draw, grid = _dictionary_source(config, space, fixed)
    state.grid = grid
    points = set(config.points())
    if config.baseline:
        _record(state, config, 0)

    for n in range(1, config.n_max + 1):
        dic = draw(n)
        res = state.residual()
        if config.keep_snapshots:
            state.snapshots.append(res)
        s = disc.apply(res, dic)
        rejected = 0
        for idx in np.argsort(-np.abs(s), kind="stable"):
            sign = 1.0 if s[idx] >= 0 else -1.0
            try:
                project(state, dic, int(idx), sign, config.tol_collinear)
            except CollinearityError:
                rejected += 1
                continue
            state.selected_idx.append(int(idx))
            break
        else:
            state.stop_reason = f"iteration {n}: all {len(dic)} candidates collinear with the span"
            log.warning(state.stop_reason)
            if config.keep_snapshots:
                state.snapshots.pop()
            break

        drift = state.normal_residual()
        if n % config.refactor_every == 0 or drift > config.tol_orth:
            state.refactor()
            drift = state.normal_residual()
        state.history.append({
            "n": n, "score": float(s[idx]), "rejected": rejected,
            "energy": state.discrete_energy(), "drift": drift, "l1": state.l1(),
        })
        if n in points:
            _record(state, config, n)

    state.records = with_orders(state.records)
    return state


def relaxation(n: int) -> float:
    """Step size ``min(1, 2/n)`` of the relaxed greedy algorithm."""
    return min(1.0, 2.0 / n)


def run_wrga(config: RunConfig, disc: Discretization, space: ParamSpace | None = None,
             fixed: Dictionary | None = None) -> GreedyState:
    """Relaxed greedy algorithm for ``E(v) = |u - v|^2 / 2``.

    ``u_n = (1 - a_n) u_{n-1} + a_n M s_n h_n`` with ``a_n = min(1, 2/n)``,
    where ``s_n h_n`` is the signed atom best aligned with ``u - u_{n-1}``.
    Coefficients stay in the l1 ball of radius ``M``.
    """
    if config.algorithm != "wrga":
        raise ValueError("run_wrga needs algorithm='wrga'")
    M = float(config.M)
    space = space or ParamSpace.unit_cube(disc.d, config.c)
    state = GreedyState(disc, config.k, capacity=min(config.n_max, 1024))
    draw, grid = _dictionary_source(config, space, fixed)
    state.grid = grid
    points = set(config.points())
    coeffs = []
    if config.baseline:
        _record(state, config, 0)

    for n in range(1, config.n_max + 1):
        dic = draw(n)
        res = state.residual()
        if config.keep_snapshots:
            state.snapshots.append(res)
        s = disc.apply(res, dic)
        idx = int(np.argmax(np.abs(s)))
        sign = 1.0 if s[idx] >= 0 else -1.0
        a = relaxation(n)
        v, gv = disc.synthesize(dic.subset([idx]), [1.0])
        state.u_vals = (1 - a) * state.u_vals + a * M * sign * v
        if disc.use_grad:
            state.u_grads = (1 - a) * state.u_grads + a * M * sign * gv
        coeffs = [(1 - a) * c for c in coeffs] + [a * M]
        state._append(dic, idx, sign)
        state.coeffs = np.array(coeffs)
        state.selected_idx.append(idx)

        entry = {"n": n, "alpha": a, "score": float(s[idx]), "l1": state.l1()}
        if disc.u_exact is not None:
            entry["energy"] = 0.5 * energy_error(state) ** 2
        state.history.append(entry)
        if n in points:
            _record(state, config, n)

    state.records = with_orders(state.records)
    return state


def run(config: RunConfig, disc: Discretization, space: ParamSpace | None = None,
        fixed: Dictionary | None = None) -> GreedyState:
    if config.algorithm == "wrga":
        return run_wrga(config, disc, space, fixed)
    return run_oga(config, disc, space, fixed)


@dataclass
class GammaEstimate:
    gamma: np.ndarray
    clipped: np.ndarray = field(default_factory=lambda: np.zeros(0, bool))

    @property
    def min(self) -> float:
        return float(np.min(self.gamma))


def estimate_gamma(state: GreedyState, reference: Dictionary) -> GammaEstimate:
    """Realized weakness ``|<g_n, r_{n-1}>| / max_ref |<g, r_{n-1}>|``.

    Needs a run made with ``keep_snapshots=True``.  Values above one (the
    reference is itself discrete) are clipped to one and flagged.
    """
    snaps = state.snapshots
    if len(snaps) < state.n or state.n == 0:
        raise ValueError("run has no residual snapshots; use keep_snapshots=True")
    disc = state.disc
    sel = state.selected
    gam = np.empty(state.n)
    for i in range(state.n):
        chosen = abs(disc.apply(snaps[i], sel.subset([i]))[0])
        best = float(np.max(np.abs(disc.apply(snaps[i], reference))))
        gam[i] = chosen / best if best > 0 else 1.0
    clipped = gam > 1.0
    return GammaEstimate(np.minimum(gam, 1.0), clipped)
