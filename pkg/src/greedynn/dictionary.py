"""Discrete dictionaries of ReLU^k neurons.

A neuron ``sigma_k(omega . x + b)`` is parametrized by hyperspherical angles
``phi`` (giving the unit direction ``omega``) and a bias ``b``.  The
parameter box is ``[0, pi]^(d-2) x [0, 2 pi) x [c1, c2]``.

For ``d = 1`` the sphere is {-1, +1}; there are no angles and each bias is
paired with both directions.

Atom collections are held as :class:`Dictionary` (struct of arrays); a
single element can be pulled out as a :class:`DictionaryAtom`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np


def hyperspherical_map(phi, d: int | None = None) -> np.ndarray:
    """Map hyperspherical angles to unit vectors.

    Parameters
    ----------
    phi : array_like, shape (d-1,) or (N, d-1)
    d : int, optional
        Ambient dimension; checked against ``phi`` when given.

    Returns
    -------
    ndarray, shape (d,) or (N, d)
    """
    phi = np.asarray(phi, dtype=float)
    single = phi.ndim == 1
    phi = np.atleast_2d(phi)
    dim = phi.shape[1] + 1
    if d is not None and d != dim:
        raise ValueError(f"expected {d - 1} angles, got {phi.shape[1]}")
    if dim < 2:
        raise ValueError("hyperspherical coordinates need d >= 2")
    s = np.sin(phi)
    c = np.cos(phi)
    out = np.empty((phi.shape[0], dim))
    run = np.ones(phi.shape[0])
    for i in range(dim - 1):
        out[:, i] = run * c[:, i]
        run = run * s[:, i]
    out[:, -1] = run
    return out[0] if single else out


@dataclass(frozen=True)
class ParamSpace:
    """Box of (angles, bias) parametrizing the ReLU^k dictionary."""

    d: int
    c1: float
    c2: float

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if not self.c1 < self.c2:
            raise ValueError("need c1 < c2")

    @classmethod
    def unit_cube(cls, d: int, c: float | None = None) -> "ParamSpace":
        """Symmetric bias range ``[-c, c]`` (default ``sqrt(d)``) for [0,1]^d."""
        c = math.sqrt(d) if c is None else c
        return cls(d, -c, c)

    def covers_unit_cube(self) -> bool:
        """Whether the bias range contains every omega.x for x in [0,1]^d."""
        r = math.sqrt(self.d)
        return self.c1 <= -r and r <= self.c2

    @property
    def angle_lo(self) -> np.ndarray:
        return np.zeros(max(self.d - 1, 0))

    @property
    def angle_hi(self) -> np.ndarray:
        hi = np.full(max(self.d - 1, 0), math.pi)
        if self.d >= 2:
            hi[-1] = 2 * math.pi
        return hi

    @property
    def lo(self) -> np.ndarray:
        return np.append(self.angle_lo, self.c1)

    @property
    def hi(self) -> np.ndarray:
        return np.append(self.angle_hi, self.c2)

    @property
    def sides(self) -> np.ndarray:
        return self.hi - self.lo

    def volume(self) -> float:
        # for d = 1 this is 2 (c2 - c1): two directions times the bias range
        return 2 * math.pi ** (self.d - 1) * (self.c2 - self.c1)


@dataclass(frozen=True)
class DictionaryAtom:
    """One signed neuron ``sign * relu(omega . x + b)^k``."""

    sign: int
    phi: tuple
    b: float
    omega: tuple
    k: int

    @classmethod
    def from_params(cls, phi, b: float, k: int, sign: int = 1,
                    d: int | None = None, omega=None) -> "DictionaryAtom":
        phi = tuple(float(p) for p in np.atleast_1d(phi))
        if omega is None:
            if not phi:
                raise ValueError("d = 1 atoms need an explicit omega of +1 or -1")
            omega = hyperspherical_map(phi, d)
        return cls(int(sign), phi, float(b), tuple(float(w) for w in np.atleast_1d(omega)), int(k))

    @property
    def d(self) -> int:
        return len(self.omega)

    def __call__(self, x) -> np.ndarray:
        """Evaluate at points ``x`` of shape (d, n)."""
        t = np.asarray(self.omega) @ np.atleast_2d(x) + self.b
        return self.sign * np.maximum(t, 0.0) ** self.k


@dataclass(frozen=True, eq=False)
class Dictionary:
    """A finite set of unsigned neurons held as arrays.

    ``phi`` has shape (N, d-1) (zero columns for d = 1), ``omega`` (N, d),
    ``b`` (N,).  Scoring resolves the sign, so the effective dictionary is
    twice as large.
    """

    phi: np.ndarray
    b: np.ndarray
    omega: np.ndarray
    k: int

    def __post_init__(self):
        for name in ("phi", "b", "omega"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not (len(self.phi) == len(self.b) == len(self.omega)):
            raise ValueError("inconsistent atom arrays")
        if self.k < 1:
            raise ValueError("k must be >= 1")

    @classmethod
    def from_angles(cls, phi, b, k: int) -> "Dictionary":
        phi = np.atleast_2d(np.asarray(phi, dtype=float))
        return cls(phi, b, hyperspherical_map(phi), k)

    @property
    def d(self) -> int:
        return self.omega.shape[1]

    def __len__(self) -> int:
        return self.b.shape[0]

    def atom(self, i: int, sign: int = 1) -> DictionaryAtom:
        return DictionaryAtom(int(sign), tuple(self.phi[i]), float(self.b[i]),
                              tuple(self.omega[i]), self.k)

    def atoms(self) -> list[DictionaryAtom]:
        return [self.atom(i) for i in range(len(self))]

    def __iter__(self):
        return iter(self.atoms())

    def subset(self, idx) -> "Dictionary":
        idx = np.asarray(idx, dtype=np.intp)
        return Dictionary(self.phi[idx], self.b[idx], self.omega[idx], self.k)

    @classmethod
    def from_atoms(cls, atoms) -> "Dictionary":
        atoms = list(atoms)
        if not atoms:
            raise ValueError("empty atom list")
        d = atoms[0].d
        phi = np.array([a.phi for a in atoms], dtype=float).reshape(len(atoms), d - 1)
        b = np.array([a.b for a in atoms])
        omega = np.array([a.omega for a in atoms])
        return cls(phi, b, omega, atoms[0].k)

    def to_text(self, path=None, signs=None) -> str:
        """One atom per line: ``sign phi_1 .. phi_{d-1} b`` (plus omega for d=1)."""
        signs = np.ones(len(self)) if signs is None else np.asarray(signs)
        lines = [f"# d={self.d} k={self.k} N={len(self)}"]
        for i in range(len(self)):
            cols = [f"{int(signs[i]):d}"]
            cols += [repr(float(p)) for p in self.phi[i]]
            cols.append(repr(float(self.b[i])))
            if self.d == 1:
                cols.append(repr(float(self.omega[i, 0])))
            lines.append(" ".join(cols))
        text = "\n".join(lines) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_text(cls, text: str) -> tuple["Dictionary", np.ndarray]:
        lines = text.strip().splitlines()
        header = dict(item.split("=") for item in lines[0].lstrip("# ").split())
        d, k = int(header["d"]), int(header["k"])
        rows = np.array([[float(v) for v in ln.split()] for ln in lines[1:]]).reshape(-1, d + 1 + (d == 1))
        signs = rows[:, 0].astype(int)
        if d == 1:
            phi = np.zeros((len(rows), 0))
            return cls(phi, rows[:, 1], rows[:, 2:3], k), signs
        phi = rows[:, 1:d]
        return cls(phi, rows[:, d], hyperspherical_map(phi), k), signs


@dataclass(frozen=True, eq=False)
class GridDictionary:
    """Result of :func:`build_deterministic`."""

    dictionary: Dictionary
    counts: tuple
    N: int
    ell: float
    delta: float
    widths: tuple
    degenerate: bool = False


def _grid_counts(sides: np.ndarray, n_target: int) -> list[int]:
    """Cell counts per axis: proportional to the sides, product <= n_target."""
    dim = len(sides)
    scale = (n_target / np.prod(sides)) ** (1.0 / dim)
    counts = [max(1, int(math.floor(s * scale))) for s in sides]
    while math.prod(counts) > n_target:
        # floor can still overshoot when several axes are clamped at 1
        i = max((i for i in range(dim) if counts[i] > 1),
                key=lambda i: -sides[i] / counts[i])
        counts[i] -= 1
    while True:
        # refine the axis with the widest cells that still fits
        order = sorted(range(dim), key=lambda i: -sides[i] / counts[i])
        for i in order:
            if math.prod(counts) // counts[i] * (counts[i] + 1) <= n_target:
                counts[i] += 1
                break
        else:
            return counts


def _centers(lo: float, hi: float, m: int) -> np.ndarray:
    return lo + (np.arange(m) + 0.5) * (hi - lo) / m


def build_deterministic(space: ParamSpace, n_target: int, k: int = 1,
                        counts=None) -> GridDictionary:
    """Cell centers of a regular grid on the parameter box.

    The per-axis cell counts are chosen proportional to the box sides so the
    cells are close to cubes (this keeps the cell diagonal small), subject to
    ``prod(counts) <= n_target``.  Pass ``counts`` to force a split.

    For ``d = 1`` only the bias axis is gridded; each of the ``n_target``
    bias centers appears with both directions.

    Returns
    -------
    GridDictionary
        With achieved ``N``, main cell diagonal ``ell`` and the ratio
        ``delta = ell / sqrt(d) * (N / |R|)^(1/d)`` (always >= 1).
    """
    if n_target < 1:
        raise ValueError("n_target must be >= 1")
    d = space.d
    if d == 1:
        m = int(n_target) if counts is None else int(np.atleast_1d(counts)[0])
        b = _centers(space.c1, space.c2, m)
        bb = np.concatenate([b, b])
        omega = np.concatenate([np.ones(m), -np.ones(m)])[:, None]
        dic = Dictionary(np.zeros((2 * m, 0)), bb, omega, k)
        width = (space.c2 - space.c1) / m
        return GridDictionary(dic, (m,), m, width, 1.0, (width,))

    sides = space.sides
    degenerate = False
    if counts is None:
        if n_target < d:
            degenerate = True
            counts = [1] * d
        else:
            counts = _grid_counts(sides, n_target)
    counts = [int(c) for c in counts]
    if len(counts) != d or min(counts) < 1:
        raise ValueError(f"counts must be {d} positive integers")

    axes = [_centers(lo, hi, m) for lo, hi, m in zip(space.lo, space.hi, counts)]
    mesh = np.meshgrid(*axes, indexing="ij")
    params = np.stack([g.ravel() for g in mesh], axis=1)
    dic = Dictionary.from_angles(params[:, :-1], params[:, -1], k)

    N = math.prod(counts)
    widths = sides / np.asarray(counts)
    ell = float(np.linalg.norm(widths))
    delta = ell / math.sqrt(d) * (N / space.volume()) ** (1.0 / d)
    return GridDictionary(dic, tuple(counts), N, ell, delta, tuple(widths), degenerate)


def sample_params(space: ParamSpace, N: int, rng) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Draw N parameter tuples uniformly on the box.

    Returns ``(phi, b, omega)``; for d = 1 the direction is a fair coin.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    rng = np.random.default_rng(rng)
    d = space.d
    if d == 1:
        omega = rng.choice([-1.0, 1.0], size=(N, 1))
        b = rng.uniform(space.c1, space.c2, size=N)
        return np.zeros((N, 0)), b, omega
    u = rng.random((N, d))
    params = space.lo + u * space.sides
    phi, b = params[:, :-1], params[:, -1]
    return phi, b, hyperspherical_map(phi)


def sample_randomized(space: ParamSpace, N: int, seed=None, k: int = 1) -> Dictionary:
    """Randomized dictionary of N atoms drawn uniformly on the parameter box."""
    phi, b, omega = sample_params(space, N, seed)
    return Dictionary(phi, b, omega, k)
