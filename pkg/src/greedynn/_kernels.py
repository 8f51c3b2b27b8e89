"""Fused ReLU^k kernels.

Pre-activations ``t = omega . x + b`` are recomputed on the fly instead of
caching (atoms x nodes) matrices, which do not fit in memory at 3D
quadrature sizes.  Loops run node-block outer, atom inner, so a block of
nodes stays in cache while every atom visits it; this makes the kernels
compute-bound rather than bandwidth-bound.

An atom whose pre-activation is non-positive on the bounding box of a node
block is exactly zero there, so that block is skipped for it.

Every reduction runs in a fixed order, so results are bit-identical across
runs on the same machine.
"""

import numpy as np
from numba import njit

BLOCK = 256


@njit(inline="always")
def _pow_km1(tp, k):
    # tp ** (k - 1) for tp >= 0
    if k == 1:
        return 1.0
    elif k == 2:
        return tp
    elif k == 3:
        return tp * tp
    elif k == 4:
        return tp * tp * tp
    r = tp
    for _ in range(k - 2):
        r *= tp
    return r


@njit(inline="always")
def _preact(X, omegas, j, b, i0, L, tbuf):
    for i in range(L):
        tbuf[i] = b
    for l in range(X.shape[0]):
        wl = omegas[j, l]
        xl = X[l, i0:i0 + L]
        for i in range(L):
            tbuf[i] += wl * xl[i]


@njit(inline="always")
def _block_box(X, i0, L, lo, hi):
    for l in range(X.shape[0]):
        a = X[l, i0]
        c = a
        for i in range(1, L):
            x = X[l, i0 + i]
            a = min(a, x)
            c = max(c, x)
        lo[l] = a
        hi[l] = c


@njit(inline="always")
def _dead(omegas, j, b, lo, hi):
    # upper bound of omega_j . x + b_j over the box [lo, hi]
    t = b
    for l in range(lo.shape[0]):
        w = omegas[j, l]
        t += w * hi[l] if w > 0.0 else w * lo[l]
    return t <= 0.0


@njit(fastmath=True, cache=True)
def scores(X, rho, gam, omegas, biases, k):
    """``out[j] = sum_i rho_i s_j(x_i) + s_j'(x_i) (gam_i . omega_j)``.

    ``s_j = relu(omega_j . x + b_j)^k``.  ``gam`` has shape (d, m) or (0, m);
    with zero rows the gradient term is skipped.
    """
    d, m = X.shape
    n_atoms = biases.shape[0]
    use_grad = gam.shape[0] > 0
    out = np.zeros(n_atoms)
    tbuf = np.empty(BLOCK)
    gbuf = np.empty(BLOCK)
    lo = np.empty(d)
    hi = np.empty(d)
    for i0 in range(0, m, BLOCK):
        L = min(BLOCK, m - i0)
        r = rho[i0:i0 + L]
        _block_box(X, i0, L, lo, hi)
        for j in range(n_atoms):
            if _dead(omegas, j, biases[j], lo, hi):
                continue
            _preact(X, omegas, j, biases[j], i0, L, tbuf)
            acc = 0.0
            if use_grad:
                for i in range(L):
                    gbuf[i] = 0.0
                for l in range(d):
                    wl = omegas[j, l]
                    gl = gam[l, i0:i0 + L]
                    for i in range(L):
                        gbuf[i] += wl * gl[i]
                if k == 1:
                    for i in range(L):
                        t = tbuf[i]
                        acc += r[i] * max(t, 0.0) + (1.0 if t > 0.0 else 0.0) * gbuf[i]
                else:
                    for i in range(L):
                        tp = max(tbuf[i], 0.0)
                        p = _pow_km1(tp, k)
                        acc += r[i] * p * tp + k * p * gbuf[i]
            else:
                for i in range(L):
                    tp = max(tbuf[i], 0.0)
                    acc += r[i] * _pow_km1(tp, k) * tp
            out[j] += acc
    return out


@njit(fastmath=True, cache=True)
def synthesize(X, omegas, biases, coeffs, k, need_grad):
    """Values and gradients of ``sum_j c_j relu(omega_j . x + b_j)^k``."""
    d, m = X.shape
    n_atoms = biases.shape[0]
    vals = np.zeros(m)
    grads = np.zeros((d if need_grad else 0, m))
    tbuf = np.empty(BLOCK)
    lo = np.empty(d)
    hi = np.empty(d)
    for i0 in range(0, m, BLOCK):
        L = min(BLOCK, m - i0)
        v = vals[i0:i0 + L]
        _block_box(X, i0, L, lo, hi)
        for j in range(n_atoms):
            if _dead(omegas, j, biases[j], lo, hi):
                continue
            c = coeffs[j]
            _preact(X, omegas, j, biases[j], i0, L, tbuf)
            for i in range(L):
                tp = max(tbuf[i], 0.0)
                v[i] += c * _pow_km1(tp, k) * tp
            if need_grad:
                if k == 1:
                    for i in range(L):
                        tbuf[i] = c if tbuf[i] > 0.0 else 0.0
                else:
                    for i in range(L):
                        tbuf[i] = c * k * _pow_km1(max(tbuf[i], 0.0), k)
                for l in range(d):
                    wl = omegas[j, l]
                    g = grads[l, i0:i0 + L]
                    for i in range(L):
                        g[i] += wl * tbuf[i]
    return vals, grads
