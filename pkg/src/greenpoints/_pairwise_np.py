"""Vectorized NumPy implementation of the pairwise energy/gradient loop.

Semantics mirror the compiled extension in ``_pairwise.pyx``: same masking
rules for the diagonal, coincident pairs and cut-locus pairs, same fixed
evaluation order (row blocks in index order).  Values agree with the
compiled backend to roundoff.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial import chebyshev as _cheb

_BLOCK_TARGET = 2_000_000  # ~ entries per row block


def _phi(r: np.ndarray, kern) -> np.ndarray:
    if kern.kind == 1:
        return -np.log(2.0 * np.sin(0.5 * r))
    if kern.kind == 2:
        return (2.0 * np.sin(0.5 * r)) ** (-kern.riesz_s)
    acc = np.full_like(r, kern.constant)
    for p, c in zip(kern.sing_pows, kern.sing_coefs):
        acc += c * r**p
    if kern.sing_log != 0.0:
        acc += kern.sing_log * np.log(r)
    if kern.cheb.size:
        acc += _cheb.chebval(2.0 * r / kern.diameter - 1.0, kern.cheb)
    return acc


def _dphi(r: np.ndarray, kern) -> np.ndarray:
    if kern.kind == 1:
        return -0.5 * np.cos(0.5 * r) / np.sin(0.5 * r)
    if kern.kind == 2:
        return -kern.riesz_s * np.cos(0.5 * r) * (2.0 * np.sin(0.5 * r)) ** (-kern.riesz_s - 1.0)
    acc = np.zeros_like(r)
    for p, c in zip(kern.dsing_pows, kern.dsing_coefs):
        acc += c * r**p
    if kern.dsing_inv != 0.0:
        acc += kern.dsing_inv / r
    if kern.chebd.size:
        acc += _cheb.chebval(2.0 * r / kern.diameter - 1.0, kern.chebd)
    return acc


def _quat_components(X: np.ndarray):
    N = X.shape[0]
    Q = X.reshape(N, -1, 4)
    return Q[:, :, 0], Q[:, :, 1], Q[:, :, 2], Q[:, :, 3]


def _inner_block(X: np.ndarray, fam: int, lo: int, hi: int):
    """Inner products of rows [lo, hi) against all rows.

    Returns (cosd, extra) where ``extra`` carries whatever the gradient
    alignment needs: the raw real inner product (RP), the complex inner
    product (CP), or the four quaternion component matrices (HP).
    """
    B = X[lo:hi]
    if fam == 0:
        H = B @ X.T
        return np.clip(H, -1.0, 1.0), None
    if fam == 1:
        H = B @ X.T
        return np.clip(np.abs(H), 0.0, 1.0), H
    if fam == 2:
        Z = np.ascontiguousarray(X).view(np.complex128)
        H = np.conj(Z[lo:hi]) @ Z.T
        return np.clip(np.abs(H), 0.0, 1.0), H
    w1, x1, y1, z1 = _quat_components(X[lo:hi])
    w2, x2, y2, z2 = _quat_components(X)
    hw = w1 @ w2.T + x1 @ x2.T + y1 @ y2.T + z1 @ z2.T
    hx = w1 @ x2.T - x1 @ w2.T - y1 @ z2.T + z1 @ y2.T
    hy = w1 @ y2.T + x1 @ z2.T - y1 @ w2.T - z1 @ x2.T
    hz = w1 @ z2.T - x1 @ y2.T + y1 @ x2.T - z1 @ w2.T
    mod = np.sqrt(hw * hw + hx * hx + hy * hy + hz * hz)
    return np.clip(mod, 0.0, 1.0), (hw, hx, hy, hz, mod)


def _blocks(N: int):
    size = max(1, _BLOCK_TARGET // max(N, 1))
    for lo in range(0, N, size):
        yield lo, min(N, lo + size)


def min_distance(X, fam):
    N = X.shape[0]
    dmin, imin, jmin = np.inf, -1, -1
    for lo, hi in _blocks(N):
        cosd, _ = _inner_block(X, fam, lo, hi)
        d = np.arccos(cosd)
        rows = np.arange(lo, hi)
        d[rows - lo, rows] = np.inf
        k = int(np.argmin(d))
        bi, bj = divmod(k, N)
        if d[bi, bj] < dmin:
            dmin = float(d[bi, bj])
            imin, jmin = lo + bi, bj
    return dmin, imin, jmin


def potentials(X, fam, kern, phi_fn=None):
    N = X.shape[0]
    P = np.zeros(N)
    dmin, imin, jmin = np.inf, -1, -1
    for lo, hi in _blocks(N):
        cosd, _ = _inner_block(X, fam, lo, hi)
        d = np.arccos(cosd)
        rows = np.arange(lo, hi)
        d[rows - lo, rows] = np.inf
        k = int(np.argmin(d))
        bi, bj = divmod(k, N)
        if d[bi, bj] < dmin:
            dmin = float(d[bi, bj])
            imin, jmin = lo + bi, bj
        # Mask the diagonal and any coincident pair before evaluating phi;
        # the caller rejects the configuration when dmin <= r_min anyway.
        live = ~np.isinf(d) & (d > kern.r_min)
        safe = np.where(live, d, 1.0)
        vals = _phi(safe, kern) if phi_fn is None else phi_fn(safe)
        vals = np.where(live, vals, 0.0)
        P[lo:hi] = vals.sum(axis=1)
    return P, dmin, imin, jmin


def gradient(X, fam, kern, delta_min, dphi_fn=None):
    N, m = X.shape
    D = kern.diameter
    G = np.zeros((N, m))
    degenerate = 0
    dmin, imin, jmin = np.inf, -1, -1
    for lo, hi in _blocks(N):
        cosd, extra = _inner_block(X, fam, lo, hi)
        d = np.arccos(cosd)
        rows = np.arange(lo, hi)
        d[rows - lo, rows] = np.inf
        k = int(np.argmin(d))
        bi, bj = divmod(k, N)
        if d[bi, bj] < dmin:
            dmin = float(d[bi, bj])
            imin, jmin = lo + bi, bj
        cut = d >= D - delta_min
        cut &= ~np.isinf(d)
        # Count unordered degenerate pairs: only j > i occurrences.
        ii = np.broadcast_to(rows[:, None], cut.shape)
        jj = np.broadcast_to(np.arange(N)[None, :], cut.shape)
        degenerate += int(np.count_nonzero(cut & (jj > ii)))
        live = ~(np.isinf(d) | cut | (d <= kern.r_min))
        safe = np.where(live, d, 1.0)
        slopes = _dphi(safe, kern) if dphi_fn is None else dphi_fn(safe)
        # factor f_ij multiplies (q~_j - cos d * x_i); zero on masked pairs
        F = np.where(live, -2.0 * slopes / np.sin(safe), 0.0)
        if fam == 0:
            G[lo:hi] = F @ X - ((F * cosd).sum(axis=1))[:, None] * X[lo:hi]
        elif fam == 1:
            signs = np.where(extra >= 0.0, 1.0, -1.0)
            G[lo:hi] = (F * signs) @ X - ((F * cosd).sum(axis=1))[:, None] * X[lo:hi]
        elif fam == 2:
            Z = np.ascontiguousarray(X).view(np.complex128)
            H = extra
            mod = np.abs(H)
            phase = np.where(live, np.conj(H) / np.where(mod > 0, mod, 1.0), 0.0)
            Gc = (F * phase) @ Z - ((F * cosd).sum(axis=1))[:, None] * Z[lo:hi]
            G[lo:hi] = Gc.view(np.float64)
        else:
            hw, hx, hy, hz, mod = extra
            modsafe = np.where(mod > 0, mod, 1.0)
            sw = np.where(live, F * hw / modsafe, 0.0)
            sx = np.where(live, F * (-hx) / modsafe, 0.0)
            sy = np.where(live, F * (-hy) / modsafe, 0.0)
            sz = np.where(live, F * (-hz) / modsafe, 0.0)
            w2, x2, y2, z2 = _quat_components(X)
            # q_j (x) s_ij accumulated over j, one Hamilton component at a time
            gw = sw @ w2 - sx @ x2 - sy @ y2 - sz @ z2
            gx = sw @ x2 + sx @ w2 + (sy @ z2 - sz @ y2) * -1.0
            gy = sw @ y2 + sy @ w2 + (sz @ x2 - sx @ z2) * -1.0
            gz = sw @ z2 + sz @ w2 + (sx @ y2 - sy @ x2) * -1.0
            B = hi - lo
            Gq = np.empty((B, m // 4, 4))
            Gq[:, :, 0] = gw
            Gq[:, :, 1] = gx
            Gq[:, :, 2] = gy
            Gq[:, :, 3] = gz
            G[lo:hi] = Gq.reshape(B, m) - ((F * cosd).sum(axis=1))[:, None] * X[lo:hi]
    return G, degenerate, dmin, imin, jmin
