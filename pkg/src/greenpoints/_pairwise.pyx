# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled pairwise energy/gradient loop.

Scalar twin of ``_pairwise_np``: one pass over unordered pairs, per-point
potentials accumulated with Neumaier compensation in ascending index order.
"""

from libc.math cimport acos, cos, fabs, log, pow, sin, sqrt

import numpy as np


cdef inline double _clenshaw(const double[::1] c, double x) noexcept nogil:
    cdef Py_ssize_t k = c.shape[0]
    cdef double b1 = 0.0, b2 = 0.0, tmp
    if k == 0:
        return 0.0
    while k > 1:
        k -= 1
        tmp = 2.0 * x * b1 - b2 + c[k]
        b2 = b1
        b1 = tmp
    return x * b1 - b2 + c[0]


cdef inline double _phi(double r, int kind, double riesz_s, double D, double C,
                        const double[::1] sp, const double[::1] sc, double slog,
                        const double[::1] cheb) noexcept nogil:
    cdef double acc
    cdef Py_ssize_t j
    if kind == 1:
        return -log(2.0 * sin(0.5 * r))
    if kind == 2:
        return pow(2.0 * sin(0.5 * r), -riesz_s)
    acc = C
    for j in range(sp.shape[0]):
        acc += sc[j] * pow(r, sp[j])
    if slog != 0.0:
        acc += slog * log(r)
    return acc + _clenshaw(cheb, 2.0 * r / D - 1.0)


cdef inline double _dphi(double r, int kind, double riesz_s, double D,
                         const double[::1] dp, const double[::1] dc, double dinv,
                         const double[::1] chebd) noexcept nogil:
    cdef double acc
    cdef Py_ssize_t j
    if kind == 1:
        return -0.5 * cos(0.5 * r) / sin(0.5 * r)
    if kind == 2:
        return -riesz_s * cos(0.5 * r) * pow(2.0 * sin(0.5 * r), -riesz_s - 1.0)
    acc = 0.0
    for j in range(dp.shape[0]):
        acc += dc[j] * pow(r, dp[j])
    if dinv != 0.0:
        acc += dinv / r
    return acc + _clenshaw(chebd, 2.0 * r / D - 1.0)


cdef inline double _pair_inner(const double[:, ::1] X, Py_ssize_t i, Py_ssize_t j,
                               int fam, double* hout) noexcept nogil:
    """Clamped cos(distance); alignment scalar stored in hout[0..3]."""
    cdef Py_ssize_t k, m = X.shape[1]
    cdef double hr = 0.0, hi = 0.0, hw = 0.0, hx = 0.0, hy = 0.0, hz = 0.0
    cdef double pw, px, py, pz, qw, qx, qy, qz, c
    if fam == 0 or fam == 1:
        for k in range(m):
            hr += X[i, k] * X[j, k]
        hout[0] = hr
        c = hr if fam == 0 else fabs(hr)
        if c > 1.0:
            c = 1.0
        if fam == 0 and c < -1.0:
            c = -1.0
        return c
    if fam == 2:
        for k in range(0, m, 2):
            # conj(p) * q, accumulated over complex coordinates
            hr += X[i, k] * X[j, k] + X[i, k + 1] * X[j, k + 1]
            hi += X[i, k] * X[j, k + 1] - X[i, k + 1] * X[j, k]
        hout[0] = hr
        hout[1] = hi
        c = sqrt(hr * hr + hi * hi)
        return c if c < 1.0 else 1.0
    for k in range(0, m, 4):
        pw = X[i, k]; px = X[i, k + 1]; py = X[i, k + 2]; pz = X[i, k + 3]
        qw = X[j, k]; qx = X[j, k + 1]; qy = X[j, k + 2]; qz = X[j, k + 3]
        hw += pw * qw + px * qx + py * qy + pz * qz
        hx += pw * qx - px * qw - py * qz + pz * qy
        hy += pw * qy + px * qz - py * qw - pz * qx
        hz += pw * qz - px * qy + py * qx - pz * qw
    hout[0] = hw; hout[1] = hx; hout[2] = hy; hout[3] = hz
    c = sqrt(hw * hw + hx * hx + hy * hy + hz * hz)
    return c if c < 1.0 else 1.0


def min_distance(double[:, ::1] X, int fam):
    cdef Py_ssize_t N = X.shape[0], i, j
    cdef double dmin = 1e300, d, c
    cdef double h[4]
    cdef Py_ssize_t imin = -1, jmin = -1
    with nogil:
        for i in range(N):
            for j in range(i + 1, N):
                c = _pair_inner(X, i, j, fam, h)
                d = acos(c)
                if d < dmin:
                    dmin = d
                    imin = i
                    jmin = j
    return dmin, imin, jmin


def potentials(double[:, ::1] X, int fam, kern):
    cdef Py_ssize_t N = X.shape[0], i, j
    cdef int kind = kern.kind
    cdef double D = kern.diameter, C = kern.constant, r_min = kern.r_min
    cdef double riesz_s = kern.riesz_s, slog = kern.sing_log
    cdef double[::1] sp = kern.sing_pows, sc = kern.sing_coefs, cheb = kern.cheb
    cdef double dmin = 1e300, d, c, val, t, y
    cdef double h[4]
    cdef Py_ssize_t imin = -1, jmin = -1
    P_arr = np.zeros(N)
    comp_arr = np.zeros(N)
    cdef double[::1] P = P_arr
    cdef double[::1] comp = comp_arr
    with nogil:
        for i in range(N):
            for j in range(i + 1, N):
                c = _pair_inner(X, i, j, fam, h)
                d = acos(c)
                if d < dmin:
                    dmin = d
                    imin = i
                    jmin = j
                if d <= r_min:
                    continue
                val = _phi(d, kind, riesz_s, D, C, sp, sc, slog, cheb)
                # Neumaier-compensated accumulation into both endpoints
                t = P[i] + val
                if fabs(P[i]) >= fabs(val):
                    comp[i] += (P[i] - t) + val
                else:
                    comp[i] += (val - t) + P[i]
                P[i] = t
                t = P[j] + val
                if fabs(P[j]) >= fabs(val):
                    comp[j] += (P[j] - t) + val
                else:
                    comp[j] += (val - t) + P[j]
                P[j] = t
        for i in range(N):
            P[i] += comp[i]
    return P_arr, dmin, imin, jmin


def gradient(double[:, ::1] X, int fam, kern, double delta_min):
    cdef Py_ssize_t N = X.shape[0], m = X.shape[1], i, j, k
    cdef int kind = kern.kind
    cdef double D = kern.diameter, r_min = kern.r_min
    cdef double riesz_s = kern.riesz_s, dinv = kern.dsing_inv
    cdef double[::1] dp = kern.dsing_pows, dc = kern.dsing_coefs, chebd = kern.chebd
    cdef double dmin = 1e300, d, c, f, sind, sw, sx, sy, sz, mod
    cdef double qw, qx, qy, qz, tw, tx, ty, tz
    cdef double h[4]
    cdef Py_ssize_t imin = -1, jmin = -1
    cdef long degenerate = 0
    G_arr = np.zeros((N, m))
    cdef double[:, ::1] G = G_arr
    with nogil:
        for i in range(N):
            for j in range(i + 1, N):
                c = _pair_inner(X, i, j, fam, h)
                d = acos(c)
                if d < dmin:
                    dmin = d
                    imin = i
                    jmin = j
                if d <= r_min:
                    continue
                if d >= D - delta_min:
                    degenerate += 1
                    continue
                sind = sin(d)
                f = -2.0 * _dphi(d, kind, riesz_s, D, dp, dc, dinv, chebd) / sind
                if fam == 0:
                    for k in range(m):
                        G[i, k] += f * (X[j, k] - c * X[i, k])
                        G[j, k] += f * (X[i, k] - c * X[j, k])
                elif fam == 1:
                    if h[0] >= 0.0:
                        for k in range(m):
                            G[i, k] += f * (X[j, k] - c * X[i, k])
                            G[j, k] += f * (X[i, k] - c * X[j, k])
                    else:
                        for k in range(m):
                            G[i, k] += f * (-X[j, k] - c * X[i, k])
                            G[j, k] += f * (-X[i, k] - c * X[j, k])
                elif fam == 2:
                    mod = sqrt(h[0] * h[0] + h[1] * h[1])
                    sw = h[0] / mod
                    sx = h[1] / mod
                    for k in range(0, m, 2):
                        # i side: q~ = q * conj(h)/|h|
                        G[i, k] += f * (X[j, k] * sw + X[j, k + 1] * sx - c * X[i, k])
                        G[i, k + 1] += f * (X[j, k + 1] * sw - X[j, k] * sx - c * X[i, k + 1])
                        # j side: p~ = p * h/|h|
                        G[j, k] += f * (X[i, k] * sw - X[i, k + 1] * sx - c * X[j, k])
                        G[j, k + 1] += f * (X[i, k + 1] * sw + X[i, k] * sx - c * X[j, k + 1])
                else:
                    mod = sqrt(h[0] * h[0] + h[1] * h[1] + h[2] * h[2] + h[3] * h[3])
                    # i side uses s = conj(h)/|h|, j side uses s = h/|h|
                    sw = h[0] / mod; sx = h[1] / mod; sy = h[2] / mod; sz = h[3] / mod
                    for k in range(0, m, 4):
                        qw = X[j, k]; qx = X[j, k + 1]; qy = X[j, k + 2]; qz = X[j, k + 3]
                        tw = qw * sw + qx * sx + qy * sy + qz * sz
                        tx = -qw * sx + qx * sw - qy * sz + qz * sy
                        ty = -qw * sy + qx * sz + qy * sw - qz * sx
                        tz = -qw * sz - qx * sy + qy * sx + qz * sw
                        G[i, k] += f * (tw - c * X[i, k])
                        G[i, k + 1] += f * (tx - c * X[i, k + 1])
                        G[i, k + 2] += f * (ty - c * X[i, k + 2])
                        G[i, k + 3] += f * (tz - c * X[i, k + 3])
                        qw = X[i, k]; qx = X[i, k + 1]; qy = X[i, k + 2]; qz = X[i, k + 3]
                        tw = qw * sw - qx * sx - qy * sy - qz * sz
                        tx = qw * sx + qx * sw + qy * sz - qz * sy
                        ty = qw * sy - qx * sz + qy * sw + qz * sx
                        tz = qw * sz + qx * sy - qy * sx + qz * sw
                        G[j, k] += f * (tw - c * X[j, k])
                        G[j, k + 1] += f * (tx - c * X[j, k + 1])
                        G[j, k + 2] += f * (ty - c * X[j, k + 2])
                        G[j, k + 3] += f * (tz - c * X[j, k + 3])
    return G_arr, degenerate, dmin, imin, jmin
