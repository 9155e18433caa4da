"""Radial geometry of the CROSS: volume densities, sphere volumes, tail integrals.

Every family has a geodesic-sphere volume of the form

    v(r) = vol(S^{d-1}) * c * sin(r)^a * cos(r)^b,    a = d - 1,

with d the real dimension and (c, b) read off the density table:
S^n (1, 0), RP^n (2^{d-1}, 0), CP^n (2^{d-1}, 1), HP^n (2^{d-1}, 3),
OP^2 (2^15, 7).  The table's constant factors are kept as printed and the
total volume is always recomputed from them, so that v, V and the Green ODE
built on top stay mutually consistent.

Tails integrate in closed form through the sin/cos power reduction; no
quadrature enters any value returned here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .geometry import Family, Manifold

__all__ = [
    "DensityProfile",
    "RadialGeometry",
    "sphere_area",
    "density_profile",
    "radial_geometry",
    "v",
    "tail",
    "total_volume",
    "ball_volume",
    "ball_volume_fraction",
    "radial_laplacian",
]

_COS_EXPONENT = {
    Family.SPHERE: 0,
    Family.REAL_PROJECTIVE: 0,
    Family.COMPLEX_PROJECTIVE: 1,
    Family.QUATERNION_PROJECTIVE: 3,
    Family.OCTONION_PROJECTIVE: 7,
}


def sphere_area(d: int) -> float:
    """Surface volume of the unit (d-1)-sphere in R^d: 2 pi^{d/2} / Gamma(d/2)."""
    if d < 1:
        raise ValueError(f"sphere_area requires d >= 1, got {d}")
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


@dataclass(frozen=True)
class DensityProfile:
    """The table row r^{d-1} Omega(r) = const * sin^a(r) * cos^b(r)."""

    manifold: Manifold
    sin_exponent: int
    cos_exponent: int
    constant: float
    diameter: float

    def __call__(self, r: float) -> float:
        if not 0.0 <= r <= self.diameter:
            raise ValueError(f"r={r} outside [0, {self.diameter}]")
        return (
            self.constant
            * math.sin(r) ** self.sin_exponent
            * math.cos(r) ** self.cos_exponent
        )

    @property
    def omega_zero(self) -> float:
        """Limit of the profile divided by r^{d-1} at r -> 0."""
        return self.constant


@lru_cache(maxsize=None)
def density_profile(m: Manifold) -> DensityProfile:
    d = m.real_dim
    const = 1.0 if m.family is Family.SPHERE else 2.0 ** (d - 1)
    return DensityProfile(m, d - 1, _COS_EXPONENT[m.family], const, m.diameter)


# ----------------------------------------------------------------------------
# Power series helpers in the variable y = x^2 (shared with the kernel module).

SERIES_TERMS = 96


def series_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.convolve(a, b)[:SERIES_TERMS]


def series_pow(a: np.ndarray, e: int) -> np.ndarray:
    out = np.zeros(SERIES_TERMS)
    out[0] = 1.0
    base = a.copy()
    while e > 0:
        if e & 1:
            out = series_mul(out, base)
        e >>= 1
        if e:
            base = series_mul(base, base)
    return out


def series_reciprocal(a: np.ndarray) -> np.ndarray:
    out = np.zeros(SERIES_TERMS)
    out[0] = 1.0 / a[0]
    for m in range(1, SERIES_TERMS):
        acc = 0.0
        for k in range(1, m + 1):
            acc += a[k] * out[m - k]
        out[m] = -acc / a[0]
    return out


def sinc_series() -> np.ndarray:
    """Taylor coefficients of sin(x)/x in y = x^2."""
    out = np.zeros(SERIES_TERMS)
    out[0] = 1.0
    for k in range(1, SERIES_TERMS):
        out[k] = -out[k - 1] / (2.0 * k * (2.0 * k + 1.0))
    return out


def cosine_series() -> np.ndarray:
    """Taylor coefficients of cos(x) in y = x^2."""
    out = np.zeros(SERIES_TERMS)
    out[0] = 1.0
    for k in range(1, SERIES_TERMS):
        out[k] = -out[k - 1] / ((2.0 * k - 1.0) * 2.0 * k)
    return out


_SERIES_CUTOFF = 0.35


@lru_cache(maxsize=None)
def _primitive_series(a: int, b: int) -> np.ndarray:
    """Coefficients of F(x) / x^{a+1} in y = x^2, F = int_0^x sin^a cos^b."""
    g = series_pow(sinc_series(), a)
    if b:
        g = series_mul(g, series_pow(cosine_series(), b))
    return g / (a + 2.0 * np.arange(SERIES_TERMS) + 1.0)


def _sincos_recurrence(a: int, b: int, x: float) -> float:
    if b >= 2:
        s, c = math.sin(x), math.cos(x)
        return (s ** (a + 1) * c ** (b - 1)) / (a + b) + (b - 1) / (a + b) * _sincos_recurrence(a, b - 2, x)
    if b == 1:
        return math.sin(x) ** (a + 1) / (a + 1)
    if a >= 2:
        s, c = math.sin(x), math.cos(x)
        return -(s ** (a - 1) * c) / a + (a - 1) / a * _sincos_recurrence(a - 2, 0, x)
    if a == 1:
        return 2.0 * math.sin(0.5 * x) ** 2
    return x


def _sincos_primitive(a: int, b: int, x: float) -> float:
    """Antiderivative F(x) = integral_0^x sin^a(t) cos^b(t) dt, F(0) = 0.

    The power-reduction recurrence cancels to O(x^2) relative accuracy at
    small x, so below a cutoff the Taylor series (exact to roundoff there)
    is summed instead.
    """
    if 0.0 <= x <= _SERIES_CUTOFF:
        coefs = _primitive_series(a, b)
        y = x * x
        acc = 0.0
        for c in coefs[::-1]:
            acc = acc * y + c
        return acc * x ** (a + 1)
    return _sincos_recurrence(a, b, x)


@dataclass(frozen=True)
class RadialGeometry:
    """Precomputed radial data: v(r) coefficient, total volume, diameter."""

    profile: DensityProfile
    sphere_constant: float  # vol(S^{d-1})
    total: float            # V = integral_0^D v
    kappa: float            # lim v(r)/r^{d-1} = sphere_constant * Omega(0)

    @property
    def diameter(self) -> float:
        return self.profile.diameter


@lru_cache(maxsize=None)
def radial_geometry(m: Manifold) -> RadialGeometry:
    prof = density_profile(m)
    area = sphere_area(m.real_dim)
    amplitude = area * prof.constant
    total = amplitude * _sincos_primitive(prof.sin_exponent, prof.cos_exponent, prof.diameter)
    return RadialGeometry(prof, area, total, amplitude)


def v(m: Manifold, r: float) -> float:
    """Geodesic-sphere volume v(r) = vol(S^{d-1}) r^{d-1} Omega(r)."""
    geo = radial_geometry(m)
    return geo.sphere_constant * geo.profile(r)


def ball_volume(m: Manifold, r: float) -> float:
    """Volume of the geodesic ball B(x, r): integral_0^r v(t) dt."""
    geo = radial_geometry(m)
    prof = geo.profile
    if not 0.0 <= r <= prof.diameter:
        raise ValueError(f"r={r} outside [0, {prof.diameter}]")
    return geo.kappa * _sincos_primitive(prof.sin_exponent, prof.cos_exponent, r)


def tail(m: Manifold, r: float) -> float:
    """Upper tail integral of v from r to the diameter.

    Near the diameter the integral is rewritten around the far endpoint
    (sin/cos swap for D = pi/2, reflection for D = pi) so the value decays
    to zero without cancellation.
    """
    geo = radial_geometry(m)
    prof = geo.profile
    D = prof.diameter
    if not 0.0 <= r <= D:
        raise ValueError(f"r={r} outside [0, {D}]")
    a, b = prof.sin_exponent, prof.cos_exponent
    if r <= 0.5 * D:
        return geo.kappa * (
            _sincos_primitive(a, b, D) - _sincos_primitive(a, b, r)
        )
    w = D - r
    if m.family is Family.SPHERE:
        return geo.kappa * _sincos_primitive(a, 0, w)
    return geo.kappa * _sincos_primitive(b, a, w)


def total_volume(m: Manifold) -> float:
    """Table-derived volume V = tail(m, 0)."""
    return radial_geometry(m).total


def ball_volume_fraction(m: Manifold, r: float) -> float:
    """Radial CDF: fraction of the uniform measure within distance r."""
    geo = radial_geometry(m)
    frac = 1.0 - tail(m, r) / geo.total
    return min(1.0, max(0.0, frac))


def radial_laplacian(m: Manifold, r: float) -> float:
    """L(r) = -(d/dr) log(r^{d-1} Omega(r)) = -(d-1) cot(r) + b tan(r)."""
    geo = radial_geometry(m)
    D = geo.profile.diameter
    if not 0.0 < r < D:
        raise ValueError(f"radial Laplacian defined only on (0, {D}), got r={r}")
    a, b = geo.profile.sin_exponent, geo.profile.cos_exponent
    return -a * math.cos(r) / math.sin(r) + b * math.sin(r) / math.cos(r)
