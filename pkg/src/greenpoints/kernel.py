"""Green kernels G(x, y) = phi(d(x, y)) on the CROSS, built from the radial ODE.

The radial derivative has the closed form

    phi'(r) = - tail(r) / (V * v(r)),

which is evaluated exactly from the elementary tail integrals in
:mod:`greenpoints.radial`.  The primitive phi is anchored at phi0(D) = 0 and
split as phi = s + h + C, where

* ``s`` collects every non-smooth term of the small-r expansion: the power
  chain c_{2k} r^{2k+2-d} down to r^{2-d} and, in even dimensions, a log r
  term.  The coefficients come from the Taylor series of
  f(r) = r^{d-1} / (sin^{d-1} r cos^b r), so the amplitude of the leading
  term is 1/((d-2) * kappa) with kappa = lim v(r)/r^{d-1}.
* ``h = phi - s`` is analytic on [0, D] and is tabulated as a Chebyshev
  series (degree raised 64 -> 128 -> 256 until the interpolant matches
  direct quadrature to 1e-10 at 200 validation points).  Near r = 0 the
  difference phi' - s' is summed as a power series instead of formed by
  subtraction, which would lose every significant digit.
* ``C`` re-centers phi to zero mean: (1/V) int phi v dr = 0.

Closed-form comparison kernels (S^2, CP^3, CP^4, logarithmic, Riesz) share
the same evaluator interface.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial import chebyshev as _cheb

from ._backend import KIND_LOG, KIND_RIESZ, KIND_TABULATED, HotKernel
from .geometry import Family, Manifold, Point, UnsupportedOperationError, distance, manifold
from .quadrature import QuadratureSpec, integrate, integrate_singular_left
from .radial import (
    SERIES_TERMS,
    cosine_series,
    radial_geometry,
    series_mul,
    series_pow,
    series_reciprocal,
    sinc_series,
    sphere_area,
    tail,
    total_volume,
)
from .radial import v as sphere_volume

__all__ = [
    "KernelEvaluator",
    "KernelBuildError",
    "SingularEvaluationError",
    "SingularPart",
    "phi_prime",
    "build_green",
    "green_evaluator",
    "green",
    "comparison_kernel",
    "log_evaluator",
    "riesz_evaluator",
    "closed_form_s2",
    "closed_form_cp3",
    "closed_form_cp4",
    "phi_sn_euclidean_check",
]

KIND_GREEN_ODE = "green-ode"
KIND_CLOSED_S2 = "green-closed-s2"
KIND_CLOSED_CP3 = "green-closed-cp3"
KIND_CLOSED_CP4 = "green-closed-cp4"
KIND_LOG_STR = "log"
KIND_RIESZ_STR = "riesz"

DEFAULT_R_MIN = 1e-12
_VALIDATION_POINTS = 200
_VALIDATION_TOL = 1e-10
_DEGREES = (64, 128, 256)


class KernelBuildError(RuntimeError):
    """Kernel construction failed (quadrature or interpolation residual)."""


class SingularEvaluationError(ValueError):
    """Kernel evaluated at (or below) the coincidence cutoff r_min."""


@lru_cache(maxsize=None)
def _radial_series(m: Manifold):
    """Taylor data of f(r) = r^{d-1}/(sin^{d-1} r cos^b r) around r = 0.

    Returns (f, inv_f) as coefficient arrays in y = r^2; f has radius of
    convergence min(pi/2, pi) > D/2, which is all the evaluator needs.
    """
    geo = radial_geometry(m)
    a_exp = geo.profile.sin_exponent
    b_exp = geo.profile.cos_exponent
    inv_f = series_pow(sinc_series(), a_exp)
    if b_exp:
        inv_f = series_mul(inv_f, series_pow(cosine_series(), b_exp))
    return series_reciprocal(inv_f), inv_f


# ----------------------------------------------------------------------------
# Singular part.


@dataclass(frozen=True)
class SingularPart:
    """Truncated small-r expansion of phi: sum c_j r^{p_j} + c_log log r."""

    powers: np.ndarray
    coefficients: np.ndarray
    log_coefficient: float

    def __call__(self, r):
        r = np.asarray(r, dtype=np.float64)
        acc = np.zeros_like(r)
        for p, c in zip(self.powers, self.coefficients):
            acc += c * r**p
        if self.log_coefficient != 0.0:
            acc = acc + self.log_coefficient * np.log(r)
        return acc

    def prime(self, r):
        r = np.asarray(r, dtype=np.float64)
        acc = np.zeros_like(r)
        for p, c in zip(self.powers, self.coefficients):
            acc += c * p * r ** (p - 1.0)
        if self.log_coefficient != 0.0:
            acc = acc + self.log_coefficient / r
        return acc

    @property
    def leading_amplitude(self) -> float:
        """Coefficient of the strongest term (r^{2-d}, or log r when d = 2)."""
        if self.powers.size:
            return float(self.coefficients[np.argmin(self.powers)])
        return self.log_coefficient


@lru_cache(maxsize=None)
def _singular_part(m: Manifold) -> SingularPart:
    geo = radial_geometry(m)
    d = m.real_dim
    kappa = geo.kappa
    f, _ = _radial_series(m)
    pows, coefs = [], []
    log_coef = 0.0
    for k in range(0, (d - 2) // 2 + 1):
        if 2 * k == d - 2:
            # only reached for even d; integrates the r^{-1} term of phi'
            log_coef = -f[k] / kappa
        elif 2 * k < d - 2:
            pows.append(float(2 * k + 2 - d))
            coefs.append(f[k] / (kappa * (d - 2 - 2 * k)))
    return SingularPart(np.array(pows), np.array(coefs), log_coef)


# ----------------------------------------------------------------------------
# The radial derivative and the smooth remainder h' = phi' - s'.


def phi_prime(m: Manifold, r: float) -> float:
    """Closed-form phi'(r) = -tail(r) / (V v(r)) on (0, D)."""
    geo = radial_geometry(m)
    D = geo.diameter
    if not 0.0 < r < D:
        raise ValueError(f"phi' defined on the open interval (0, {D}), got r={r}")
    return -tail(m, r) / (geo.total * sphere_volume(m, r))


class _SmoothDerivative:
    """Evaluates h'(r) = phi'(r) - s'(r) without catastrophic cancellation.

    Below the crossover (D/2) the two singular expansions are merged
    analytically and only the convergent remainder series is summed; above
    it the direct difference is harmless.
    """

    def __init__(self, m: Manifold):
        geo = radial_geometry(m)
        d = m.real_dim
        self.m = m
        self.kappa = geo.kappa
        self.V = geo.total
        self.D = geo.diameter
        self.crossover = 0.5 * self.D
        self.sing = _singular_part(m)
        f, inv_f = _radial_series(m)
        k_a = (d - 2) // 2 + 1
        self.tail_exponent = 2 * k_a + 1 - d  # 0 (odd d) or 1 (even d)
        self.tail_coefs = -f[k_a:] / self.kappa
        scaled = inv_f / (d + 2.0 * np.arange(SERIES_TERMS))
        self.ball_coefs = series_mul(f, scaled) / self.V

    def _series(self, r: float) -> float:
        y = r * r
        acc_a = 0.0
        for c in self.tail_coefs[::-1]:
            acc_a = acc_a * y + c
        acc_b = 0.0
        for c in self.ball_coefs[::-1]:
            acc_b = acc_b * y + c
        return acc_a * r**self.tail_exponent + acc_b * r

    def __call__(self, r: float) -> float:
        if r <= 0.0:
            return self._series(0.0) if r == 0.0 else float("nan")
        if r < self.crossover:
            return self._series(r)
        return phi_prime(self.m, r) - float(self.sing.prime(r))


# ----------------------------------------------------------------------------
# Kernel evaluator.


@dataclass(frozen=True, eq=False)
class KernelEvaluator:
    """Immutable radial kernel: phi, phi', and the pairwise-loop parameters."""

    kind: str
    manifold: Manifold
    zero_mean_constant: float
    r_min: float = DEFAULT_R_MIN
    singular: SingularPart | None = None
    smooth: np.ndarray | None = field(default=None, repr=False)
    smooth_prime: np.ndarray | None = field(default=None, repr=False)
    riesz_s: float | None = None
    _phi_fn: Callable | None = field(default=None, repr=False)
    _dphi_fn: Callable | None = field(default=None, repr=False)

    @property
    def diameter(self) -> float:
        return self.manifold.diameter

    def _check_domain(self, r: np.ndarray):
        if np.any(r <= self.r_min):
            bad = float(np.min(r))
            raise SingularEvaluationError(
                f"kernel evaluated at r={bad!r} <= r_min={self.r_min} (G -> +inf)"
            )
        if np.any(r > self.diameter * (1.0 + 1e-12)):
            raise ValueError(f"r beyond the diameter {self.diameter}")

    def phi(self, r):
        """Radial kernel value phi(r); accepts scalars or arrays."""
        arr = np.asarray(r, dtype=np.float64)
        self._check_domain(arr)
        if self.kind == KIND_LOG_STR:
            out = -np.log(2.0 * np.sin(0.5 * arr))
        elif self.kind == KIND_RIESZ_STR:
            out = (2.0 * np.sin(0.5 * arr)) ** (-self.riesz_s)
        elif self._phi_fn is not None:
            out = self._phi_fn(arr) + self.zero_mean_constant
        else:
            x = 2.0 * arr / self.diameter - 1.0
            out = self.singular(arr) + _cheb.chebval(x, self.smooth) + self.zero_mean_constant
        return out if np.ndim(r) else float(out)

    def phi_prime(self, r):
        """Radial derivative phi'(r); accepts scalars or arrays."""
        arr = np.asarray(r, dtype=np.float64)
        self._check_domain(arr)
        if self.kind == KIND_LOG_STR:
            out = -0.5 * np.cos(0.5 * arr) / np.sin(0.5 * arr)
        elif self.kind == KIND_RIESZ_STR:
            out = -self.riesz_s * np.cos(0.5 * arr) * (2.0 * np.sin(0.5 * arr)) ** (
                -self.riesz_s - 1.0
            )
        elif self._dphi_fn is not None:
            out = self._dphi_fn(arr)
        else:
            x = 2.0 * arr / self.diameter - 1.0
            out = self.singular.prime(arr) + _cheb.chebval(x, self.smooth_prime)
        return out if np.ndim(r) else float(out)

    def hot_params(self) -> HotKernel | None:
        """Flat parameters for the compiled pair loop (None: generic path)."""
        if self.kind == KIND_LOG_STR:
            return HotKernel(kind=KIND_LOG, diameter=self.diameter, r_min=self.r_min)
        if self.kind == KIND_RIESZ_STR:
            return HotKernel(
                kind=KIND_RIESZ,
                diameter=self.diameter,
                r_min=self.r_min,
                riesz_s=self.riesz_s,
            )
        if self.kind == KIND_GREEN_ODE:
            s = self.singular
            return HotKernel(
                kind=KIND_TABULATED,
                diameter=self.diameter,
                constant=self.zero_mean_constant,
                r_min=self.r_min,
                sing_pows=s.powers,
                sing_coefs=s.coefficients,
                sing_log=s.log_coefficient,
                dsing_pows=s.powers - 1.0,
                dsing_coefs=s.coefficients * s.powers,
                dsing_inv=s.log_coefficient,
                cheb=self.smooth,
                chebd=self.smooth_prime,
            )
        return None


def green(evaluator: KernelEvaluator, p: Point, q: Point) -> float:
    """Kernel value G(p, q) = phi(d(p, q)); raises on coincident points."""
    m = evaluator.manifold
    d = distance(m, p, q)
    if d <= evaluator.r_min:
        raise SingularEvaluationError(
            f"green() at coincident points (d={d!r} <= r_min={evaluator.r_min})"
        )
    return float(evaluator.phi(d))


# ----------------------------------------------------------------------------
# Construction from the ODE.


def _chebyshev_nodes(degree: int, D: float) -> np.ndarray:
    """First-kind Chebyshev points mapped to (0, D), descending."""
    j = np.arange(degree)
    x = np.cos(np.pi * (2.0 * j + 1.0) / (2.0 * degree))
    return D * (x + 1.0) / 2.0


def _chebyshev_coefficients(values: np.ndarray) -> np.ndarray:
    K = values.size
    j = np.arange(K)
    k = np.arange(K)[:, None]
    M = np.cos(k * np.pi * (2.0 * j + 1.0) / (2.0 * K))
    coefs = (2.0 / K) * (M @ values)
    coefs[0] *= 0.5
    return coefs


def build_green(m: Manifold, quad_spec: QuadratureSpec | None = None) -> KernelEvaluator:
    """Construct the zero-mean Green kernel of ``m`` from the radial ODE."""
    spec = quad_spec or QuadratureSpec()
    seg_spec = dataclasses.replace(spec, abs_tol=spec.abs_tol / 16.0)
    geo = radial_geometry(m)
    D, V = geo.diameter, geo.total
    sing = _singular_part(m)
    hprime = _SmoothDerivative(m)

    # Analytic part of the zero-mean integral: int_0^D s(r) v(r) dr.
    s_v_integral = 0.0
    for p, c in zip(sing.powers, sing.coefficients):
        s_v_integral += c * integrate(
            lambda r, _p=p: r**_p * sphere_volume(m, r), 0.0, D, seg_spec
        ).value
    if sing.log_coefficient != 0.0:
        s_v_integral += sing.log_coefficient * integrate_singular_left(
            lambda r: math.log(r) * sphere_volume(m, r), 0.0, D, log_singularity=True, spec=seg_spec
        )

    last_residual = math.inf
    for degree in _DEGREES:
        nodes = _chebyshev_nodes(degree, D)  # descending from ~D to ~0
        h_vals = np.empty(degree)
        acc = -float(sing(D))
        prev = D
        for idx, r_j in enumerate(nodes):
            acc -= integrate(hprime, r_j, prev, seg_spec).value
            h_vals[idx] = acc
            prev = r_j
        hp_vals = np.array([hprime(r_j) for r_j in nodes])
        # Node j sits at x_j = cos(pi (2j+1) / 2K), already in standard order.
        smooth = _chebyshev_coefficients(h_vals)
        smooth_prime = _chebyshev_coefficients(hp_vals)

        grid = D * (np.arange(_VALIDATION_POINTS) + 0.5) / _VALIDATION_POINTS
        x = 2.0 * grid / D - 1.0
        interp_h = _cheb.chebval(x, smooth)
        interp_hp = _cheb.chebval(x, smooth_prime)
        direct_h = np.array(
            [
                -integrate(hprime, r_i, D, seg_spec).value - float(sing(D))
                for r_i in grid
            ]
        )
        direct_hp = np.array([hprime(r_i) for r_i in grid])
        residual = max(
            float(np.max(np.abs(interp_h - direct_h))),
            float(np.max(np.abs(interp_hp - direct_hp))),
        )
        last_residual = residual
        if residual <= _VALIDATION_TOL:
            break
    else:
        raise KernelBuildError(
            f"interpolation residual {last_residual:.3e} > {_VALIDATION_TOL} "
            f"on {m.label} at degree {_DEGREES[-1]}"
        )

    h_v_integral = integrate(
        lambda r: float(_cheb.chebval(2.0 * r / D - 1.0, smooth)) * sphere_volume(m, r),
        0.0,
        D,
        seg_spec,
    ).value
    constant = -(s_v_integral + h_v_integral) / V

    return KernelEvaluator(
        kind=KIND_GREEN_ODE,
        manifold=m,
        zero_mean_constant=constant,
        singular=sing,
        smooth=smooth,
        smooth_prime=smooth_prime,
    )


@lru_cache(maxsize=None)
def green_evaluator(m: Manifold) -> KernelEvaluator:
    """Cached zero-mean Green kernel for ``m``."""
    return build_green(m)


# ----------------------------------------------------------------------------
# Closed-form kernels and comparison kernels.


def closed_form_s2() -> KernelEvaluator:
    """Printed S^2 kernel: -(1/2pi) log sin(r/2) - 1/(4pi)."""
    m = manifold("S", 2)

    def phi0(r):
        return -np.log(np.sin(0.5 * r)) / (2.0 * math.pi)

    def dphi(r):
        return -(1.0 + np.cos(r)) / (4.0 * math.pi * np.sin(r))

    return KernelEvaluator(
        kind=KIND_CLOSED_S2,
        manifold=m,
        zero_mean_constant=-1.0 / (4.0 * math.pi),
        _phi_fn=phi0,
        _dphi_fn=dphi,
    )


def _closed_form_projective(kind: str, m: Manifold, inv_sin_coefs, log_coef, scale):
    """Shared shape of the printed CP^n kernels: polynomial in 1/sin^2 plus log sin."""

    def phi0(r):
        s2 = np.sin(r) ** 2
        acc = np.zeros_like(np.asarray(r, dtype=np.float64))
        for k, c in inv_sin_coefs:
            acc = acc + c / s2 ** (k // 2)
        return scale * (acc - log_coef * np.log(np.sin(r)))

    def dphi(r):
        s = np.sin(r)
        c = np.cos(r)
        acc = np.zeros_like(np.asarray(r, dtype=np.float64))
        for k, coef in inv_sin_coefs:
            acc = acc - coef * k * c / s ** (k + 1)
        return scale * (acc - log_coef * c / s)

    # Zero-mean constant by quadrature of the printed formula against v(r).
    V = total_volume(m)
    mean = integrate_singular_left(
        lambda r: float(phi0(r)) * sphere_volume(m, r),
        0.0,
        m.diameter,
        log_singularity=True,
    )
    return KernelEvaluator(
        kind=kind,
        manifold=m,
        zero_mean_constant=-mean / V,
        _phi_fn=phi0,
        _dphi_fn=dphi,
    )


@lru_cache(maxsize=None)
def closed_form_cp3() -> KernelEvaluator:
    """Printed CP^3 kernel: (1/sin^4 + 2/sin^2 - 4 log sin) / (24 V)."""
    m = manifold("CP", 3)
    scale = 1.0 / (24.0 * total_volume(m))
    return _closed_form_projective(
        KIND_CLOSED_CP3, m, [(4, 1.0), (2, 2.0)], 4.0, scale
    )


@lru_cache(maxsize=None)
def closed_form_cp4() -> KernelEvaluator:
    """Printed CP^4 kernel: (2/sin^6 + 3/sin^4 + 6/sin^2 - 12 log sin) / (96 V)."""
    m = manifold("CP", 4)
    scale = 1.0 / (96.0 * total_volume(m))
    return _closed_form_projective(
        KIND_CLOSED_CP4, m, [(6, 2.0), (4, 3.0), (2, 6.0)], 12.0, scale
    )


def _require_sphere(m: Manifold):
    if m.family is not Family.SPHERE:
        raise ValueError(
            f"chordal comparison kernels are defined on spheres only, not {m.label}"
        )


def log_evaluator(m: Manifold) -> KernelEvaluator:
    """Logarithmic chordal kernel -log||p - q|| as a radial evaluator."""
    _require_sphere(m)
    return KernelEvaluator(kind=KIND_LOG_STR, manifold=m, zero_mean_constant=0.0)


def riesz_evaluator(m: Manifold, s: float) -> KernelEvaluator:
    """Riesz chordal kernel ||p - q||^{-s} as a radial evaluator."""
    _require_sphere(m)
    if s <= 0:
        raise ValueError(f"Riesz exponent must be positive, got s={s}")
    return KernelEvaluator(kind=KIND_RIESZ_STR, manifold=m, zero_mean_constant=0.0, riesz_s=s)


def comparison_kernel(kind: str, p: Point, q: Point, s: float | None = None) -> float:
    """Chordal log / Riesz kernel value between two sphere points."""
    m = p.manifold
    _require_sphere(m)
    d = distance(m, p, q)
    if d <= DEFAULT_R_MIN:
        raise SingularEvaluationError("comparison kernel at coincident points")
    chord = 2.0 * math.sin(0.5 * d)
    if kind == KIND_LOG_STR:
        return -math.log(chord)
    if kind == KIND_RIESZ_STR:
        if s is None or s <= 0:
            raise ValueError("Riesz kernel needs a positive exponent s")
        return chord**-s
    raise ValueError(f"unknown comparison kernel {kind!r}")


# ----------------------------------------------------------------------------
# Euclidean-distance cross-check for spheres.


def phi_sn_euclidean_check(
    n: int, t: float, quad_spec: QuadratureSpec | None = None
) -> float:
    """S^n kernel at Euclidean (chord) distance t, up to an additive constant.

    Evaluates the incomplete-Beta integral representation; differences
    phi_hat(t) - phi_hat(t') must match phi(r) - phi(r') under t = 2 sin(r/2).
    """
    from scipy.special import beta as _beta
    from scipy.special import betainc as _betainc

    if n < 2:
        raise ValueError("the Euclidean form needs n >= 2")
    if not 0.0 < t <= 2.0:
        raise ValueError(f"chord length must lie in (0, 2], got {t}")
    if t == 2.0:
        return 0.0
    half = 0.5 * n
    bconst = _beta(half, half)

    def integrand(x: float) -> float:
        return bconst * _betainc(half, half, 1.0 - x) / (x - x * x) ** half

    value = integrate(integrand, 0.25 * t * t, 1.0, quad_spec).value
    return value / sphere_area(n + 1)
