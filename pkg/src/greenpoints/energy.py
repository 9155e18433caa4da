"""Discrete pair energy E = sum_{i != j} K(x_i, x_j), its Riemannian gradient,
and pair statistics for a configuration under any radial kernel.

The ordered-pair convention is used throughout (each unordered pair counts
twice), so the gradient carries a factor 2.  The O(N^2) loop runs on the
compiled backend when available; kernels without flat pair-loop parameters
(the closed-form validators) take a generic vectorized path with identical
masking semantics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from . import _pairwise_np as _np_impl
from .geometry import Configuration, Manifold, TangentVector
from .kernel import KernelEvaluator

__all__ = [
    "EnergyReport",
    "SingularConfigurationError",
    "energy",
    "energy_gradient",
    "separation",
]

DEFAULT_DELTA_MIN = 1e-9


class SingularConfigurationError(ValueError):
    """Two configuration points (nearly) coincide; carries their indices."""

    def __init__(self, message: str, indices: tuple[int, int]):
        super().__init__(message)
        self.indices = indices


@dataclass(frozen=True)
class EnergyReport:
    total: float
    scaled: float
    min_pair_distance: float
    per_point_potentials: np.ndarray

    def __post_init__(self):
        self.per_point_potentials.setflags(write=False)


def _neumaier_sum(values: np.ndarray) -> float:
    total = 0.0
    comp = 0.0
    for x in values:
        t = total + x
        if abs(total) >= abs(x):
            comp += (total - t) + x
        else:
            comp += (x - t) + total
        total = t
    return total + comp


def _check_binding(config: Configuration, evaluator: KernelEvaluator):
    if evaluator.manifold != config.manifold:
        raise ValueError(
            f"kernel built on {evaluator.manifold.label} cannot score a "
            f"{config.manifold.label} configuration"
        )


def _raise_singular(dmin: float, i: int, j: int, r_min: float):
    raise SingularConfigurationError(
        f"points {i} and {j} coincide (d = {dmin!r} <= r_min = {r_min}); "
        "the energy is singular",
        indices=(i, j),
    )


# ----------------------------------------------------------------------------
# Dispatch: flat pair-loop parameters when available, else the vectorized
# path driven by the evaluator's own phi / phi'.


@dataclass(frozen=True)
class _GenericParams:
    diameter: float
    r_min: float


def _potentials_raw(X: np.ndarray, m: Manifold, evaluator: KernelEvaluator, impl=None):
    fam = _backend.family_code(m)
    kern = evaluator.hot_params()
    if kern is None:
        params = _GenericParams(m.diameter, evaluator.r_min)
        return _np_impl.potentials(X, fam, params, phi_fn=evaluator.phi)
    return _backend.potentials(X, fam, kern, impl=impl)


def _gradient_raw(
    X: np.ndarray,
    m: Manifold,
    evaluator: KernelEvaluator,
    delta_min: float = DEFAULT_DELTA_MIN,
    impl=None,
):
    fam = _backend.family_code(m)
    kern = evaluator.hot_params()
    if kern is None:
        params = _GenericParams(m.diameter, evaluator.r_min)
        return _np_impl.gradient(X, fam, params, delta_min, dphi_fn=evaluator.phi_prime)
    return _backend.gradient(X, fam, kern, delta_min, impl=impl)


# ----------------------------------------------------------------------------
# Public operations.


def energy(config: Configuration, evaluator: KernelEvaluator) -> EnergyReport:
    """Ordered-pair energy report; raises on coincident points."""
    _check_binding(config, evaluator)
    X = config.matrix()
    P, dmin, i, j = _potentials_raw(X, config.manifold, evaluator)
    if dmin <= evaluator.r_min:
        _raise_singular(dmin, i, j, evaluator.r_min)
    total = _neumaier_sum(P)
    N = len(config)
    return EnergyReport(
        total=total,
        scaled=total / (N * N),
        min_pair_distance=dmin,
        per_point_potentials=P,
    )


def energy_gradient(
    config: Configuration,
    evaluator: KernelEvaluator,
    delta_min: float = DEFAULT_DELTA_MIN,
) -> tuple[list[TangentVector], int]:
    """Riemannian gradient of the energy at each point.

    Returns (gradients, degenerate_pairs): pairs at the cut locus contribute
    a zero term and are counted rather than failing, since phi'(D) = 0 makes
    zero the continuous limit.
    """
    _check_binding(config, evaluator)
    X = config.matrix()
    G, ndeg, dmin, i, j = _gradient_raw(X, config.manifold, evaluator, delta_min)
    if dmin <= evaluator.r_min:
        _raise_singular(dmin, i, j, evaluator.r_min)
    vectors = [
        TangentVector(p, np.ascontiguousarray(row)) for p, row in zip(config.points, G)
    ]
    return vectors, int(ndeg)


def separation(config: Configuration) -> float:
    """Minimum pairwise geodesic distance (0 for duplicated points)."""
    fam = _backend.family_code(config.manifold)
    dmin, _, _ = _backend.min_distance(config.matrix(), fam)
    return float(dmin)
