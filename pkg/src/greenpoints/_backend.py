"""Backend selection for the O(N^2) pairwise energy/gradient hot loop.

Two interchangeable implementations exist: a compiled Cython extension
(``greenpoints._pairwise``) and a vectorized NumPy fallback
(``greenpoints._pairwise_np``).  The compiled one is preferred when it
imported successfully; set ``GREENPOINTS_BACKEND=numpy`` or ``=cython`` to
force a choice.  Each backend is deterministic on its own (fixed summation
order), which is what the reproducibility contract requires; the two agree
with each other to roundoff, not bit-for-bit.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .geometry import Family, Manifold

KIND_TABULATED = 0
KIND_LOG = 1
KIND_RIESZ = 2

_FAMILY_CODE = {
    Family.SPHERE: 0,
    Family.REAL_PROJECTIVE: 1,
    Family.COMPLEX_PROJECTIVE: 2,
    Family.QUATERNION_PROJECTIVE: 3,
}


def family_code(m: Manifold) -> int:
    try:
        return _FAMILY_CODE[m.family]
    except KeyError:
        raise ValueError(f"{m.label} has no pairwise point kernel") from None


@dataclass(frozen=True)
class HotKernel:
    """Flat numeric description of phi and phi' for the pair loop.

    Tabulated kernels evaluate
        phi(r)  = sum_j sing_coefs[j] r^sing_pows[j] + sing_log*log(r)
                  + Cheb(cheb; 2r/D - 1) + constant
        phi'(r) = sum_j dsing_coefs[j] r^dsing_pows[j] + dsing_inv/r
                  + Cheb(chebd; 2r/D - 1)
    while the log/Riesz kinds use their closed forms directly.
    """

    kind: int
    diameter: float
    constant: float = 0.0
    r_min: float = 1e-12
    riesz_s: float = 0.0
    sing_pows: np.ndarray = None
    sing_coefs: np.ndarray = None
    sing_log: float = 0.0
    dsing_pows: np.ndarray = None
    dsing_coefs: np.ndarray = None
    dsing_inv: float = 0.0
    cheb: np.ndarray = None
    chebd: np.ndarray = None

    def __post_init__(self):
        empty = np.zeros(0)
        for name in ("sing_pows", "sing_coefs", "dsing_pows", "dsing_coefs", "cheb", "chebd"):
            val = getattr(self, name)
            arr = empty if val is None else np.ascontiguousarray(val, dtype=np.float64)
            object.__setattr__(self, name, arr)


_FORCED = os.environ.get("GREENPOINTS_BACKEND", "auto").lower()

_cython_impl = None
if _FORCED in ("auto", "cython"):
    try:
        from . import _pairwise as _cython_impl  # type: ignore[attr-defined]
    except ImportError:
        _cython_impl = None
        if _FORCED == "cython":
            raise ImportError(
                "GREENPOINTS_BACKEND=cython but the compiled extension is unavailable"
            )

from . import _pairwise_np as _numpy_impl

if _FORCED == "numpy" or _cython_impl is None:
    _active = _numpy_impl
    BACKEND_NAME = "numpy"
else:
    _active = _cython_impl
    BACKEND_NAME = "cython"


def backend_name() -> str:
    return BACKEND_NAME


def get_impl(name: str | None = None):
    """Return a backend module by name ("cython" / "numpy" / None for active)."""
    if name is None:
        return _active
    if name == "numpy":
        return _numpy_impl
    if name == "cython":
        if _cython_impl is None:
            raise ValueError("compiled backend is not available")
        return _cython_impl
    raise ValueError(f"unknown backend {name!r}")


def potentials(X, fam_code, kern, impl=None):
    """Per-point potentials P_i = sum_{j != i} phi(d_ij).

    Returns (P, dmin, imin, jmin); the caller is responsible for rejecting
    configurations with dmin <= r_min.
    """
    return (impl or _active).potentials(X, fam_code, kern)


def gradient(X, fam_code, kern, delta_min, impl=None):
    """Energy gradients dE/dx_i as an (N, m) array of horizontal vectors.

    Returns (G, degenerate_pairs, dmin, imin, jmin); pairs within delta_min
    of the cut locus contribute a zero term and are counted (unordered).
    """
    return (impl or _active).gradient(X, fam_code, kern, delta_min)


def min_distance(X, fam_code, impl=None):
    """Minimum pairwise distance; returns (dmin, imin, jmin)."""
    return (impl or _active).min_distance(X, fam_code)
