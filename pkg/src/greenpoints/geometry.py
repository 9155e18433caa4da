"""Points, distances and tangent operations on the compact rank-one symmetric spaces.

Supported families: spheres S^n, real/complex/quaternionic projective spaces
RP^n, CP^n, HP^n, and the Cayley plane OP^2 (radial queries only — it has no
tractable ambient point model).  Points are stored as ambient unit vectors in
a flat real layout: complex coordinates interleave [re, im], quaternionic
coordinates interleave [w, x, y, z].  Projective representatives carry a
canonical phase gauge: the first nonzero coordinate is real and positive.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Family",
    "Manifold",
    "Point",
    "TangentVector",
    "Configuration",
    "UnsupportedOperationError",
    "DegenerateDistanceError",
    "manifold",
    "distance",
    "distance_gradient",
    "retract",
    "random_point",
    "apply_isometry",
    "random_isometry",
    "make_point",
    "make_tangent",
    "project_tangent",
]

UNIT_NORM_TOL = 1e-12
TANGENCY_TOL = 1e-10
ORTHOGONALITY_TOL = 1e-10
DEFAULT_DELTA_MIN = 1e-9
_GAUGE_ZERO = 1e-12


class UnsupportedOperationError(RuntimeError):
    """Operation requested on a manifold that does not support it (OP^2 points)."""


class DegenerateDistanceError(ValueError):
    """Distance gradient requested at a coincident or cut-locus pair."""


class Family(enum.Enum):
    SPHERE = "S"
    REAL_PROJECTIVE = "RP"
    COMPLEX_PROJECTIVE = "CP"
    QUATERNION_PROJECTIVE = "HP"
    OCTONION_PROJECTIVE = "OP2"


# (scalar width in reals, minimal family parameter)
_FAMILY_DATA = {
    Family.SPHERE: (1, 2),
    Family.REAL_PROJECTIVE: (1, 2),
    Family.COMPLEX_PROJECTIVE: (2, 1),
    Family.QUATERNION_PROJECTIVE: (4, 1),
    Family.OCTONION_PROJECTIVE: (None, 2),
}


@dataclass(frozen=True)
class Manifold:
    """A CROSS family tag plus its dimension parameter."""

    family: Family
    n: int

    def __post_init__(self):
        width, n_min = _FAMILY_DATA[self.family]
        if self.n < n_min:
            raise ValueError(
                f"{self.family.value} requires n >= {n_min}, got n={self.n}"
            )
        if self.family is Family.OCTONION_PROJECTIVE and self.n != 2:
            raise ValueError("the Cayley plane exists only for n=2")

    @property
    def real_dim(self) -> int:
        if self.family in (Family.SPHERE, Family.REAL_PROJECTIVE):
            return self.n
        if self.family is Family.COMPLEX_PROJECTIVE:
            return 2 * self.n
        if self.family is Family.QUATERNION_PROJECTIVE:
            return 4 * self.n
        return 16

    @property
    def diameter(self) -> float:
        return math.pi if self.family is Family.SPHERE else 0.5 * math.pi

    @property
    def supports_points(self) -> bool:
        return self.family is not Family.OCTONION_PROJECTIVE

    @property
    def scalar_width(self) -> int:
        """Reals per ambient coordinate (1 real, 2 complex, 4 quaternion)."""
        width, _ = _FAMILY_DATA[self.family]
        if width is None:
            raise UnsupportedOperationError("OP2 has no ambient point model")
        return width

    @property
    def n_scalars(self) -> int:
        """Number of ambient scalar coordinates (n + 1)."""
        if not self.supports_points:
            raise UnsupportedOperationError("OP2 has no ambient point model")
        return self.n + 1

    @property
    def ambient_real_dim(self) -> int:
        return self.n_scalars * self.scalar_width

    @property
    def label(self) -> str:
        return f"{self.family.value}{self.n}" if self.family is not Family.OCTONION_PROJECTIVE else "OP2"


def manifold(family: str | Family, n: int) -> Manifold:
    """Build a manifold from a family code ("S", "RP", "CP", "HP", "OP2")."""
    if isinstance(family, Family):
        return Manifold(family, n)
    code = family.strip().upper()
    for fam in Family:
        if fam.value == code:
            return Manifold(fam, n)
    raise ValueError(
        f"unknown family {family!r}; expected one of "
        + ", ".join(f.value for f in Family)
    )


# ----------------------------------------------------------------------------
# Quaternion helpers: arrays of shape (..., 4) holding [w, x, y, z].

def quat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product, broadcasting over leading axes."""
    aw, ax, ay, az = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
    bw, bx, by, bz = b[..., 0], b[..., 1], b[..., 2], b[..., 3]
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def quat_conj(a: np.ndarray) -> np.ndarray:
    out = a.copy()
    out[..., 1:] = -out[..., 1:]
    return out


# ----------------------------------------------------------------------------
# Internal views over the flat real layout.

def _as_complex(vec: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(vec, dtype=np.float64).view(np.complex128)


def _as_quat(vec: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(vec, dtype=np.float64).reshape(-1, 4)


def _scalar_inner(m: Manifold, p: np.ndarray, q: np.ndarray):
    """Hermitian inner product <p, q>, conjugate-linear in the first slot.

    Returns a float (S, RP), a complex number (CP) or a quaternion array (HP).
    """
    if m.scalar_width == 1:
        return float(np.dot(p, q))
    if m.family is Family.COMPLEX_PROJECTIVE:
        return complex(np.sum(np.conj(_as_complex(p)) * _as_complex(q)))
    pq = quat_mul(quat_conj(_as_quat(p)), _as_quat(q))
    return pq.sum(axis=0)


def _inner_modulus(m: Manifold, h) -> float:
    if isinstance(h, float):
        return abs(h)
    if isinstance(h, complex):
        return abs(h)
    return float(np.sqrt(np.dot(h, h)))


def _scale_by_unit(m: Manifold, vec: np.ndarray, s) -> np.ndarray:
    """Right-multiply every ambient coordinate by the unit scalar ``s``."""
    if m.scalar_width == 1:
        return vec * s
    if m.family is Family.COMPLEX_PROJECTIVE:
        out = _as_complex(vec) * s
        return out.view(np.float64)
    out = quat_mul(_as_quat(vec), np.asarray(s, dtype=np.float64))
    return out.reshape(-1)


def _canonical_gauge(m: Manifold, vec: np.ndarray) -> np.ndarray:
    """Rotate the scalar phase so the first nonzero coordinate is real positive."""
    if m.family is Family.SPHERE:
        return vec
    if m.scalar_width == 1:
        # Real projective: flip sign on the first non-negligible coordinate.
        for x in vec:
            if abs(x) > _GAUGE_ZERO:
                return vec if x > 0 else -vec
        return vec
    if m.family is Family.COMPLEX_PROJECTIVE:
        z = _as_complex(vec)
        for zk in z:
            r = abs(zk)
            if r > _GAUGE_ZERO:
                return (z * (zk.conjugate() / r)).view(np.float64)
        return vec
    q = _as_quat(vec)
    norms = np.sqrt(np.sum(q * q, axis=1))
    for k in range(q.shape[0]):
        if norms[k] > _GAUGE_ZERO:
            s = quat_conj(q[k]) / norms[k]
            return quat_mul(q, s).reshape(-1)
    return vec


def _is_canonical(m: Manifold, vec: np.ndarray) -> bool:
    if m.family is Family.SPHERE:
        return True
    gauged = _canonical_gauge(m, vec)
    return bool(np.max(np.abs(gauged - vec)) <= 1e-10)


# ----------------------------------------------------------------------------
# Domain types.


@dataclass(frozen=True, eq=False)
class Point:
    """A manifold point as an ambient unit representative (flat real layout)."""

    manifold: Manifold
    ambient: np.ndarray = field(repr=False)
    canonical_form: bool = True

    def __post_init__(self):
        self.ambient.setflags(write=False)

    def complex_coords(self) -> np.ndarray:
        return _as_complex(self.ambient).copy()

    def quaternion_coords(self) -> np.ndarray:
        return _as_quat(self.ambient).copy()


@dataclass(frozen=True, eq=False)
class TangentVector:
    """A tangent (horizontal, for projective families) vector at a base point."""

    point: Point
    ambient: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.ambient.setflags(write=False)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.ambient))


def make_point(m: Manifold, coords, canonicalize: bool = False) -> Point:
    """Validate ambient coordinates and wrap them as a Point.

    ``coords`` may be a flat real vector, a complex vector (CP) or an
    (n+1, 4) quaternion array (HP).  The representative must already be a
    unit vector; set ``canonicalize=True`` to apply the phase gauge.
    """
    if not m.supports_points:
        raise UnsupportedOperationError("OP2 supports only radial/kernel queries")
    arr = np.asarray(coords)
    if np.iscomplexobj(arr):
        if m.family is not Family.COMPLEX_PROJECTIVE:
            raise ValueError(f"complex coordinates are invalid on {m.label}")
        arr = np.ascontiguousarray(arr, dtype=np.complex128).view(np.float64)
    arr = np.ascontiguousarray(arr, dtype=np.float64).reshape(-1)
    if arr.size != m.ambient_real_dim:
        raise ValueError(
            f"{m.label} expects {m.ambient_real_dim} real coordinates, got {arr.size}"
        )
    nrm = float(np.linalg.norm(arr))
    if abs(nrm - 1.0) > UNIT_NORM_TOL:
        raise ValueError(f"ambient representative has norm {nrm!r}, expected 1")
    if canonicalize:
        arr = np.ascontiguousarray(_canonical_gauge(m, arr))
    return Point(m, arr, canonical_form=_is_canonical(m, arr))


def canonicalize(p: Point) -> Point:
    if p.canonical_form:
        return p
    arr = np.ascontiguousarray(_canonical_gauge(p.manifold, p.ambient))
    return Point(p.manifold, arr, canonical_form=True)


def project_tangent(p: Point, ambient) -> TangentVector:
    """Project an ambient vector onto the (horizontal) tangent space at ``p``."""
    m = p.manifold
    v = np.ascontiguousarray(ambient, dtype=np.float64).reshape(-1)
    if v.size != m.ambient_real_dim:
        raise ValueError("tangent vector has the wrong ambient dimension")
    h = _scalar_inner(m, p.ambient, v)
    if m.scalar_width == 1:
        w = v - h * p.ambient
    else:
        w = v - _scale_by_unit(m, p.ambient, h)
    return TangentVector(p, np.ascontiguousarray(w))


def make_tangent(p: Point, ambient) -> TangentVector:
    """Wrap an ambient vector as a TangentVector, enforcing tangency."""
    m = p.manifold
    v = np.ascontiguousarray(ambient, dtype=np.float64).reshape(-1)
    h = _scalar_inner(m, p.ambient, v)
    if _inner_modulus(m, h) > TANGENCY_TOL * max(1.0, float(np.linalg.norm(v))):
        raise ValueError(
            f"vector is not horizontal at the base point (|<v,x>| = {_inner_modulus(m, h):.3e})"
        )
    return TangentVector(p, v)


def zero_tangent(p: Point) -> TangentVector:
    return TangentVector(p, np.zeros(p.manifold.ambient_real_dim))


@dataclass(frozen=True, eq=False)
class Configuration:
    """An ordered multiset of N >= 2 points bound to a single manifold."""

    manifold: Manifold
    points: tuple[Point, ...]

    def __post_init__(self):
        if len(self.points) < 2:
            raise ValueError(f"a configuration needs N >= 2 points, got {len(self.points)}")
        for k, p in enumerate(self.points):
            if p.manifold != self.manifold:
                raise ValueError(
                    f"points[{k}] is bound to {p.manifold.label}, expected {self.manifold.label}"
                )

    def __len__(self) -> int:
        return len(self.points)

    def matrix(self) -> np.ndarray:
        """Stacked ambient representatives, shape (N, ambient_real_dim)."""
        return np.ascontiguousarray(np.stack([p.ambient for p in self.points]))


def configuration(m: Manifold, points: Iterable[Point]) -> Configuration:
    return Configuration(m, tuple(points))


def configuration_from_matrix(m: Manifold, X: np.ndarray, canonicalize_points: bool = True) -> Configuration:
    pts = [make_point(m, row, canonicalize=canonicalize_points) for row in np.asarray(X)]
    return Configuration(m, tuple(pts))


# ----------------------------------------------------------------------------
# Operations.


def _require_same(m: Manifold, p: Point, q: Point):
    if p.manifold != m or q.manifold != m:
        raise ValueError(
            f"points bound to {p.manifold.label}/{q.manifold.label}, expected {m.label}"
        )


def _pair_cos(m: Manifold, p: Point, q: Point):
    """Clamped cosine of the geodesic distance plus the raw inner product.

    The inner product is always computed with the arguments in a canonical
    (byte-lexicographic) order and conjugated back, so distance(p, q) and
    distance(q, p) come from the same floating-point value bit-for-bit.
    """
    if m.scalar_width == 1:
        h = _scalar_inner(m, p.ambient, q.ambient)
        if m.family is Family.SPHERE:
            return min(1.0, max(-1.0, h)), h
        return min(1.0, abs(h)), h
    swap = p.ambient.tobytes() > q.ambient.tobytes()
    first, second = (q, p) if swap else (p, q)
    h = _scalar_inner(m, first.ambient, second.ambient)
    if swap:
        h = h.conjugate() if isinstance(h, complex) else quat_conj(h)
    return min(1.0, _inner_modulus(m, h)), h


def distance(m: Manifold, p: Point, q: Point) -> float:
    """Geodesic distance in radians, in [0, diameter]."""
    if not m.supports_points:
        raise UnsupportedOperationError("OP2 supports only radial/kernel queries")
    _require_same(m, p, q)
    c, _ = _pair_cos(m, p, q)
    return math.acos(c)


def aligned_representative(m: Manifold, p: Point, q: Point) -> np.ndarray:
    """Representative of q whose inner product with p is real non-negative."""
    c, h = _pair_cos(m, p, q)
    if m.family is Family.SPHERE:
        return np.array(q.ambient)
    if m.scalar_width == 1:
        return q.ambient * (1.0 if h >= 0 else -1.0)
    mod = _inner_modulus(m, h)
    if mod <= _GAUGE_ZERO:
        raise DegenerateDistanceError("phase alignment undefined at the cut locus")
    if m.family is Family.COMPLEX_PROJECTIVE:
        return _scale_by_unit(m, q.ambient, h.conjugate() / mod)
    return _scale_by_unit(m, q.ambient, quat_conj(h) / mod)


def distance_gradient(
    m: Manifold, p: Point, q: Point, delta_min: float = DEFAULT_DELTA_MIN
) -> TangentVector:
    """Riemannian gradient of d(., q) at p; unit norm, horizontal at p.

    Undefined (raises DegenerateDistanceError) within ``delta_min`` of a
    coincident pair or of the cut locus.
    """
    if not m.supports_points:
        raise UnsupportedOperationError("OP2 supports only radial/kernel queries")
    _require_same(m, p, q)
    c, _ = _pair_cos(m, p, q)
    d = math.acos(c)
    if d <= delta_min or d >= m.diameter - delta_min:
        raise DegenerateDistanceError(
            f"distance gradient undefined at d={d!r} (diameter {m.diameter!r})"
        )
    qt = aligned_representative(m, p, q)
    g = -(qt - c * p.ambient) / math.sin(d)
    return TangentVector(p, np.ascontiguousarray(g))


def retract(m: Manifold, p: Point, v: TangentVector) -> Point:
    """Metric-projection retraction: normalize(p + v), then re-gauge."""
    if v.point.manifold != m:
        raise ValueError("tangent vector is not based on this manifold")
    if v.point is not p and not np.array_equal(v.point.ambient, p.ambient):
        raise ValueError("tangent vector is based at a different point")
    moved = p.ambient + v.ambient
    nrm = float(np.linalg.norm(moved))
    if nrm == 0.0:
        raise ValueError("retraction of a zero ambient vector")
    arr = np.ascontiguousarray(_canonical_gauge(m, moved / nrm))
    return Point(m, arr, canonical_form=True)


def random_point(m: Manifold, rng: np.random.Generator) -> Point:
    """Uniform point: normalized ambient Gaussian vector, canonical gauge."""
    if not m.supports_points:
        raise UnsupportedOperationError("OP2 supports only radial/kernel queries")
    z = rng.standard_normal(m.ambient_real_dim)
    z /= np.linalg.norm(z)
    arr = np.ascontiguousarray(_canonical_gauge(m, z))
    return Point(m, arr, canonical_form=True)


def _check_unitary(m: Manifold, Q: np.ndarray):
    k = m.n_scalars
    if m.scalar_width == 1:
        if Q.shape != (k, k):
            raise ValueError(f"isometry must be a {k}x{k} matrix")
        dev = np.max(np.abs(Q.T @ Q - np.eye(k)))
    elif m.family is Family.COMPLEX_PROJECTIVE:
        if Q.shape != (k, k):
            raise ValueError(f"isometry must be a {k}x{k} complex matrix")
        dev = np.max(np.abs(np.conj(Q.T) @ Q - np.eye(k)))
    else:
        if Q.shape != (k, k, 4):
            raise ValueError(f"isometry must be a {k}x{k} quaternion matrix")
        gram = np.zeros((k, k, 4))
        for i in range(k):
            for j in range(k):
                prods = quat_mul(quat_conj(Q[:, i]), Q[:, j])
                gram[i, j] = prods.sum(axis=0)
        target = np.zeros((k, k, 4))
        target[np.arange(k), np.arange(k), 0] = 1.0
        dev = np.max(np.abs(gram - target))
    if dev > ORTHOGONALITY_TOL:
        raise ValueError(f"matrix is not orthogonal/unitary (deviation {dev:.3e})")


def apply_isometry(m: Manifold, p: Point, Q: np.ndarray) -> Point:
    """Apply an ambient orthogonal/unitary map and re-gauge the result."""
    if not m.supports_points:
        raise UnsupportedOperationError("OP2 supports only radial/kernel queries")
    Q = np.asarray(Q)
    _check_unitary(m, Q)
    if m.scalar_width == 1:
        moved = Q @ p.ambient
    elif m.family is Family.COMPLEX_PROJECTIVE:
        moved = (Q @ _as_complex(p.ambient)).view(np.float64)
    else:
        pq = _as_quat(p.ambient)
        moved = np.zeros_like(pq)
        for i in range(Q.shape[0]):
            moved[i] = quat_mul(Q[i], pq).sum(axis=0)
        moved = moved.reshape(-1)
    moved = moved / np.linalg.norm(moved)
    arr = np.ascontiguousarray(_canonical_gauge(m, moved))
    return Point(m, arr, canonical_form=True)


def random_isometry(m: Manifold, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish random ambient isometry (test helper)."""
    k = m.n_scalars
    if m.scalar_width == 1:
        A = rng.standard_normal((k, k))
        Q, R = np.linalg.qr(A)
        return Q * np.sign(np.diag(R))
    if m.family is Family.COMPLEX_PROJECTIVE:
        A = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        Q, R = np.linalg.qr(A)
        d = np.diag(R)
        return Q * (d / np.abs(d)).conj()
    # Quaternionic Gram-Schmidt on columns, coefficients multiplied on the right.
    A = rng.standard_normal((k, k, 4))
    for j in range(k):
        for i in range(j):
            coef = quat_mul(quat_conj(A[:, i]), A[:, j]).sum(axis=0)
            A[:, j] -= quat_mul(A[:, i], coef)
        nrm = math.sqrt(float(np.sum(A[:, j] ** 2)))
        A[:, j] /= nrm
    return A
