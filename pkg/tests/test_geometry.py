import math

import numpy as np
import pytest

from greenpoints import geometry as geo
from greenpoints import radial
from greenpoints.geometry import (
    Configuration,
    DegenerateDistanceError,
    TangentVector,
    UnsupportedOperationError,
    apply_isometry,
    distance,
    distance_gradient,
    make_point,
    make_tangent,
    manifold,
    project_tangent,
    random_isometry,
    random_point,
    retract,
)

ALL_POINT_FAMILIES = [("S", 2), ("S", 3), ("RP", 2), ("RP", 3), ("CP", 1), ("CP", 2), ("HP", 1), ("HP", 2)]


def test_manifold_metadata():
    assert manifold("S", 2).real_dim == 2
    assert manifold("RP", 3).real_dim == 3
    assert manifold("CP", 3).real_dim == 6
    assert manifold("HP", 2).real_dim == 8
    assert manifold("OP2", 2).real_dim == 16
    assert manifold("S", 5).diameter == math.pi
    for fam in ("RP", "CP", "HP"):
        assert manifold(fam, 2).diameter == math.pi / 2
    with pytest.raises(ValueError):
        manifold("S", 1)  # real dimension must exceed 1
    with pytest.raises(ValueError):
        manifold("OP2", 3)
    with pytest.raises(ValueError):
        manifold("X", 2)


def test_distance_examples():
    s2 = manifold("S", 2)
    p = make_point(s2, [0.0, 0.0, 1.0])
    q = make_point(s2, [1.0, 0.0, 0.0])
    assert distance(s2, p, q) == pytest.approx(math.pi / 2, abs=1e-15)

    rp2 = manifold("RP", 2)
    e1 = make_point(rp2, [1.0, 0.0, 0.0])
    me1 = make_point(rp2, [-1.0, 0.0, 0.0])
    assert distance(rp2, e1, me1) == 0.0

    cp1 = manifold("CP", 1)
    a = make_point(cp1, np.array([1.0, 0.0], dtype=complex))
    b = make_point(cp1, np.array([0.0, 1.0], dtype=complex))
    assert distance(cp1, a, b) == pytest.approx(math.pi / 2, abs=1e-15)

    cp2 = manifold("CP", 2)
    a = make_point(cp2, np.array([1.0, 0.0, 0.0], dtype=complex))
    b = make_point(cp2, np.array([1.0, 1.0, 0.0], dtype=complex) / math.sqrt(2))
    assert distance(cp2, a, b) == pytest.approx(math.pi / 4, abs=1e-12)


def test_distance_symmetry_and_triangle():
    rng = np.random.default_rng(7)
    for fam, n in ALL_POINT_FAMILIES:
        m = manifold(fam, n)
        for _ in range(25):
            p, q, w = (random_point(m, rng) for _ in range(3))
            assert distance(m, p, q) == distance(m, q, p)
            assert distance(m, p, q) <= distance(m, p, w) + distance(m, w, q) + 1e-9
            assert 0.0 <= distance(m, p, q) <= m.diameter


def test_gauge_invariance():
    rng = np.random.default_rng(8)
    cp = manifold("CP", 2)
    p = random_point(cp, rng)
    q = random_point(cp, rng)
    phase = np.exp(1j * 0.7321)
    q_rot = make_point(cp, q.complex_coords() * phase)
    assert distance(cp, p, q_rot) == pytest.approx(distance(cp, p, q), abs=1e-12)
    # canonical gauge restores the same representative
    canonical = geo.canonicalize(q_rot)
    np.testing.assert_allclose(canonical.ambient, q.ambient, atol=1e-12)

    hp = manifold("HP", 1)
    p = random_point(hp, rng)
    quat = np.array([0.3, -0.5, 0.7, 0.4])
    quat /= np.linalg.norm(quat)
    rotated = geo.quat_mul(p.quaternion_coords(), quat)
    p_rot = make_point(hp, rotated.reshape(-1))
    assert distance(hp, p, p_rot) <= 1e-7
    np.testing.assert_allclose(
        geo.canonicalize(p_rot).ambient, p.ambient, atol=1e-10
    )


def test_gradient_unit_norm_tangent_and_direction():
    rng = np.random.default_rng(9)
    s2 = manifold("S", 2)
    p = make_point(s2, [0.0, 0.0, 1.0])
    q = make_point(s2, [1.0, 0.0, 0.0])
    g = distance_gradient(s2, p, q)
    np.testing.assert_allclose(g.ambient, [-1.0, 0.0, 0.0], atol=1e-14)

    for fam, n in ALL_POINT_FAMILIES:
        m = manifold(fam, n)
        for _ in range(10):
            p = random_point(m, rng)
            q = random_point(m, rng)
            d = distance(m, p, q)
            if d < 1e-3 or d > m.diameter - 1e-3:
                continue
            g = distance_gradient(m, p, q)
            assert g.norm == pytest.approx(1.0, abs=1e-8)
            # horizontality: scalar inner product with the base vanishes
            h = geo._scalar_inner(m, p.ambient, g.ambient)
            assert geo._inner_modulus(m, h) <= 1e-10


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(10)
    h = 1e-6
    for fam, n in ALL_POINT_FAMILIES:
        m = manifold(fam, n)
        p = random_point(m, rng)
        q = random_point(m, rng)
        d = distance(m, p, q)
        if d < 1e-2 or d > m.diameter - 1e-2:
            q = random_point(m, rng)
            d = distance(m, p, q)
        g = distance_gradient(m, p, q)
        vdir = project_tangent(p, rng.standard_normal(m.ambient_real_dim))
        vhat = vdir.ambient / vdir.norm
        plus = retract(m, p, TangentVector(p, h * vhat))
        minus = retract(m, p, TangentVector(p, -h * vhat))
        numeric = (distance(m, plus, q) - distance(m, minus, q)) / (2 * h)
        analytic = float(np.dot(g.ambient, vhat))
        assert abs(numeric - analytic) <= 1e-6


def test_gradient_degenerate_guard():
    s2 = manifold("S", 2)
    p = make_point(s2, [0.0, 0.0, 1.0])
    with pytest.raises(DegenerateDistanceError):
        distance_gradient(s2, p, p)
    antipode = make_point(s2, [0.0, 0.0, -1.0])
    with pytest.raises(DegenerateDistanceError):
        distance_gradient(s2, p, antipode)


def test_retract_identity_and_normalization():
    s2 = manifold("S", 2)
    p = make_point(s2, [1.0, 0.0, 0.0])
    zero = TangentVector(p, np.zeros(3))
    assert np.array_equal(retract(s2, p, zero).ambient, p.ambient)
    t = 0.25
    moved = retract(s2, p, TangentVector(p, np.array([0.0, t, 0.0])))
    np.testing.assert_allclose(
        moved.ambient, np.array([1.0, t, 0.0]) / math.sqrt(1 + t * t), atol=1e-15
    )


def test_retract_first_order_step_length():
    rng = np.random.default_rng(11)
    for fam, n in [("S", 2), ("CP", 2), ("HP", 1)]:
        m = manifold(fam, n)
        p = random_point(m, rng)
        vdir = project_tangent(p, rng.standard_normal(m.ambient_real_dim))
        vhat = vdir.ambient / vdir.norm
        for h in (1e-2, 1e-3):
            stepped = retract(m, p, TangentVector(p, h * vhat))
            assert distance(m, p, stepped) == pytest.approx(h, abs=5 * h**3)


def test_random_point_uniformity_s2():
    rng = np.random.default_rng(12)
    m = manifold("S", 2)
    n = 100_000
    Z = rng.standard_normal((n, 3))
    Z /= np.linalg.norm(Z, axis=1)[:, None]
    assert np.linalg.norm(Z.mean(axis=0)) <= 0.02  # CLT bound 3 sqrt(1/3)/sqrt(n)
    north = np.array([0.0, 0.0, 1.0])
    hemisphere = np.count_nonzero(Z @ north > 0.0) / n
    assert abs(hemisphere - 0.5) <= 0.01


def test_random_point_cp2_coordinate_symmetry():
    rng = np.random.default_rng(13)
    m = manifold("CP", 2)
    n = 100_000
    Z = rng.standard_normal((n, 6))
    Z /= np.linalg.norm(Z, axis=1)[:, None]
    z0_sq = Z[:, 0] ** 2 + Z[:, 1] ** 2
    assert abs(z0_sq.mean() - 1.0 / 3.0) <= 0.01  # coordinate exchangeability


@pytest.mark.parametrize("fam,n", [("S", 2), ("RP", 2), ("CP", 2), ("HP", 1)])
def test_radial_cdf_ks(fam, n):
    # Empirical distance CDF to a fixed point must match the analytic
    # ball-volume CDF from the density table (Kolmogorov-Smirnov <= 0.01).
    rng = np.random.default_rng(14)
    m = manifold(fam, n)
    base = random_point(m, rng)
    samples = 100_000
    dists = np.empty(samples)
    for idx in range(samples):
        dists[idx] = distance(m, base, random_point(m, rng))
    dists.sort()
    grid_cdf = np.array([radial.ball_volume_fraction(m, r) for r in dists])
    empirical = np.arange(1, samples + 1) / samples
    ks = np.max(np.abs(empirical - grid_cdf))
    assert ks <= 0.01


def test_apply_isometry_identity_and_rotation():
    s2 = manifold("S", 2)
    p = make_point(s2, [1.0, 0.0, 0.0])
    assert np.allclose(apply_isometry(s2, p, np.eye(3)).ambient, p.ambient)
    Rz = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    rotated = apply_isometry(s2, p, Rz)
    np.testing.assert_allclose(rotated.ambient, [0.0, 1.0, 0.0], atol=1e-15)
    north = make_point(s2, [0.0, 0.0, 1.0])
    assert distance(s2, rotated, apply_isometry(s2, north, Rz)) == pytest.approx(
        distance(s2, p, north), abs=1e-12
    )


def test_apply_isometry_preserves_distances_randomized():
    rng = np.random.default_rng(15)
    for fam, n in [("S", 3), ("RP", 2), ("CP", 2), ("HP", 1)]:
        m = manifold(fam, n)
        for _ in range(25):
            Q = random_isometry(m, rng)
            p, q = random_point(m, rng), random_point(m, rng)
            assert abs(
                distance(m, apply_isometry(m, p, Q), apply_isometry(m, q, Q))
                - distance(m, p, q)
            ) <= 1e-10


def test_apply_isometry_rejects_nonorthogonal():
    s2 = manifold("S", 2)
    p = make_point(s2, [1.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        apply_isometry(s2, p, np.eye(3) * 1.001)


def test_op2_supports_no_points():
    op2 = manifold("OP2", 2)
    rng = np.random.default_rng(0)
    with pytest.raises(UnsupportedOperationError):
        random_point(op2, rng)
    assert not op2.supports_points


def test_point_validation():
    s2 = manifold("S", 2)
    with pytest.raises(ValueError):
        make_point(s2, [1.0, 1.0, 0.0])  # not unit norm
    with pytest.raises(ValueError):
        make_point(s2, [1.0, 0.0])  # wrong length
    hp = manifold("HP", 1)
    with pytest.raises(ValueError):
        make_point(hp, np.array([1.0 + 0j, 0.0]))  # complex coords on HP


def test_tangent_validation():
    s2 = manifold("S", 2)
    p = make_point(s2, [0.0, 0.0, 1.0])
    with pytest.raises(ValueError):
        make_tangent(p, [0.0, 0.0, 0.5])  # radial component
    t = make_tangent(p, [0.3, -0.2, 0.0])
    assert t.norm == pytest.approx(math.hypot(0.3, 0.2))


def test_configuration_checks():
    s2 = manifold("S", 2)
    p = make_point(s2, [0.0, 0.0, 1.0])
    with pytest.raises(ValueError):
        Configuration(s2, (p,))
    s3 = manifold("S", 3)
    q3 = make_point(s3, [1.0, 0.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        Configuration(s2, (p, q3))


def test_mismatched_manifold_distance():
    s2 = manifold("S", 2)
    rp2 = manifold("RP", 2)
    p = make_point(s2, [0.0, 0.0, 1.0])
    q = make_point(rp2, [0.0, 0.0, 1.0])
    with pytest.raises(ValueError):
        distance(s2, p, q)
