import math

import numpy as np
import pytest

from greenpoints.geometry import manifold
from greenpoints.quadrature import integrate
from greenpoints.radial import (
    ball_volume_fraction,
    density_profile,
    radial_geometry,
    radial_laplacian,
    sphere_area,
    tail,
    total_volume,
    v,
)

ALL_FAMILIES = [
    ("S", 2), ("S", 3), ("S", 4), ("RP", 2), ("RP", 3),
    ("CP", 1), ("CP", 2), ("CP", 3), ("HP", 1), ("HP", 2), ("OP2", 2),
]


def test_sphere_area_values():
    assert sphere_area(2) == pytest.approx(2 * math.pi, rel=1e-15)
    assert sphere_area(3) == pytest.approx(4 * math.pi, rel=1e-15)
    assert sphere_area(4) == pytest.approx(2 * math.pi**2, rel=1e-15)
    with pytest.raises(ValueError):
        sphere_area(0)


def test_profile_rows():
    # Table rows evaluated directly at a generic radius.
    r = 0.437
    assert density_profile(manifold("S", 3))(r) == pytest.approx(math.sin(r) ** 2)
    assert density_profile(manifold("RP", 3))(r) == pytest.approx(4 * math.sin(r) ** 2)
    assert density_profile(manifold("CP", 2))(r) == pytest.approx(
        8 * math.sin(r) ** 3 * math.cos(r)
    )
    assert density_profile(manifold("HP", 1))(r) == pytest.approx(
        8 * math.sin(r) ** 3 * math.cos(r) ** 3
    )
    assert density_profile(manifold("OP2", 2))(r) == pytest.approx(
        2**15 * math.sin(r) ** 15 * math.cos(r) ** 7
    )


def test_v_examples():
    s2 = manifold("S", 2)
    assert v(s2, math.pi / 2) == pytest.approx(2 * math.pi, rel=1e-15)
    cp1 = manifold("CP", 1)
    assert v(cp1, math.pi / 2) == pytest.approx(0.0, abs=1e-15)
    s3 = manifold("S", 3)
    assert v(s3, math.pi / 4) == pytest.approx(2 * math.pi, rel=1e-14)


def test_tail_s2_closed_form():
    s2 = manifold("S", 2)
    for r in (0.0, 0.3, 1.2, 2.9, math.pi):
        assert tail(s2, r) == pytest.approx(2 * math.pi * (1 + math.cos(r)), abs=1e-12)
    assert tail(s2, 0.0) == pytest.approx(4 * math.pi, rel=1e-15)


def test_tail_cp_total_volume_formula():
    # V(CP^n) = vol(S^{2n-1}) 2^{2n-1} / (2n), from the sin^{2n-1} cos antiderivative.
    for n in (1, 2, 3, 4):
        m = manifold("CP", n)
        expected = sphere_area(2 * n) * 2 ** (2 * n - 1) / (2 * n)
        assert total_volume(m) == pytest.approx(expected, rel=1e-14)


def test_tail_vanishes_at_diameter():
    for fam, n in ALL_FAMILIES:
        m = manifold(fam, n)
        assert tail(m, m.diameter) == 0.0


@pytest.mark.parametrize("fam,n", ALL_FAMILIES)
def test_total_volume_matches_quadrature(fam, n):
    m = manifold(fam, n)
    res = integrate(lambda t: v(m, t), 0.0, m.diameter)
    assert total_volume(m) == pytest.approx(res.value, rel=1e-10)


@pytest.mark.parametrize("fam,n", ALL_FAMILIES)
def test_tail_derivative_is_minus_v(fam, n):
    m = manifold(fam, n)
    h = 1e-6
    for r in (0.2, 0.7, 0.5 * m.diameter, 0.9 * m.diameter):
        numeric = (tail(m, r + h) - tail(m, r - h)) / (2 * h)
        assert numeric == pytest.approx(-v(m, r), abs=1e-8 * max(1.0, v(m, r)))


@pytest.mark.parametrize("fam,n", ALL_FAMILIES)
def test_tail_quadrature_cross_check(fam, n):
    m = manifold(fam, n)
    for r in (0.1, 0.5 * m.diameter, 0.95 * m.diameter):
        res = integrate(lambda t: v(m, t), r, m.diameter)
        assert tail(m, r) == pytest.approx(res.value, abs=1e-10 * max(1.0, res.value))


def test_v_positive_and_continuous():
    for fam, n in ALL_FAMILIES:
        m = manifold(fam, n)
        rr = np.linspace(1e-6, m.diameter - 1e-6, 500)
        vals = np.array([v(m, float(r)) for r in rr])
        assert np.all(vals >= 0.0)
        assert np.max(np.abs(np.diff(vals))) < np.ptp(vals) + 1e-12
        # small-r asymptotics: v ~ kappa r^{d-1}
        geo = radial_geometry(m)
        r0 = 1e-4
        assert v(m, r0) / r0 ** (m.real_dim - 1) == pytest.approx(geo.kappa, rel=1e-6)


def test_radial_laplacian_s2():
    s2 = manifold("S", 2)
    assert radial_laplacian(s2, math.pi / 2) == pytest.approx(0.0, abs=1e-15)
    for r in (0.3, 1.0, 2.0):
        assert radial_laplacian(s2, r) == pytest.approx(-1.0 / math.tan(r), rel=1e-13)


def test_radial_laplacian_small_r_leading_term():
    s3 = manifold("S", 3)
    r = 1e-4
    assert radial_laplacian(s3, r) * r == pytest.approx(-2.0, abs=1e-6)


@pytest.mark.parametrize("fam,n", ALL_FAMILIES)
def test_radial_laplacian_is_log_derivative_of_v(fam, n):
    m = manifold(fam, n)
    h = 1e-6
    for r in (0.3, 0.5 * m.diameter, 0.8 * m.diameter):
        numeric = (math.log(v(m, r + h)) - math.log(v(m, r - h))) / (2 * h)
        assert radial_laplacian(m, r) + numeric == pytest.approx(0.0, abs=1e-6)


def test_ball_volume_fraction_examples():
    s2 = manifold("S", 2)
    assert ball_volume_fraction(s2, math.pi / 2) == pytest.approx(0.5, abs=1e-14)
    assert ball_volume_fraction(s2, math.pi / 3) == pytest.approx(0.25, abs=1e-14)
    for fam, n in ALL_FAMILIES:
        m = manifold(fam, n)
        assert ball_volume_fraction(m, m.diameter) == 1.0
        assert ball_volume_fraction(m, 0.0) == 0.0


@pytest.mark.parametrize("fam,n", ALL_FAMILIES)
def test_cdf_monotone_on_grid(fam, n):
    m = manifold(fam, n)
    rr = np.linspace(0.0, m.diameter, 1000)
    vals = np.array([ball_volume_fraction(m, float(r)) for r in rr])
    assert np.all(np.diff(vals) >= -1e-15)


def test_domain_errors():
    s2 = manifold("S", 2)
    with pytest.raises(ValueError):
        v(s2, -0.1)
    with pytest.raises(ValueError):
        tail(s2, math.pi + 0.1)
    with pytest.raises(ValueError):
        radial_laplacian(s2, 0.0)
    with pytest.raises(ValueError):
        radial_laplacian(s2, math.pi)
