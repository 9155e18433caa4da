import math

import numpy as np
import pytest

from greenpoints.quadrature import (
    QuadratureError,
    QuadratureSpec,
    RULE_GAUSS_COMPOSITE,
    integrate,
    integrate_singular_left,
)


def test_sine_over_period():
    res = integrate(math.sin, 0.0, math.pi)
    assert abs(res.value - 2.0) <= 1e-12


def test_sqrt_singularity_after_substitution():
    # int_0^1 t^(-1/2) dt = 2 once the caller substitutes t = u^2.
    res = integrate(lambda u: 2.0 * u / math.sqrt(u * u), 0.0, 1.0)
    assert abs(res.value - 2.0) <= 1e-10


def test_sphere_area_cross_check():
    res = integrate(lambda t: 2.0 * math.pi * math.sin(t), 0.0, math.pi)
    assert abs(res.value - 4.0 * math.pi) <= 1e-12


def test_log_singularity():
    value = integrate_singular_left(
        lambda r: math.log(1.0 / r), 0.0, 1.0, log_singularity=True
    )
    assert abs(value - 1.0) <= 1e-10


def test_power_singularity():
    # int_0^1 r^(-1/2) * r dr = 2/3, declared through the power class.
    value = integrate_singular_left(
        lambda r: r**-0.5 * r, 0.0, 1.0, exponent=-0.5
    )
    assert abs(value - 2.0 / 3.0) <= 1e-10


def test_s2_zero_mean_integral():
    # int_0^pi -(1/2pi) log(sin(r/2)) 2pi sin(r) dr = 1 (drives C = -1/(4pi)).
    value = integrate_singular_left(
        lambda r: -math.log(math.sin(0.5 * r)) / (2 * math.pi) * 2 * math.pi * math.sin(r),
        0.0,
        math.pi,
        log_singularity=True,
    )
    assert abs(value - 1.0) <= 1e-9


def test_polynomial_exactness_degree_20():
    rng = np.random.default_rng(1815)
    for _ in range(5):
        coefs = rng.uniform(-1.0, 1.0, size=21)
        poly = np.polynomial.Polynomial(coefs)
        anti = poly.integ()
        res = integrate(poly, -1.0, 1.0)
        exact = anti(1.0) - anti(-1.0)
        assert abs(res.value - exact) <= 1e-13 * max(1.0, abs(exact))


def test_additivity():
    f = lambda t: math.exp(-t) * math.cos(3 * t)
    whole = integrate(f, 0.0, 2.0).value
    split = integrate(f, 0.0, 0.7).value + integrate(f, 0.7, 2.0).value
    assert abs(whole - split) <= 2e-12


def test_composite_rule_agrees():
    spec = QuadratureSpec(rule=RULE_GAUSS_COMPOSITE)
    res = integrate(math.sin, 0.0, math.pi, spec)
    assert abs(res.value - 2.0) <= 1e-12


def test_bit_identical_repeats():
    f = lambda t: math.sin(t * t) / (1.0 + t)
    a = integrate(f, 0.0, 3.0).value
    b = integrate(f, 0.0, 3.0).value
    assert a == b


def test_error_reports_partial_value():
    # A discontinuity that the rule cannot resolve to 1e-12 within depth 4.
    spec = QuadratureSpec(max_depth=4)
    jump = lambda t: 0.0 if t < math.sqrt(0.5) else 1.0
    with pytest.raises(QuadratureError) as info:
        integrate(jump, 0.0, 1.0, spec)
    assert info.value.partial_value == pytest.approx(1.0 - math.sqrt(0.5), abs=0.1)


def test_rejects_nonintegrable_exponent():
    with pytest.raises(ValueError):
        integrate_singular_left(lambda r: 1.0 / r, 0.0, 1.0, exponent=-1.0)


def test_rejects_reversed_bounds():
    with pytest.raises(ValueError):
        integrate(math.sin, 1.0, 0.0)


def test_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(abs_tol=0.0)
    with pytest.raises(ValueError):
        QuadratureSpec(nodes_per_panel=8)
    with pytest.raises(ValueError):
        QuadratureSpec(rule="simpson")
