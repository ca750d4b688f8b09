import math

import mpmath
import numpy as np
import pytest
import scipy.special as sc
from hypothesis import assume, given
from hypothesis import strategies as st

from rampdiss.errors import ApproximationGapError, PoleError
from rampdiss.specfun import (SpecialValue, bessel_jy, cospi, gamma_fn, hyp1f2, hyp1f2_asymptotic,
                              hyp1f2_extended, hyp1f2_series, loggamma, rgamma, series_switch, sinpi)

mpmath.mp.dps = 40


def mp_hyp1f2(a, b, c, z):
    return float(mpmath.hyp1f2(a, b, c, z))


def test_gamma_known_values():
    assert gamma_fn(1.0).value == pytest.approx(1.0, rel=1e-15)
    assert gamma_fn(0.5).value == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert gamma_fn(0.5).value == pytest.approx(1.7724538509, abs=1e-10)
    recursion = math.sqrt(math.pi)
    for k in range(7):
        recursion *= 0.5 + k
    assert gamma_fn(7.5).value == pytest.approx(recursion, rel=1e-13)


@given(st.floats(-49.9, 50.0))
def test_gamma_against_mpmath(x):
    assume(abs(x - round(x)) > 1e-6 or x > 0.5)
    val = gamma_fn(x)
    ref = float(mpmath.gamma(x))
    assert abs(val.value - ref) <= 1e-12 * abs(ref)
    assert val.est_error >= 0


def test_gamma_poles_raise():
    for x in (0.0, -1.0, -7.0):
        with pytest.raises(PoleError):
            gamma_fn(x)
    assert rgamma(-3.0) == 0.0
    assert rgamma(4.0) == pytest.approx(1 / 6, rel=1e-15)


def test_loggamma_large():
    assert loggamma(200.5).value == pytest.approx(float(mpmath.loggamma(200.5)), rel=1e-13)


def test_trig_of_pi_multiples_exact():
    assert sinpi(3.0) == 0.0
    assert cospi(0.5) == 0.0
    assert sinpi(0.5) == 1.0


@pytest.mark.parametrize("x", [1.0, 10.0, 100.0])
def test_half_integer_bessel(x):
    j, y = bessel_jy(0.5, x)
    pref = math.sqrt(2.0 / (math.pi * x))
    assert j.value == pytest.approx(pref * math.sin(x), abs=1e-12 * pref)
    assert y.value == pytest.approx(-pref * math.cos(x), abs=1e-12 * pref)


@given(st.floats(-5.0, 5.0), st.floats(1e-3, 1e3))
def test_bessel_against_mpmath(order, x):
    j, y = bessel_jy(order, x)
    rj = float(mpmath.besselj(order, x))
    ry = float(mpmath.bessely(order, x))
    modulus = math.hypot(rj, ry)
    assert abs(j.value - rj) <= 1e-10 * modulus
    assert abs(y.value - ry) <= 1e-10 * modulus


@given(st.floats(0.05, 4.5), st.floats(0.1, 500.0))
def test_bessel_wronskian(order, x):
    j, y = bessel_jy(order, x)
    jm, ym = bessel_jy(order - 1.0, x)
    dj = jm.value - order / x * j.value
    dy = ym.value - order / x * y.value
    w = j.value * dy - dj * y.value
    scale = math.hypot(j.value, y.value) * math.hypot(dj, dy)
    assert abs(w - 2 / (math.pi * x)) <= 1e-10 * max(scale, 2 / (math.pi * x))


@given(st.floats(0.05, 4.95), st.floats(0.1, 800.0))
def test_bessel_reflection(order, x):
    assume(abs(order - round(order)) > 1e-3)
    jp, yp = bessel_jy(order, x)
    jn, yn = bessel_jy(-order, x)
    c, s = math.cos(math.pi * order), math.sin(math.pi * order)
    modulus = math.hypot(jp.value, yp.value)
    assert abs(jn.value - (c * jp.value - s * yp.value)) <= 1e-12 * modulus
    assert abs(yn.value - (s * jp.value + c * yp.value)) <= 1e-12 * modulus


def test_bessel_agrees_with_scipy_at_large_argument():
    for order in (-2.25, 0.0, 1.5, 3.75):
        for x in (50.0, 999.0):
            j, y = bessel_jy(order, x)
            modulus = math.hypot(sc.jv(order, x), sc.yv(order, x))
            assert abs(j.value - sc.jv(order, x)) < 1e-9 * modulus
            assert abs(y.value - sc.yv(order, x)) < 1e-9 * modulus


def test_bessel_rejects_nonpositive_argument():
    with pytest.raises(ValueError):
        bessel_jy(0.5, 0.0)
    with pytest.raises(ValueError):
        bessel_jy(0.5, -1.0)


def test_hyp1f2_at_zero_is_one():
    for params in [(0.3, 1.7, 2.2), (-1.5, 0.5, 3.0), (5.0, -2.5, 1.25)]:
        assert hyp1f2(*params, 0.0).value == 1.0


def test_hyp1f2_bessel_type_series():
    with mpmath.workdps(50):
        brute = mpmath.fsum(mpmath.mpf(-1) ** k / mpmath.factorial(k) ** 2 for k in range(200))
    assert hyp1f2(1.0, 1.0, 1.0, -1.0).value == pytest.approx(float(brute), rel=1e-14)


def test_hyp1f2_sector_parameters_nu4():
    nu, tau = 4.0, 0.5
    a, b, c = (nu + 2) / nu, (3 * nu + 2) / (2 * nu), (2 * nu + 3) / nu
    z = -tau * tau
    with mpmath.workdps(50):
        oracle = mpmath.fsum(mpmath.rf(a, k) / (mpmath.rf(b, k) * mpmath.rf(c, k)) * mpmath.mpf(z) ** k
                             / mpmath.factorial(k) for k in range(300))
    val = hyp1f2(a, b, c, z)
    assert abs(val.value - float(oracle)) < 1e-10 * abs(float(oracle))


@given(st.floats(-3.0, 3.0), st.floats(0.2, 4.0), st.floats(0.2, 4.0), st.floats(-30.0, 5.0))
def test_hyp1f2_series_regime_against_mpmath(a, b, c, z):
    val = hyp1f2(a, b, c, z)
    ref = mp_hyp1f2(a, b, c, z)
    scale = max(abs(ref), val.scale)
    assert abs(val.value - ref) <= 1e-8 * scale + 1e-15


@given(st.floats(0.3, 2.5), st.floats(0.3, 3.0), st.floats(0.3, 3.0), st.floats(-20.0, 20.0))
def test_hyp1f2_contiguity(a, b, c, z):
    # (a - b + 1) F = a F(a+1) - (b - 1) F(b-1)
    assume(abs(b - 1.0) > 1e-3)
    assume(b - 1.0 > 0.05)
    f = hyp1f2(a, b, c, z).value
    fa = hyp1f2(a + 1.0, b, c, z).value
    fb = hyp1f2(a, b - 1.0, c, z).value
    lhs = (a - b + 1.0) * f
    rhs = a * fa - (b - 1.0) * fb
    scale = abs(a - b + 1.0) * abs(f) + abs(a * fa) + abs((b - 1.0) * fb)
    assert abs(lhs - rhs) <= 1e-8 * scale


@pytest.mark.parametrize("params", [(1.5, 1.75, 3.5), (0.75, 1.25, 2.0), (1.0 / 3.0, 4.0 / 3.0, 5.0 / 3.0)])
@pytest.mark.parametrize("tau", [40.0, 200.0, 1000.0])
def test_hyp1f2_asymptotic_regime(params, tau):
    a, b, c = params
    z = -tau * tau
    val = hyp1f2(a, b, c, z)
    ref = mp_hyp1f2(a, b, c, z)
    scale = max(abs(ref), val.scale)
    assert abs(val.value - ref) <= 1e-5 * scale


def test_asymptotic_form_against_extended_series():
    a, b, c = 1.5, 1.75, 3.5
    z = -60.0 ** 2
    asym = hyp1f2_asymptotic(a, b, c, z)
    ext = hyp1f2_extended(a, b, c, z)
    assert abs(asym.value - ext.value) <= 1e-7 * max(asym.scale, abs(ext.value))
    with pytest.raises(ApproximationGapError):
        hyp1f2_asymptotic(a, b, c, 4.0)


def test_cancellation_is_flagged():
    plain = hyp1f2_series(0.5, 1.5, 2.5, -900.0)
    assert plain.flagged
    assert plain.est_error > 1e-6 * abs(plain.value)
    assert not hyp1f2(0.5, 1.5, 2.5, -900.0).flagged


def test_terminating_series_and_poles():
    # a = -2 stops the series before the lower pole at -3 is reached
    val = hyp1f2(-2.0, -3.0, 1.0, 0.7)
    assert val.value == pytest.approx(mp_hyp1f2(-2, -3, 1, 0.7), rel=1e-14)
    with pytest.raises(PoleError):
        hyp1f2(0.5, -1.0, 2.0, -1.0)


def test_series_switch_is_cached_and_positive():
    first = series_switch(0.5, 1.5, 2.5)
    assert first > 1.0
    assert series_switch(0.5, 1.5, 2.5) == first


def test_special_value_guards():
    with pytest.raises(ValueError):
        SpecialValue(1.0, -1.0)
    assert SpecialValue(0.0, 1e-20, scale=1.0).rel_error == 1e-20
    assert float(SpecialValue(2.5, 0.0)) == 2.5


def test_bessel_modulus_matches_scipy_grid():
    orders = np.linspace(-5, 5, 11)
    xs = np.geomspace(1e-2, 1e3, 9)
    worst = 0.0
    for m in orders:
        for x in xs:
            j, y = bessel_jy(m, x)
            rj, ry = sc.jv(m, x), sc.yv(m, x)
            if not (np.isfinite(rj) and np.isfinite(ry)):
                continue
            worst = max(worst, abs(j.value - rj) / math.hypot(rj, ry))
    assert worst < 1e-10
