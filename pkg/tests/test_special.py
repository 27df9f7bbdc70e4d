import math

import mpmath
import numpy as np
import pytest

from heatchain.errors import DomainError
from heatchain.special import (
    EULER_GAMMA,
    e1_scaled,
    e1_scaled_array,
    ei_scaled,
    ei_scaled_array,
    exp_integral,
    exp_integral_array,
    expint_e1,
    expint_ei,
)

mpmath.mp.dps = 40
GRID = np.concatenate([np.geomspace(1e-8, 1.0, 25), np.linspace(1.01, 60.0, 60), [80.0, 150.0, 400.0]])


def test_e1_of_one():
    # high-precision reference from direct quadrature of exp(-t)/t on [1, inf)
    ref = mpmath.quad(lambda t: mpmath.exp(-t) / t, [1, mpmath.inf])
    assert exp_integral(1.0) == pytest.approx(float(ref), rel=1e-14)
    assert exp_integral(1.0) == pytest.approx(0.21938393439552027, rel=1e-14)


@pytest.mark.parametrize("x", GRID)
def test_e1_scaled_vs_mpmath(x):
    ref = float(mpmath.e1(x) * mpmath.exp(x))
    assert e1_scaled(x) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("x", GRID)
def test_ei_scaled_vs_mpmath(x):
    ref = float(mpmath.ei(x) * mpmath.exp(-x))
    assert ei_scaled(x) == pytest.approx(ref, rel=1e-12, abs=1e-300)


def test_array_versions_match_scalar():
    np.testing.assert_allclose(e1_scaled_array(GRID), [e1_scaled(x) for x in GRID], rtol=1e-13)
    np.testing.assert_allclose(ei_scaled_array(GRID), [ei_scaled(x) for x in GRID], rtol=1e-13)


def test_negative_branch_is_principal_value():
    for x in (0.3, 2.0, 17.0):
        assert exp_integral(-x) == pytest.approx(-float(mpmath.ei(x)), rel=1e-12)
    xs = np.array([-5.0, -0.5, 0.5, 5.0])
    np.testing.assert_allclose(exp_integral_array(xs), [exp_integral(v) for v in xs], rtol=1e-13)


def test_large_argument_asymptote():
    x = 300.0
    assert expint_e1(x) * x * math.exp(x) == pytest.approx(1.0, abs=1e-2)
    assert e1_scaled(1e6) * 1e6 == pytest.approx(1.0, abs=1e-5)


def test_small_argument_limit():
    x = 1e-10
    assert expint_e1(x) + math.log(x) + EULER_GAMMA == pytest.approx(0.0, abs=1e-9)


def test_ei_unscaled():
    assert expint_ei(1.0) == pytest.approx(float(mpmath.ei(1)), rel=1e-13)


def test_zero_is_domain_error():
    with pytest.raises(DomainError):
        exp_integral(0.0)
    with pytest.raises(DomainError):
        exp_integral_array([1.0, 0.0])
