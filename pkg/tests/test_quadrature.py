import math

import numpy as np
import pytest

from heatchain.errors import NonFiniteIntegrand, ToleranceNotMet
from heatchain.model import chain_config
from heatchain.quadrature import (
    GAUSS_WEIGHTS,
    KRONROD_WEIGHTS,
    NODES,
    PeakSet,
    QuadratureSpec,
    estimate_widths,
    integrate_interval,
    integrate_line,
    resonance_modes,
)
from heatchain.spectral import Susceptibility, chi_imag

ONE_PEAK = PeakSet((1.2,), (1e-4,), tail_scale=20.0)


def test_rule_exactness():
    g, wg = np.polynomial.legendre.leggauss(10)
    np.testing.assert_allclose(NODES[1::2], g, atol=1e-15)
    np.testing.assert_allclose(GAUSS_WEIGHTS[1::2], wg, atol=1e-15)
    for deg in range(0, 32):
        exact = 0.0 if deg % 2 else 2.0 / (deg + 1)
        assert KRONROD_WEIGHTS @ NODES**deg == pytest.approx(exact, abs=1e-14)
        if deg < 20:
            assert GAUSS_WEIGHTS @ NODES**deg == pytest.approx(exact, abs=1e-14)


def test_narrow_lorentzian_area():
    spec = QuadratureSpec()
    A, c, w = 3.0, 1.2, 1e-4
    res = integrate_line(lambda x: A / (1.0 + ((x - c) / w) ** 2), ONE_PEAK, spec)
    wmax = spec.omega_max(ONE_PEAK)
    # analytic area of the truncated Lorentzian
    exact = A * w * (math.atan((wmax - c) / w) + math.atan((wmax + c) / w))
    assert res.value == pytest.approx(exact, rel=1e-8)
    assert exact == pytest.approx(math.pi * A * w, rel=1e-6)
    assert res.error <= max(spec.rel_tol * abs(res.value), spec.abs_tol)


def test_odd_integrand_vanishes():
    spec = QuadratureSpec()
    res = integrate_line(lambda x: x * np.exp(-x * x) + np.sin(3 * x) / (1 + x * x), ONE_PEAK, spec)
    assert abs(res.value) <= 10 * spec.abs_tol


def test_exponential_tail():
    spec = QuadratureSpec()
    res = integrate_line(lambda x: np.exp(-np.abs(x) / 20.0), ONE_PEAK, spec)
    assert res.value == pytest.approx(40.0, rel=spec.rel_tol)


def test_vector_valued_integrand():
    f = lambda x: np.stack([np.exp(-x), x * np.exp(-x), np.cos(x) * np.exp(-x)], axis=1)
    res = integrate_interval(f, 0.0, 60.0)
    np.testing.assert_allclose(res.value, [1.0, 1.0, 0.5], rtol=1e-9)
    assert res.value.shape == (3,)


def test_tolerance_not_met_carries_estimate():
    spec = QuadratureSpec(rel_tol=1e-14, max_subdivisions=8)
    with pytest.raises(ToleranceNotMet) as info:
        integrate_interval(lambda x: np.sqrt(np.abs(np.sin(40 * x))), 0.0, 10.0, spec=spec)
    assert info.value.value is not None and info.value.error > 0


def test_non_finite_integrand():
    with pytest.raises(NonFiniteIntegrand):
        integrate_interval(lambda x: np.where(x > 0.5, np.nan, 1.0), 0.0, 1.0)


def test_zero_is_always_a_panel_edge():
    seen = []

    def f(x):
        seen.append(np.asarray(x).copy())
        return np.where(x >= 0, 1.0, -1.0) * np.exp(-np.abs(x))

    res = integrate_line(f, ONE_PEAK)
    assert abs(res.value) < 1e-12
    assert not any(np.any(v == 0.0) for v in seen)


def test_halving_tolerance_stays_within_error():
    f = lambda x: 1.0 / (1.0 + ((x - 1.2) / 1e-3) ** 2) + np.exp(-np.abs(x))
    peaks = PeakSet((1.2,), (1e-3,), 20.0)
    a = integrate_line(f, peaks, QuadratureSpec(rel_tol=1e-7))
    b = integrate_line(f, peaks, QuadratureSpec(rel_tol=5e-8, tail_cutoff_factor=20.0 * math.log(1e7) / (20.0 * math.log(2e7))))
    assert abs(a.value - b.value) <= a.error + b.error + 1e-7 * abs(a.value)


def test_bracket_choice_does_not_matter():
    f = lambda x: 1.0 / (1.0 + ((x - 1.2) / 1e-4) ** 2) + 0.3 / (1.0 + ((x + 2.0) / 3e-3) ** 2)
    peaks = PeakSet((-2.0, 1.2), (3e-3, 1e-4), 20.0)
    a = integrate_line(f, peaks, QuadratureSpec())
    b = integrate_line(f, peaks, QuadratureSpec(brackets=(2.0, 20.0, 200.0)))
    assert a.value == pytest.approx(b.value, rel=1e-9, abs=a.error + b.error)


def test_peakset_invariants():
    with pytest.raises(ValueError):
        PeakSet((2.0, 1.0), (0.1, 0.1))
    with pytest.raises(ValueError):
        PeakSet((1.0,), (0.0,))
    with pytest.raises(ValueError):
        QuadratureSpec(rel_tol=0.0)


def test_widths_decoupled_limit():
    cfg = chain_config(k=0.0, T=1.0, dT_over_T=0.0, DT_over_T=0.0, delta_omega=0.5, gamma=(1e-4, 0.05, 1e-3))
    peaks = estimate_widths(cfg)
    # single-bath modes: width_i = J_i(w_i) / (m w_i) at the resonance w_i
    expected = []
    for w, b in zip(peaks.centers, sorted(zip(cfg.omega, cfg.baths), key=lambda t: t[0])):
        s = Susceptibility.from_bath(b[1])
        expected.append(chi_imag(s, w) / w)
    np.testing.assert_allclose(peaks.widths, expected, rtol=1e-12)
    # Re chi cancels the static shift, so resonances sit close to the bare frequencies
    np.testing.assert_allclose(peaks.centers, sorted(cfg.omega), rtol=5e-3)


def test_widths_scale_with_gamma():
    base = dict(k=1.8, T=0.27, dT_over_T=0.95, DT_over_T=0.0, delta_omega=0.5)
    g = np.array([1e-4, 0.005, 1e-4])
    w1 = np.array(estimate_widths(chain_config(gamma=tuple(g), **base)).widths)
    w10 = np.array(estimate_widths(chain_config(gamma=tuple(10 * g), **base)).widths)
    np.testing.assert_allclose(w10 / w1, 10.0, rtol=0.05)


def test_widths_positive_fig1(fig1):
    peaks = estimate_widths(fig1)
    assert all(w > 0 for w in peaks.widths)
    assert list(peaks.centers) == sorted(peaks.centers)


def test_resonances_are_green_function_peaks(fig1):
    """Every resonance centre is a local maximum of the trace of Im alpha."""
    from heatchain.steady import green_matrix

    freqs, _ = resonance_modes(fig1)
    peaks = estimate_widths(fig1)
    for c, w in zip(freqs, peaks.widths):
        grid = np.linspace(c - 0.5 * w, c + 0.5 * w, 201)
        resp = [abs(np.trace(green_matrix(fig1, x).imag)) for x in grid]
        assert abs(grid[int(np.argmax(resp))] - c) < 0.1 * w


def test_fig1_integrand_within_panel_budget(fig1):
    from heatchain import _kernels
    from heatchain.quadrature import integrate_halfline

    p = _kernels.KernelParams.from_config(fig1)
    res = integrate_halfline(lambda w: _kernels.evaluate(w, 0.0, p), estimate_widths(fig1))
    assert res.panels <= 10_000
