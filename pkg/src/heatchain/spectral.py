"""Bath spectral densities and the complex susceptibility chi(omega)/hbar.

Everything here is in internal units (hbar = 1), so ``chi_imag`` equals the
odd extension of J and ``chi_real`` is its Hilbert transform.  Closed forms
exist for the Ohmic and super-Ohmic shapes; arbitrary user densities go
through :func:`kramers_kronig_numeric` only, and must decay faster than
1/omega^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from ._jit import maybe_njit
from .errors import NegativeFrequency, QuadratureFailure
from .model import OHMIC, SUPER_OHMIC, BathConfig, normalize_kind
from .special import e1_scaled, e1_scaled_array, ei_scaled, ei_scaled_array

KIND_CODES = {OHMIC: 0, SUPER_OHMIC: 1}
CUSTOM = "custom"


@dataclass(frozen=True)
class Susceptibility:
    kind: str
    gamma: float
    omega_c: float
    mass: float = 1.0
    density: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if self.kind != CUSTOM:
            object.__setattr__(self, "kind", normalize_kind(self.kind))
        elif self.density is None:
            raise ValueError("custom susceptibility needs a spectral density callable")

    @classmethod
    def from_bath(cls, bath: BathConfig, mass: float = 1.0) -> "Susceptibility":
        return cls(bath.kind, bath.gamma, bath.omega_c, mass)

    @classmethod
    def custom(cls, density, mass: float = 1.0) -> "Susceptibility":
        """Susceptibility of a user spectral density J(omega >= 0)."""
        return cls(CUSTOM, 1.0, 1.0, mass, density)

    def J(self, w):
        w = np.asarray(w, dtype=float)
        if self.kind == CUSTOM:
            return np.asarray(self.density(w), dtype=float)
        return _density(KIND_CODES[self.kind], self.gamma, self.omega_c, self.mass, w)

    def __call__(self, w):
        """Complex chi(omega)/hbar."""
        return chi_real(self, w) + 1j * chi_imag(self, w)


def _density(code, gamma, omega_c, mass, w):
    pref = 0.5 * math.pi * mass * gamma
    if code == 0:
        return pref * w * np.exp(-w / omega_c)
    return pref * (w * w / omega_c) * np.exp(-w / omega_c)


def spectral_density(b: BathConfig, w, mass: float = 1.0):
    """J(omega) for omega >= 0."""
    arr = np.asarray(w, dtype=float)
    if np.any(arr < 0):
        raise NegativeFrequency(f"spectral density needs omega >= 0, got {w!r}")
    out = _density(KIND_CODES[b.kind], b.gamma, b.omega_c, mass, arr)
    return float(out) if out.ndim == 0 else out


def _as_susceptibility(s) -> Susceptibility:
    if isinstance(s, BathConfig):
        return Susceptibility.from_bath(s)
    return s


def chi_imag(s, w):
    """Im chi(omega) = Theta(w) J(w) - Theta(-w) J(-w)."""
    s = _as_susceptibility(s)
    arr = np.asarray(w, dtype=float)
    out = np.sign(arr) * s.J(np.abs(arr))
    return float(out) if out.ndim == 0 else out


def chi_real(s, w):
    """Closed-form Re chi(omega), even in omega.

    Gamma(0, -u) for u > 0 is read as its principal value -Ei(u), which keeps
    the result real and equal to the Kramers-Kronig integral.
    """
    s = _as_susceptibility(s)
    if s.kind == CUSTOM:
        arr = np.asarray(w, dtype=float)
        out = np.vectorize(lambda x: kramers_kronig_numeric(s, x))(arr)
        return float(out) if out.ndim == 0 else out
    arr = np.abs(np.asarray(w, dtype=float))
    out = _chi_real_array(KIND_CODES[s.kind], s.gamma, s.omega_c, s.mass, arr)
    return float(out) if out.ndim == 0 else out


def _chi_real_array(code, gamma, omega_c, mass, w):
    scalar = np.ndim(w) == 0
    w = np.atleast_1d(w).astype(float)
    out = np.full(w.shape, mass * gamma * omega_c)
    nz = w > 0
    if np.any(nz):
        u = w[nz] / omega_c
        es = ei_scaled_array(u)
        e1 = e1_scaled_array(u)
        if code == 0:
            out[nz] += 0.5 * mass * gamma * w[nz] * (-es - e1)
        else:
            out[nz] += 0.5 * mass * gamma * (w[nz] ** 2 / omega_c) * (-es + e1)
    return out[0] if scalar else out


@maybe_njit
def chi_real_scalar(code, gamma, omega_c, mass, w):
    """Scalar twin of :func:`chi_real` for the compiled kernels."""
    w = abs(w)
    base = mass * gamma * omega_c
    if w == 0.0:
        return base
    u = w / omega_c
    es = ei_scaled(u)
    e1 = e1_scaled(u)
    if code == 0:
        return base + 0.5 * mass * gamma * w * (-es - e1)
    return base + 0.5 * mass * gamma * (w * w / omega_c) * (-es + e1)


@maybe_njit
def density_scalar(code, gamma, omega_c, mass, w):
    pref = 0.5 * math.pi * mass * gamma
    if code == 0:
        return pref * w * math.exp(-w / omega_c)
    return pref * (w * w / omega_c) * math.exp(-w / omega_c)


def kramers_kronig_numeric(s, w: float, rel_tol: float = 1e-11) -> float:
    """Re chi(omega) from the principal-value Hilbert transform of Im chi.

    Uses the odd symmetry of Im chi to fold the integral onto omega' > 0,
    (2/pi) P int_0^inf J(x) x / (x^2 - w^2) dx, and removes the pole at
    x = |w| by subtracting the residue term on the symmetric window
    [0, 2|w|].  Integration is done with QUADPACK, independently of the
    package's own quadrature so it can serve as an oracle.
    """
    s = _as_susceptibility(s)
    w = abs(float(w))

    def J(x):
        return float(s.J(np.asarray(x)))

    if s.kind == CUSTOM:
        scale = None
        breaks = []
    else:
        scale = s.omega_c
        breaks = [s.omega_c * f for f in (0.5, 1.0, 2.0, 5.0, 10.0)]

    def quad(f, a, b, points=None):
        pts = [p for p in (points or []) if a < p < b] or None
        val, err = integrate.quad(f, a, b, points=pts, limit=2000, epsabs=0.0, epsrel=rel_tol)
        return val, err

    total = 0.0
    errors = 0.0
    if w == 0.0:
        v, e = quad(lambda x: J(x) / x if x > 0 else 0.0, 0.0, np.inf if scale is None else 60 * scale,
                    breaks)
        total, errors = v, e
        if scale is not None:
            v2, e2 = integrate.quad(lambda x: J(x) / x, 60 * scale, np.inf, limit=200)
            total += v2
            errors += e2
    else:
        # g(x) = J(x) x / (x + w) carries the regular part; the pole is 1/(x - w)
        def g(x):
            return J(x) * x / (x + w)

        gw = g(w)

        def window(x):
            d = x - w
            if d == 0.0:
                h = 1e-6 * max(w, 1e-12)
                return (g(w + h) - g(w - h)) / (2 * h)
            return (g(x) - gw) / d

        v, e = quad(window, 0.0, 2 * w, [w] + breaks)
        total += v
        errors += e
        upper = 2 * w
        if scale is not None:
            stop = max(upper, 60 * scale)
            v, e = quad(lambda x: g(x) / (x - w), upper, stop, breaks)
            total += v
            errors += e
            upper = stop
        v, e = integrate.quad(lambda x: g(x) / (x - w), upper, np.inf, limit=500)
        total += v
        errors += e
    value = 2.0 * total / math.pi
    err = 2.0 * errors / math.pi
    ref = abs(value) if value != 0 else 1.0
    if not math.isfinite(value) or err > max(1e-6 * ref, 1e-13):
        raise QuadratureFailure(f"Kramers-Kronig integral did not converge at w={w}: err={err}")
    return value


def frequency_shift(b: BathConfig, mass: float = 1.0) -> float:
    """DeltaOmega = (2 / pi m) int_0^inf J(w)/w dw, equal to gamma * omega_c for both kinds."""
    return b.gamma * b.omega_c
