"""Exponential integrals needed by the closed-form susceptibilities.

The scalar routines only use :mod:`math` so they can be compiled by numba
unchanged; the ``*_array`` variants are the vectorized numpy equivalents used
by the pure-numpy backend.  ``e1_scaled(x) = exp(x) E1(x)`` and
``ei_scaled(x) = exp(-x) Ei(x)`` are the forms that appear in the
susceptibilities and stay finite for large arguments.
"""

import math

import numpy as np

from ._jit import maybe_njit
from .errors import DomainError

EULER_GAMMA = 0.57721566490153286061
_EPS = 2.0e-17
_FPMIN = 1.0e-300
_MAXIT = 400
# switch from the power series of Ei to its asymptotic expansion
_EI_ASYMPTOTIC = 40.0


@maybe_njit
def e1_scaled(x):
    """exp(x) * E1(x) for x > 0."""
    if x <= 1.0:
        total = 0.0
        term = 1.0
        for k in range(1, _MAXIT):
            term *= -x / k
            add = term / k
            total += add
            if abs(add) < _EPS * abs(total):
                break
        return math.exp(x) * (-EULER_GAMMA - math.log(x) - total)
    # modified Lentz evaluation of the continued fraction
    b = x + 1.0
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _MAXIT):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h


@maybe_njit
def ei_scaled(x):
    """exp(-x) * Ei(x) for x > 0."""
    if x < _EI_ASYMPTOTIC:
        total = 0.0
        term = 1.0
        for k in range(1, _MAXIT):
            term *= x / k
            add = term / k
            total += add
            if add < _EPS * total:
                break
        return math.exp(-x) * (EULER_GAMMA + math.log(x) + total)
    total = 1.0
    term = 1.0
    for k in range(1, _MAXIT):
        prev = term
        term *= k / x
        if term < _EPS:
            break
        if term >= prev:
            # asymptotic series started diverging; drop the growing term
            term = prev
            break
        total += term
    return total / x


@maybe_njit
def expint_e1(x):
    """E1(x) for x > 0."""
    return e1_scaled(x) * math.exp(-x)


@maybe_njit
def expint_ei(x):
    """Ei(x) for x > 0 (principal value)."""
    return ei_scaled(x) * math.exp(x)


def exp_integral(x: float) -> float:
    """Real part of E1(x): E1(x) for x > 0 and -Ei(-x) for x < 0.

    For negative arguments this is the principal value of the incomplete gamma
    function Gamma(0, x), which is what the real part of the susceptibility
    requires.
    """
    x = float(x)
    if x == 0.0 or not math.isfinite(x):
        raise DomainError(f"exp_integral undefined at x={x!r}")
    if x > 0:
        return expint_e1(x)
    return -expint_ei(-x)


def exp_integral_array(x) -> np.ndarray:
    """Vectorized :func:`exp_integral`; zero entries raise DomainError."""
    x = np.asarray(x, dtype=float)
    if np.any(x == 0.0) or not np.all(np.isfinite(x)):
        raise DomainError("exp_integral undefined at x=0")
    out = np.empty_like(x)
    pos = x > 0
    out[pos] = e1_scaled_array(x[pos]) * np.exp(-x[pos])
    neg = ~pos
    out[neg] = -ei_scaled_array(-x[neg]) * np.exp(-x[neg])
    return out


# --- vectorized versions ----------------------------------------------------


def e1_scaled_array(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x <= 1.0
    if np.any(small):
        xs = x[small]
        total = np.zeros_like(xs)
        term = np.ones_like(xs)
        for k in range(1, 40):
            term = term * (-xs / k)
            total += term / k
        out[small] = np.exp(xs) * (-EULER_GAMMA - np.log(xs) - total)
    big = ~small
    if np.any(big):
        xb = x[big]
        b = xb + 1.0
        c = np.full_like(xb, 1.0 / _FPMIN)
        d = 1.0 / b
        h = d.copy()
        for i in range(1, _MAXIT):
            an = -float(i * i)
            b = b + 2.0
            d = 1.0 / (an * d + b)
            c = b + an / c
            delta = c * d
            h *= delta
            if np.all(np.abs(delta - 1.0) < _EPS):
                break
        out[big] = h
    return out


def ei_scaled_array(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    low = x < _EI_ASYMPTOTIC
    if np.any(low):
        xs = x[low]
        total = np.zeros_like(xs)
        term = np.ones_like(xs)
        for k in range(1, _MAXIT):
            term = term * (xs / k)
            add = term / k
            total += add
            if np.all(add < _EPS * total):
                break
        out[low] = np.exp(-xs) * (EULER_GAMMA + np.log(xs) + total)
    high = ~low
    if np.any(high):
        out[high] = [ei_scaled(v) for v in x[high]]
    return out
