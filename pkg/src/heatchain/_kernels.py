"""Spectral integrand shared by every two-time correlator.

For a node omega >= 0 the kernel forms alpha = (Gamma + U)^-1, the noise
matrices M_C = alpha D_C alpha^H and M_Y = alpha D_Y alpha^H, and returns the
54 real channels

    [ 0: 9)  Re[e^{-i w tau} M_C]          -> C_xx
    [ 9:18)  m Re[e^{-i w tau} i w M_C]    -> C_xp
    [18:27)  m^2 w^2 Re[e^{-i w tau} M_C]  -> C_pp
    [27:54)  the same three with Im and M_Y -> y_xx, y_xp, y_pp

each 3x3 block flattened row-major.  Integrating a channel over [0, inf) and
dividing by pi gives the corresponding stationary correlator at lag tau.

Two implementations exist: a scalar loop compiled by numba and a vectorized
numpy version.  ``evaluate`` dispatches on the backend chosen in
:mod:`heatchain._jit`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._jit import NUMBA_ENABLED, maybe_njit
from .model import SystemConfig, coupling_matrix, renormalized_frequencies_sq
from .spectral import KIND_CODES, _chi_real_array, _density, chi_real_scalar, density_scalar

NCHAN = 54
# below this value of hbar w / 2 k_B T the Laurent series of coth is used
COTH_SERIES = 1e-6


@dataclass(frozen=True)
class KernelParams:
    omega2: np.ndarray  # renormalized Omega_i^2
    k: float
    mass: float
    codes: np.ndarray
    gammas: np.ndarray
    omega_cs: np.ndarray
    temps: np.ndarray
    cosh2r: np.ndarray

    @classmethod
    def from_config(cls, cfg: SystemConfig) -> "KernelParams":
        b = cfg.baths
        return cls(
            omega2=renormalized_frequencies_sq(cfg),
            k=cfg.coupling_k,
            mass=cfg.mass,
            codes=np.array([KIND_CODES[x.kind] for x in b], dtype=np.int64),
            gammas=np.array([x.gamma for x in b]),
            omega_cs=np.array([x.omega_c for x in b]),
            temps=np.array([x.temperature for x in b]),
            cosh2r=np.array([math.cosh(2 * x.squeeze_r) for x in b]),
        )

    def args(self):
        return (self.omega2, self.k, self.mass, self.codes, self.gammas, self.omega_cs,
                self.temps, self.cosh2r)


@maybe_njit
def _x_coth(x, T):
    """x * coth(x / 2T), finite at x = 0."""
    z = x / (2.0 * T)
    if z < COTH_SERIES:
        return 2.0 * T + x * x / (6.0 * T)
    return x / math.tanh(z)


@maybe_njit
def _integrand_loop(w, tau, omega2, k, mass, codes, gammas, omega_cs, temps, cosh2r, out):
    A = np.zeros((3, 3), dtype=np.complex128)
    al = np.zeros((3, 3), dtype=np.complex128)
    dc = np.zeros(3)
    dy = np.zeros(3)
    half_k = 0.5 * k
    for n in range(w.shape[0]):
        x = w[n]
        for l in range(3):
            chi_r = chi_real_scalar(codes[l], gammas[l], omega_cs[l], mass, x)
            J = density_scalar(codes[l], gammas[l], omega_cs[l], mass, x)
            A[l, l] = mass * (omega2[l] - x * x) - chi_r - 1j * J
            # J(x)/x stays finite at x = 0
            if codes[l] == 0:
                j_over_x = 0.5 * math.pi * mass * gammas[l] * math.exp(-x / omega_cs[l])
            else:
                j_over_x = 0.5 * math.pi * mass * gammas[l] * (x / omega_cs[l]) * math.exp(-x / omega_cs[l])
            dc[l] = j_over_x * _x_coth(x, temps[l]) * cosh2r[l]
            dy[l] = J
        A[0, 0] += half_k
        A[1, 1] += k
        A[2, 2] += half_k
        A[0, 1] = -half_k
        A[1, 0] = -half_k
        A[1, 2] = -half_k
        A[2, 1] = -half_k
        A[0, 2] = 0.0
        A[2, 0] = 0.0
        # symmetric 3x3 inverse by cofactors
        c00 = A[1, 1] * A[2, 2] - A[1, 2] * A[2, 1]
        c01 = A[1, 2] * A[2, 0] - A[1, 0] * A[2, 2]
        c02 = A[1, 0] * A[2, 1] - A[1, 1] * A[2, 0]
        det = A[0, 0] * c00 + A[0, 1] * c01 + A[0, 2] * c02
        al[0, 0] = c00 / det
        al[1, 0] = c01 / det
        al[2, 0] = c02 / det
        al[0, 1] = (A[0, 2] * A[2, 1] - A[0, 1] * A[2, 2]) / det
        al[1, 1] = (A[0, 0] * A[2, 2] - A[0, 2] * A[2, 0]) / det
        al[2, 1] = (A[0, 1] * A[2, 0] - A[0, 0] * A[2, 1]) / det
        al[0, 2] = (A[0, 1] * A[1, 2] - A[0, 2] * A[1, 1]) / det
        al[1, 2] = (A[0, 2] * A[1, 0] - A[0, 0] * A[1, 2]) / det
        al[2, 2] = (A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]) / det
        ph = complex(math.cos(x * tau), -math.sin(x * tau))
        mx = mass * x
        m2x2 = mx * mx
        for i in range(3):
            for j in range(3):
                mc = 0j
                my = 0j
                for l in range(3):
                    p = al[i, l] * al[j, l].conjugate()
                    mc += p * dc[l]
                    my += p * dy[l]
                zc = ph * mc
                zy = ph * my
                ij = 3 * i + j
                out[n, ij] = zc.real
                out[n, 9 + ij] = -mx * zc.imag
                out[n, 18 + ij] = m2x2 * zc.real
                out[n, 27 + ij] = zy.imag
                out[n, 36 + ij] = mx * zy.real
                out[n, 45 + ij] = m2x2 * zy.imag
    return out


def integrand_numba(w, tau, params: KernelParams) -> np.ndarray:
    w = np.ascontiguousarray(w, dtype=np.float64)
    out = np.empty((w.shape[0], NCHAN))
    return _integrand_loop(w, float(tau), *params.args(), out)


def _x_coth_array(x, T):
    z = x / (2.0 * T)
    out = np.empty_like(x)
    small = z < COTH_SERIES
    out[small] = 2.0 * T + x[small] ** 2 / (6.0 * T)
    big = ~small
    out[big] = x[big] / np.tanh(z[big])
    return out


def integrand_numpy(w, tau, params: KernelParams) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    n = w.shape[0]
    mass = params.mass
    A = np.broadcast_to(coupling_matrix(params.k).astype(complex), (n, 3, 3)).copy()
    dc = np.empty((n, 3))
    dy = np.empty((n, 3))
    for l in range(3):
        code, g, wc = params.codes[l], params.gammas[l], params.omega_cs[l]
        chi_r = _chi_real_array(code, g, wc, mass, w)
        J = _density(code, g, wc, mass, w)
        A[:, l, l] += mass * (params.omega2[l] - w * w) - chi_r - 1j * J
        if code == 0:
            j_over_x = 0.5 * math.pi * mass * g * np.exp(-w / wc)
        else:
            j_over_x = 0.5 * math.pi * mass * g * (w / wc) * np.exp(-w / wc)
        dc[:, l] = j_over_x * _x_coth_array(w, params.temps[l]) * params.cosh2r[l]
        dy[:, l] = J
    al = np.linalg.inv(A)
    mc = np.einsum("nil,nl,njl->nij", al, dc, al.conj())
    my = np.einsum("nil,nl,njl->nij", al, dy, al.conj())
    ph = np.exp(-1j * w * tau)[:, None, None]
    zc = (ph * mc).reshape(n, 9)
    zy = (ph * my).reshape(n, 9)
    mx = (mass * w)[:, None]
    out = np.empty((n, NCHAN))
    out[:, 0:9] = zc.real
    out[:, 9:18] = -mx * zc.imag
    out[:, 18:27] = mx * mx * zc.real
    out[:, 27:36] = zy.imag
    out[:, 36:45] = mx * zy.real
    out[:, 45:54] = mx * mx * zy.imag
    return out


BACKEND = "numba" if NUMBA_ENABLED else "numpy"


def evaluate(w, tau, params: KernelParams, backend: str | None = None) -> np.ndarray:
    backend = backend or BACKEND
    if backend == "numba":
        return integrand_numba(w, tau, params)
    if backend == "numpy":
        return integrand_numpy(w, tau, params)
    raise ValueError(f"unknown backend {backend!r}")
