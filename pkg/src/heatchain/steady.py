"""Stationary two-time correlators and the equal-time covariance matrix.

All correlators come from one vector-valued integral per lag: the 54 channels
of :mod:`heatchain._kernels` are integrated over omega in [0, omega_max] and
divided by pi, which gives every C_ab(tau) and y_ab(tau) at once (the
commutator average is Y_ab = i y_ab).  Folding onto the half-line uses
alpha(-w) = conj(alpha(w)), so the imaginary residue of C vanishes identically
instead of having to be discarded.

Operator ids are ``x_L, x_C, x_R, p_L, p_C, p_R`` and index the 6x6 blocks
in that order.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .errors import PhysicalityViolation, SingularMatrix, StationarityError
from .model import SITES, SystemConfig, coupling_matrix, dressed_frequencies, renormalized_frequencies_sq
from .quadrature import PeakSet, QuadratureSpec, estimate_widths, integrate_halfline
from .spectral import Susceptibility, chi_imag, chi_real

OPERATORS = tuple(f"x_{s}" for s in SITES) + tuple(f"p_{s}" for s in SITES)
_INDEX = {name: i for i, name in enumerate(OPERATORS)}
CUTOFF_MARGIN = 5.0
# a bound mode shows up as |det(Gamma + U)| collapsing to rounding level
DET_FLOOR = 1e-13


def operator_index(a) -> int:
    """Position of an operator id in the (x_L, x_C, x_R, p_L, p_C, p_R) ordering."""
    if isinstance(a, (int, np.integer)) and 0 <= a < 6:
        return int(a)
    try:
        return _INDEX[a]
    except KeyError:
        raise ValueError(f"unknown operator id {a!r}; expected one of {OPERATORS}") from None


def symplectic_form(n: int = 3) -> np.ndarray:
    """Omega for the (x_1..x_n, p_1..p_n) ordering."""
    I = np.eye(n)
    Z = np.zeros((n, n))
    return np.block([[Z, I], [-I, Z]])


# --- frequency-domain building blocks ---------------------------------------


def _sus(cfg: SystemConfig):
    return [Susceptibility.from_bath(b, cfg.mass) for b in cfg.baths]


def green_matrix(cfg: SystemConfig, w: float) -> np.ndarray:
    """alpha(w) = (Gamma + U)^-1 with Gamma_ij = delta_ij (m Omega_i^2 - m w^2 - chi_i(w))."""
    w = float(w)
    m = cfg.mass
    omega2 = renormalized_frequencies_sq(cfg)
    A = coupling_matrix(cfg.coupling_k).astype(complex)
    for l, s in enumerate(_sus(cfg)):
        A[l, l] += m * (omega2[l] - w * w) - (chi_real(s, w) + 1j * chi_imag(s, w))
    scale = np.abs(A).max()
    if abs(np.linalg.det(A)) <= DET_FLOOR * scale**3:
        raise SingularMatrix(f"Gamma + U is singular at omega={w}")
    return np.linalg.inv(A)


def noise_spectrum(cfg: SystemConfig, w):
    """Per-bath weights (D_C, D_Y) at frequency w; arrays of shape (..., 3).

    D_C = Im chi coth(w / 2T) cosh(2r) is even in w; D_Y = Im chi is odd.
    """
    w = np.asarray(w, dtype=float)
    dc = []
    dy = []
    for b, s in zip(cfg.baths, _sus(cfg)):
        im = np.asarray(chi_imag(s, w), dtype=float)
        aw = np.abs(w)
        x_coth = np.where(
            aw / (2 * b.temperature) < _kernels.COTH_SERIES,
            2 * b.temperature + aw**2 / (6 * b.temperature),
            aw / np.tanh(np.maximum(aw, 1e-300) / (2 * b.temperature)),
        )
        # Im chi / |w| is finite at w = 0
        ratio = np.where(aw > 0, np.abs(im) / np.maximum(aw, 1e-300), 0.5 * math.pi * cfg.mass * b.gamma
                         if b.kind == "ohmic" else 0.0)
        dc.append(ratio * x_coth * math.cosh(2 * b.squeeze_r))
        dy.append(im)
    return np.stack(dc, axis=-1), np.stack(dy, axis=-1)


# --- stationarity -----------------------------------------------------------


@dataclass
class StationarityReport:
    violations: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    min_det_ratio: float = float("nan")
    cutoff_margin: float = float("nan")

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def stationarity_check(cfg: SystemConfig, grid_points: int = 4000) -> StationarityReport:
    """Check the conditions under which a unique stationary state exists.

    * every bath cutoff exceeds sqrt(omega_i^2 + k/m), with a warning when the
      margin is below ``CUTOFF_MARGIN``;
    * diag(Omega_i^2) + U/m is positive definite;
    * |det(Gamma + U)| stays above ``DET_FLOOR`` times the scale of the matrix
      on a dense frequency grid that includes the resonance centres.
    """
    rep = StationarityReport()
    m = cfg.mass
    margins = []
    for i, (w, b) in enumerate(zip(cfg.omega, cfg.baths)):
        top = math.sqrt(w * w + cfg.coupling_k / m)
        margins.append(b.omega_c / top)
        if b.omega_c <= top:
            rep.violations.append(
                f"cutoff of bath {SITES[i]} ({b.omega_c:g}) is below the bare frequency scale {top:.4g}"
            )
        elif b.omega_c < CUTOFF_MARGIN * top:
            rep.warnings.append(
                f"cutoff of bath {SITES[i]} is only {b.omega_c / top:.2f}x the bare frequency scale"
            )
    rep.cutoff_margin = min(margins)
    ev = np.linalg.eigvalsh(np.diag(renormalized_frequencies_sq(cfg)) + coupling_matrix(cfg.coupling_k) / m)
    if ev[0] <= 0:
        rep.violations.append(f"effective potential not positive definite (eigenvalues {ev})")
        return rep
    wmax = 10 * max(max(b.omega_c for b in cfg.baths), math.sqrt(ev[-1]))
    grid = np.linspace(0.0, wmax, grid_points)
    try:
        grid = np.union1d(grid, estimate_widths(cfg).centers)
    except ArithmeticError:
        pass
    omega2 = renormalized_frequencies_sq(cfg)
    A = np.broadcast_to(coupling_matrix(cfg.coupling_k).astype(complex), (grid.size, 3, 3)).copy()
    for l, s in enumerate(_sus(cfg)):
        A[:, l, l] += m * (omega2[l] - grid**2) - (chi_real(s, grid) + 1j * chi_imag(s, grid))
    det = np.abs(np.linalg.det(A))
    scale = np.abs(A).max(axis=(1, 2)) ** 3
    rep.min_det_ratio = float(np.min(det / scale))
    if rep.min_det_ratio <= DET_FLOOR:
        at = grid[int(np.argmin(det / scale))]
        rep.violations.append(f"Gamma + U nearly singular near omega={at:.6g} (bound mode)")
    return rep


def require_stationary(cfg: SystemConfig) -> StationarityReport:
    rep = stationarity_check(cfg)
    if not rep.ok:
        raise StationarityError("; ".join(rep.violations), report=rep)
    return rep


# --- correlators ------------------------------------------------------------


@dataclass(frozen=True)
class CorrelationMatrices:
    """C_ab(tau) and y_ab(tau) for all 36 operator pairs at one lag."""

    tau: float
    C: np.ndarray  # 6x6
    y: np.ndarray  # 6x6
    error: float  # largest absolute quadrature error over all channels

    def c(self, a, b) -> float:
        return float(self.C[operator_index(a), operator_index(b)])

    def yv(self, a, b) -> float:
        return float(self.y[operator_index(a), operator_index(b)])


_CACHE: dict = {}
_CACHE_LOCK = threading.Lock()
DEFAULT_SPEC = QuadratureSpec()


def clear_cache() -> None:
    with _CACHE_LOCK:
        _CACHE.clear()


def _assemble(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    blocks = v.reshape(6, 3, 3) / math.pi
    C = np.block([[blocks[0], blocks[1]], [-blocks[1], blocks[2]]])
    y = np.block([[blocks[3], blocks[4]], [-blocks[4], blocks[5]]])
    return C, y


def correlation_matrices(
    cfg: SystemConfig,
    tau: float = 0.0,
    spec: Optional[QuadratureSpec] = None,
    backend: Optional[str] = None,
    peaks: Optional[PeakSet] = None,
) -> CorrelationMatrices:
    """All stationary correlators at lag ``tau``, memoized per (cfg, tau, spec, backend)."""
    spec = spec or DEFAULT_SPEC
    backend = backend or _kernels.BACKEND
    key = (cfg, float(tau), spec, backend)
    hit = _CACHE.get(key)
    if hit is not None:
        return hit
    require_stationary(cfg)
    params = _kernels.KernelParams.from_config(cfg)
    peaks = peaks or estimate_widths(cfg)
    res = integrate_halfline(lambda w: _kernels.evaluate(w, tau, params, backend), peaks, spec)
    C, y = _assemble(np.asarray(res.value))
    out = CorrelationMatrices(float(tau), C, y, float(np.max(res.error)) / math.pi)
    with _CACHE_LOCK:
        # first writer wins; every writer computes the same deterministic value
        out = _CACHE.setdefault(key, out)
    return out


def correlator(cfg: SystemConfig, a, b, tau: float = 0.0, spec: Optional[QuadratureSpec] = None) -> float:
    """Symmetrized correlator C_ab(tau) = <{a(tau), b(0)}>/2."""
    return correlation_matrices(cfg, tau, spec).c(a, b)


def commutator_correlator(cfg: SystemConfig, a, b, tau: float = 0.0,
                          spec: Optional[QuadratureSpec] = None) -> float:
    """The real y of <[a(tau), b(0)]>/2 = i y; independent of temperatures and squeezing."""
    return correlation_matrices(cfg, tau, spec).yv(a, b)


@dataclass(frozen=True)
class CovarianceMatrix:
    """Equal-time covariance V over (x_L, x_C, x_R, p_L, p_C, p_R); vacuum has det = (1/2)^6."""

    V: np.ndarray
    error: float = 0.0

    @property
    def xx(self):
        return self.V[:3, :3]

    @property
    def xp(self):
        return self.V[:3, 3:]

    @property
    def pp(self):
        return self.V[3:, 3:]

    def uncertainty_eigenvalues(self) -> np.ndarray:
        """Eigenvalues of V + (i/2) Omega; all >= 0 for a physical state."""
        return np.linalg.eigvalsh(self.V + 0.5j * symplectic_form())

    def mode_pair(self, i: int, j: int) -> np.ndarray:
        """4x4 covariance of sites i, j in (x_i, p_i, x_j, p_j) ordering."""
        idx = [i, i + 3, j, j + 3]
        return self.V[np.ix_(idx, idx)]


def covariance(cfg: SystemConfig, spec: Optional[QuadratureSpec] = None, tol: float = 1e-9) -> CovarianceMatrix:
    """Stationary covariance matrix; raises PhysicalityViolation when the uncertainty relation fails."""
    cm = correlation_matrices(cfg, 0.0, spec)
    C = cm.C
    scale = float(np.max(np.abs(C)))
    xp = C[:3, 3:]
    # stationarity: d<x_i^2>/dt = 2 C_{x_i p_i}/m = 0, and C_xp antisymmetric at tau = 0
    slack = max(100 * cm.error, 1e-8 * scale)
    if np.max(np.abs(np.diag(xp))) > slack or np.max(np.abs(xp + xp.T)) > slack:
        raise PhysicalityViolation(
            f"equal-time x-p block not antisymmetric (max diag {np.max(np.abs(np.diag(xp))):.3g})"
        )
    V = 0.5 * (C + C.T)
    cov = CovarianceMatrix(V, cm.error)
    low = float(cov.uncertainty_eigenvalues()[0])
    if low < -tol:
        raise PhysicalityViolation(f"uncertainty relation violated: min eigenvalue {low:.3g}")
    if np.any(np.diag(V) <= 0):
        raise PhysicalityViolation("non-positive variance")
    return cov
