"""Adaptive Gauss-Kronrod integration for resonance-dominated spectral integrands.

The integrands met in this package are smooth apart from three nearly
Lorentzian peaks whose widths can be as small as 1e-4 and an exponential tail
set by the bath cutoff.  A narrow peak sitting inside a wide panel can be
missed by every node, so the domain is first cut at ``center +/- w*width`` for
w in ``brackets``; after that, plain global bisection of the worst panels is
enough.  All panels of one refinement round are evaluated in a single call so
vector-valued integrands are cheap to batch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import NegativeEigenvalue, NonFiniteIntegrand, ToleranceNotMet
from .model import SystemConfig, coupling_matrix, renormalized_frequencies_sq

# 21-point Kronrod extension of the 10-point Gauss rule (abscissae on [0, 1))
_XGK = np.array([
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_WG = np.array([
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])

# full symmetric node set on [-1, 1] and the matching weight vectors
NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(21)
for _i, _w in zip(range(1, 10, 2), _WG):
    GAUSS_WEIGHTS[_i] = _w
    GAUSS_WEIGHTS[20 - _i] = _w


@dataclass(frozen=True)
class PeakSet:
    centers: tuple
    widths: tuple
    tail_scale: float = 1.0  # decay length of the integrand tail (largest bath cutoff)

    def __post_init__(self):
        c = tuple(float(x) for x in self.centers)
        w = tuple(float(x) for x in self.widths)
        if len(c) != len(w):
            raise ValueError("centers and widths must have equal length")
        if any(b < a for a, b in zip(c, c[1:])):
            raise ValueError("peak centers must be ascending")
        if any(not (x > 0) for x in w):
            raise ValueError("peak widths must be positive")
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "widths", w)


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-14
    max_subdivisions: int = 10_000
    tail_cutoff_factor: float = 1.0
    brackets: tuple = (1.0, 10.0, 100.0)

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")

    def omega_max(self, peaks: PeakSet) -> float:
        top = max(peaks.centers) if peaks.centers else 0.0
        return self.tail_cutoff_factor * peaks.tail_scale * math.log(1.0 / self.rel_tol) + top


@dataclass
class QuadResult:
    value: np.ndarray | float
    error: np.ndarray | float
    panels: int
    evaluations: int

    def __iter__(self):
        yield self.value
        yield self.error


def _apply_rule(f, lo, hi):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = (mid[:, None] + half[:, None] * NODES[None, :]).ravel()
    y = np.asarray(f(x), dtype=float)
    squeeze = y.ndim == 1
    y = y.reshape(lo.shape[0], 21, -1)
    if not np.all(np.isfinite(y)):
        bad = x[~np.isfinite(y.reshape(x.shape[0], -1)).all(axis=1)]
        raise NonFiniteIntegrand(f"integrand not finite at omega={bad[:5]}")
    kron = np.einsum("pnc,n->pc", y, KRONROD_WEIGHTS) * half[:, None]
    gauss = np.einsum("pnc,n->pc", y, GAUSS_WEIGHTS) * half[:, None]
    return kron, np.abs(kron - gauss), squeeze


def integrate_interval(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    points: Sequence[float] = (),
    spec: QuadratureSpec = QuadratureSpec(),
) -> QuadResult:
    """Integrate ``f`` over [a, b] with the given interior panel boundaries.

    ``f`` receives a 1-d array of nodes and returns values of shape (N,) or
    (N, C); with several channels the tolerance applies to the largest one.
    Panels are always summed in ascending order so the result does not depend
    on refinement history.
    """
    edges = np.unique(np.clip(np.concatenate([[a, b], np.asarray(points, dtype=float)]), a, b))
    lo, hi = edges[:-1], edges[1:]
    est, err, squeeze = _apply_rule(f, lo, hi)
    evals = 21 * lo.shape[0]
    frozen = np.zeros(lo.shape[0], dtype=bool)
    while True:
        total = est.sum(axis=0)
        total_err = err.sum(axis=0)
        tol = max(spec.rel_tol * float(np.max(np.abs(total))), spec.abs_tol)
        if float(np.max(total_err)) <= tol:
            break
        perr = err.max(axis=1)
        candidates = (perr > tol / lo.shape[0]) & ~frozen
        if not np.any(candidates) or lo.shape[0] + np.count_nonzero(candidates) > spec.max_subdivisions:
            value = total[0] if squeeze else total
            error = total_err[0] if squeeze else total_err
            raise ToleranceNotMet(
                f"reached {lo.shape[0]} panels with error {np.max(total_err):.3g} > {tol:.3g}",
                value=value,
                error=error,
            )
        idx = np.flatnonzero(candidates)
        mid = 0.5 * (lo[idx] + hi[idx])
        # panels narrower than the floating-point resolution cannot be split further
        tiny = (mid <= lo[idx]) | (mid >= hi[idx])
        frozen[idx[tiny]] = True
        idx = idx[~tiny]
        mid = mid[~tiny]
        if idx.size == 0:
            continue
        new_lo = np.concatenate([lo[idx], mid])
        new_hi = np.concatenate([mid, hi[idx]])
        e2, r2, _ = _apply_rule(f, new_lo, new_hi)
        evals += 21 * new_lo.shape[0]
        keep = np.ones(lo.shape[0], dtype=bool)
        keep[idx] = False
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        est = np.concatenate([est[keep], e2])
        err = np.concatenate([err[keep], r2])
        frozen = np.concatenate([frozen[keep], np.zeros(new_lo.shape[0], dtype=bool)])
        order = np.argsort(lo, kind="stable")
        lo, hi, est, err, frozen = lo[order], hi[order], est[order], err[order], frozen[order]
    value = total[0] if squeeze else total
    error = total_err[0] if squeeze else total_err
    return QuadResult(value, error, lo.shape[0], evals)


def peak_breakpoints(peaks: PeakSet, brackets=(1.0, 10.0, 100.0)) -> list[float]:
    pts = []
    for c, w in zip(peaks.centers, peaks.widths):
        pts.append(c)
        for f in brackets:
            pts.extend((c - f * w, c + f * w))
    return pts


def _tail_points(peaks: PeakSet, omega_max: float) -> list[float]:
    top = max(peaks.centers) if peaks.centers else 1.0
    s = peaks.tail_scale
    return [p for p in (2 * top, 4 * top, s, 3 * s, 8 * s) if p < omega_max]


def integrate_halfline(f, peaks: PeakSet, spec: QuadratureSpec = QuadratureSpec()) -> QuadResult:
    """Integrate over [0, omega_max] with peak and tail breakpoints."""
    wmax = spec.omega_max(peaks)
    pts = [p for p in peak_breakpoints(peaks, spec.brackets) if 0 < p < wmax]
    pts += _tail_points(peaks, wmax)
    return integrate_interval(f, 0.0, wmax, pts, spec)


def integrate_line(f, peaks: PeakSet, spec: QuadratureSpec = QuadratureSpec()) -> QuadResult:
    """Integrate over [-omega_max, omega_max]; omega = 0 is always a panel edge."""
    wmax = spec.omega_max(peaks)
    pos = [p for p in peak_breakpoints(peaks, spec.brackets) if 0 < p < wmax]
    pos += _tail_points(peaks, wmax)
    pts = [0.0] + pos + [-p for p in pos]
    return integrate_interval(f, -wmax, wmax, pts, spec)


# --- resonance structure of the chain ---------------------------------------


def _effective_potential(cfg: SystemConfig, w: float) -> np.ndarray:
    from .spectral import chi_real

    shift = np.array([chi_real(b_sus, w) for b_sus in _susceptibilities(cfg)]) / cfg.mass
    return np.diag(renormalized_frequencies_sq(cfg) - shift) + coupling_matrix(cfg.coupling_k) / cfg.mass


def _susceptibilities(cfg: SystemConfig):
    from .spectral import Susceptibility

    return [Susceptibility.from_bath(b, cfg.mass) for b in cfg.baths]


def resonance_modes(cfg: SystemConfig, iterations: int = 6):
    """Normal-mode frequencies and eigenvectors including the frequency-dependent Re chi.

    Solves w_n^2 = eig_n[diag(Omega_i^2 - Re chi_i(w_n)/m) + U/m] by fixed-point
    iteration; this is where the Green matrix actually peaks.
    """
    K = _effective_potential(cfg, 0.0)
    ev, vec = np.linalg.eigh(K)
    if ev[0] <= 0:
        raise NegativeEigenvalue(f"effective potential not positive definite: {ev}")
    freqs = np.sqrt(ev)
    vectors = vec.copy()
    for n in range(3):
        w = freqs[n]
        for _ in range(iterations):
            e, v = np.linalg.eigh(_effective_potential(cfg, w))
            if e[n] <= 0:
                raise NegativeEigenvalue(f"effective potential not positive definite at w={w}: {e}")
            w = math.sqrt(e[n])
            vectors[:, n] = v[:, n]
        freqs[n] = w
    order = np.argsort(freqs)
    return freqs[order], vectors[:, order]


def estimate_widths(cfg: SystemConfig) -> PeakSet:
    """Peak centres and perturbative damping widths of the three normal modes.

    width_n = sum_i |v_ni|^2 Im chi_i(w_n) / (m w_n).
    """
    from .spectral import chi_imag

    freqs, vecs = resonance_modes(cfg)
    sus = _susceptibilities(cfg)
    widths = []
    for n in range(3):
        w = freqs[n]
        damp = sum(vecs[i, n] ** 2 * chi_imag(sus[i], w) for i in range(3))
        widths.append(max(damp / (cfg.mass * w), 1e-15 * w))
    return PeakSet(tuple(freqs), tuple(widths), tail_scale=max(b.omega_c for b in cfg.baths))
