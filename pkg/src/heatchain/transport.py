"""Energy currents, interaction energy and current-current correlations.

The current from site j to site i is

    j_ij = (k / 4m) ({x_j, p_j} - {x_i, p_i} + {x_j, p_i} - {x_i, p_j})

so every quantity here is built from anticommutators {x_a, p_b}.  Their
two-time connected correlations reduce, for a zero-mean Gaussian state, to
products of two-point functions; see :func:`anticommutator_covariance`.
Pairs are written as (i, j) with sites in {"L", "C", "R"} (or strings such as
"CL"); the two pairs used by the total current are (C, L) and (R, C).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .model import SITES, SystemConfig
from .quadrature import QuadratureSpec
from .steady import correlation_matrices

PAIRS = (("C", "L"), ("R", "C"))
_SITE = {s: i for i, s in enumerate(SITES)}


def _pair(p) -> tuple[int, int]:
    if isinstance(p, str):
        p = tuple(p.replace("_", "").replace(",", ""))
    if len(p) != 2 or p[0] not in _SITE or p[1] not in _SITE or p[0] == p[1]:
        raise ValueError(f"invalid site pair {p!r}")
    return _SITE[p[0]], _SITE[p[1]]


def _current_terms(pair) -> list[tuple[float, int, int]]:
    """(sign, a, b) such that j_ij = (k/4m) sum sign {x_a, p_b}."""
    i, j = _pair(pair)
    return [(1.0, j, j), (-1.0, i, i), (1.0, j, i), (-1.0, i, j)]


def commutator_product(y1: float, y2: float) -> float:
    """Product Y1 Y2 of two commutator averages stored as Y = i y.

    This is the only place where the i^2 = -1 of the imaginary representation
    is applied.
    """
    return -y1 * y2


def anticommutator_covariance(C: np.ndarray, y: np.ndarray, a: int, b: int, c: int, d: int) -> float:
    """(1/2)<{{x_a, p_b}(tau), {x_c, p_d}(0)}> minus the product of means.

    ``C`` and ``y`` are the 6x6 correlation matrices at lag tau (x block
    first).  Gaussian reduction gives

        4 [C_{x_a x_c} C_{p_b p_d} + Y_{x_a x_c} Y_{p_b p_d}]
      + 4 [C_{x_a p_d} C_{p_b x_c} + Y_{x_a p_d} Y_{p_b x_c}]
    """
    xa, pb, xc, pd = a, 3 + b, c, 3 + d
    direct = C[xa, xc] * C[pb, pd] + commutator_product(y[xa, xc], y[pb, pd])
    crossed = C[xa, pd] * C[pb, xc] + commutator_product(y[xa, pd], y[pb, xc])
    return 4.0 * (direct + crossed)


def _drop_commutators(y: np.ndarray) -> np.ndarray:
    return np.zeros_like(y)


def mean_pair_current(cfg: SystemConfig, i, j=None, spec: Optional[QuadratureSpec] = None) -> float:
    """<j_ij>, the mean energy current from site j into site i."""
    pair = (i, j) if j is not None else i
    C = correlation_matrices(cfg, 0.0, spec).C
    pref = cfg.coupling_k / (4.0 * cfg.mass)
    # <{x_a, p_b}> = 2 C_{x_a p_b}(0)
    return pref * sum(s * 2.0 * C[a, 3 + b] for s, a, b in _current_terms(pair))


def total_current(cfg: SystemConfig, spec: Optional[QuadratureSpec] = None) -> float:
    """<J> = <j_CL> + <j_RC>."""
    return sum(mean_pair_current(cfg, p, spec=spec) for p in PAIRS)


def interaction_energy(cfg: SystemConfig, spec: Optional[QuadratureSpec] = None) -> float:
    """Mean of (k/2)[(x_L - x_C)^2 + (x_C - x_R)^2]."""
    C = correlation_matrices(cfg, 0.0, spec).C
    L, M, R = 0, 1, 2
    return 0.5 * cfg.coupling_k * (
        C[L, L] + 2 * C[M, M] + C[R, R] - 2 * (C[L, M] + C[R, M])
    )


def current_correlation(
    cfg: SystemConfig,
    pair1,
    pair2,
    tau: float = 0.0,
    spec: Optional[QuadratureSpec] = None,
    include_commutator: bool = True,
) -> float:
    """(1/2)<{j_1(tau), j_2(0)}> - <j_1><j_2> for two site pairs."""
    cm = correlation_matrices(cfg, tau, spec)
    y = cm.y if include_commutator else _drop_commutators(cm.y)
    pref = (cfg.coupling_k / (4.0 * cfg.mass)) ** 2
    total = 0.0
    for s, a, b in _current_terms(pair1):
        for t, c, d in _current_terms(pair2):
            total += s * t * anticommutator_covariance(cm.C, y, a, b, c, d)
    return pref * total


def total_current_correlation(
    cfg: SystemConfig,
    tau: float = 0.0,
    spec: Optional[QuadratureSpec] = None,
    include_commutator: bool = True,
) -> float:
    """K_JJ(tau): autocorrelation of J = j_CL + j_RC."""
    return sum(
        current_correlation(cfg, p1, p2, tau, spec, include_commutator) for p1 in PAIRS for p2 in PAIRS
    )


@dataclass(frozen=True)
class CurrentStats:
    j_CL: float
    j_RC: float
    J_total: float
    H_int: float
    K_JJ: tuple  # ((tau, value), ...)


def current_stats(cfg: SystemConfig, taus: Sequence[float] = (0.0,),
                  spec: Optional[QuadratureSpec] = None) -> CurrentStats:
    jcl = mean_pair_current(cfg, PAIRS[0], spec=spec)
    jrc = mean_pair_current(cfg, PAIRS[1], spec=spec)
    K = tuple((float(t), total_current_correlation(cfg, t, spec)) for t in taus)
    return CurrentStats(jcl, jrc, jcl + jrc, interaction_energy(cfg, spec), K)
