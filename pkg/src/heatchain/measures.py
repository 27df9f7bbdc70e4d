"""Gaussian correlation measures computed from the stationary covariance.

Two conventions meet here.  :class:`~heatchain.steady.CovarianceMatrix`
stores V with vacuum V = (hbar/2) I; every two-mode measure works on the
scaled sigma = 2V/hbar (vacuum sigma = I) in the interleaved ordering
(x_i, p_i, x_j, p_j), and :func:`reduce_two_mode` is the only place where the
conversion happens.  The multipartite criterion uses V itself in the
(x_1..x_n, p_1..p_n) ordering, matching the data files that define it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy import linalg, optimize
from scipy.special import xlogy

from .errors import BudgetExhausted, NonPhysical, SingularSum
from .model import SITES

PHYS_TOL = 1e-9

_J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def interleaved_form(n: int) -> np.ndarray:
    """Symplectic form for the (x_1, p_1, ..., x_n, p_n) ordering."""
    return np.kron(np.eye(n), _J2)


def block_form(n: int) -> np.ndarray:
    """Symplectic form for the (x_1..x_n, p_1..p_n) ordering."""
    I = np.eye(n)
    Z = np.zeros((n, n))
    return np.block([[Z, I], [-I, Z]])


def _site(i) -> int:
    if isinstance(i, str):
        return SITES.index(i)
    return int(i)


@dataclass(frozen=True)
class TwoModeState:
    """Scaled two-mode covariance sigma in (x_i, p_i, x_j, p_j) ordering."""

    sigma: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.sigma, dtype=float)
        if s.shape != (4, 4):
            raise ValueError("two-mode covariance must be 4x4")
        object.__setattr__(self, "sigma", 0.5 * (s + s.T))

    @property
    def A(self):
        return self.sigma[:2, :2]

    @property
    def B(self):
        return self.sigma[2:, 2:]

    @property
    def C(self):
        return self.sigma[:2, 2:]

    @property
    def invariants(self) -> tuple[float, float, float, float]:
        """(alpha, beta, gamma2, delta) = (det A, det B, det C, det sigma)."""
        return (
            float(np.linalg.det(self.A)),
            float(np.linalg.det(self.B)),
            float(np.linalg.det(self.C)),
            float(np.linalg.det(self.sigma)),
        )

    def swapped(self) -> "TwoModeState":
        P = np.zeros((4, 4))
        P[0, 2] = P[1, 3] = P[2, 0] = P[3, 1] = 1.0
        return TwoModeState(P @ self.sigma @ P.T)


def reduce_two_mode(V, i, j, hbar: float = 1.0) -> TwoModeState:
    """Scaled covariance of sites i, j taken from a 6x6 V over (x_L, x_C, x_R, p_L, p_C, p_R)."""
    i, j = _site(i), _site(j)
    if i == j:
        raise ValueError("reduce_two_mode needs two distinct sites")
    V = getattr(V, "V", V)
    idx = [i, i + 3, j, j + 3]
    return TwoModeState(2.0 / hbar * np.asarray(V)[np.ix_(idx, idx)])


def symplectic_eigenvalues(sigma, ordering: str = "interleaved") -> np.ndarray:
    """Symplectic spectrum of a positive-definite 2n x 2n matrix, ascending."""
    sigma = np.asarray(sigma, dtype=float)
    n = sigma.shape[0] // 2
    try:
        np.linalg.cholesky(0.5 * (sigma + sigma.T))
    except np.linalg.LinAlgError:
        raise NonPhysical("covariance matrix is not positive definite") from None
    Om = interleaved_form(n) if ordering == "interleaved" else block_form(n)
    ev = np.sort(np.abs(np.linalg.eigvals(1j * Om @ sigma)))
    # eigenvalues come in +/- pairs
    return 0.5 * (ev[0::2] + ev[1::2])


def _check_physical(st: TwoModeState, tol: float = PHYS_TOL) -> np.ndarray:
    nu = symplectic_eigenvalues(st.sigma)
    if nu[0] < 1.0 - tol:
        raise NonPhysical(f"smallest symplectic eigenvalue {nu[0]:.12g} < 1")
    return nu


def entropy_function(x) -> np.ndarray | float:
    """f(x) = ((x+1)/2) ln((x+1)/2) - ((x-1)/2) ln((x-1)/2); f(1) = 0."""
    x = np.maximum(np.asarray(x, dtype=float), 1.0)
    a = 0.5 * (x + 1.0)
    b = 0.5 * (x - 1.0)
    out = xlogy(a, a) - xlogy(b, b)
    return float(out) if out.ndim == 0 else out


def von_neumann_entropy(sigma, ordering: str = "interleaved") -> float:
    nu = symplectic_eigenvalues(sigma, ordering)
    if nu[0] < 1.0 - PHYS_TOL:
        raise NonPhysical(f"smallest symplectic eigenvalue {nu[0]:.12g} < 1")
    return float(np.sum(entropy_function(nu)))


@dataclass(frozen=True)
class MeasureResult:
    value: float
    diagnostics: dict = field(default_factory=dict)

    def __float__(self):
        return float(self.value)


def partial_transpose(st: TwoModeState) -> np.ndarray:
    Lam = np.diag([1.0, 1.0, 1.0, -1.0])
    return Lam @ st.sigma @ Lam


def log_negativity(st: TwoModeState) -> float:
    """max(0, -ln nu~_-) with nu~_- the smallest symplectic eigenvalue of the partial transpose."""
    _check_physical(st)
    nu = symplectic_eigenvalues(partial_transpose(st))
    return max(0.0, -math.log(nu[0]))


def simon_witness(st: TwoModeState) -> tuple[float, bool]:
    """C_{xixj} C_{pipj} - C_{xipj} C_{pixj} in the hbar/2-vacuum convention; negative flags entanglement."""
    V = 0.5 * st.sigma
    value = float(V[0, 2] * V[1, 3] - V[0, 3] * V[1, 2])
    return value, value < 0


def minimal_conditional_determinant(alpha: float, beta: float, gamma2: float, delta: float) -> float:
    """Smallest det of mode A's conditional state over Gaussian measurements on mode B."""
    if abs(beta - 1.0) < 1e-12:
        # B pure: a physical state is then a product and measuring B reveals nothing
        return alpha
    lhs = (delta - alpha * beta) ** 2
    rhs = (1.0 + beta) * gamma2**2 * (alpha + delta)
    if lhs <= rhs:
        g = gamma2
        inner = _root_arg(g * g, (beta - 1.0) * (delta - alpha))
        return (2 * g * g + (beta - 1.0) * (delta - alpha) + 2 * abs(g) * math.sqrt(inner)) / (beta - 1.0) ** 2
    disc = _root_arg(gamma2**4, (delta - alpha * beta) ** 2, -2 * gamma2**2 * (alpha * beta + delta))
    return (alpha * beta - gamma2**2 + delta - math.sqrt(disc)) / (2 * beta)


def _root_arg(*terms: float) -> float:
    """Sum of terms, set to zero when it is below their rounding noise.

    Pure states sit on a double root where the sum cancels exactly; without
    the floor the square root would turn eps-sized noise into sqrt(eps).
    """
    total = math.fsum(terms)
    noise = 64 * np.finfo(float).eps * max(abs(t) for t in terms)
    return 0.0 if total < noise else total


def gaussian_discord_right(st: TwoModeState) -> float:
    """Gaussian discord with the measurement performed on the second mode."""
    nu = _check_physical(st)
    alpha, beta, gamma2, delta = st.invariants
    emin = minimal_conditional_determinant(alpha, beta, gamma2, delta)
    value = (
        entropy_function(math.sqrt(beta))
        - entropy_function(nu[1])
        - entropy_function(nu[0])
        + entropy_function(math.sqrt(max(emin, 1.0)))
    )
    if value < -PHYS_TOL:
        raise NonPhysical(f"negative discord {value:.3g}")
    return max(value, 0.0)


def gaussian_discord_left(st: TwoModeState) -> float:
    """Gaussian discord with the measurement performed on the first mode."""
    return gaussian_discord_right(st.swapped())


# --- multipartite separability criterion ------------------------------------


@dataclass(frozen=True)
class CriterionSpec:
    """Coefficients a_j, linear maps P_j and symplectic matrix J_n of the criterion."""

    kappa: int
    n: int
    a: tuple
    P: tuple
    Jn: np.ndarray
    name: str = ""
    note: str = ""

    def __post_init__(self):
        P = tuple(np.asarray(p, dtype=float) for p in self.P)
        if len(P) != len(self.a):
            raise ValueError("number of coefficients and partition maps differ")
        dim = 2 * self.n
        for p in P:
            if p.shape != (dim, dim):
                raise ValueError(f"partition map must be {dim}x{dim}")
            if abs(np.linalg.det(p)) < 1e-12:
                raise ValueError("partition maps must be invertible")
        Jn = np.asarray(self.Jn, dtype=float)
        if Jn.shape != (dim, dim):
            raise ValueError(f"Jn must be {dim}x{dim}")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "a", tuple(float(x) for x in self.a))
        object.__setattr__(self, "Jn", Jn)

    @classmethod
    def from_document(cls, doc: dict) -> "CriterionSpec":
        dim = 2 * int(doc["n"])
        return cls(
            kappa=int(doc["kappa"]),
            n=int(doc["n"]),
            a=tuple(doc["a"]),
            P=tuple(np.asarray(p, dtype=float).reshape(dim, dim) for p in doc["P"]),
            Jn=np.asarray(doc["Jn"], dtype=float).reshape(dim, dim),
            name=doc.get("name", ""),
            note=doc.get("note", ""),
        )

    @classmethod
    def load(cls, path) -> "CriterionSpec":
        return cls.from_document(json.loads(Path(path).read_text()))

    def to_document(self) -> dict:
        return {
            "name": self.name,
            "note": self.note,
            "kappa": self.kappa,
            "n": self.n,
            "a": list(self.a),
            "P": [p.ravel().tolist() for p in self.P],
            "Jn": self.Jn.ravel().tolist(),
        }


def shipped_criterion(kappa: int, n: int = 3) -> CriterionSpec:
    """Criterion data file bundled with the package for (kappa, n)."""
    ref = resources.files("heatchain") / "data" / f"criterion_k{kappa}_n{n}.json"
    return CriterionSpec.from_document(json.loads(ref.read_text()))


def tau_kappa_n(V, X, Sigma, spec: CriterionSpec) -> float:
    """Criterion value for displacement X and probe covariance Sigma.

    Both terms share the factor 1/sqrt(det(Sigma + V)), which is applied once.
    """
    V = np.asarray(getattr(V, "V", V), dtype=float)
    X = np.asarray(X, dtype=float)
    Sigma = np.asarray(Sigma, dtype=float)
    S = Sigma + V
    det = np.linalg.det(S)
    if not (det > 0) or np.linalg.cond(S) > 1e13:
        raise SingularSum(f"Sigma + V not invertible (det={det:.3g})")
    Sinv = np.linalg.inv(S)
    # (Sigma^-1 + V^-1)^-1 = Sigma (Sigma + V)^-1 V
    N = Sigma @ Sinv @ V
    N = 0.5 * (N + N.T)
    JX = spec.Jn @ X
    first = math.exp(-2.0 * JX @ N @ JX)
    second = 0.0
    for a, P in zip(spec.a, spec.P):
        PX = P @ X
        second += a * math.exp(-0.5 * PX @ Sinv @ PX)
    return (first - second) / math.sqrt(det)


def _passive(params: np.ndarray, n: int) -> np.ndarray:
    """Orthogonal symplectic matrix from n^2 Hermitian-generator parameters."""
    H = np.zeros((n, n), dtype=complex)
    iu = np.triu_indices(n, 1)
    k = n * (n - 1) // 2
    H[iu] = params[:k] + 1j * params[k : 2 * k]
    H = H + H.conj().T
    H[np.diag_indices(n)] = params[2 * k : 2 * k + n]
    U = linalg.expm(1j * H)
    return np.block([[U.real, -U.imag], [U.imag, U.real]])


def probe_covariance(params, n: int, base: Optional[np.ndarray] = None) -> np.ndarray:
    """Pure Gaussian probe Sigma = (1/2) B K D D^T K^T B^T.

    ``params`` holds n^2 generators of the passive transformation K followed
    by n squeezing parameters for D; together they cover every pure Gaussian
    state.  ``base`` is an optional fixed symplectic matrix B that moves the
    origin of the parameterization.
    """
    params = np.asarray(params, dtype=float)
    K = _passive(params[: n * n], n)
    r = params[n * n : n * n + n]
    D = np.diag(np.concatenate([np.exp(-r), np.exp(r)]))
    S = K @ D
    if base is not None:
        S = base @ S
    return 0.5 * S @ S.T


def _matched_base(V: np.ndarray, n: int) -> np.ndarray:
    """Symplectic B whose pure probe has the same local shape as each mode of V."""
    B = np.zeros((2 * n, 2 * n))
    for i in range(n):
        idx = [i, i + n]
        A = V[np.ix_(idx, idx)]
        Sg = A / math.sqrt(np.linalg.det(A))
        B[np.ix_(idx, idx)] = linalg.sqrtm(Sg).real
    return B


def optimize_criterion(
    V,
    spec: CriterionSpec,
    restarts: int = 8,
    maxfev: int = 3000,
    seed: int = 0,
    strict: bool = False,
) -> MeasureResult:
    """Maximize :func:`tau_kappa_n` over X and pure probes with restarted Nelder-Mead.

    Restart 0 starts from the vacuum probe, restart 1 from the probe matched
    to the local mode shapes of V, the rest from random probes.  Each restart
    draws from its own child of ``SeedSequence(seed)``, so adding restarts
    never changes the earlier ones and the best value is monotone in the
    restart count.
    """
    V = np.asarray(getattr(V, "V", V), dtype=float)
    n = spec.n
    dim = 2 * n
    npar = dim + n * n + n
    matched = _matched_base(V, n)
    streams = np.random.SeedSequence(seed).spawn(restarts)
    best = (-math.inf, None, -1)
    history = []
    exhausted = False

    for idx, ss in enumerate(streams):
        rng = np.random.default_rng(ss)
        base = matched if idx == 1 else None
        x0 = np.zeros(npar)
        x0[:dim] = rng.normal(scale=0.5, size=dim)
        if idx >= 2:
            x0[dim:] = rng.normal(scale=0.5, size=npar - dim)

        def objective(p, base=base):
            try:
                return -tau_kappa_n(V, p[:dim], probe_covariance(p[dim:], n, base), spec)
            except SingularSum:
                return math.inf

        simplex = np.vstack([x0, x0 + 0.3 * np.eye(npar)])
        res = optimize.minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={"initial_simplex": simplex, "maxfev": maxfev, "xatol": 1e-10, "fatol": 1e-14},
        )
        value = -float(res.fun)
        history.append(value)
        exhausted = exhausted or res.status == 1
        if value > best[0]:
            best = (value, res.x.copy(), idx)

    diag = {
        "restarts": restarts,
        "maxfev": maxfev,
        "seed": seed,
        "best_restart": best[2],
        "restart_values": history,
        "best_point": best[1],
        "exhausted": exhausted,
    }
    result = MeasureResult(best[0], diag)
    if strict and exhausted:
        err = BudgetExhausted("criterion optimizer hit its evaluation budget")
        err.result = result
        raise err
    return result


def pair_measures(V, i, j) -> dict:
    """E_N, both discords and the Simon value for the pair (i, j) of a 6x6 covariance."""
    st = reduce_two_mode(V, i, j)
    simon, _ = simon_witness(st)
    return {
        "E_N": log_negativity(st),
        "D_right": gaussian_discord_right(st),
        "D_left": gaussian_discord_left(st),
        "simon": simon,
    }
