"""System configuration for the three-oscillator chain and its baths.

Internal units fix hbar = k_B = m = Omega = 1, so every number stored in a
:class:`SystemConfig` is a dimensionless ratio such as k/m Omega^2 or
k_B T / hbar Omega, the same form the figure presets use.  Oscillator index
0, 1, 2 stands for the left, central and right sites.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Sequence

import numpy as np
from scipy import constants

from .errors import (
    MissingField,
    NegativeEigenvalue,
    NonPositiveParameter,
    UnknownSpectralKind,
)

SITES = ("L", "C", "R")

OHMIC = "ohmic"
SUPER_OHMIC = "superohmic"

_KIND_ALIASES = {
    "ohmic": OHMIC,
    "oh": OHMIC,
    "superohmic": SUPER_OHMIC,
    "super-ohmic": SUPER_OHMIC,
    "super_ohmic": SUPER_OHMIC,
    "soh": SUPER_OHMIC,
}


def normalize_kind(kind: str) -> str:
    try:
        return _KIND_ALIASES[str(kind).strip().lower()]
    except KeyError:
        raise UnknownSpectralKind(f"unknown spectral kind {kind!r}") from None


@dataclass(frozen=True)
class BathConfig:
    """One reservoir: spectral shape, temperature and initial squeezing.

    ``squeeze_theta`` is stored for completeness but never enters a
    stationary quantity; only ``cosh(2 r)`` survives in the long-time noise.
    """

    kind: str
    gamma: float
    omega_c: float
    temperature: float
    squeeze_r: float = 0.0
    squeeze_theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", normalize_kind(self.kind))
        for name in ("gamma", "omega_c", "temperature"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise NonPositiveParameter(f"bath {name} must be > 0, got {value!r}")
        if not (math.isfinite(self.squeeze_r) and self.squeeze_r >= 0):
            raise NonPositiveParameter(f"squeeze_r must be >= 0, got {self.squeeze_r!r}")
        if not (-math.pi < self.squeeze_theta <= math.pi):
            raise NonPositiveParameter(
                f"squeeze_theta must lie in (-pi, pi], got {self.squeeze_theta!r}"
            )


@dataclass(frozen=True)
class SystemConfig:
    omega: tuple[float, float, float]
    coupling_k: float
    baths: tuple[BathConfig, BathConfig, BathConfig]
    mass: float = 1.0
    hbar: float = field(default=1.0, init=False)
    k_B: float = field(default=1.0, init=False)

    def __post_init__(self):
        omega = tuple(float(w) for w in self.omega)
        baths = tuple(self.baths)
        if len(omega) != 3:
            raise NonPositiveParameter("exactly three oscillator frequencies are required")
        if len(baths) != 3:
            raise NonPositiveParameter("exactly three baths are required")
        for w in omega:
            if not (math.isfinite(w) and w > 0):
                raise NonPositiveParameter(f"oscillator frequency must be > 0, got {w!r}")
        if not (math.isfinite(self.coupling_k) and self.coupling_k >= 0):
            raise NonPositiveParameter(f"coupling k must be >= 0, got {self.coupling_k!r}")
        if not (math.isfinite(self.mass) and self.mass > 0):
            raise NonPositiveParameter(f"mass must be > 0, got {self.mass!r}")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "baths", baths)
        object.__setattr__(self, "coupling_k", float(self.coupling_k))
        object.__setattr__(self, "mass", float(self.mass))

    @property
    def temperatures(self) -> tuple[float, float, float]:
        return tuple(b.temperature for b in self.baths)

    def with_baths(self, **changes) -> "SystemConfig":
        """Copy with the same field changes applied to all three baths."""
        return replace(self, baths=tuple(replace(b, **changes) for b in self.baths))

    def to_document(self) -> dict:
        return {
            "omega": list(self.omega),
            "k": self.coupling_k,
            "mass": self.mass,
            "baths": [
                {
                    "kind": b.kind,
                    "gamma": b.gamma,
                    "omega_c": b.omega_c,
                    "T": b.temperature,
                    "r": b.squeeze_r,
                    "theta": b.squeeze_theta,
                }
                for b in self.baths
            ],
        }


def reflect(cfg: SystemConfig) -> SystemConfig:
    """Swap the left and right sites together with their baths."""
    w = cfg.omega
    b = cfg.baths
    return replace(cfg, omega=(w[2], w[1], w[0]), baths=(b[2], b[1], b[0]))


def _require(doc: Mapping[str, Any], key: str, where: str):
    if key not in doc:
        raise MissingField(f"missing field {key!r} in {where}")
    return doc[key]


def _number(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise NonPositiveParameter(f"{name} must be a number, got {value!r}")
    return float(value)


def validate(raw: Mapping[str, Any]) -> SystemConfig:
    """Build a :class:`SystemConfig` from a configuration document.

    The document is a mapping with keys ``omega`` (three numbers), ``k``,
    optional ``mass`` and ``baths`` (three objects with ``kind``, ``gamma``,
    ``omega_c``, ``T`` and optional ``r``, ``theta``).
    """
    if not isinstance(raw, Mapping):
        raise MissingField("configuration document must be a JSON object")
    omega = _require(raw, "omega", "config")
    if not isinstance(omega, Sequence) or isinstance(omega, str) or len(omega) != 3:
        raise NonPositiveParameter("'omega' must be an array of three numbers")
    k = _number(_require(raw, "k", "config"), "k")
    mass = _number(raw.get("mass", 1.0), "mass")
    baths_raw = _require(raw, "baths", "config")
    if not isinstance(baths_raw, Sequence) or isinstance(baths_raw, str) or len(baths_raw) != 3:
        raise NonPositiveParameter("'baths' must be an array of three objects")
    baths = []
    for i, b in enumerate(baths_raw):
        where = f"baths[{i}]"
        if not isinstance(b, Mapping):
            raise MissingField(f"{where} must be an object")
        kind = _require(b, "kind", where)
        if not isinstance(kind, str):
            raise UnknownSpectralKind(f"{where}.kind must be a string")
        baths.append(
            BathConfig(
                kind=kind,
                gamma=_number(_require(b, "gamma", where), f"{where}.gamma"),
                omega_c=_number(_require(b, "omega_c", where), f"{where}.omega_c"),
                temperature=_number(_require(b, "T", where), f"{where}.T"),
                squeeze_r=_number(b.get("r", 0.0), f"{where}.r"),
                squeeze_theta=_number(b.get("theta", 0.0), f"{where}.theta"),
            )
        )
    return SystemConfig(
        omega=tuple(_number(w, "omega") for w in omega),
        coupling_k=k,
        baths=tuple(baths),
        mass=mass,
    )


def chain_config(
    *,
    k: float,
    T: float,
    dT_over_T: float,
    DT_over_T: float,
    delta_omega: float = 0.0,
    gamma=(1e-4, 0.05, 1e-4),
    omega_c: float = 20.0,
    kind: str = OHMIC,
    r=(0.0, 0.0, 0.0),
    theta=(0.0, 0.0, 0.0),
    mass: float = 1.0,
) -> SystemConfig:
    """Configuration in the detuned-chain parameterization used by the figures.

    Frequencies are (1 + 0.4 dw, 1 + 0.9 dw, 1 - 0.7 dw) and temperatures
    T(1 + dT/T), T(1 + DT/T), T(1 - dT/T) for left, centre, right.
    """
    omega = (1.0 + 0.4 * delta_omega, 1.0 + 0.9 * delta_omega, 1.0 - 0.7 * delta_omega)
    temps = (T * (1.0 + dT_over_T), T * (1.0 + DT_over_T), T * (1.0 - dT_over_T))
    gammas = tuple(gamma) if np.ndim(gamma) else (gamma,) * 3
    kinds = (kind,) * 3 if isinstance(kind, str) else tuple(kind)
    baths = tuple(
        BathConfig(
            kind=kinds[i],
            gamma=gammas[i],
            omega_c=omega_c,
            temperature=temps[i],
            squeeze_r=r[i],
            squeeze_theta=theta[i],
        )
        for i in range(3)
    )
    return SystemConfig(omega=omega, coupling_k=k, baths=baths, mass=mass)


def coupling_matrix(k: float) -> np.ndarray:
    """Nearest-neighbour interaction matrix U of the isolated chain."""
    if k < 0:
        raise NonPositiveParameter(f"coupling k must be >= 0, got {k!r}")
    return 0.5 * k * np.array([[1.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 1.0]])


def renormalized_frequencies_sq(cfg: SystemConfig) -> np.ndarray:
    """Omega_i^2 = omega_i^2 + DeltaOmega_i."""
    from .spectral import frequency_shift

    return np.array([w * w + frequency_shift(b, cfg.mass) for w, b in zip(cfg.omega, cfg.baths)])


def dressed_frequencies(cfg: SystemConfig) -> np.ndarray:
    """Square roots of the eigenvalues of diag(Omega_i^2) + U/m, ascending."""
    K = np.diag(renormalized_frequencies_sq(cfg)) + coupling_matrix(cfg.coupling_k) / cfg.mass
    ev = np.linalg.eigvalsh(K)
    if ev[0] <= 0:
        raise NegativeEigenvalue(f"effective potential not positive definite: {ev}")
    return np.sqrt(ev)


# --- physical units ---------------------------------------------------------


@dataclass(frozen=True)
class PhysicalParams:
    """Dimensionful description; ``Omega_hz`` is the angular reference frequency in s^-1."""

    Omega_hz: float
    mass_kg: float
    temperatures_K: tuple[float, float, float]
    omega_ratios: tuple[float, float, float] = (1.0, 1.0, 1.0)
    coupling_ratio: float = 0.0
    gammas: tuple[float, float, float] = (1e-4, 0.05, 1e-4)
    omega_c: tuple[float, float, float] = (20.0, 20.0, 20.0)
    kinds: tuple[str, str, str] = (OHMIC, OHMIC, OHMIC)
    squeeze_r: tuple[float, float, float] = (0.0, 0.0, 0.0)
    squeeze_theta: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        values = [self.Omega_hz, self.mass_kg, *self.temperatures_K, *self.omega_ratios,
                  *self.gammas, *self.omega_c]
        if not all(math.isfinite(v) and v > 0 for v in values):
            raise NonPositiveParameter("physical parameters must be strictly positive")


def temperature_scale(Omega_hz: float) -> float:
    """hbar Omega / k_B in kelvin."""
    return constants.hbar * Omega_hz / constants.k


def to_dimensionless(p: PhysicalParams) -> SystemConfig:
    theta_K = temperature_scale(p.Omega_hz)
    baths = tuple(
        BathConfig(
            kind=p.kinds[i],
            gamma=p.gammas[i],
            omega_c=p.omega_c[i],
            temperature=p.temperatures_K[i] / theta_K,
            squeeze_r=p.squeeze_r[i],
            squeeze_theta=p.squeeze_theta[i],
        )
        for i in range(3)
    )
    return SystemConfig(omega=p.omega_ratios, coupling_k=p.coupling_ratio, baths=baths)


def to_physical(cfg: SystemConfig, Omega_hz: float, mass_kg: float) -> PhysicalParams:
    """Inverse of :func:`to_dimensionless` for a given reference frequency and mass."""
    theta_K = temperature_scale(Omega_hz)
    return PhysicalParams(
        Omega_hz=Omega_hz,
        mass_kg=mass_kg,
        temperatures_K=tuple(b.temperature * theta_K for b in cfg.baths),
        omega_ratios=cfg.omega,
        coupling_ratio=cfg.coupling_k,
        gammas=tuple(b.gamma for b in cfg.baths),
        omega_c=tuple(b.omega_c for b in cfg.baths),
        kinds=tuple(b.kind for b in cfg.baths),
        squeeze_r=tuple(b.squeeze_r for b in cfg.baths),
        squeeze_theta=tuple(b.squeeze_theta for b in cfg.baths),
    )
