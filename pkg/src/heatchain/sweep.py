"""Parameter sweeps: observable vocabulary, grid expansion and CSV output.

A sweep document is JSON of the form::

    {
      "chain": {"k": 1.8, "T": 0.27, "dT_over_T": 0.95, "DT_over_T": 0.0,
                "delta_omega": 0.5, "kind": "ohmic"},
      "axes": [{"param": "DT_over_T", "linspace": [-0.95, 4.05, 41]}],
      "observables": ["J", "E_N(L,R)"],
      "tau_grid": [0.0, 1.0],
      "quadrature": {"rel_tol": 1e-9}
    }

``chain`` holds keyword arguments of :func:`heatchain.model.chain_config`;
a full configuration document under ``config`` may be used instead.  Axis
parameters are dotted paths into whichever base is given (``"r.1"`` is the
centre squeezing, ``"baths.0.T"`` the left temperature).  At most two axes
are allowed; rows follow ``itertools.product`` order with the first axis
outermost.
"""

from __future__ import annotations

import copy
import csv
import io
import itertools
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from .errors import ConfigError, HeatChainError, MissingField, NonPositiveParameter
from .measures import (
    CriterionSpec,
    gaussian_discord_left,
    gaussian_discord_right,
    log_negativity,
    optimize_criterion,
    reduce_two_mode,
    shipped_criterion,
    simon_witness,
)
from .model import SITES, SystemConfig, chain_config, validate
from .quadrature import QuadratureSpec
from .steady import OPERATORS, correlation_matrices, covariance, require_stationary
from .transport import interaction_energy, mean_pair_current, total_current, total_current_correlation

SCALAR_OBSERVABLES = ("j_CL", "j_RC", "J", "H_int", "T23", "T33")
PAIR_OBSERVABLES = ("E_N", "D_left", "D_right", "simon")
_TOKEN = re.compile(r"^\s*([A-Za-z_0-9]+)\s*(?:\((.*)\))?\s*$")


def format_number(v) -> str:
    """Locale-independent scientific notation with 17 significant digits."""
    if isinstance(v, str):
        return v
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.16e}"


@dataclass(frozen=True)
class Observable:
    name: str
    args: tuple = ()

    @property
    def label(self) -> str:
        return f"{self.name}({','.join(self.args)})" if self.args else self.name


def parse_observable(token: str) -> Observable:
    m = _TOKEN.match(token)
    if not m:
        raise ConfigError(f"malformed observable {token!r}")
    name, inner = m.group(1), m.group(2)
    args = tuple(a.strip() for a in inner.split(",")) if inner else ()
    if name == "V" or name in SCALAR_OBSERVABLES:
        if args:
            raise ConfigError(f"observable {name} takes no arguments")
    elif name in PAIR_OBSERVABLES:
        if len(args) != 2 or any(a not in SITES for a in args) or args[0] == args[1]:
            raise ConfigError(f"{name} needs two distinct sites from {SITES}, got {token!r}")
    elif name == "K_JJ":
        try:
            [float(a) for a in args]
        except ValueError:
            raise ConfigError(f"K_JJ lags must be numbers, got {token!r}") from None
    else:
        raise ConfigError(f"unknown observable {token!r}")
    return Observable(name, args)


def parse_observables(spec) -> list[Observable]:
    if isinstance(spec, str):
        # split on commas that are not inside parentheses
        spec = [t for t in re.split(r",(?![^()]*\))", spec) if t.strip()]
    obs = [parse_observable(t) for t in spec]
    if not obs:
        raise ConfigError("no observables requested")
    return obs


def _lags(ob: Observable, tau_grid: Sequence[float]) -> list[float]:
    return [float(a) for a in ob.args] if ob.args else [float(t) for t in tau_grid]


def observable_columns(observables: Sequence[Observable], tau_grid: Sequence[float] = (0.0,)) -> list[str]:
    cols = []
    for ob in observables:
        if ob.name == "V":
            cols += [f"V[{OPERATORS[a]},{OPERATORS[b]}]" for a in range(6) for b in range(a, 6)]
        elif ob.name == "K_JJ":
            cols += [f"K_JJ(tau={format_number(t)})" for t in _lags(ob, tau_grid)]
        else:
            cols.append(ob.label)
    return cols


def criteria_map(crit_docs) -> dict:
    out = {}
    for doc in crit_docs or ():
        spec = CriterionSpec.from_document(doc)
        out[spec.kappa] = spec
    return out


def evaluate_observables(
    cfg: SystemConfig,
    observables: Sequence[Observable],
    tau_grid: Sequence[float] = (0.0,),
    quad: Optional[QuadratureSpec] = None,
    criteria: Optional[dict] = None,
    seed: int = 0,
) -> tuple[list[float], float]:
    """Values for every column of ``observables`` and the largest quadrature error used."""
    require_stationary(cfg)
    cov = covariance(cfg, quad)
    errors = [cov.error]
    values: list[float] = []
    criteria = criteria or {}
    for ob in observables:
        n = ob.name
        if n == "V":
            values += [cov.V[a, b] for a in range(6) for b in range(a, 6)]
        elif n == "j_CL":
            values.append(mean_pair_current(cfg, "CL", spec=quad))
        elif n == "j_RC":
            values.append(mean_pair_current(cfg, "RC", spec=quad))
        elif n == "J":
            values.append(total_current(cfg, quad))
        elif n == "H_int":
            values.append(interaction_energy(cfg, quad))
        elif n == "K_JJ":
            for t in _lags(ob, tau_grid):
                values.append(total_current_correlation(cfg, t, quad))
                errors.append(correlation_matrices(cfg, t, quad).error)
        elif n in ("T23", "T33"):
            kappa = int(n[1])
            spec = criteria.get(kappa) or shipped_criterion(kappa, 3)
            values.append(optimize_criterion(cov.V, spec, seed=seed).value)
        else:
            st = reduce_two_mode(cov, *ob.args)
            if n == "E_N":
                values.append(log_negativity(st))
            elif n == "D_right":
                values.append(gaussian_discord_right(st))
            elif n == "D_left":
                values.append(gaussian_discord_left(st))
            elif n == "simon":
                values.append(simon_witness(st)[0])
    return values, max(errors)


# --- sweep specification ----------------------------------------------------


def _set_path(doc: dict, path: str, value) -> None:
    keys = path.split(".")
    node = doc
    for k in keys[:-1]:
        node = node[int(k)] if isinstance(node, list) else node.setdefault(k, {})
    last = keys[-1]
    if isinstance(node, list):
        node[int(last)] = value
    else:
        node[last] = value


def build_config(base_kind: str, doc: dict) -> SystemConfig:
    if base_kind == "config":
        return validate(doc)
    kwargs = {}
    for key, v in doc.items():
        kwargs[key] = tuple(v) if isinstance(v, list) else v
    try:
        return chain_config(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"invalid chain parameters: {exc}") from None


def _grid(axis: dict) -> list:
    if "values" in axis:
        vals = axis["values"]
    elif "linspace" in axis:
        a, b, n = axis["linspace"]
        if int(n) < 1:
            raise NonPositiveParameter("linspace needs at least one point")
        vals = np.linspace(float(a), float(b), int(n)).tolist()
    else:
        raise MissingField("axis needs 'values' or 'linspace'")
    if not isinstance(vals, list) or not vals:
        raise NonPositiveParameter(f"axis {axis.get('param')!r} has an empty grid")
    for v in vals:
        if isinstance(v, (int, float)) and not math.isfinite(v):
            raise NonPositiveParameter(f"axis {axis.get('param')!r} has a non-finite value")
    return vals


@dataclass(frozen=True)
class SweepSpec:
    base_kind: str
    base: dict
    axes: tuple  # ((path, values), ...)
    observables: tuple
    tau_grid: tuple = (0.0,)
    quadrature: Optional[QuadratureSpec] = None
    criteria: tuple = ()  # criterion documents

    @classmethod
    def from_document(cls, doc: dict, criteria: Sequence[dict] = ()) -> "SweepSpec":
        if not isinstance(doc, dict):
            raise ConfigError("sweep document must be a JSON object")
        if "chain" in doc:
            base_kind, base = "chain", doc["chain"]
        elif "config" in doc:
            base_kind, base = "config", doc["config"]
        else:
            raise MissingField("sweep needs a 'chain' or 'config' base")
        axes_raw = doc.get("axes", [])
        if len(axes_raw) > 2:
            raise ConfigError("at most two sweep axes are supported")
        axes = []
        for ax in axes_raw:
            if "param" not in ax:
                raise MissingField("axis needs 'param'")
            axes.append((str(ax["param"]), tuple(_grid(ax))))
        if "observables" not in doc:
            raise MissingField("sweep needs 'observables'")
        obs = tuple(parse_observables(doc["observables"]))
        tau = tuple(float(t) for t in doc.get("tau_grid", [0.0]))
        if not tau or not all(math.isfinite(t) for t in tau):
            raise NonPositiveParameter("tau_grid must be nonempty and finite")
        quad = QuadratureSpec(**doc["quadrature"]) if "quadrature" in doc else None
        spec = cls(base_kind, copy.deepcopy(base), tuple(axes), obs, tau, quad, tuple(criteria))
        # fail fast on an invalid base before any work is scheduled
        spec.config_at(spec.points()[0])
        return spec

    def points(self) -> list[tuple]:
        return list(itertools.product(*[vals for _, vals in self.axes]))

    def config_at(self, point: tuple) -> SystemConfig:
        doc = copy.deepcopy(self.base)
        for (path, _), v in zip(self.axes, point):
            _set_path(doc, path, v)
        return build_config(self.base_kind, doc)

    def header(self) -> list[str]:
        return [p for p, _ in self.axes] + observable_columns(self.observables, self.tau_grid) + [
            "quad_error",
            "error",
        ]


def _run_point(args) -> list:
    spec, point, seed = args
    ncols = len(observable_columns(spec.observables, spec.tau_grid))
    try:
        cfg = spec.config_at(point)
        values, err = evaluate_observables(
            cfg, spec.observables, spec.tau_grid, spec.quadrature, criteria_map(spec.criteria), seed
        )
        return list(point) + values + [err, ""]
    except (HeatChainError, ArithmeticError, ValueError) as exc:
        msg = f"{type(exc).__name__}: {exc}".replace("\n", " ")
        return list(point) + [float("nan")] * ncols + [float("nan"), msg]


def run_sweep(spec: SweepSpec, jobs: int = 1, seed: int = 0) -> list[list]:
    """Rows in grid order; failing points carry NaNs and a message in the last column."""
    tasks = [(spec, p, seed) for p in spec.points()]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_point, tasks, chunksize=1))
    return [_run_point(t) for t in tasks]


def rows_to_csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for r in rows:
        w.writerow([format_number(v) for v in r])
    return buf.getvalue()


def rows_to_gnuplot(header: Sequence[str], rows: Sequence[Sequence], block_size: Optional[int] = None) -> str:
    """Whitespace-separated table; a blank line after every ``block_size`` rows for surface plots."""
    lines = ["# " + " ".join(h.replace(" ", "_") for h in header[:-1])]
    for i, r in enumerate(rows):
        lines.append(" ".join(format_number(v) for v in r[:-1]))
        if block_size and (i + 1) % block_size == 0 and i + 1 < len(rows):
            lines.append("")
    return "\n".join(lines) + "\n"
