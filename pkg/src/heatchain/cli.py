"""Command-line driver.

    heatchain steady    --config CFG [--observables LIST] [--out FILE]
    heatchain sweep     --config SWEEP [--out FILE] [--jobs N]
    heatchain figure    NAME --out DIR [--jobs N]
    heatchain correlate --config CFG --tau-grid GRID [--out FILE]

Configuration files are either a full configuration document or
``{"chain": {...}}`` with keyword arguments of the detuned-chain
parameterization.  Exit status: 0 success, 2 invalid input, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .errors import ConfigError, HeatChainError, NumericalError, StationarityError
from .measures import CriterionSpec
from .quadrature import QuadratureSpec
from .steady import correlation_matrices, covariance, stationarity_check
from .sweep import (
    SweepSpec,
    build_config,
    criteria_map,
    evaluate_observables,
    format_number,
    observable_columns,
    parse_observables,
    rows_to_csv,
    rows_to_gnuplot,
    run_sweep,
)
from .transport import total_current_correlation

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3
FIGURES = ("fig1", "fig2", "fig3", "fig31", "fig4", "fig5")
DEFAULT_OBSERVABLES = "j_CL,j_RC,J,H_int"


class InputError(Exception):
    """Bad command-line input; mapped to exit status 2."""


def _read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InputError(f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc}") from None


def load_config(path):
    doc = _read_json(path)
    if isinstance(doc, dict) and "chain" in doc:
        return build_config("chain", doc["chain"]), doc.get("quadrature")
    return build_config("config", doc), None


def parse_tau_grid(text: str) -> tuple[list[float], bool]:
    """'a:b:n' (inclusive linspace) or a comma list; returns (sorted unique lags, had_duplicates)."""
    try:
        if ":" in text:
            a, b, n = text.split(":")
            vals = np.linspace(float(a), float(b), int(n)).tolist()
        else:
            vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"cannot parse tau grid {text!r}") from None
    if not vals or not all(math.isfinite(v) for v in vals):
        raise InputError("tau grid must be nonempty and finite")
    uniq = sorted(set(vals))
    return uniq, len(uniq) != len(vals)


def _write(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _criteria(paths: Optional[Sequence[str]]) -> list[dict]:
    docs = []
    for p in paths or ():
        doc = _read_json(p)
        try:
            CriterionSpec.from_document(doc)
        except (KeyError, ValueError) as exc:
            raise InputError(f"invalid criterion spec {p}: {exc}") from None
        docs.append(doc)
    return docs


def _report_doc(rep) -> dict:
    return {
        "ok": rep.ok,
        "violations": rep.violations,
        "warnings": rep.warnings,
        "min_det_ratio": rep.min_det_ratio,
        "cutoff_margin": rep.cutoff_margin,
    }


def cmd_steady(args) -> int:
    cfg, quad = load_config(args.config)
    quad = QuadratureSpec(**quad) if quad else None
    obs = parse_observables(args.observables or DEFAULT_OBSERVABLES)
    rep = stationarity_check(cfg)
    if not rep.ok:
        print(json.dumps({"stationarity": _report_doc(rep)}, indent=1), file=sys.stderr)
        raise StationarityError("; ".join(rep.violations), report=rep)
    values, err = evaluate_observables(cfg, obs, (0.0,), quad, criteria_map(_criteria(args.criterion_spec)), args.seed)
    cov = covariance(cfg, quad)
    eig = float(cov.uncertainty_eigenvalues()[0])
    doc = {
        "config": cfg.to_document(),
        "V": cov.V.ravel().tolist(),
        "observables": dict(zip(observable_columns(obs), values)),
        "quad_error": err,
        "physical": {"min_uncertainty_eigenvalue": eig, "ok": eig >= -1e-9},
        "stationarity": _report_doc(rep),
    }
    _write(json.dumps(doc, indent=1) + "\n", args.out)
    return EXIT_OK


def _sweep_outputs(spec: SweepSpec, jobs: int, seed: int):
    rows = run_sweep(spec, jobs=jobs, seed=seed)
    return spec.header(), rows


def cmd_sweep(args) -> int:
    doc = _read_json(args.config)
    if args.observables:
        doc["observables"] = args.observables
    if args.tau_grid:
        doc["tau_grid"] = parse_tau_grid(args.tau_grid)[0]
    spec = SweepSpec.from_document(doc, _criteria(args.criterion_spec))
    header, rows = _sweep_outputs(spec, args.jobs, args.seed)
    _write(rows_to_csv(header, rows), args.out)
    failed = [r for r in rows if r[-1]]
    for r in failed:
        print(f"point {r[: len(spec.axes)]} failed: {r[-1]}", file=sys.stderr)
    return EXIT_OK if len(failed) < len(rows) else EXIT_NUMERICAL


def correlate_rows(cfg, taus, quad=None) -> list[list]:
    rows = []
    for t in taus:
        rows.append([t, total_current_correlation(cfg, t, quad), correlation_matrices(cfg, t, quad).error])
    return rows


CORRELATE_HEADER = ["tau", "K_JJ", "quad_error"]


def cmd_correlate(args) -> int:
    cfg, quad = load_config(args.config)
    quad = QuadratureSpec(**quad) if quad else None
    taus, dup = parse_tau_grid(args.tau_grid or "0")
    if dup:
        print("warning: duplicate tau values removed", file=sys.stderr)
    _write(rows_to_csv(CORRELATE_HEADER, correlate_rows(cfg, taus, quad)), args.out)
    return EXIT_OK


def load_preset(name: str) -> dict:
    if name not in FIGURES:
        raise InputError(f"unknown figure {name!r}; choose from {', '.join(FIGURES)}")
    ref = resources.files("heatchain") / "presets" / f"{name}.json"
    return json.loads(ref.read_text(encoding="utf-8"))


def cmd_figure(args) -> int:
    preset = load_preset(args.name)
    if not args.out:
        raise InputError("figure needs --out DIR")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    crit = _criteria(args.criterion_spec)
    status = EXIT_OK
    for item in preset["outputs"]:
        stem = out / item["file"]
        if item["type"] == "sweep":
            spec = SweepSpec.from_document(item["sweep"], crit)
            header, rows = _sweep_outputs(spec, args.jobs, args.seed)
            if all(r[-1] for r in rows):
                status = EXIT_NUMERICAL
        else:
            cfg = build_config("chain", item["chain"])
            a, b, n = item["tau_grid"]["linspace"]
            header, rows = CORRELATE_HEADER + ["error"], [
                r + [""] for r in correlate_rows(cfg, np.linspace(a, b, int(n)).tolist())
            ]
        _write(rows_to_csv(header, rows), f"{stem}.csv")
        _write(rows_to_gnuplot(header, rows, item.get("block")), f"{stem}.dat")
        print(f"wrote {stem}.csv", file=sys.stderr)
    return status


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="heatchain", description="Stationary state of a damped three-oscillator chain.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", required=True, help="configuration or sweep JSON file")
        sp.add_argument("--out", help="output file (directory for 'figure'); default stdout")
        sp.add_argument("--observables", help="comma-separated observables, e.g. 'J,E_N(L,R)'")
        sp.add_argument("--tau-grid", help="lags as 'a:b:n' or a comma list")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
        sp.add_argument("--seed", type=int, default=0, help="seed of the criterion optimizer")
        sp.add_argument("--criterion-spec", action="append", help="criterion JSON file (repeatable)")

    common(sub.add_parser("steady", help="single-point covariance and observables"))
    common(sub.add_parser("sweep", help="grid sweep to CSV"))
    fig = sub.add_parser("figure", help="run a figure preset")
    fig.add_argument("name")
    common(fig, config=False)
    common(sub.add_parser("correlate", help="K_JJ(tau) scan to CSV"))
    return p


COMMANDS = {"steady": cmd_steady, "sweep": cmd_sweep, "figure": cmd_figure, "correlate": cmd_correlate}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    try:
        return COMMANDS[args.command](args)
    except (InputError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NumericalError, ArithmeticError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except HeatChainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    main_entry()
