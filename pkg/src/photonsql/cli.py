"""Command-line interface.

One command per pipeline, JSON/CSV artifacts to an output directory,
summary tables on stdout.  Exit codes: 0 success, 1 input/validation
problem, 2 a well-defined computational refusal (divergent moment, empty
slice, ...).  Errors are mirrored as one-line JSON on stderr so scripts
can branch on them.

All randomness (soliton relative spreads for n ≥ 3) flows from --seed;
identical invocations produce byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import serialization as ser
from .design import design_report
from .envelopes import BandLimit, GaussianEnvelope
from .errors import ComputationError, PhotonSqlError, ValidationError
from .fourier import chain as run_chain
from .observables import (
    absorption_pattern,
    estimate_fringe_period,
    relative_spread,
    total_absorption_rate,
    uql_width,
    width_report,
)
from .oracle import GridSpec, compare, default_grid
from .soliton import compensate_dispersion, expand, uql_convergence_metric
from .states import SolitonState

DEFAULT_SEED = 42


@dataclass
class RunConfig:
    command: str
    state_path: Optional[Path] = None
    out_dir: Path = Path(".")
    grid: Optional[tuple[float, float, int]] = None
    seed: int = DEFAULT_SEED
    precision: int = ser.DEFAULT_PRECISION
    schedule_path: Optional[Path] = None
    chain_path: Optional[Path] = None
    target_path: Optional[Path] = None
    n: Optional[int] = None
    lam: Optional[float] = None
    kappa_in: float = 1.0
    reference_rate: Optional[float] = None
    compensate: bool = False


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="photonsql",
        description="Multiphoton spatial states: quantum-limit widths, absorption "
                    "patterns and rates, soliton expansion, Fourier-plane design.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, state=False, grid=False):
        p.add_argument("--out", type=Path, default=Path("."), help="output directory")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--precision", type=int, default=ser.DEFAULT_PRECISION,
                       help="significant digits in CSV output")
        if state:
            p.add_argument("--state", type=Path, required=True, help="state JSON file")
        if grid:
            p.add_argument("--grid", type=str, default=None,
                           help='evaluation grid as "min,max,points"')

    p = sub.add_parser("widths", help="marginal/conditional widths with SQL/UQL references")
    common(p, state=True)

    p = sub.add_parser("pattern", help="multiphoton absorption pattern CSV")
    common(p, state=True, grid=True)

    p = sub.add_parser("rate", help="total multiphoton absorption rate")
    common(p, state=True)
    p.add_argument("--reference-rate", type=float, default=None)

    p = sub.add_parser("expand", help="run an adiabatic expansion schedule")
    common(p, state=True)
    p.add_argument("--schedule", type=Path, required=True, help="schedule JSON file")
    p.add_argument("--compensate", action="store_true",
                   help="fully compensate dispersion after every step")

    p = sub.add_parser("chain", help="run a Fourier-plane processing chain")
    common(p, state=True, grid=True)
    p.add_argument("--chain", type=Path, required=True, help="chain JSON file")
    p.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="wavelength for band-limit auditing")

    p = sub.add_parser("design", help="inverse-design an interference pattern")
    common(p)
    p.add_argument("--target", type=Path, required=True, help="target CSV (x,intensity[,phase])")
    p.add_argument("--n", type=int, required=True, help="photon number")
    p.add_argument("--lambda", dest="lam", type=float, required=True, help="wavelength")
    p.add_argument("--kappa-in", type=float, default=1.0,
                   help="width of the Gaussian input envelope")

    p = sub.add_parser("oracle-compare", help="analytic vs brute-force quadrature")
    common(p, state=True, grid=True)

    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    grid = None
    if getattr(args, "grid", None):
        try:
            lo, hi, pts = args.grid.split(",")
            grid = (float(lo), float(hi), int(pts))
        except ValueError as exc:
            raise ValidationError(f'--grid must be "min,max,points", got {args.grid!r}') from exc
    return RunConfig(
        command=args.command,
        state_path=getattr(args, "state", None),
        out_dir=args.out,
        grid=grid,
        seed=args.seed,
        precision=args.precision,
        schedule_path=getattr(args, "schedule", None),
        chain_path=getattr(args, "chain", None),
        target_path=getattr(args, "target", None),
        n=getattr(args, "n", None),
        lam=getattr(args, "lam", None),
        kappa_in=getattr(args, "kappa_in", 1.0),
        reference_rate=getattr(args, "reference_rate", None),
        compensate=getattr(args, "compensate", False),
    )


# ---------------------------------------------------------------------------
# output helpers

def emit_summary(rows: Sequence[dict], columns: Optional[Sequence[str]] = None) -> str:
    """Aligned text table over the given row dicts (exact values live in JSON)."""
    if not rows:
        raise ValidationError("nothing to summarize")
    if columns is None:
        columns = list(rows[0].keys())
    cells = [[_cell(row.get(c)) for c in columns] for row in rows]
    widths = [max(len(c), *(r[i] and len(r[i]) or 0 for r in cells))
              for i, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths)).rstrip()]
    for r in cells:
        lines.append("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip())
    return "\n".join(lines)


def _cell(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _grid_array(config: RunConfig) -> np.ndarray:
    if config.grid is None:
        raise ValidationError("this command needs --grid \"min,max,points\"")
    lo, hi, pts = config.grid
    if pts < 2 or hi <= lo:
        raise ValidationError("grid needs min < max and at least 2 points")
    return np.linspace(lo, hi, pts)


def _outdir(config: RunConfig) -> Path:
    config.out_dir.mkdir(parents=True, exist_ok=True)
    return config.out_dir


# ---------------------------------------------------------------------------
# commands

def _cmd_widths(config: RunConfig) -> int:
    state = ser.load_state(config.state_path)
    report = width_report(state)
    doc = ser.width_report_to_dict(report)
    ser.dump_json(doc, _outdir(config) / "widths.json")
    print(emit_summary([doc]))
    return 0


def _cmd_pattern(config: RunConfig) -> int:
    state = ser.load_state(config.state_path)
    profile = absorption_pattern(state, _grid_array(config))
    ser.save_pattern(profile, _outdir(config) / "pattern.csv", config.precision)
    period = estimate_fringe_period(profile)
    print(emit_summary([{
        "points": profile.x_grid.size,
        "dx": profile.dx,
        "peak_intensity": float(profile.intensity.max()),
        "fringe_period": period,
    }]))
    return 0


def _cmd_rate(config: RunConfig) -> int:
    state = ser.load_state(config.state_path)
    report = total_absorption_rate(state, reference_rate=config.reference_rate)
    doc = ser.rate_report_to_dict(report)
    ser.dump_json(doc, _outdir(config) / "rate.json")
    print(emit_summary([doc]))
    return 0


def _cmd_expand(config: RunConfig) -> int:
    state = ser.load_state(config.state_path)
    if not isinstance(state, SolitonState):
        raise ValidationError("expand needs a soliton state")
    schedule = ser.load_schedule(config.schedule_path)
    rows = []
    for step, snapshot in enumerate(expand(state, schedule), start=1):
        if config.compensate and snapshot.b_integral != 0.0:
            snapshot = compensate_dispersion(snapshot, -snapshot.b_integral)
        report = width_report(snapshot)
        dxi = (float(relative_spread(snapshot, seed=config.seed)[0])
               if snapshot.n >= 2 else math.nan)
        metric = (uql_convergence_metric(snapshot)
                  if snapshot.b_integral == 0.0 else math.nan)
        rows.append({"step": step, "ratio": snapshot.ratio,
                     "b_integral": snapshot.b_integral,
                     "marginal_width": report.marginal,
                     "conditional_width": report.conditional,
                     "delta_xi_rms": dxi, "uql_metric": metric})
    (_outdir(config) / "expand.csv").write_text(
        ser.expand_csv_text(rows, config.precision))
    print(emit_summary(rows))
    return 0


def _cmd_chain(config: RunConfig) -> int:
    state = ser.load_state(config.state_path)
    steps = ser.load_chain(config.chain_path)
    band = BandLimit(config.lam) if config.lam else None
    result = run_chain(state, steps, band_limit=band)
    out = _outdir(config)
    doc = ser.audit_to_dict(result)
    ser.dump_json(doc, out / "audit.json")
    ser.save_state(result.state, out / "final_state.json")
    if config.grid is not None:
        profile = absorption_pattern(result.state, _grid_array(config))
        ser.save_pattern(profile, out / "pattern.csv", config.precision)
    print(emit_summary(doc["steps"],
                       columns=["step", "op", "envelope_norm", "power_kept",
                                "in_band_fraction", "residual"]))
    return 0


def _cmd_design(config: RunConfig) -> int:
    target = ser.target_from_csv(config.target_path)
    result = design_report(target, config.n, BandLimit(config.lam),
                           GaussianEnvelope(config.kappa_in))
    ser.save_design_bundle(result, _outdir(config), config.precision)
    print(emit_summary([{
        "residual": result.residual,
        "in_band_fraction": result.in_band_fraction,
        "max_gain": result.max_gain,
        "masked_points": result.masked_points,
        "warnings": len(result.warnings),
    }]))
    for text in result.warnings:
        print(f"warning: {text}")
    return 0


def _cmd_oracle_compare(config: RunConfig) -> int:
    state = ser.load_state(config.state_path)
    if config.grid is not None:
        lo, hi, pts = config.grid
        grid = GridSpec(lo, hi, pts)
    else:
        grid = default_grid(state)
    rows = compare(state, grid)
    doc = ser.comparison_to_dict(rows)
    ser.dump_json(doc, _outdir(config) / "comparison.json")
    print(emit_summary(doc["rows"]))
    return 0


_COMMANDS = {
    "widths": _cmd_widths,
    "pattern": _cmd_pattern,
    "rate": _cmd_rate,
    "expand": _cmd_expand,
    "chain": _cmd_chain,
    "design": _cmd_design,
    "oracle-compare": _cmd_oracle_compare,
}


def run(config: RunConfig) -> int:
    """Execute one command; map failures to exit codes and stderr JSON."""
    try:
        return _COMMANDS[config.command](config)
    except ComputationError as exc:
        _report_error(exc)
        return 2
    except (ValidationError, ValueError, OSError) as exc:
        _report_error(exc)
        return 1


def _report_error(exc: Exception) -> None:
    doc = {"error": type(exc).__name__, "message": str(exc)}
    print(json.dumps(doc, sort_keys=True), file=sys.stderr)


def main(argv: Optional[Sequence[str]] = None) -> None:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
    except PhotonSqlError as exc:
        _report_error(exc)
        sys.exit(1)
    sys.exit(run(config))


if __name__ == "__main__":
    main()
