"""JSON/CSV interchange: states, schedules, chains, patterns, reports.

Formats are deliberately boring: complex numbers are [re, im] pairs,
grids are (min, step, values), CSV floats use shortest-round-trip
formatting at a configurable significant-digit count so identical runs
produce identical bytes.  Every JSON document this package emits or
accepts validates against a schema shipped under ``photonsql/schemas``.
"""

from __future__ import annotations

import csv
import io
import json
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional, Sequence

import jsonschema
import numpy as np

from .design import DesignResult, TargetPattern
from .envelopes import (
    DualDeltaEnvelope,
    GaussianEnvelope,
    SampledEnvelope,
    SpectralEnvelope,
)
from .errors import SchemaError
from .fourier import ChainResult, QuadraticPhase, SampledFilter, TransferFunction
from .observables import PatternProfile, RateReport, WidthReport
from .oracle import ComparisonRow
from .soliton import ExpansionSchedule
from .states import (
    CoincidentState,
    GridState,
    ProductState,
    SolitonParams,
    SolitonState,
    StateSpec,
)

DEFAULT_PRECISION = 17


def fmt(x: float, precision: int = DEFAULT_PRECISION) -> str:
    return format(float(x), f".{precision}g")


# ---------------------------------------------------------------------------
# schemas

def load_schema(name: str) -> dict:
    text = resources.files(__package__).joinpath("schemas", name).read_text()
    return json.loads(text)


def validate_document(doc, schema_name: str) -> None:
    try:
        jsonschema.validate(doc, load_schema(schema_name))
    except jsonschema.ValidationError as exc:
        raise SchemaError(f"{schema_name}: {exc.message}") from exc


def dump_json(doc, path: Path | str) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# complex helpers

def _c_pair(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _c_from(pair) -> complex:
    return complex(float(pair[0]), float(pair[1]))


def _c_array_out(values: np.ndarray) -> list:
    stacked = np.stack([np.real(values), np.imag(values)], axis=-1)
    return stacked.tolist()


def _c_array_in(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.shape[-1] != 2:
        raise SchemaError("complex arrays are nested [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


# ---------------------------------------------------------------------------
# envelopes and states

def envelope_to_dict(env: SpectralEnvelope) -> dict:
    if isinstance(env, GaussianEnvelope):
        return {"type": "gaussian", "kappa": env.kappa}
    if isinstance(env, DualDeltaEnvelope):
        return {"type": "dual_delta", "k0": env.k0,
                "weights": [_c_pair(env.weights[0]), _c_pair(env.weights[1])]}
    return {"type": "sampled", "k_min": env.k_min, "dk": env.dk,
            "values": _c_array_out(env.values)}


def envelope_from_dict(doc: Mapping) -> SpectralEnvelope:
    kind = doc["type"]
    if kind == "gaussian":
        return GaussianEnvelope(kappa=float(doc["kappa"]))
    if kind == "dual_delta":
        weights = doc.get("weights")
        if weights is None:
            return DualDeltaEnvelope(k0=float(doc["k0"]))
        return DualDeltaEnvelope(k0=float(doc["k0"]),
                                 weights=(_c_from(weights[0]), _c_from(weights[1])))
    if kind == "sampled":
        return SampledEnvelope(k_min=float(doc["k_min"]), dk=float(doc["dk"]),
                               values=_c_array_in(doc["values"]))
    raise SchemaError(f"unknown envelope type {kind!r}")


def state_to_dict(state: StateSpec) -> dict:
    if isinstance(state, ProductState):
        return {"variant": "product", "n": state.n,
                "envelope": envelope_to_dict(state.envelope)}
    if isinstance(state, CoincidentState):
        return {"variant": "coincident", "n": state.n,
                "envelope": envelope_to_dict(state.envelope)}
    if isinstance(state, SolitonState):
        return {"variant": "soliton", "n": state.n,
                "envelope": envelope_to_dict(state.envelope),
                "soliton": {"ratio": state.params.ratio,
                            "b_integral": state.params.b_integral,
                            "q": state.params.q}}
    if isinstance(state, GridState):
        return {"variant": "grid", "n": state.n,
                "grid": {"x_min": state.x_min, "dx": state.dx,
                         "amplitudes": _c_array_out(state.amplitudes)}}
    raise SchemaError(f"unknown state variant {type(state).__name__}")


def state_from_dict(doc: Mapping) -> StateSpec:
    validate_document(doc, "state.schema.json")
    variant = doc["variant"]
    n = int(doc["n"])
    if variant == "product":
        return ProductState(n, envelope_from_dict(doc["envelope"]))
    if variant == "coincident":
        return CoincidentState(n, envelope_from_dict(doc["envelope"]))
    if variant == "soliton":
        sol = doc["soliton"]
        return SolitonState(n, envelope_from_dict(doc["envelope"]),
                            SolitonParams(ratio=float(sol["ratio"]),
                                          b_integral=float(sol.get("b_integral", 0.0)),
                                          q=float(sol.get("q", 1.0))))
    if variant == "grid":
        grid = doc["grid"]
        return GridState(n=n, x_min=float(grid["x_min"]), dx=float(grid["dx"]),
                         amplitudes=_c_array_in(grid["amplitudes"]))
    raise SchemaError(f"unknown state variant {variant!r}")


def load_state(path: Path | str) -> StateSpec:
    return state_from_dict(_load_json(path))


def save_state(state: StateSpec, path: Path | str) -> None:
    doc = state_to_dict(state)
    validate_document(doc, "state.schema.json")
    dump_json(doc, path)


def _load_json(path: Path | str):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc


# ---------------------------------------------------------------------------
# schedules and chains

def schedule_from_dict(doc: Mapping) -> ExpansionSchedule:
    validate_document(doc, "schedule.schema.json")
    return ExpansionSchedule(
        ratio_initial=float(doc["ratio_initial"]),
        ratio_final=float(doc["ratio_final"]),
        steps=int(doc["steps"]),
        b_profile=tuple((float(dt), float(b)) for dt, b in doc["b_profile"]),
    )


def load_schedule(path: Path | str) -> ExpansionSchedule:
    return schedule_from_dict(_load_json(path))


def transfer_to_csv_text(h: SampledFilter, precision: int = DEFAULT_PRECISION) -> str:
    lines = ["k,re,im"]
    for k, v in zip(h.k_grid, h.values):
        lines.append(f"{fmt(k, precision)},{fmt(v.real, precision)},{fmt(v.imag, precision)}")
    return "\n".join(lines) + "\n"


def transfer_from_csv(path: Path | str, description: str = "") -> SampledFilter:
    rows = _read_csv(path, expected_header=("k", "re", "im"))
    k = np.array([r[0] for r in rows])
    vals = np.array([complex(r[1], r[2]) for r in rows])
    if k.size < 2:
        raise SchemaError("transfer CSV needs at least 2 rows")
    dks = np.diff(k)
    if dks[0] <= 0 or np.abs(dks - dks[0]).max() > 1e-9 * abs(dks[0]):
        raise SchemaError("transfer CSV k column must be uniform and increasing")
    return SampledFilter(k_min=float(k[0]), dk=float(dks[0]), values=vals,
                         description=description or str(path))


def chain_steps_from_doc(doc, base_dir: Optional[Path] = None) -> list[dict]:
    """Chain JSON → step mappings with transfer functions instantiated."""
    validate_document(doc, "chain.schema.json")
    steps = []
    for raw in doc:
        op = raw["op"]
        params = dict(raw.get("params", {}))
        if op == "modulate":
            params["transfer"] = _transfer_from_doc(params["transfer"], base_dir)
        steps.append({"op": op, "params": params})
    return steps


def load_chain(path: Path | str) -> list[dict]:
    path = Path(path)
    return chain_steps_from_doc(_load_json(path), base_dir=path.parent)


def _transfer_from_doc(doc: Mapping, base_dir: Optional[Path]) -> TransferFunction:
    kind = doc["type"]
    if kind == "quadratic":
        return QuadraticPhase(coefficient=float(doc["coefficient"]))
    if kind == "sampled":
        return SampledFilter(k_min=float(doc["k_min"]), dk=float(doc["dk"]),
                             values=_c_array_in(doc["values"]),
                             description=doc.get("description", ""))
    if kind == "csv":
        path = Path(doc["path"])
        if not path.is_absolute() and base_dir is not None:
            path = base_dir / path
        return transfer_from_csv(path)
    raise SchemaError(f"unknown transfer type {kind!r}")


# ---------------------------------------------------------------------------
# patterns and targets

def pattern_to_csv_text(profile: PatternProfile, precision: int = DEFAULT_PRECISION) -> str:
    lines = ["x,intensity"]
    for x, v in zip(profile.x_grid, profile.intensity):
        lines.append(f"{fmt(x, precision)},{fmt(v, precision)}")
    return "\n".join(lines) + "\n"


def save_pattern(profile: PatternProfile, path: Path | str,
                 precision: int = DEFAULT_PRECISION) -> None:
    Path(path).write_text(pattern_to_csv_text(profile, precision))


def target_from_csv(path: Path | str) -> TargetPattern:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise SchemaError(f"{path}: empty target CSV")
        header = [h.strip().lower() for h in header]
        if header[:2] != ["x", "intensity"]:
            raise SchemaError(f"{path}: target CSV header must be x,intensity[,phase]")
        has_phase = len(header) >= 3 and header[2] == "phase"
        xs, inten, phase = [], [], []
        for row in reader:
            if not row:
                continue
            xs.append(float(row[0]))
            inten.append(float(row[1]))
            if has_phase:
                phase.append(float(row[2]))
    return TargetPattern(x_grid=np.array(xs), intensity=np.array(inten),
                         phase=np.array(phase) if has_phase else None)


def _read_csv(path: Path | str, expected_header: tuple[str, ...]) -> list[tuple[float, ...]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip().lower() for h in header) != expected_header:
            raise SchemaError(f"{path}: expected header {','.join(expected_header)}")
        return [tuple(float(v) for v in row) for row in reader if row]


# ---------------------------------------------------------------------------
# reports

def width_report_to_dict(report: WidthReport) -> dict:
    doc = {"marginal": report.marginal, "conditional": report.conditional,
           "sql_ref": report.sql_ref, "uql_ref": report.uql_ref,
           "separable": report.separable}
    validate_document(doc, "width_report.schema.json")
    return doc


def rate_report_to_dict(report: RateReport) -> dict:
    doc = {"total_rate": report.total_rate, "reference_rate": report.reference_rate,
           "ratio": report.ratio}
    validate_document(doc, "rate_report.schema.json")
    return doc


def audit_to_dict(result: ChainResult) -> dict:
    doc = {
        "ledger": {"accumulated": result.ledger.accumulated,
                   "compensated": result.ledger.compensated,
                   "residual": result.ledger.residual},
        "steps": [
            {"step": e.step, "op": e.op, "envelope_norm": e.envelope_norm,
             "power_kept": e.power_kept, "in_band_fraction": e.in_band_fraction,
             "residual": e.residual, "info": e.info}
            for e in result.audit
        ],
    }
    validate_document(doc, "audit.schema.json")
    return doc


def design_report_to_dict(result: DesignResult) -> dict:
    doc = {"residual": result.residual, "in_band_fraction": result.in_band_fraction,
           "max_gain": result.max_gain, "masked_points": result.masked_points,
           "warnings": list(result.warnings)}
    validate_document(doc, "design_report.schema.json")
    return doc


def comparison_to_dict(rows: Sequence[ComparisonRow]) -> dict:
    doc = {"rows": [
        {"observable": r.observable, "analytic": r.analytic, "oracle": r.oracle,
         "abs_err": r.abs_err, "rel_err": r.rel_err, "pass": r.passed}
        for r in rows
    ]}
    validate_document(doc, "comparison.schema.json")
    return doc


def save_design_bundle(result: DesignResult, outdir: Path | str,
                       precision: int = DEFAULT_PRECISION) -> None:
    """envelope.csv, transfer.csv, achieved_pattern.csv, report.json."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    env = result.envelope
    lines = ["k,re,im"]
    for k, v in zip(env.k_grid, env.values):
        lines.append(f"{fmt(k, precision)},{fmt(v.real, precision)},{fmt(v.imag, precision)}")
    (outdir / "envelope.csv").write_text("\n".join(lines) + "\n")
    (outdir / "transfer.csv").write_text(transfer_to_csv_text(result.transfer, precision))
    save_pattern(result.achieved, outdir / "achieved_pattern.csv", precision)
    dump_json(design_report_to_dict(result), outdir / "report.json")


def expand_csv_text(rows: Sequence[Mapping], precision: int = DEFAULT_PRECISION) -> str:
    """Per-step expansion table; see the expand CLI command."""
    header = ["step", "ratio", "b_integral", "marginal_width", "conditional_width",
              "delta_xi_rms", "uql_metric"]
    out = io.StringIO()
    out.write(",".join(header) + "\n")
    for row in rows:
        cells = [str(row["step"])]
        for key in header[1:]:
            cells.append(fmt(row[key], precision))
        out.write(",".join(cells) + "\n")
    return out.getvalue()
