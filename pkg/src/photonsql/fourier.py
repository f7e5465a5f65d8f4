"""4f Fourier-plane processing of envelope-level states.

A two-lens imaging chain exposes the transverse spectrum as a physical
plane: the field there is the momentum amplitude evaluated at
k = 2πx/(λf₁).  Three operations on that plane matter here:

* a quadratic phase plate, which acts exactly like propagation through a
  negative-diffraction medium and cancels accumulated quantum dispersion;
* an arbitrary transfer function H(k).  On a coincident-momentum state all
  N photons see the same k, so the envelope transforms as G → G·Hᴺ — the
  lever that makes arbitrary pattern engineering possible;
* demagnification by the second lens (m = f₂/f₁ < 1), which stretches the
  spectrum: G(k) → √m·G(m k).

Sign and scale conventions, fixed here once: ``QuadraticPhase(c)`` applied
to an n-photon state multiplies the *envelope* by exp(+i c k²) (the
per-photon plate carries c/n), and therefore cancels an accumulated
dispersion budget B = ∫b dt exactly when c = +n·B.

``chain`` composes steps and keeps an audit trail: envelope norm, power
kept by amplitude masks, band-limit fraction, and the running dispersion
ledger.  Everything is pure; the Fourier-plane field map itself is exposed
for diagnostics only, the processing operates on envelopes in k-space
throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .envelopes import (
    BandLimit,
    DualDeltaEnvelope,
    GaussianEnvelope,
    SampledEnvelope,
    SpectralEnvelope,
    band_limit_check,
    envelope_power,
    normalize,
)
from .errors import UnsupportedVariant, ZeroEnvelope
from .soliton import (
    DispersionLedger,
    ExpansionSchedule,
    apply_dispersion,
    coincident_limit,
    expand,
)
from .states import CoincidentState, SolitonState, StateSpec


@dataclass(frozen=True)
class LensPair:
    """Focal lengths of the 4f chain and the working wavelength."""

    f1: float
    f2: float
    lam: float

    def __post_init__(self):
        for name in ("f1", "f2", "lam"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive, got {v}")

    @property
    def magnification(self) -> float:
        return self.f2 / self.f1

    @property
    def plane_scale(self) -> float:
        """x per unit k in the Fourier plane: λ f₁ / (2π)."""
        return self.lam * self.f1 / (2.0 * math.pi)


@dataclass(frozen=True)
class QuadraticPhase:
    """Fourier-plane quadratic phase; envelope-level coefficient (see module doc)."""

    coefficient: float
    description: str = "quadratic phase"


@dataclass(frozen=True)
class SampledFilter:
    """Transfer function H on the uniform grid k_j = k_min + j*dk."""

    k_min: float
    dk: float
    values: np.ndarray = field(repr=False)
    description: str = ""

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex)
        if vals.ndim != 1 or vals.size < 2:
            raise ValueError("sampled transfer function needs a 1-D grid")
        if not np.all(np.isfinite(vals.view(float))):
            raise ValueError("transfer function values must be finite")
        if not (self.dk > 0 and math.isfinite(self.dk)):
            raise ValueError("dk must be positive")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def k_grid(self) -> np.ndarray:
        return self.k_min + self.dk * np.arange(self.values.size)

    def at(self, k) -> np.ndarray:
        grid = self.k_grid
        re = np.interp(k, grid, self.values.real, left=0.0, right=0.0)
        im = np.interp(k, grid, self.values.imag, left=0.0, right=0.0)
        return re + 1j * im


TransferFunction = Union[QuadraticPhase, SampledFilter]


def quadratic_phase(coefficient: float) -> QuadraticPhase:
    """Phase plate canceling a dispersion budget B when coefficient = +n·B."""
    return QuadraticPhase(coefficient=float(coefficient))


# ---------------------------------------------------------------------------
# Fourier-plane field map (diagnostics)

@dataclass(frozen=True)
class FourierPlaneProfile:
    """Field in the Fourier plane: sampled values, or discrete spots for
    line spectra."""

    x: Optional[np.ndarray] = None
    values: Optional[np.ndarray] = None
    spots: Optional[tuple[tuple[float, complex], ...]] = None


def fourier_plane_map(env: SpectralEnvelope, lens: LensPair) -> FourierPlaneProfile:
    """Spatial field after the first lens: E(x) = G(2πx/(λf₁)) / √scale.

    The 1/√scale Jacobian keeps ∫|E|² dx equal to the envelope power.
    Dual-delta envelopes map to two discrete spots at x = ±k₀·λf₁/(2π).
    """
    s = lens.plane_scale
    if isinstance(env, DualDeltaEnvelope):
        return FourierPlaneProfile(spots=((env.k0 * s, env.weights[0]),
                                          (-env.k0 * s, env.weights[1])))
    if isinstance(env, GaussianEnvelope):
        x = np.linspace(-10.0 * env.kappa * s, 10.0 * env.kappa * s, 4097)
        vals = env.amplitude * np.exp(-((x / s) ** 2) / (2.0 * env.kappa**2)) + 0j
        return FourierPlaneProfile(x=x, values=vals / math.sqrt(s))
    x = env.k_grid * s
    return FourierPlaneProfile(x=x, values=env.values / math.sqrt(s))


# ---------------------------------------------------------------------------
# modulation

def _sample_gaussian(env: GaussianEnvelope, half_width: float = 10.0,
                     points: int = 8193) -> SampledEnvelope:
    k = np.linspace(-half_width * env.kappa, half_width * env.kappa, points)
    vals = env.amplitude * np.exp(-(k**2) / (2.0 * env.kappa**2))
    return SampledEnvelope(k_min=float(k[0]), dk=float(k[1] - k[0]), values=vals + 0j)


def _resolve_modulation(env: SpectralEnvelope, h: SampledFilter
                        ) -> tuple[SampledEnvelope, np.ndarray]:
    """(envelope on its working grid, H values on that grid).

    Gaussian envelopes are sampled onto the filter's grid; sampled
    envelopes keep their grid exactly and the filter — a physical mask —
    is interpolated onto it (zero outside its tabulated range, hence the
    precondition that H covers the envelope support).
    """
    if isinstance(env, GaussianEnvelope):
        vals = env.amplitude * np.exp(-(h.k_grid**2) / (2.0 * env.kappa**2))
        return SampledEnvelope(h.k_min, h.dk, vals + 0j), np.asarray(h.values)
    if isinstance(env, SampledEnvelope):
        same = (env.values.size == h.values.size
                and math.isclose(env.dk, h.dk, rel_tol=1e-12, abs_tol=0.0)
                and math.isclose(env.k_min, h.k_min, rel_tol=0.0, abs_tol=1e-12 * env.dk))
        return env, (np.asarray(h.values) if same else h.at(env.k_grid))
    raise UnsupportedVariant(type(env).__name__)


def modulation_power_kept(state: CoincidentState, h: TransferFunction) -> float:
    """Fraction of envelope power surviving G → G·Hⁿ before renormalization."""
    if isinstance(h, QuadraticPhase):
        return 1.0
    env = state.envelope
    n = state.n
    if isinstance(env, DualDeltaEnvelope):
        gains = h.at(np.array([env.k0, -env.k0])) ** n
        w = np.array(env.weights)
        before = float(np.sum(np.abs(w) ** 2))
        return float(np.sum(np.abs(w * gains) ** 2)) / before
    env, hv = _resolve_modulation(env, h)
    before = envelope_power(env)
    mod = SampledEnvelope(env.k_min, env.dk, env.values * hv**n)
    return envelope_power(mod) / before


def apply_modulation(state: StateSpec, h: TransferFunction) -> StateSpec:
    """Fourier-plane modulation.

    Coincident-momentum states take the full Hⁿ rule on their envelope
    (renormalized afterwards; use ``modulation_power_kept`` for the
    audited loss).  Soliton states accept only quadratic phases, which act
    on the dispersion budget: coefficient c shifts ∫b dt by −c/n.
    """
    if isinstance(state, SolitonState):
        if isinstance(h, QuadraticPhase):
            return apply_dispersion(state, -h.coefficient / state.n)
        raise UnsupportedVariant(
            "general modulation needs coincident momenta; expand the soliton first")
    if not isinstance(state, CoincidentState):
        raise UnsupportedVariant(
            f"modulation applies to coincident-momentum states, not {type(state).__name__}")
    n = state.n
    env = state.envelope
    if isinstance(h, QuadraticPhase):
        c = h.coefficient
        if c == 0.0:
            return state
        if isinstance(env, DualDeltaEnvelope):
            ph = complex(np.exp(1j * c * env.k0**2))
            return CoincidentState(n, DualDeltaEnvelope(
                env.k0, (env.weights[0] * ph, env.weights[1] * ph)))
        if isinstance(env, GaussianEnvelope):
            env = _sample_gaussian(env)
        vals = env.values * np.exp(1j * c * env.k_grid**2)
        return CoincidentState(n, SampledEnvelope(env.k_min, env.dk, vals))
    if isinstance(env, DualDeltaEnvelope):
        gains = h.at(np.array([env.k0, -env.k0])) ** n
        new = DualDeltaEnvelope(env.k0, (env.weights[0] * complex(gains[0]),
                                         env.weights[1] * complex(gains[1])))
        return CoincidentState(n, normalize(new))
    env, hv = _resolve_modulation(env, h)
    vals = env.values * hv**n
    return CoincidentState(n, normalize(SampledEnvelope(env.k_min, env.dk, vals)))


def demagnify(env: SpectralEnvelope, lens: LensPair) -> SpectralEnvelope:
    """Second-lens demagnification: G(k) → √m·G(m k) with m = f₂/f₁.

    Norm preserving; spectral bandwidth scales by 1/m, so a small f₂
    widens the envelope toward the band limit.
    """
    return demagnify_by(env, lens.magnification)


def demagnify_by(env: SpectralEnvelope, m: float) -> SpectralEnvelope:
    if not (m > 0 and math.isfinite(m)):
        raise ValueError(f"magnification must be positive, got {m}")
    if m == 1.0:
        return env
    if isinstance(env, GaussianEnvelope):
        return GaussianEnvelope(kappa=env.kappa / m)
    if isinstance(env, DualDeltaEnvelope):
        return DualDeltaEnvelope(k0=env.k0 / m, weights=env.weights)
    # grid maps exactly: value at k/m is √m times the old value at k
    return SampledEnvelope(k_min=env.k_min / m, dk=env.dk / m,
                           values=env.values * math.sqrt(m))


# ---------------------------------------------------------------------------
# chains

@dataclass(frozen=True)
class AuditEntry:
    step: int
    op: str
    envelope_norm: Optional[float]
    power_kept: Optional[float]
    in_band_fraction: Optional[float]
    residual: float
    info: Optional[dict] = None


@dataclass(frozen=True)
class ChainResult:
    state: StateSpec
    ledger: DispersionLedger
    audit: tuple[AuditEntry, ...]


CHAIN_OPS = ("map", "modulate", "demagnify", "compensate", "expand", "to_coincident")


def chain(state: StateSpec, steps: Sequence[Mapping],
          band_limit: Optional[BandLimit] = None,
          ledger: Optional[DispersionLedger] = None) -> ChainResult:
    """Apply processing steps in order, auditing norms and dispersion.

    Each step is a mapping {"op": ..., "params": {...}}; see CHAIN_OPS.
    ``expand`` and ``to_coincident`` let one chain express the whole
    expansion-compensation-reshaping pipeline.  Step errors propagate with
    the step index attached.
    """
    if ledger is None:
        start_b = state.b_integral if isinstance(state, SolitonState) else 0.0
        ledger = DispersionLedger(accumulated=start_b)
    audit: list[AuditEntry] = []
    current = state
    for index, step in enumerate(steps):
        op = step.get("op")
        params = dict(step.get("params", {}))
        if op not in CHAIN_OPS:
            raise UnsupportedVariant(f"step {index}: unknown chain op {op!r}")
        try:
            current, ledger, extra = _apply_step(current, op, params, ledger)
        except Exception as exc:
            raise type(exc)(f"step {index} ({op}): {exc}") from exc
        audit.append(_audit_entry(index, op, current, ledger, band_limit, extra))
    return ChainResult(state=current, ledger=ledger, audit=tuple(audit))


def _apply_step(state, op, params, ledger):
    extra: dict = {}
    if op == "map":
        lens = _lens_from(params)
        profile = fourier_plane_map(_envelope_of(state), lens)
        if profile.spots is not None:
            extra["spots"] = [[float(pos), abs(w)] for pos, w in profile.spots]
        else:
            dens = np.abs(profile.values) ** 2
            mass = np.trapezoid(dens, profile.x)
            mean = np.trapezoid(profile.x * dens, profile.x) / mass
            var = np.trapezoid((profile.x - mean) ** 2 * dens, profile.x) / mass
            extra["plane_rms_width"] = float(math.sqrt(var))
        return state, ledger, extra
    if op == "modulate":
        h = params["transfer"]
        if isinstance(state, CoincidentState):
            extra["power_kept"] = modulation_power_kept(state, h)
        new = apply_modulation(state, h)
        if isinstance(h, QuadraticPhase):
            ledger = ledger.compensate(-h.coefficient / state.n)
        return new, ledger, extra
    if op == "compensate":
        if params.get("full"):
            if not isinstance(state, SolitonState):
                raise UnsupportedVariant(
                    "full compensation reads the dispersion budget off a soliton state")
            spent = state.b_integral
            new = apply_dispersion(state, -spent)  # lands on exactly zero
            return new, ledger.compensate(-spent), extra
        coeff = float(params["coefficient"])
        new = apply_modulation(state, QuadraticPhase(coeff))
        ledger = ledger.compensate(-coeff / state.n)
        return new, ledger, extra
    if op == "demagnify":
        if not isinstance(state, CoincidentState):
            raise UnsupportedVariant("demagnification acts on coincident-momentum states")
        m = float(params["m"]) if "m" in params else _lens_from(params).magnification
        return CoincidentState(state.n, demagnify_by(state.envelope, m)), ledger, extra
    if op == "expand":
        if not isinstance(state, SolitonState):
            raise UnsupportedVariant("expand acts on soliton states")
        schedule = params["schedule"]
        if not isinstance(schedule, ExpansionSchedule):
            schedule = ExpansionSchedule(**schedule)
        states = expand(state, schedule)
        final = states[-1]
        ledger = ledger.accumulate(final.b_integral - state.b_integral)
        return final, ledger, extra
    if op == "to_coincident":
        if not isinstance(state, SolitonState):
            raise UnsupportedVariant("to_coincident acts on soliton states")
        return coincident_limit(state, params.get("max_abs_ratio")), ledger, extra
    raise UnsupportedVariant(op)


def _lens_from(params) -> LensPair:
    return LensPair(f1=float(params.get("f1", 1.0)),
                    f2=float(params.get("f2", params.get("f1", 1.0))),
                    lam=float(params.get("lam", params.get("lambda", 1.0))))


def _envelope_of(state) -> SpectralEnvelope:
    env = getattr(state, "envelope", None)
    if env is None:
        raise UnsupportedVariant(f"{type(state).__name__} carries no spectral envelope")
    return env


def _audit_entry(index, op, state, ledger, band_limit, extra) -> AuditEntry:
    env = getattr(state, "envelope", None)
    norm = envelope_power(env) if env is not None else None
    frac = None
    if band_limit is not None and env is not None:
        frac = band_limit_check(env, band_limit).in_band_fraction
    power_kept = extra.pop("power_kept", None)
    return AuditEntry(step=index, op=op, envelope_norm=norm, power_kept=power_kept,
                      in_band_fraction=frac, residual=ledger.residual,
                      info=extra or None)
