"""Adiabatic Kerr-soliton expansion toward the coincident-momentum state.

A beam of N initially uncorrelated photons trapped by a negative Kerr
nonlinearity forms a bound state whose center-of-mass spectrum is close
to a Gaussian G(k) of width κ = √(N/(4q))·|c/b| (q of order unity).
Reducing |c/b| adiabatically — e.g. widening the waveguide — loosens the
relative-coordinate binding while leaving the center-of-mass envelope
untouched, so the state drifts toward the ideal coincident-momentum
superposition that saturates the ultimate displacement limit.

The one surviving center-of-mass effect is quantum dispersion: the
envelope integrand picks up exp(-i N k² ∫b dt).  ``apply_dispersion``
accumulates that phase budget, ``compensate_dispersion`` spends it (a
negative-diffraction segment, or equivalently a quadratic Fourier-plane
phase), and widths return to their dispersion-free values exactly when
the running total hits zero.

Expansion here is exact parameter transport: the adiabatic limit is
assumed rather than checked, and the schedule's step structure is kept
only so a dynamical solver could reuse it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .envelopes import (
    DualDeltaEnvelope,
    GaussianEnvelope,
    SampledEnvelope,
    SpectralEnvelope,
    rms_kappa,
)
from .errors import ResidualDispersion, ScheduleMismatch, UnsupportedVariant
from .observables import marginal_width, uql_width
from .states import CoincidentState, SolitonParams, SolitonState


@dataclass(frozen=True)
class ExpansionSchedule:
    """Piecewise expansion plan from ratio_initial to ratio_final.

    ``b_profile`` holds one (duration, diffraction-coefficient) pair per
    step; each step adds duration·b to the dispersion budget.  |ratio|
    decreases geometrically along the steps, which keeps relative changes
    per step uniform across the decades an expansion typically spans.
    """

    ratio_initial: float
    ratio_final: float
    steps: int
    b_profile: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if not (self.ratio_initial < 0 and self.ratio_final < 0):
            raise ValueError("both coupling ratios must be negative")
        if not abs(self.ratio_final) < abs(self.ratio_initial):
            raise ValueError("|ratio_final| must be smaller than |ratio_initial|")
        if self.steps < 1:
            raise ValueError("schedule needs at least one step")
        profile = tuple((float(dt), float(b)) for dt, b in self.b_profile)
        if len(profile) != self.steps:
            raise ValueError(f"b_profile must carry one (dt, b) pair per step "
                             f"({self.steps}), got {len(profile)}")
        if any(dt < 0 for dt, _ in profile):
            raise ValueError("durations must be nonnegative")
        object.__setattr__(self, "b_profile", profile)

    def ratios(self) -> np.ndarray:
        """|ratio| geometric from initial to final, one value per step."""
        r0, r1 = abs(self.ratio_initial), abs(self.ratio_final)
        factor = (r1 / r0) ** (1.0 / self.steps)
        return -r0 * factor ** np.arange(1, self.steps + 1)


@dataclass(frozen=True)
class DispersionLedger:
    """Split bookkeeping of dispersion accumulated vs compensated."""

    accumulated: float = 0.0
    compensated: float = 0.0

    @property
    def residual(self) -> float:
        return self.accumulated + self.compensated

    def accumulate(self, amount: float) -> "DispersionLedger":
        return DispersionLedger(self.accumulated + amount, self.compensated)

    def compensate(self, amount: float) -> "DispersionLedger":
        return DispersionLedger(self.accumulated, self.compensated + amount)


def soliton_initial_envelope(n: int, ratio: float, q: float = 1.0) -> GaussianEnvelope:
    """Gaussian envelope of the freshly formed bound state.

    κ = √(n/(4q))·|c/b|; for fixed q this scales like √n·|ratio|, i.e.
    inversely with the classical beam width of the input photons.
    """
    if not ratio < 0:
        raise ValueError("ratio c/b must be negative")
    if not q > 0:
        raise ValueError("q must be positive")
    return GaussianEnvelope(kappa=math.sqrt(n / (4.0 * q)) * abs(ratio))


def make_soliton(n: int, ratio: float, q: float = 1.0, b_integral: float = 0.0,
                 envelope: SpectralEnvelope | None = None) -> SolitonState:
    """Bound state of n photons; envelope defaults to the initial Gaussian fit."""
    if envelope is None:
        envelope = soliton_initial_envelope(n, ratio, q)
    return SolitonState(n=n, envelope=envelope,
                        params=SolitonParams(ratio=ratio, b_integral=b_integral, q=q))


def expand(state: SolitonState, schedule: ExpansionSchedule) -> list[SolitonState]:
    """Transport the soliton along the schedule, one state per step.

    The spectral envelope object is reused untouched (the center of mass
    is unaffected by the expansion, dispersion phase aside); only the
    coupling ratio and the dispersion budget evolve.
    """
    if schedule.ratio_initial != state.ratio:
        raise ScheduleMismatch(
            f"schedule starts at ratio {schedule.ratio_initial}, state is at {state.ratio}")
    out = []
    b_total = state.b_integral
    for ratio, (dt, b) in zip(schedule.ratios(), schedule.b_profile):
        b_total += dt * b
        out.append(SolitonState(state.n, state.envelope,
                                SolitonParams(ratio=float(ratio), b_integral=b_total,
                                              q=state.params.q)))
    return out


def apply_dispersion(state: SolitonState, delta_b_integral: float) -> SolitonState:
    """Add ∫b dt to the dispersion budget (propagation through diffraction)."""
    p = state.params
    return SolitonState(state.n, state.envelope,
                        SolitonParams(ratio=p.ratio,
                                      b_integral=p.b_integral + delta_b_integral,
                                      q=p.q))


def compensate_dispersion(state: SolitonState, b_prime_integral: float) -> SolitonState:
    """Spend compensation ∫b' dt (negative-diffraction segment or 4f phase).

    Mechanically identical to ``apply_dispersion`` — the point of the
    separate name is intent: full compensation means the two integrals
    cancel, and then every width matches the dispersion-free state
    exactly.
    """
    return apply_dispersion(state, b_prime_integral)


def uql_convergence_metric(state: SolitonState) -> float:
    """How close the soliton's displacement width sits to the ultimate limit.

    Defined as uql_width(n, κ_G) / marginal_width(state) with κ_G read
    from the stored envelope, so the metric stays meaningful after
    Fourier-plane reshaping.  By the uncertainty relation this equals
    1/(2 σ_k σ_y) ≤ 1, with equality exactly for Gaussian envelopes and
    zero residual dispersion; any chirp or envelope distortion pulls it
    below 1.  Requires a fully compensated dispersion budget.
    """
    if state.b_integral != 0.0:
        raise ResidualDispersion(
            f"residual dispersion {state.b_integral!r}; compensate before comparing")
    if state.n == 1:
        return 1.0
    kappa = rms_kappa(state.envelope)
    metric = uql_width(state.n, kappa) / marginal_width(state)
    return min(metric, 1.0)  # guard rounding above the exact bound


def coincident_limit(state: SolitonState, max_abs_ratio: float | None = None) -> CoincidentState:
    """The vanishing-coupling limit of the soliton: a coincident-momentum state.

    The limit keeps the center-of-mass envelope; residual dispersion is
    folded into the envelope as the spectral chirp exp(-i n B k²).  The
    conversion is an approximation at any finite |ratio| (the relative
    momenta retain a Lorentzian spread ∝ |ratio|): pass ``max_abs_ratio``
    to assert how much of that approximation you accept.
    """
    if max_abs_ratio is not None and abs(state.ratio) > max_abs_ratio:
        raise UnsupportedVariant(
            f"|ratio| = {abs(state.ratio)} exceeds the accepted limit {max_abs_ratio}")
    env = state.envelope
    B = state.b_integral
    if B == 0.0:
        return CoincidentState(state.n, env)
    if isinstance(env, DualDeltaEnvelope):
        phase = np.exp(-1j * state.n * B * env.k0**2)
        return CoincidentState(state.n, DualDeltaEnvelope(
            env.k0, (env.weights[0] * phase, env.weights[1] * phase)))
    if isinstance(env, GaussianEnvelope):
        k = np.linspace(-10.0 * env.kappa, 10.0 * env.kappa, 8193)
        values = env.amplitude * np.exp(-(k**2) / (2.0 * env.kappa**2))
        env = SampledEnvelope(k_min=float(k[0]), dk=float(k[1] - k[0]), values=values + 0j)
    chirped = env.values * np.exp(-1j * state.n * B * env.k_grid**2)
    return CoincidentState(state.n, SampledEnvelope(env.k_min, env.dk, chirped))
