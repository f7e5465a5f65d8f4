"""Displacement and absorption observables.

Two widths of the same state answer two different experimental questions:

* ``marginal_width``    — RMS spread of the mean photon position X with all
  relative coordinates integrated out: the beam-displacement uncertainty.
* ``conditional_width`` — RMS spread of X on the slice where all photons
  coincide (ξ = 0): the N-photon absorption spot size, i.e. the fringe
  scale available to multiphoton lithography.

Reference values: independent photons with a Gaussian envelope reach the
standard quantum limit 1/(√(2N)·κ); coincident-momentum states reach the
ultimate limit 1/(√2·N·κ), a further factor √N below.

Absorption quantities come from the diagonal slice |ψ(x,…,x)|²: its shape
(``absorption_pattern``) and its integral (``total_absorption_rate``).
Intensity-like outputs are reported under a unit-integral convention, so
only ratios of rates are physically meaningful.  Enlarging every relative
position spread by γ while keeping the center of mass fixed
(``scale_relative``) lowers the total rate by exactly γ^(N-1).

Second moments are always taken about the numerically estimated mean, so
all widths are translation invariant.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .envelopes import (
    DualDeltaEnvelope,
    GaussianEnvelope,
    SampledEnvelope,
    envelope_power,
    rms_kappa,
    transform_moments,
)
from .errors import (
    DimensionMismatch,
    InfiniteMoment,
    UnsupportedVariant,
    ZeroSlice,
)
from .states import (
    CoincidentState,
    GridState,
    ProductState,
    SolitonParams,
    SolitonState,
    StateSpec,
    slice_amplitude,
)

SLICE_POWER_FLOOR = 1e-30
SEPARABLE_TOL = 1e-6
PATTERN_NORM_TOL = 1e-6

DEFAULT_MC_SEED = 42
DEFAULT_MC_SAMPLES = 1_000_000


# ---------------------------------------------------------------------------
# report types

@dataclass(frozen=True)
class WidthReport:
    """Marginal and conditional widths with quantum-limit reference values."""

    marginal: float
    conditional: float
    sql_ref: Optional[float]
    uql_ref: Optional[float]
    separable: bool


@dataclass(frozen=True)
class PatternProfile:
    """Multiphoton absorption pattern on a uniform grid, unit trapezoid integral."""

    x_grid: np.ndarray = field(repr=False)
    intensity: np.ndarray = field(repr=False)
    normalization: str = "unit-integral"

    def __post_init__(self):
        x = np.asarray(self.x_grid, dtype=float)
        inten = np.asarray(self.intensity, dtype=float)
        if x.ndim != 1 or x.size < 2 or x.shape != inten.shape:
            raise ValueError("pattern needs matching 1-D grids of at least 2 points")
        steps = np.diff(x)
        if steps[0] <= 0 or np.abs(steps - steps[0]).max() > 1e-9 * abs(steps[0]):
            raise ValueError("pattern grid must be uniform and increasing")
        if inten.min() < -1e-12 * max(inten.max(), 1.0):
            raise ValueError("pattern intensity must be nonnegative")
        inten = np.clip(inten, 0.0, None)
        total = float(np.trapezoid(inten, x))
        if abs(total - 1.0) > PATTERN_NORM_TOL:
            raise ValueError(f"pattern integral {total!r} is not 1")
        x.setflags(write=False)
        inten.setflags(write=False)
        object.__setattr__(self, "x_grid", x)
        object.__setattr__(self, "intensity", inten)

    @property
    def dx(self) -> float:
        return float(self.x_grid[1] - self.x_grid[0])


@dataclass(frozen=True)
class RateReport:
    """Total multiphoton absorption rate, optionally against a reference."""

    total_rate: float
    reference_rate: Optional[float] = None
    ratio: Optional[float] = None


# ---------------------------------------------------------------------------
# quantum-limit reference widths

def sql_width(n: int, kappa: float) -> float:
    """Standard quantum limit 1/(√(2n)·κ): N independent Gaussian photons."""
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    return 1.0 / (math.sqrt(2.0 * n) * kappa)


def uql_width(n: int, kappa: float) -> float:
    """Ultimate quantum limit 1/(√2·n·κ): coincident-momentum Gaussian state."""
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    return 1.0 / (math.sqrt(2.0) * n * kappa)


# ---------------------------------------------------------------------------
# grid-state moment helpers

def _grid_axis_weights(points: int) -> np.ndarray:
    w = np.ones(points)
    w[0] = w[-1] = 0.5
    return w


def _grid_probability(state: GridState) -> np.ndarray:
    """Trapezoid-weighted probability mass on the lattice (sums to ≈ 1)."""
    dens = np.abs(state.amplitudes) ** 2
    w = _grid_axis_weights(state.points)
    for axis in range(state.n):
        shape = [1] * state.n
        shape[axis] = state.points
        dens = dens * w.reshape(shape)
    return dens * state.dx**state.n


def _grid_coordinate_moments(state: GridState) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(⟨x_i⟩, ⟨x_i x_j⟩ matrix, total mass) under the lattice density."""
    prob = _grid_probability(state)
    x = state.x_grid
    n = state.n
    mass = float(prob.sum())
    first = np.empty(n)
    second = np.empty((n, n))
    for i in range(n):
        shape = [1] * n
        shape[i] = state.points
        first[i] = float((prob * x.reshape(shape)).sum()) / mass
    for i in range(n):
        for j in range(i, n):
            si = [1] * n
            si[i] = state.points
            sj = [1] * n
            sj[j] = state.points
            if i == j:
                val = float((prob * (x**2).reshape(si)).sum()) / mass
            else:
                val = float((prob * x.reshape(si) * x.reshape(sj)).sum()) / mass
            second[i, j] = second[j, i] = val
    return first, second, mass


# ---------------------------------------------------------------------------
# slice machinery (conditional width, pattern, rate share it)

def _slice_scale(state: StateSpec) -> tuple[float, float]:
    """(center, scale) describing where the coincident slice lives."""
    if isinstance(state, ProductState):
        mean, var = transform_moments(state.envelope)
        return mean, math.sqrt(var)
    if isinstance(state, CoincidentState):
        mean, var = transform_moments(state.envelope)
        return mean / state.n, math.sqrt(var) / state.n
    if isinstance(state, SolitonState):
        mean, var = transform_moments(state.envelope, quad_coeff=state.n * state.b_integral)
        return mean / state.n, math.sqrt(var) / state.n
    raise UnsupportedVariant(type(state).__name__)


def _auto_slice_grid(state: StateSpec, points: int = 4097) -> np.ndarray:
    """X-grid wide enough that the slice density has negligible edge mass."""
    center, scale = _slice_scale(state)
    if not (scale > 0 and math.isfinite(scale)):
        raise InfiniteMoment("cannot bound the coincident slice support")
    span = 14.0 * scale
    for _ in range(5):
        grid = np.linspace(center - span, center + span, points)
        dens = np.abs(slice_amplitude(state, grid)) ** 2
        peak = dens.max()
        if peak <= 0 or max(dens[0], dens[-1]) <= 1e-13 * peak:
            return grid
        span *= 2.0
    return grid


def _moments_1d(x: np.ndarray, dens: np.ndarray) -> tuple[float, float, float]:
    """(mass, mean, central variance) of a sampled 1-D density, trapezoid rule."""
    mass = float(np.trapezoid(dens, x))
    if mass < SLICE_POWER_FLOOR:
        raise ZeroSlice(f"slice power {mass:.3e} below {SLICE_POWER_FLOOR:.0e}")
    mean = float(np.trapezoid(x * dens, x)) / mass
    var = float(np.trapezoid((x - mean) ** 2 * dens, x)) / mass
    return mass, mean, var


def _grid_diagonal(state: GridState) -> np.ndarray:
    spec = {1: "i->i", 2: "ii->i", 3: "iii->i"}[state.n]
    return np.einsum(spec, state.amplitudes)


# ---------------------------------------------------------------------------
# widths

def marginal_width(state: StateSpec) -> float:
    """Beam-displacement uncertainty: RMS of X = (1/N)Σx_i over the full state."""
    n = state.n
    if isinstance(state, ProductState):
        _, var = transform_moments(state.envelope)  # per-photon variance
        return math.sqrt(var / n)
    if isinstance(state, CoincidentState):
        _, var = transform_moments(state.envelope)  # variance of y = nX
        return math.sqrt(var) / n
    if isinstance(state, SolitonState):
        # separable state: the X-density is the chirped envelope transform alone
        _, var = transform_moments(state.envelope, quad_coeff=n * state.b_integral)
        return math.sqrt(var) / n
    if isinstance(state, GridState):
        first, second, _ = _grid_coordinate_moments(state)
        mean_x = first.mean()
        mean_x2 = second.mean()  # ⟨X²⟩ = (1/n²)ΣΣ⟨x_i x_j⟩
        return math.sqrt(max(mean_x2 - mean_x**2, 0.0))
    raise UnsupportedVariant(type(state).__name__)


def conditional_width(state: StateSpec) -> float:
    """Absorption spot size: RMS of X under the normalized slice |ψ(X,…,X)|²."""
    if isinstance(state, GridState):
        diag = np.abs(_grid_diagonal(state)) ** 2
        _, _, var = _moments_1d(state.x_grid, diag)
        return math.sqrt(var)
    grid = _auto_slice_grid(state)
    dens = np.abs(slice_amplitude(state, grid)) ** 2
    _, _, var = _moments_1d(grid, dens)
    return math.sqrt(var)


def width_report(state: StateSpec) -> WidthReport:
    """Both widths plus the quantum-limit references for the state's envelope."""
    marg = marginal_width(state)
    cond = conditional_width(state)
    sql_ref = uql_ref = None
    if not isinstance(state, GridState):
        try:
            kappa = rms_kappa(state.envelope)
            sql_ref = sql_width(state.n, kappa)
            uql_ref = uql_width(state.n, kappa)
        except (InfiniteMoment, ValueError):
            pass
    separable = abs(marg - cond) <= SEPARABLE_TOL * marg
    return WidthReport(marginal=marg, conditional=cond,
                       sql_ref=sql_ref, uql_ref=uql_ref, separable=separable)


# ---------------------------------------------------------------------------
# absorption pattern and total rate

def absorption_pattern(state: StateSpec, x_grid) -> PatternProfile:
    """Sampled N-photon absorption profile ∝ |ψ(x,…,x)|², unit integral."""
    x = np.asarray(x_grid, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("pattern grid needs at least 2 points")
    intensity = np.abs(slice_amplitude(state, x)) ** 2
    total = float(np.trapezoid(intensity, x))
    if total < SLICE_POWER_FLOOR:
        raise ZeroSlice("absorption slice carries no power on this grid")
    return PatternProfile(x_grid=x, intensity=intensity / total)


def total_absorption_rate(state: StateSpec,
                          reference_rate: Optional[float] = None) -> RateReport:
    """∫|ψ(X,…,X)|² dX under the unit-norm convention for |ψ|².

    Coincident-momentum states are not normalizable; their rate uses the
    envelope-level convention (unit-norm G), so only ratios carry meaning.
    """
    n = state.n
    env = getattr(state, "envelope", None)
    if isinstance(env, DualDeltaEnvelope):
        raise InfiniteMoment("dual-delta envelope: periodic slice is not integrable")
    if isinstance(state, ProductState) and isinstance(env, GaussianEnvelope):
        total = env.kappa ** (n - 1) * math.pi ** ((1 - n) / 2.0) / math.sqrt(n)
    elif isinstance(state, ProductState):
        grid = _auto_slice_grid(state)
        total = float(np.trapezoid(np.abs(slice_amplitude(state, grid)) ** 2, grid))
    elif isinstance(state, CoincidentState):
        total = envelope_power(env) / n
    elif isinstance(state, SolitonState):
        # C² (2π/n)·power: dispersion is a pure spectral phase and drops out
        total = math.factorial(n - 1) * abs(state.ratio) ** (n - 1) * envelope_power(env) / n
    elif isinstance(state, GridState):
        diag = np.abs(_grid_diagonal(state)) ** 2
        total = float(np.trapezoid(diag, state.x_grid))
    else:
        raise UnsupportedVariant(type(state).__name__)
    if total < SLICE_POWER_FLOOR:
        raise ZeroSlice("absorption slice carries no power")
    ratio = None
    if reference_rate is not None and reference_rate > 0:
        ratio = total / reference_rate
    return RateReport(total_rate=total, reference_rate=reference_rate, ratio=ratio)


# ---------------------------------------------------------------------------
# relative-coordinate structure

def scale_relative(state: StateSpec, gamma: float) -> StateSpec:
    """Dilate every relative coordinate by γ, center of mass untouched.

    For solitons this is exact parameter transport: the relative kernel
    exp((ratio/2)Σ|ξ_i-ξ_j|) dilates by γ iff ratio → ratio/γ (the
    prefactor keeps the state normalized).  Grid states are resampled
    multilinearly at x_i' = X + (x_i - X)/γ and renormalized.
    """
    if not (gamma > 0 and math.isfinite(gamma)):
        raise ValueError(f"gamma must be positive, got {gamma}")
    if gamma == 1.0:
        return state
    if isinstance(state, SolitonState):
        p = state.params
        return SolitonState(state.n, state.envelope,
                            SolitonParams(ratio=p.ratio / gamma,
                                          b_integral=p.b_integral, q=p.q))
    if isinstance(state, GridState):
        return _scale_relative_grid(state, gamma)
    raise UnsupportedVariant(
        "relative dilation needs a state with nontrivial relative structure "
        "(soliton or grid)")


def _scale_relative_grid(state: GridState, gamma: float) -> GridState:
    n = state.n
    x = state.x_grid
    axes = np.meshgrid(*([x] * n), indexing="ij")
    X = sum(axes) / n
    queries = [X + (ax - X) / gamma for ax in axes]
    vals = _multilinear(state, queries)
    return GridState.from_samples(n, state.x_min, state.dx, vals)


def _multilinear(state: GridState, queries: list[np.ndarray]) -> np.ndarray:
    """Multilinear interpolation of the lattice amplitudes; zero outside."""
    P = state.points
    pos = [(q - state.x_min) / state.dx for q in queries]
    lo = [np.clip(np.floor(p).astype(int), 0, P - 2) for p in pos]
    frac = [p - low for p, low in zip(pos, lo)]
    inside = np.ones(pos[0].shape, dtype=bool)
    for p in pos:
        inside &= (p >= 0.0) & (p <= P - 1.0)
    out = np.zeros(pos[0].shape, dtype=complex)
    for corner in itertools.product((0, 1), repeat=state.n):
        weight = np.ones(pos[0].shape)
        idx = []
        for axis, bit in enumerate(corner):
            weight = weight * (frac[axis] if bit else 1.0 - frac[axis])
            idx.append(lo[axis] + bit)
        out += weight * state.amplitudes[tuple(idx)]
    out[~inside] = 0.0
    return out


def soliton_relative_spread_exact(n: int, ratio: float) -> float:
    """Closed-form RMS relative spread Δξ_i of the Kerr bound state.

    Sorting the N relative positions turns the pair-distance kernel into
    independent exponential gaps u_m with rates |ratio|·m(N-m); then
    E[ξ_i²] = (1/N²) Σ_{i<j} [Σ_m λ_m^{-2} + (Σ_m λ_m^{-1})²] over the gap
    range m = i..j-1.  Valid for every N ≥ 2.
    """
    if n < 2:
        raise DimensionMismatch("relative spread needs at least 2 photons")
    r = abs(ratio)
    lam = np.array([r * m * (n - m) for m in range(1, n)])
    total = 0.0
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            seg = lam[i - 1:j - 1]
            total += float(np.sum(seg**-2.0) + np.sum(1.0 / seg) ** 2)
    return math.sqrt(total) / n


def soliton_relative_spread_mc(n: int, ratio: float,
                               seed: int = DEFAULT_MC_SEED,
                               samples: int = DEFAULT_MC_SAMPLES) -> tuple[float, float]:
    """Monte Carlo Δξ_i for the soliton, with its standard error.

    Draws the sorted-configuration gaps from their exact exponential law
    (importance weights are identically 1), accumulates Σ_j ξ_j² / N per
    sample, and reports (√E[ξ²], stderr propagated to the width).
    Deterministic for a fixed seed.
    """
    if n < 2:
        raise DimensionMismatch("relative spread needs at least 2 photons")
    r = abs(ratio)
    rng = np.random.Generator(np.random.PCG64(seed))
    lam = np.array([r * m * (n - m) for m in range(1, n)])
    est = 0.0
    sq = 0.0
    done = 0
    chunk = 200_000
    while done < samples:
        m = min(chunk, samples - done)
        u = rng.exponential(1.0 / lam, size=(m, n - 1))
        z = np.concatenate([np.zeros((m, 1)), np.cumsum(u, axis=1)], axis=1)
        y = z - z.mean(axis=1, keepdims=True)
        s = (y**2).sum(axis=1) / n
        est += float(s.sum())
        sq += float((s**2).sum())
        done += m
    mean = est / samples
    var = max(sq / samples - mean**2, 0.0)
    se_mean = math.sqrt(var / samples)
    width = math.sqrt(mean)
    return width, se_mean / (2.0 * width) if width > 0 else 0.0


def relative_spread(state: StateSpec, *, seed: int = DEFAULT_MC_SEED,
                    samples: int = DEFAULT_MC_SAMPLES) -> np.ndarray:
    """RMS spreads Δξ_i of the independent relative coordinates.

    Coincident-momentum states refuse: their relative positions are
    completely undetermined.  Soliton states use the exact two-photon law
    and seeded Monte Carlo beyond (identical for every i by exchange
    symmetry).
    """
    n = state.n
    if n < 2:
        raise DimensionMismatch("relative spread needs at least 2 photons")
    if isinstance(state, CoincidentState):
        raise InfiniteMoment("coincident-momentum state: relative spreads diverge")
    if isinstance(state, ProductState):
        _, var = transform_moments(state.envelope)
        return np.full(n - 1, math.sqrt(var * (n - 1) / n))
    if isinstance(state, SolitonState):
        if n == 2:
            value = soliton_relative_spread_exact(n, state.ratio)
        else:
            value, _ = soliton_relative_spread_mc(n, state.ratio, seed=seed, samples=samples)
        return np.full(n - 1, value)
    if isinstance(state, GridState):
        first, second, _ = _grid_coordinate_moments(state)
        mean_X = first.mean()
        out = np.empty(n - 1)
        for i in range(n - 1):
            # Var(x_i - X) assembled from single- and two-coordinate moments
            e_xi = first[i] - mean_X
            e_xi2 = (second[i, i] - 2.0 * second[i, :].mean() + second.mean())
            out[i] = math.sqrt(max(e_xi2 - e_xi**2, 0.0))
        return out
    raise UnsupportedVariant(type(state).__name__)


# ---------------------------------------------------------------------------
# pattern analysis

def estimate_fringe_period(profile: PatternProfile) -> Optional[float]:
    """Fringe period of a periodic pattern via its autocorrelation peak.

    Uses the overlap-count (unbiased) normalization so the finite window
    does not drag the peak inward, and refines the integer-lag peak with
    a parabolic fit.  Returns None when the pattern has no oscillatory
    structure (no negative-going autocorrelation lobe).
    """
    d = profile.intensity - profile.intensity.mean()
    if np.abs(d).max() <= 1e-12 * max(profile.intensity.max(), 1e-300):
        return None
    m = d.size
    ac = np.correlate(d, d, mode="full")[m - 1:] / np.arange(m, 0, -1)
    ac = ac[: max(m // 2, 2)]  # unbiased estimate is noisy at large lags
    negative = np.nonzero(ac < 0)[0]
    if negative.size == 0:
        return None
    start = negative[0]
    interior = np.arange(max(start, 1), ac.size - 1)
    peaks = interior[(ac[interior] > 0)
                     & (ac[interior] >= ac[interior - 1])
                     & (ac[interior] >= ac[interior + 1])]
    if peaks.size == 0:
        return None
    lag = int(peaks[0])
    refined = float(lag)
    if 1 <= lag < ac.size - 1:
        denom = ac[lag - 1] - 2.0 * ac[lag] + ac[lag + 1]
        if denom < 0:
            refined += 0.5 * (ac[lag - 1] - ac[lag + 1]) / denom
    return refined * profile.dx
