"""Brute-force validation by dense-grid quadrature (N ≤ 3).

Everything here recomputes observables from first principles so the
analytic paths can be checked against it: states are sampled onto a
lattice by plain quadrature of their defining integrals (no closed-form
widths, no Plancherel shortcuts), then every observable is a trapezoid
sum over that lattice.  The only things shared with the analytic modules
are the state/envelope definitions themselves and small report
containers; none of the evaluation routines are.

Rasterization refuses coincident-momentum states (their momentum
amplitude is delta-valued; the analytic module has closed forms instead)
and refuses grids that would truncate more than 1e-4 of the probability
mass, estimated from cheap one-dimensional probes of the state's factors.

Lattice work proceeds in chunks along a flattened index; the worker count
is capped by the PHOTON_SQL_THREADS environment variable, and results are
assembled into a preallocated array so the output is identical for any
thread count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .envelopes import GaussianEnvelope, SampledEnvelope
from .errors import TailTooHeavy, UnsupportedVariant, ZeroSlice
from .states import (
    CoincidentState,
    GridState,
    ProductState,
    SolitonState,
    StateSpec,
)

TAIL_BUDGET = 1e-4
ORACLE_RTOL = 1e-3
MAX_CELLS = 2**27
# per-axis defaults; n = 3 needs the extra points to resolve the soliton's
# pair-distance kink at the 1e-3 tolerance
DEFAULT_POINTS = {1: 8193, 2: 512, 3: 224}


def _thread_cap() -> int:
    raw = os.environ.get("PHOTON_SQL_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass(frozen=True)
class GridSpec:
    """Symmetric lattice request: same extent and point count per axis."""

    x_min: float
    x_max: float
    points: int

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        if self.points < 64:
            raise ValueError("need at least 64 points per axis")

    def axis(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.points)

    def cells(self, n: int) -> int:
        return self.points**n


@dataclass(frozen=True)
class ComparisonRow:
    observable: str
    analytic: float
    oracle: float
    abs_err: float
    rel_err: float
    passed: bool


# ---------------------------------------------------------------------------
# oracle-local quadrature primitives

def _trap_w(n: int) -> np.ndarray:
    w = np.ones(n)
    w[0] = w[-1] = 0.5
    return w


def _own_envelope_samples(env) -> tuple[np.ndarray, np.ndarray]:
    """(k grid, G values) with an oracle-chosen grid for analytic envelopes."""
    if isinstance(env, GaussianEnvelope):
        k = np.linspace(-12.0 * env.kappa, 12.0 * env.kappa, 2049)
        vals = (math.pi * env.kappa**2) ** -0.25 * np.exp(-(k**2) / (2 * env.kappa**2))
        return k, vals.astype(complex)
    if isinstance(env, SampledEnvelope):
        return env.k_grid, np.asarray(env.values)
    raise UnsupportedVariant(
        "line-pair envelope states are not normalizable on a finite grid")


def _quad_transform(k: np.ndarray, g: np.ndarray, y: np.ndarray,
                    quad_coeff: float = 0.0) -> np.ndarray:
    """Plain trapezoid evaluation of ∫ G e^{iky - i q k²} dk on many y."""
    dk = k[1] - k[0]
    f = g * np.exp(-1j * quad_coeff * k**2) * _trap_w(k.size)
    out = np.empty(y.size, dtype=complex)
    workers = _thread_cap()
    chunks = np.array_split(np.arange(y.size), max(1, min(workers * 4, y.size)))

    def fill(idx):
        out[idx] = np.exp(1j * np.outer(y[idx], k)) @ f * dk

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, chunks))
    else:
        for idx in chunks:
            fill(idx)
    return out


def _widened(lo: float, hi: float, factor: float = 3.0, points: int = 2001) -> np.ndarray:
    """Probe window: the interval [lo, hi] widened symmetrically by ``factor``."""
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    return np.linspace(center - factor * half, center + factor * half, points)


def _probe_tail(y: np.ndarray, dens: np.ndarray, lo: float, hi: float) -> float:
    """Mass fraction of a 1-D probe density outside [lo, hi]."""
    total = np.trapezoid(dens, y)
    if total <= 0:
        return 1.0
    inside = (y >= lo) & (y <= hi)
    if not inside.any():
        return 1.0
    kept = np.trapezoid(dens[inside], y[inside])
    return float(max(1.0 - kept / total, 0.0))


# ---------------------------------------------------------------------------
# rasterization

def rasterize(state: StateSpec, grid: GridSpec) -> GridState:
    """Sample the state onto the lattice and renormalize.

    Raises ``TailTooHeavy`` when the probe estimate says more than 1e-4 of
    the probability mass lives outside the requested extent, and
    ``UnsupportedVariant`` for states that have no pointwise momentum
    density to sample (coincident momenta, line-pair envelopes).
    """
    n = state.n
    if n > 3:
        raise UnsupportedVariant("brute-force grids stop at 3 photons")
    if grid.cells(n) > MAX_CELLS:
        raise ValueError(f"{grid.points}^{n} cells exceed the memory guard {MAX_CELLS}")
    if isinstance(state, CoincidentState):
        raise UnsupportedVariant(
            "coincident-momentum states are delta-valued in momentum; "
            "their observables have envelope-level closed forms instead")
    if isinstance(state, GridState):
        return GridState.from_samples(n, state.x_min, state.dx, state.amplitudes)
    x = grid.axis()
    dx = x[1] - x[0]
    if isinstance(state, ProductState):
        k, g = _own_envelope_samples(state.envelope)
        probe_y = _widened(grid.x_min, grid.x_max)
        probe = np.abs(_quad_transform(k, g, probe_y)) ** 2
        tail = n * _probe_tail(probe_y, probe, grid.x_min, grid.x_max)
        if tail > TAIL_BUDGET:
            raise TailTooHeavy(f"estimated truncated mass {tail:.3e} > {TAIL_BUDGET:.0e}")
        fhat = _quad_transform(k, g, x) / math.sqrt(2 * math.pi)
        psi = fhat
        for _ in range(n - 1):
            psi = np.multiply.outer(psi, fhat)
        return GridState.from_samples(n, float(x[0]), float(dx), psi)
    if isinstance(state, SolitonState):
        return _rasterize_soliton(state, grid)
    raise UnsupportedVariant(type(state).__name__)


def _rasterize_soliton(state: SolitonState, grid: GridSpec) -> GridState:
    n = state.n
    r = abs(state.ratio)
    x = grid.axis()
    dx = x[1] - x[0]
    k, g = _own_envelope_samples(state.envelope)
    # center-of-mass probe over a widened window of y = Σx
    lo, hi = n * grid.x_min, n * grid.x_max
    probe_y = _widened(lo, hi)
    probe = np.abs(_quad_transform(k, g, probe_y, quad_coeff=n * state.b_integral)) ** 2
    tail = _probe_tail(probe_y, probe, lo, hi)
    # relative positions decay at least like exp(-n r |ξ|) in density;
    # charge the margin left after the center-of-mass spread
    mass = np.trapezoid(probe, probe_y)
    mean_y = np.trapezoid(probe_y * probe, probe_y) / mass
    sd_y = math.sqrt(np.trapezoid((probe_y - mean_y) ** 2 * probe, probe_y) / mass)
    margin = min(grid.x_max - mean_y / n, mean_y / n - grid.x_min) - 4.0 * sd_y / n
    tail += n * math.exp(-n * r * max(margin, 0.0))
    if tail > TAIL_BUDGET:
        raise TailTooHeavy(f"estimated truncated mass {tail:.3e} > {TAIL_BUDGET:.0e}")
    # Σx over the lattice takes n(P-1)+1 distinct values: evaluate the
    # envelope transform once per value and index into it
    points = grid.points
    y_all = n * x[0] + dx * np.arange(n * (points - 1) + 1)
    ghat = _quad_transform(k, g, y_all, quad_coeff=n * state.b_integral)
    idx = np.arange(points)
    sum_idx = idx
    for _ in range(n - 1):
        sum_idx = np.add.outer(sum_idx, idx)
    pair = np.zeros(() if n == 1 else sum_idx.shape)
    for i in range(n):
        for j in range(i + 1, n):
            shape_i = [1] * n
            shape_i[i] = points
            shape_j = [1] * n
            shape_j[j] = points
            pair = pair + np.abs(x.reshape(shape_i) - x.reshape(shape_j))
    c = math.sqrt(math.factorial(n - 1) * r ** (n - 1) / (2 * math.pi))
    psi = c * np.exp(0.5 * state.ratio * pair) * ghat[sum_idx]
    return GridState.from_samples(n, float(x[0]), float(dx), psi)


def default_grid(state: StateSpec, points: Optional[int] = None) -> GridSpec:
    """Lattice sized from per-axis scale estimates of the state's factors.

    Scales come from cheap 1-D probes (and, for the soliton's relative
    part, the gap-representation width formula); they size the lattice
    only — every reported value still comes from lattice quadrature.
    """
    n = state.n
    pts = points if points is not None else DEFAULT_POINTS[min(n, 3)]
    if isinstance(state, GridState):
        return GridSpec(float(state.x_grid[0]), float(state.x_grid[-1]), state.points)
    k, g = _own_envelope_samples(state.envelope)
    scale = _k_scale(k, g)
    y = np.linspace(-40.0 / scale, 40.0 / scale, 2001)
    if isinstance(state, ProductState):
        dens = np.abs(_quad_transform(k, g, y)) ** 2
        center, sd = _moments(y, dens)
        return GridSpec(center - 8 * sd, center + 8 * sd, pts)
    if isinstance(state, CoincidentState):
        dens = np.abs(_quad_transform(k, g, y)) ** 2
        center, sd = _moments(y, dens)
        return GridSpec((center - 8 * sd) / n, (center + 8 * sd) / n, pts)
    if isinstance(state, SolitonState):
        qc = n * state.b_integral
        y = y * n * (1 + abs(qc) * scale**2)
        dens = np.abs(_quad_transform(k, g, y, quad_coeff=qc)) ** 2
        center, sd = _moments(y, dens)
        half = 5.0 * sd / n + 7.0 * _xi_rms(n, abs(state.ratio))
        return GridSpec(center / n - half, center / n + half, pts)
    raise UnsupportedVariant(type(state).__name__)


def _xi_rms(n: int, r: float) -> float:
    """Relative-position RMS from the sorted-gap representation.

    Duplicated here deliberately: it sizes lattices and tail margins, and
    must not be imported from the analytic modules this oracle checks.
    """
    if n < 2:
        return 0.0
    lam = np.array([r * m * (n - m) for m in range(1, n)])
    total = 0.0
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            seg = lam[i - 1:j - 1]
            total += float(np.sum(seg**-2.0) + np.sum(1.0 / seg) ** 2)
    return math.sqrt(total) / n


def _k_scale(k: np.ndarray, g: np.ndarray) -> float:
    dens = np.abs(g) ** 2
    mass = np.trapezoid(dens, k)
    mean = np.trapezoid(k * dens, k) / mass
    var = np.trapezoid((k - mean) ** 2 * dens, k) / mass
    return max(math.sqrt(var), 1e-12)


def _moments(y: np.ndarray, dens: np.ndarray) -> tuple[float, float]:
    mass = np.trapezoid(dens, y)
    mean = np.trapezoid(y * dens, y) / mass
    sd = math.sqrt(np.trapezoid((y - mean) ** 2 * dens, y) / mass)
    return float(mean), float(sd)


# ---------------------------------------------------------------------------
# lattice observables

def _lattice_mass(gs: GridState) -> tuple[np.ndarray, np.ndarray]:
    """(mass array with trapezoid weights and volume element, axis grid)."""
    x = gs.x_grid
    dens = np.abs(gs.amplitudes) ** 2
    w = _trap_w(gs.points)
    for axis in range(gs.n):
        shape = [1] * gs.n
        shape[axis] = gs.points
        dens = dens * w.reshape(shape)
    return dens * gs.dx**gs.n, x


def _mean_coordinate(gs: GridState) -> np.ndarray:
    x = gs.x_grid
    total = np.zeros([1] * gs.n)
    for axis in range(gs.n):
        shape = [1] * gs.n
        shape[axis] = gs.points
        total = total + x.reshape(shape)
    return total / gs.n


def oracle_marginal_width(gs: GridState) -> float:
    """RMS of the mean coordinate by direct lattice quadrature."""
    mass, _ = _lattice_mass(gs)
    X = _mean_coordinate(gs)
    m0 = mass.sum()
    mean = (mass * X).sum() / m0
    var = (mass * (X - mean) ** 2).sum() / m0
    return float(math.sqrt(max(var, 0.0)))


def _diagonal(gs: GridState) -> np.ndarray:
    spec = {1: "i->i", 2: "ii->i", 3: "iii->i"}[gs.n]
    return np.einsum(spec, gs.amplitudes)


def oracle_conditional_width(gs: GridState) -> float:
    """RMS of the normalized diagonal slice |ψ(x,…,x)|²."""
    x = gs.x_grid
    dens = np.abs(_diagonal(gs)) ** 2
    mass = np.trapezoid(dens, x)
    if mass < 1e-30:
        raise ZeroSlice("diagonal slice carries no power")
    mean = np.trapezoid(x * dens, x) / mass
    var = np.trapezoid((x - mean) ** 2 * dens, x) / mass
    return float(math.sqrt(max(var, 0.0)))


def oracle_pattern(gs: GridState) -> tuple[np.ndarray, np.ndarray]:
    """(x, intensity) of the diagonal slice, unit trapezoid integral."""
    x = gs.x_grid
    dens = np.abs(_diagonal(gs)) ** 2
    mass = np.trapezoid(dens, x)
    if mass < 1e-30:
        raise ZeroSlice("diagonal slice carries no power")
    return x.copy(), dens / mass


def oracle_rate(gs: GridState) -> float:
    """∫|ψ(x,…,x)|² dx from the lattice diagonal."""
    x = gs.x_grid
    dens = np.abs(_diagonal(gs)) ** 2
    rate = float(np.trapezoid(dens, x))
    if rate < 1e-30:
        raise ZeroSlice("diagonal slice carries no power")
    return rate


def oracle_relative_spread(gs: GridState) -> np.ndarray:
    """RMS of ξ_i = x_i − X for i = 1..n-1 by lattice quadrature."""
    if gs.n < 2:
        raise UnsupportedVariant("relative spread needs at least 2 photons")
    mass, x = _lattice_mass(gs)
    m0 = mass.sum()
    X = _mean_coordinate(gs)
    out = np.empty(gs.n - 1)
    for i in range(gs.n - 1):
        shape = [1] * gs.n
        shape[i] = gs.points
        xi = x.reshape(shape) - X
        mean = (mass * xi).sum() / m0
        var = (mass * (xi - mean) ** 2).sum() / m0
        out[i] = math.sqrt(max(var, 0.0))
    return out


# ---------------------------------------------------------------------------
# analytic-vs-oracle comparison

def compare(state: StateSpec, grid: Optional[GridSpec] = None,
            rtol: float = ORACLE_RTOL) -> list[ComparisonRow]:
    """Run every comparable observable both ways and report the errors."""
    from . import observables  # deliberate late import: reporting glue only

    if grid is None:
        grid = default_grid(state)
    gs = rasterize(state, grid)
    rows = []

    def add(name: str, analytic: float, oracle_value: float):
        abs_err = abs(analytic - oracle_value)
        rel_err = abs_err / max(abs(analytic), 1e-300)
        rows.append(ComparisonRow(observable=name, analytic=float(analytic),
                                  oracle=float(oracle_value), abs_err=float(abs_err),
                                  rel_err=float(rel_err), passed=bool(rel_err <= rtol)))

    add("marginal_width", observables.marginal_width(state), oracle_marginal_width(gs))
    add("conditional_width", observables.conditional_width(state),
        oracle_conditional_width(gs))
    add("total_rate", observables.total_absorption_rate(state).total_rate, oracle_rate(gs))
    if state.n >= 2:
        add("relative_spread", float(observables.relative_spread(state)[0]),
            float(oracle_relative_spread(gs)[0]))
    ox, oi = oracle_pattern(gs)
    profile = observables.absorption_pattern(state, ox)
    mean_a = np.trapezoid(ox * profile.intensity, ox)
    mean_o = np.trapezoid(ox * oi, ox)
    rms_a = math.sqrt(np.trapezoid((ox - mean_a) ** 2 * profile.intensity, ox))
    rms_o = math.sqrt(np.trapezoid((ox - mean_o) ** 2 * oi, ox))
    add("pattern_rms_width", rms_a, rms_o)
    return rows
