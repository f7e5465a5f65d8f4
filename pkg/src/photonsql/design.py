"""Inverse design of multiphoton interference patterns.

Given a desired absorption pattern I(X), find the spectral envelope
G_target(k) whose coincident-momentum state produces it, and the
Fourier-plane transfer function H(k) that reshapes a given input envelope
into G_target through the Hᴺ rule.

The pattern fixes only |g(NX)|²; the phase of g is the caller's choice
(``phase`` on the target, default zero everywhere).  Patterns whose
amplitude changes sign — fringes of a signed cosine, say — need the sign
flips supplied as a 0/π phase, otherwise the zero-phase amplitude √I has
a different (wider) spectrum and the achieved pattern degrades honestly.

The band limit is enforced as a hard spectral clip at |k| = 2π/λ, and the
clipped power is reported: a target with features finer than the N-photon
floor (fringe period λ/(2N)) keeps a nonzero residual no matter what H
does, and a warning says so.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .envelopes import (
    BandLimit,
    DualDeltaEnvelope,
    GaussianEnvelope,
    SampledEnvelope,
    SpectralEnvelope,
    band_limit_check,
    envelope_at,
    normalize,
)
from .errors import EmptyTarget, GridMismatch, UnsupportedVariant
from .fourier import SampledFilter, apply_modulation
from .observables import PatternProfile, absorption_pattern
from .states import CoincidentState

DIVISION_EPS = 1e-6
OUT_OF_BAND_WARN = 1e-6


@dataclass(frozen=True)
class TargetPattern:
    """Desired absorption pattern on a uniform grid, with optional phase.

    Intensity is normalized to unit trapezoid integral on construction.
    ``phase`` (radians, same grid) defines the amplitude g = √I·e^{iφ};
    omit it for the zero-phase policy.
    """

    x_grid: np.ndarray = field(repr=False)
    intensity: np.ndarray = field(repr=False)
    phase: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        x = np.asarray(self.x_grid, dtype=float)
        inten = np.asarray(self.intensity, dtype=float)
        if x.ndim != 1 or x.size < 8 or x.shape != inten.shape:
            raise ValueError("target needs matching 1-D grids of at least 8 points")
        steps = np.diff(x)
        if steps[0] <= 0 or np.abs(steps - steps[0]).max() > 1e-9 * abs(steps[0]):
            raise ValueError("target grid must be uniform and increasing")
        if inten.min() < -1e-12 * max(inten.max(), 1.0):
            raise ValueError("target intensity must be nonnegative")
        inten = np.clip(inten, 0.0, None)
        total = float(np.trapezoid(inten, x))
        if total <= 0.0:
            raise EmptyTarget("target pattern carries no intensity")
        inten = inten / total
        phase = self.phase
        if phase is not None:
            phase = np.asarray(phase, dtype=float)
            if phase.shape != x.shape:
                raise ValueError("phase grid must match the intensity grid")
            phase.setflags(write=False)
        x.setflags(write=False)
        inten.setflags(write=False)
        object.__setattr__(self, "x_grid", x)
        object.__setattr__(self, "intensity", inten)
        object.__setattr__(self, "phase", phase)

    @property
    def dx(self) -> float:
        return float(self.x_grid[1] - self.x_grid[0])

    def amplitude(self) -> np.ndarray:
        """g(nX) on the grid under the phase policy."""
        amp = np.sqrt(self.intensity)
        if self.phase is not None:
            amp = amp * np.exp(1j * self.phase)
        return amp.astype(complex)


@dataclass(frozen=True)
class DesignResult:
    """Everything the inverse design produced, plus feasibility diagnostics."""

    g_target: np.ndarray
    envelope: SampledEnvelope
    transfer: SampledFilter
    achieved: PatternProfile
    in_band_fraction: float
    residual: float
    max_gain: float
    masked_points: int
    warnings: tuple[str, ...]


def _intensity_residual(achieved: np.ndarray, target: np.ndarray) -> float:
    """Relative L² distance between two normalized intensity profiles."""
    return float(np.linalg.norm(achieved - target) / np.linalg.norm(target))


def pattern_to_envelope(target: TargetPattern, n: int,
                        bl: BandLimit) -> tuple[SampledEnvelope, dict]:
    """Envelope G(k) whose n-photon coincident state shows the target pattern.

    The amplitude g(nX) is transformed over X (so the physical k-axis is
    the FFT axis compressed by n), hard-clipped at |k| ≤ 2π/λ, and
    renormalized.  Diagnostics report the pre-clip out-of-band power and
    the intensity residual of the band-limited pattern itself (the best
    any transfer function can do).
    """
    amp = target.amplitude()
    x = target.x_grid
    m = x.size
    dx = target.dx
    # DFT with explicit origin phase: ghat(kx_j) = dx/√(2π) Σ amp e^{-i kx_j x}
    kx = 2.0 * math.pi * np.fft.fftfreq(m, d=dx)
    ghat = np.fft.fft(amp) * dx / math.sqrt(2.0 * math.pi) * np.exp(-1j * kx * x[0])
    order = np.argsort(kx)
    kx = kx[order]
    ghat = ghat[order]
    k_grid = kx / n
    raw = SampledEnvelope(k_min=float(k_grid[0]), dk=float(k_grid[1] - k_grid[0]),
                          values=n * ghat)
    in_band = band_limit_check(raw, bl).in_band_fraction
    out_of_band = 1.0 - in_band
    clipped = np.where(np.abs(k_grid) <= bl.k_max, raw.values, 0.0)
    envelope = normalize(SampledEnvelope(raw.k_min, raw.dk, clipped))
    achieved = _pattern_from_dft(envelope, kx, x, n)
    residual = _intensity_residual(achieved, target.intensity)
    warnings = []
    if out_of_band > OUT_OF_BAND_WARN:
        warnings.append(
            f"target needs {out_of_band:.3e} of its spectral power beyond the band "
            f"limit 2*pi/lambda = {bl.k_max:.6g}; features finer than the n-photon "
            f"floor (fringe period lambda/(2n) = {bl.lam / (2 * n):.6g}) are unreachable")
    diagnostics = {
        "out_of_band_power": out_of_band,
        "in_band_fraction": in_band,
        "envelope_residual": residual,
        "warnings": warnings,
    }
    return envelope, diagnostics


def _pattern_from_dft(envelope: SampledEnvelope, kx: np.ndarray, x: np.ndarray,
                      n: int) -> np.ndarray:
    """Normalized |g(nX)|² for an envelope living on the DFT bins of x."""
    m = x.size
    dx = float(x[1] - x[0])
    # undo the forward bookkeeping: values sit on sorted bins of kx/n
    spectrum = envelope.values / n * np.exp(1j * kx * x[0])
    unsorted = np.empty_like(spectrum)
    unsorted[np.argsort(2.0 * math.pi * np.fft.fftfreq(m, d=dx))] = spectrum
    amp = np.fft.ifft(unsorted) * math.sqrt(2.0 * math.pi) / dx
    inten = np.abs(amp) ** 2
    total = float(np.trapezoid(inten, x))
    if total <= 0.0:
        raise EmptyTarget("band-limited pattern carries no intensity")
    return inten / total


def solve_transfer(g_in: SpectralEnvelope, g_target: SpectralEnvelope, n: int,
                   eps: float = DIVISION_EPS,
                   peak_normalize: bool = True) -> SampledFilter:
    """H(k) with G_in·Hⁿ ∝ G_target: principal n-th root of the quotient.

    The magnitude is the real n-th root of |G_target/G_in|; the phase is
    arg(quotient)/n after unwrapping along each contiguous unmasked run of
    the grid, anchored to its principal value at the point of strongest
    |G_in|.  Points with |G_in| < eps·max|G_in| are masked to H = 0.
    By default H is rescaled to peak magnitude 1, the canonical scale
    (output envelopes are renormalized anyway).
    """
    transfer, _, _ = _solve_transfer_full(g_in, g_target, n, eps, peak_normalize)
    return transfer


def _solve_transfer_full(g_in, g_target, n, eps, peak_normalize
                         ) -> tuple[SampledFilter, float, int]:
    """solve_transfer plus (pre-scaling peak |H|, masked point count)."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    tgt = _as_sampled(g_target, grid_like=None)
    src = _as_sampled(g_in, grid_like=tgt)
    if (src.values.size != tgt.values.size
            or not math.isclose(src.dk, tgt.dk, rel_tol=1e-12)
            or abs(src.k_min - tgt.k_min) > 1e-12 * src.dk):
        raise GridMismatch("envelopes live on different k-grids")
    gin = src.values
    mask = np.abs(gin) < eps * np.abs(gin).max()
    h = np.zeros_like(gin)
    quotient = np.where(mask, 1.0, tgt.values / np.where(mask, 1.0, gin))
    magnitude = np.abs(quotient) ** (1.0 / n)
    phase = np.angle(quotient)
    unwrapped = np.array(phase)
    for seg in _segments(~mask):
        local = np.unwrap(phase[seg])
        anchor = int(np.argmax(np.abs(gin[seg])))
        local -= 2.0 * math.pi * round((local[anchor] - phase[seg][anchor])
                                       / (2.0 * math.pi))
        unwrapped[seg] = local
    h[~mask] = (magnitude * np.exp(1j * unwrapped / n))[~mask]
    peak = float(np.abs(h).max())
    if peak_normalize and peak > 0:
        h = h / peak
    transfer = SampledFilter(k_min=src.k_min, dk=src.dk, values=h,
                             description="designed transfer function")
    return transfer, peak, int(mask.sum())


def _segments(keep: np.ndarray) -> list[slice]:
    """Contiguous True runs of a boolean mask, as slices."""
    out = []
    start = None
    for i, flag in enumerate(keep):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            out.append(slice(start, i))
            start = None
    if start is not None:
        out.append(slice(start, keep.size))
    return out


def _as_sampled(env: SpectralEnvelope, grid_like: Optional[SampledEnvelope]) -> SampledEnvelope:
    if isinstance(env, SampledEnvelope):
        return env
    if isinstance(env, DualDeltaEnvelope):
        raise UnsupportedVariant("line-pair envelopes have no grid to divide on")
    if grid_like is None:
        raise GridMismatch("need a sampled envelope to define the design grid")
    k = grid_like.k_grid
    return SampledEnvelope(grid_like.k_min, grid_like.dk, envelope_at(env, k))


def design_report(target: TargetPattern, n: int, bl: BandLimit,
                  g_in: SpectralEnvelope, eps: float = DIVISION_EPS) -> DesignResult:
    """Full inverse-design pipeline with a forward-model residual.

    The achieved pattern is computed honestly through the forward chain:
    modulate the input coincident state by the designed H, then evaluate
    its absorption pattern on the target grid.
    """
    envelope, diag = pattern_to_envelope(target, n, bl)
    g_in_sampled = normalize(_resample(g_in, envelope))
    transfer, peak, masked = _solve_transfer_full(g_in_sampled, envelope, n, eps, True)
    modulated = apply_modulation(CoincidentState(n, g_in_sampled), transfer)
    achieved = absorption_pattern(modulated, target.x_grid)
    residual = _intensity_residual(achieved.intensity, target.intensity)
    warnings = list(diag["warnings"])
    # masked points only matter where the target actually wants power there
    blocked = int(np.sum((transfer.values == 0)
                         & (np.abs(envelope.values)
                            > eps * np.abs(envelope.values).max())))
    if blocked:
        warnings.append(f"{blocked} grid points need target power where the input "
                        f"envelope is below the division floor; H was masked to 0 there")
    return DesignResult(
        g_target=target.amplitude(),
        envelope=envelope,
        transfer=transfer,
        achieved=achieved,
        in_band_fraction=diag["in_band_fraction"],
        residual=residual,
        max_gain=peak,
        masked_points=masked,
        warnings=tuple(warnings),
    )


def _resample(env: SpectralEnvelope, grid_like: SampledEnvelope) -> SampledEnvelope:
    if isinstance(env, SampledEnvelope):
        same = (env.values.size == grid_like.values.size
                and math.isclose(env.dk, grid_like.dk, rel_tol=1e-12)
                and abs(env.k_min - grid_like.k_min) <= 1e-12 * env.dk)
        if same:
            return env
    return _as_sampled(env, grid_like)
