"""One-dimensional transverse-momentum envelopes G(k) and the band limit.

Every multiphoton state in this package is built from a single complex
envelope over the transverse wave number k.  Three representations cover
the cases that occur in practice:

* ``GaussianEnvelope`` — G(k) = (π κ²)^(-1/4) exp(-k²/(2κ²)), always unit
  L² norm by construction.  Its position-space transform is again a
  Gaussian, exp(-κ² y²/2) up to normalization, so κ is simultaneously the
  spectral width parameter and the real-space decay rate.
* ``DualDeltaEnvelope`` — w₁ δ(k-k₀) + w₂ δ(k+k₀), the two-arm
  interferometric configuration.  Normalization is over the discrete
  weights, |w₁|² + |w₂|² = 1.
* ``SampledEnvelope`` — complex values on a uniform k-grid, integrated by
  the trapezoid rule throughout.

All integrals of the form ∫ G(k) exp(i k y - i β k²) dk (β is an
accumulated quadratic chirp) are provided here, both as pointwise
evaluation and as closed-form second moments of the resulting
|transform|² density via Plancherel's identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import DistributionalState, InfiniteMoment, ZeroEnvelope

POWER_FLOOR = 1e-30
_SQRT_HALF = math.sqrt(0.5)


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class GaussianEnvelope:
    """Unit-norm Gaussian spectrum with width parameter ``kappa`` > 0."""

    kappa: float

    def __post_init__(self):
        if not (self.kappa > 0.0 and math.isfinite(self.kappa)):
            raise ValueError(f"kappa must be a positive finite number, got {self.kappa}")

    @property
    def amplitude(self) -> float:
        """Peak value (π κ²)^(-1/4) that makes ∫|G|² dk = 1."""
        return (math.pi * self.kappa**2) ** -0.25


@dataclass(frozen=True)
class DualDeltaEnvelope:
    """Two spectral lines at ±k0 with complex weights (w₁, w₂)."""

    k0: float
    weights: tuple[complex, complex] = (_SQRT_HALF, _SQRT_HALF)

    def __post_init__(self):
        if not (self.k0 > 0.0 and math.isfinite(self.k0)):
            raise ValueError(f"k0 must be a positive finite number, got {self.k0}")
        if len(self.weights) != 2:
            raise ValueError("exactly two weights required")
        object.__setattr__(self, "weights", (complex(self.weights[0]), complex(self.weights[1])))


@dataclass(frozen=True)
class SampledEnvelope:
    """Complex spectrum on the uniform grid k_j = k_min + j*dk, j = 0..len-1."""

    k_min: float
    dk: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not (self.dk > 0.0 and math.isfinite(self.dk)):
            raise ValueError(f"dk must be a positive finite number, got {self.dk}")
        vals = _readonly(np.asarray(self.values))
        if vals.ndim != 1 or vals.size < 8:
            raise ValueError("sampled envelope needs a 1-D grid of at least 8 points")
        if not np.all(np.isfinite(vals.view(float))):
            raise ValueError("sampled envelope values must be finite")
        object.__setattr__(self, "values", vals)

    @property
    def k_grid(self) -> np.ndarray:
        return self.k_min + self.dk * np.arange(self.values.size)


SpectralEnvelope = Union[GaussianEnvelope, DualDeltaEnvelope, SampledEnvelope]


def _trapezoid_weights(n: int) -> np.ndarray:
    w = np.ones(n)
    w[0] = w[-1] = 0.5
    return w


def envelope_power(env: SpectralEnvelope) -> float:
    """Total spectral power ∫|G|² dk (weight power for the dual-delta case)."""
    if isinstance(env, GaussianEnvelope):
        return 1.0
    if isinstance(env, DualDeltaEnvelope):
        return abs(env.weights[0]) ** 2 + abs(env.weights[1]) ** 2
    w = _trapezoid_weights(env.values.size)
    return float(np.sum(w * np.abs(env.values) ** 2) * env.dk)


def normalize(env: SpectralEnvelope) -> SpectralEnvelope:
    """Scale the envelope to unit norm, leaving each value's direction alone."""
    power = envelope_power(env)
    if power < POWER_FLOOR:
        raise ZeroEnvelope(f"envelope power {power:.3e} below {POWER_FLOOR:.0e}")
    if isinstance(env, GaussianEnvelope):
        return env  # unit norm by construction
    scale = 1.0 / math.sqrt(power)
    if isinstance(env, DualDeltaEnvelope):
        return DualDeltaEnvelope(env.k0, (env.weights[0] * scale, env.weights[1] * scale))
    return SampledEnvelope(env.k_min, env.dk, env.values * scale)


def envelope_at(env: SpectralEnvelope, k) -> np.ndarray:
    """Evaluate G at wave numbers ``k`` (linear interpolation for sampled grids).

    Raises ``DistributionalState`` for dual-delta envelopes: their pointwise
    value is a distribution, not a number.
    """
    k = np.asarray(k, dtype=float)
    if isinstance(env, GaussianEnvelope):
        return env.amplitude * np.exp(-(k**2) / (2.0 * env.kappa**2)) + 0.0j
    if isinstance(env, DualDeltaEnvelope):
        raise DistributionalState("dual-delta envelope has no pointwise value")
    grid = env.k_grid
    re = np.interp(k, grid, env.values.real, left=0.0, right=0.0)
    im = np.interp(k, grid, env.values.imag, left=0.0, right=0.0)
    return re + 1j * im


def spatial_transform(env: SpectralEnvelope, y, quad_coeff: float = 0.0) -> np.ndarray:
    """∫ G(k) exp(i k y - i quad_coeff k²) dk, elementwise over ``y``.

    Note the plain dk measure (no 1/√(2π)); callers supply whatever
    constant their convention needs.  ``quad_coeff`` carries accumulated
    quantum dispersion N·∫b dt when the transform feeds an N-photon
    center-of-mass amplitude.
    """
    y = np.asarray(y, dtype=float)
    if isinstance(env, GaussianEnvelope):
        # ∫ e^{-a k² + i k y} dk = sqrt(π/a) e^{-y²/(4a)}, Re a > 0
        a = 1.0 / (2.0 * env.kappa**2) + 1j * quad_coeff
        return env.amplitude * np.sqrt(np.pi / a) * np.exp(-(y**2) / (4.0 * a))
    if isinstance(env, DualDeltaEnvelope):
        chirp = np.exp(-1j * quad_coeff * env.k0**2)
        w1, w2 = env.weights
        return chirp * (w1 * np.exp(1j * env.k0 * y) + w2 * np.exp(-1j * env.k0 * y))
    k = env.k_grid
    f = env.values * np.exp(-1j * quad_coeff * k**2) * _trapezoid_weights(k.size)
    scalar = y.ndim == 0
    phases = np.exp(1j * np.outer(np.atleast_1d(y), k))
    out = (phases @ f) * env.dk
    return out[0] if scalar else out


def transform_moments(env: SpectralEnvelope, quad_coeff: float = 0.0) -> tuple[float, float]:
    """Mean and variance of y under the density |∫G e^{iky - i q k²} dk|².

    Computed in k-space via Plancherel: with F(k) = G(k) e^{-i q k²},
    ⟨y⟩ = -Im ∫ F̄ F' dk / ∫|F|² dk and ⟨y²⟩ = ∫|F'|² dk / ∫|F|² dk.
    Dual-delta envelopes give a non-normalizable periodic density and
    raise ``InfiniteMoment``.
    """
    if isinstance(env, GaussianEnvelope):
        return 0.0, 1.0 / (2.0 * env.kappa**2) + 2.0 * quad_coeff**2 * env.kappa**2
    if isinstance(env, DualDeltaEnvelope):
        raise InfiniteMoment("dual-delta spectrum: |transform|² is periodic, second moment diverges")
    k = env.k_grid
    f = env.values * np.exp(-1j * quad_coeff * k**2)
    df = np.gradient(f, env.dk)
    w = _trapezoid_weights(k.size)
    power = np.sum(w * np.abs(f) ** 2) * env.dk
    if power < POWER_FLOOR:
        raise ZeroEnvelope("envelope power below floor")
    mean = float(-np.imag(np.sum(w * np.conj(f) * df)) * env.dk / power)
    second = float(np.sum(w * np.abs(df) ** 2) * env.dk / power)
    return mean, second - mean**2


def k_moments(env: SpectralEnvelope) -> tuple[float, float]:
    """Mean and variance of k under the spectral density |G(k)|²."""
    if isinstance(env, GaussianEnvelope):
        return 0.0, env.kappa**2 / 2.0
    if isinstance(env, DualDeltaEnvelope):
        p1 = abs(env.weights[0]) ** 2
        p2 = abs(env.weights[1]) ** 2
        tot = p1 + p2
        mean = env.k0 * (p1 - p2) / tot
        return mean, env.k0**2 - mean**2
    k = env.k_grid
    w = _trapezoid_weights(k.size)
    dens = w * np.abs(env.values) ** 2
    power = dens.sum() * env.dk
    if power < POWER_FLOOR:
        raise ZeroEnvelope("envelope power below floor")
    mean = float((dens * k).sum() * env.dk / power)
    second = float((dens * k**2).sum() * env.dk / power)
    return mean, second - mean**2


def rms_kappa(env: SpectralEnvelope) -> float:
    """Gaussian-equivalent width parameter: √2 × (RMS of |G|²) about its mean.

    Recovers ``kappa`` exactly for Gaussian envelopes and gives the
    matched-Gaussian estimate for everything else.
    """
    if isinstance(env, GaussianEnvelope):
        return env.kappa
    _, var = k_moments(env)
    return math.sqrt(2.0 * var)


@dataclass(frozen=True)
class BandLimit:
    """Propagating-wave constraint: spectrum must vanish for |k| > 2π/λ."""

    lam: float

    def __post_init__(self):
        if not (self.lam > 0.0 and math.isfinite(self.lam)):
            raise ValueError(f"wavelength must be positive and finite, got {self.lam}")

    @property
    def k_max(self) -> float:
        return 2.0 * math.pi / self.lam


@dataclass(frozen=True)
class BandReport:
    in_band_fraction: float
    passed: bool


BAND_TOLERANCE = 1e-6


def band_limit_check(env: SpectralEnvelope, bl: BandLimit) -> BandReport:
    """Fraction of spectral power inside |k| ≤ 2π/λ, and a pass flag.

    Passing means at most 1e-6 of the power lies outside the propagating
    band.
    """
    kmax = bl.k_max
    if isinstance(env, GaussianEnvelope):
        frac = math.erf(kmax / env.kappa)
    elif isinstance(env, DualDeltaEnvelope):
        frac = 1.0 if env.k0 <= kmax else 0.0
    else:
        frac = _sampled_band_fraction(env, kmax)
    return BandReport(in_band_fraction=frac, passed=(1.0 - frac) <= BAND_TOLERANCE)


def _sampled_band_fraction(env: SampledEnvelope, kmax: float) -> float:
    """Trapezoid power of |G|² restricted to [-kmax, kmax], with partial
    end cells handled by linear interpolation of the density."""
    k = env.k_grid
    dens = np.abs(env.values) ** 2
    total = float(np.trapezoid(dens, dx=env.dk))
    if total < POWER_FLOOR:
        raise ZeroEnvelope("envelope power below floor")
    lo, hi = max(-kmax, k[0]), min(kmax, k[-1])
    if hi <= lo:
        return 0.0
    # stitch interior samples together with interpolated band edges
    inside = (k > lo) & (k < hi)
    xs = np.concatenate(([lo], k[inside], [hi]))
    ys = np.concatenate(([np.interp(lo, k, dens)], dens[inside], [np.interp(hi, k, dens)]))
    return float(np.trapezoid(ys, xs) / total)
