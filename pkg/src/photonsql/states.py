"""N-photon spatial states and their probability amplitudes.

A state of N photons sharing one frequency and polarization, free in one
transverse dimension, is a symmetric amplitude ψ(x₁,…,x_N) (or its
unitary Fourier partner φ(k₁,…,k_N)).  Four concrete families are
provided:

* ``ProductState``     — ψ = f̂(x₁)…f̂(x_N): spatially independent photons,
  the standard-quantum-limit configuration.
* ``CoincidentState``  — all photons share one transverse wave number:
  φ = G(k₁) δ(k₁-k₂)…δ(k₁-k_N).  In the center-of-mass frame the spatial
  amplitude collapses to a function of the mean position alone,
  g(N·X) with g the transform of G; an N-photon wave with effective
  de Broglie wavelength 2π/(N k).
* ``SolitonState``     — the bound state of N photons under transverse
  diffraction b and negative Kerr coefficient c (ratio = c/b < 0):
  ψ' = C · exp[(ratio/2) Σ_{i<j}|ξ_i-ξ_j|] · ∫ G(k) e^{i N k X - i N k² B} dk,
  C = √((N-1)! |ratio|^{N-1} / (2π)), B the accumulated ∫b dt.  With a
  unit-norm envelope this ψ is itself unit-norm (the relative-coordinate
  integral equals 1/((N-1)! |ratio|^{N-1}) exactly).
* ``GridState``        — amplitudes tabulated on a uniform lattice, N ≤ 3.
  Used as the exchange format for brute-force validation; queries off the
  lattice are refused rather than interpolated so that comparisons stay
  bit-reproducible.

Center-of-mass coordinates follow X = (1/N) Σ x_i, ξ_i = x_i − X with the
last relative coordinate dependent, ξ_N = −Σ_{i<N} ξ_i.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .envelopes import (
    DualDeltaEnvelope,
    GaussianEnvelope,
    SampledEnvelope,
    SpectralEnvelope,
    envelope_at,
    spatial_transform,
)
from .errors import (
    DimensionMismatch,
    DistributionalState,
    OutOfGrid,
    UnsupportedVariant,
)

GRID_SYMMETRY_TOL = 1e-9
GRID_NORM_TOL = 1e-9
_SQRT_2PI = math.sqrt(2.0 * math.pi)


# ---------------------------------------------------------------------------
# center-of-mass / relative coordinates

@dataclass(frozen=True)
class ComPoint:
    """Center-of-mass coordinate plus the N-1 independent relative offsets."""

    X: float
    xi: tuple[float, ...]

    @property
    def n(self) -> int:
        return len(self.xi) + 1

    @property
    def xi_last(self) -> float:
        """The dependent relative coordinate ξ_N = -Σ ξ_i."""
        return -sum(self.xi)


def to_com(x: Sequence[float]) -> ComPoint:
    """Split coordinates into mean position and relative offsets."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise DimensionMismatch("need a flat sequence of at least one coordinate")
    X = float(arr.mean())
    return ComPoint(X=X, xi=tuple(float(v) for v in (arr[:-1] - X)))


def from_com(p: ComPoint, n: int) -> np.ndarray:
    """Rebuild photon coordinates, x_i = X + ξ_i with ξ_n from the constraint."""
    if len(p.xi) != n - 1:
        raise DimensionMismatch(f"{len(p.xi)} relative coordinates for n={n}")
    xi = np.concatenate([np.asarray(p.xi, dtype=float), [p.xi_last]]) if n > 1 else np.zeros(1)
    return p.X + xi


# ---------------------------------------------------------------------------
# state variants

def _check_photon_count(n) -> int:
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 1:
        raise ValueError(f"photon count must be a positive integer, got {n!r}")
    return int(n)


@dataclass(frozen=True)
class ProductState:
    """N spatially independent photons, each with momentum envelope f(k)."""

    n: int
    envelope: SpectralEnvelope

    def __post_init__(self):
        object.__setattr__(self, "n", _check_photon_count(self.n))


@dataclass(frozen=True)
class CoincidentState:
    """Superposition ∫dk G(k) |k,…,k⟩ of N-photon coincident-momentum states."""

    n: int
    envelope: SpectralEnvelope

    def __post_init__(self):
        object.__setattr__(self, "n", _check_photon_count(self.n))


@dataclass(frozen=True)
class SolitonParams:
    """Kerr-soliton parameters.

    ratio       — c/b, Kerr over diffraction coefficient; must be negative
                  for a bound state to exist.
    b_integral  — accumulated ∫b dt, the quantum-dispersion phase budget.
    q           — order-unity shape parameter of the initial envelope fit.
    """

    ratio: float
    b_integral: float = 0.0
    q: float = 1.0

    def __post_init__(self):
        if not (self.ratio < 0.0 and math.isfinite(self.ratio)):
            raise ValueError(f"ratio c/b must be negative and finite, got {self.ratio}")
        if not (self.q > 0.0 and math.isfinite(self.q)):
            raise ValueError(f"q must be positive, got {self.q}")
        if not math.isfinite(self.b_integral):
            raise ValueError("b_integral must be finite")


@dataclass(frozen=True)
class SolitonState:
    """N-photon Kerr-soliton bound state with spectral envelope G(k)."""

    n: int
    envelope: SpectralEnvelope
    params: SolitonParams

    def __post_init__(self):
        object.__setattr__(self, "n", _check_photon_count(self.n))

    @property
    def ratio(self) -> float:
        return self.params.ratio

    @property
    def b_integral(self) -> float:
        return self.params.b_integral


def soliton_prefactor(n: int, ratio: float) -> float:
    """C = √((N-1)! |c/b|^{N-1} / (2π)); makes the bound state unit norm."""
    return math.sqrt(math.factorial(n - 1) * abs(ratio) ** (n - 1) / (2.0 * math.pi))


@dataclass(frozen=True)
class GridState:
    """Symmetric amplitudes on the lattice x_j = x_min + j*dx, per axis."""

    n: int
    x_min: float
    dx: float
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = _check_photon_count(self.n)
        object.__setattr__(self, "n", n)
        if n > 3:
            raise ValueError("grid states support at most 3 photons")
        if not (self.dx > 0.0 and math.isfinite(self.dx)):
            raise ValueError(f"dx must be positive, got {self.dx}")
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.ndim != n:
            raise ValueError(f"amplitude array must be {n}-dimensional")
        if len(set(amps.shape)) != 1 or amps.shape[0] < 2:
            raise ValueError("lattice must be square with at least 2 points per axis")
        scale = np.abs(amps).max()
        if scale > 0:
            for perm in itertools.permutations(range(n)):
                if np.abs(amps - amps.transpose(perm)).max() > GRID_SYMMETRY_TOL * scale:
                    raise ValueError("grid amplitudes are not exchange symmetric")
        norm = np.sum(np.abs(amps) ** 2) * self.dx**n
        if abs(norm - 1.0) > GRID_NORM_TOL:
            raise ValueError(f"grid amplitudes not normalized: sum|psi|^2 dx^n = {norm!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_samples(cls, n: int, x_min: float, dx: float, amplitudes) -> "GridState":
        """Build a grid state from raw samples, rescaling to unit norm."""
        amps = np.asarray(amplitudes, dtype=complex)
        norm = np.sum(np.abs(amps) ** 2) * dx**n
        if norm <= 0.0:
            raise ValueError("cannot normalize an all-zero amplitude array")
        return cls(n=n, x_min=x_min, dx=dx, amplitudes=amps / math.sqrt(norm))

    @property
    def points(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def x_grid(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.points)

    def lattice_index(self, coord: float) -> int:
        """Index of ``coord`` on the lattice; OutOfGrid if off-lattice."""
        j = round((coord - self.x_min) / self.dx)
        if j < 0 or j >= self.points:
            raise OutOfGrid(f"coordinate {coord} outside lattice extent")
        if abs(self.x_min + j * self.dx - coord) > 1e-9 * max(self.dx, 1.0):
            raise OutOfGrid(f"coordinate {coord} is not a lattice point (no interpolation)")
        return int(j)


StateSpec = Union[ProductState, CoincidentState, SolitonState, GridState]


# ---------------------------------------------------------------------------
# amplitude evaluation

def _require_len(values: Sequence[float], n: int, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.shape != (n,):
        raise DimensionMismatch(f"expected {n} {what}, got shape {arr.shape}")
    return arr


def eval_psi(state: StateSpec, x: Sequence[float]) -> complex:
    """Spatial probability amplitude ψ(x₁,…,x_N).

    Symmetric under any permutation of the coordinates.  Grid states are
    evaluated at exact lattice points only.
    """
    xs = _require_len(x, state.n, "coordinates")
    if isinstance(state, ProductState):
        vals = spatial_transform(state.envelope, xs) / _SQRT_2PI
        return complex(np.prod(vals))
    if isinstance(state, CoincidentState):
        return complex(spatial_transform(state.envelope, xs.sum()) / _SQRT_2PI)
    if isinstance(state, SolitonState):
        return complex(_soliton_psi(state, xs[np.newaxis, :])[0])
    if isinstance(state, GridState):
        idx = tuple(state.lattice_index(v) for v in xs)
        return complex(state.amplitudes[idx])
    raise UnsupportedVariant(f"unknown state variant {type(state).__name__}")


def _soliton_psi(state: SolitonState, xs: np.ndarray) -> np.ndarray:
    """Vectorized soliton amplitude for a batch of coordinate rows."""
    n, ratio = state.n, state.ratio
    pair_sum = np.zeros(xs.shape[0])
    for i, j in itertools.combinations(range(n), 2):
        pair_sum += np.abs(xs[:, i] - xs[:, j])
    envelope_part = spatial_transform(state.envelope, xs.sum(axis=1),
                                      quad_coeff=n * state.b_integral)
    return soliton_prefactor(n, ratio) * np.exp(0.5 * ratio * pair_sum) * envelope_part


def eval_phi(state: StateSpec, k: Sequence[float]) -> complex:
    """Momentum probability amplitude φ(k₁,…,k_N).

    Refuses (``DistributionalState``) whenever φ contains delta functions:
    every coincident-momentum state, and any variant whose envelope is a
    dual-delta line pair.
    """
    ks = _require_len(k, state.n, "wave numbers")
    if isinstance(state, CoincidentState):
        raise DistributionalState(
            "coincident-momentum state: phi is delta-valued; use the envelope accessors")
    if isinstance(state, (ProductState, SolitonState)) and isinstance(
            state.envelope, DualDeltaEnvelope):
        raise DistributionalState("dual-delta envelope makes phi delta-valued")
    if isinstance(state, ProductState):
        return complex(np.prod(envelope_at(state.envelope, ks)))
    if isinstance(state, SolitonState):
        return _soliton_phi(state, ks)
    if isinstance(state, GridState):
        return _grid_phi(state, ks)
    raise UnsupportedVariant(f"unknown state variant {type(state).__name__}")


def _soliton_phi(state: SolitonState, ks: np.ndarray) -> complex:
    """Closed-form soliton momentum amplitude.

    Splitting the relative-coordinate integral into the N! ordering
    sectors turns it into products of one-sided exponential transforms:

        φ = (2π)^{1-N/2} G(k̄) e^{-i N k̄² B} C
            × (1/N) Σ_σ Π_m [ (|ratio|/2) m(N-m) + i Σ_{j>m} (k_σ(j)-k̄) ]^{-1}

    with k̄ the mean wave number.  Cost grows as N!·N, fine for small N.
    """
    n = state.n
    r = abs(state.ratio)
    kbar = float(ks.mean())
    c = ks - kbar
    rates = np.array([(r / 2.0) * m * (n - m) for m in range(1, n)])
    rel = 0.0 + 0.0j
    for perm in itertools.permutations(range(n)):
        cp = c[list(perm)]
        tails = np.cumsum(cp[::-1])[::-1]  # tails[m] = Σ_{j ≥ m} cp[j]
        rel += 1.0 / np.prod(rates + 1j * tails[1:]) if n > 1 else 1.0
    rel /= n
    g = envelope_at(state.envelope, kbar)
    chirp = np.exp(-1j * n * kbar**2 * state.b_integral)
    return complex((2.0 * math.pi) ** (1.0 - n / 2.0)
                   * g * chirp * soliton_prefactor(n, state.ratio) * rel)


def _grid_phi(state: GridState, ks: np.ndarray) -> complex:
    """Trapezoid transform of the lattice amplitudes at one k-point."""
    x = state.x_grid
    w = np.ones(x.size)
    w[0] = w[-1] = 0.5
    acc = state.amplitudes
    for axis in range(state.n):
        phase = w * np.exp(-1j * ks[axis] * x)
        acc = np.tensordot(acc, phase, axes=([0], [0]))
    return complex(acc * state.dx**state.n / (2.0 * math.pi) ** (state.n / 2.0))


def slice_amplitude(state: StateSpec, X) -> np.ndarray:
    """All-photons-coincident amplitude ψ(X, X, …, X), vectorized over X.

    This is the amplitude whose squared modulus is the N-photon absorption
    (dosing) profile.
    """
    X = np.atleast_1d(np.asarray(X, dtype=float))
    n = state.n
    if isinstance(state, ProductState):
        return (spatial_transform(state.envelope, X) / _SQRT_2PI) ** n
    if isinstance(state, CoincidentState):
        return spatial_transform(state.envelope, n * X) / _SQRT_2PI
    if isinstance(state, SolitonState):
        env = spatial_transform(state.envelope, n * X, quad_coeff=n * state.b_integral)
        return soliton_prefactor(n, state.ratio) * env
    if isinstance(state, GridState):
        idx = np.array([state.lattice_index(v) for v in X])
        return state.amplitudes[tuple(idx for _ in range(n))]
    raise UnsupportedVariant(f"unknown state variant {type(state).__name__}")
