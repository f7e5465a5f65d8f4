"""Exception hierarchy.

Two families matter to callers (and to the CLI exit codes): input/shape
problems (``ValidationError``) and well-defined mathematical refusals
(``ComputationError``).  A refusal is not a bug: e.g. asking for the
displacement variance of a state whose transverse spectrum is a pair of
delta functions is asking for a divergent integral, and we say so instead
of windowing it silently.
"""


class PhotonSqlError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(PhotonSqlError):
    """Malformed input: wrong shapes, inconsistent grids, bad files."""


class DimensionMismatch(ValidationError):
    """Coordinate/argument count does not match the photon number."""


class GridMismatch(ValidationError):
    """Two sampled objects do not share one k-grid."""


class ScheduleMismatch(ValidationError):
    """Expansion schedule does not start at the state's coupling ratio."""


class EmptyTarget(ValidationError):
    """Design target pattern carries no intensity."""


class SchemaError(ValidationError):
    """A JSON document does not validate against its schema."""


class ComputationError(PhotonSqlError):
    """A mathematically well-defined refusal during evaluation."""


class ZeroEnvelope(ComputationError):
    """Spectral envelope has (numerically) zero total power."""


class DistributionalState(ComputationError):
    """Momentum amplitude contains delta functions and cannot be evaluated
    pointwise; use envelope-level accessors instead."""


class OutOfGrid(ComputationError):
    """Grid state queried off its lattice (no interpolation by contract)."""


class InfiniteMoment(ComputationError):
    """Requested second moment diverges (non-normalizable density)."""


class ZeroSlice(ComputationError):
    """The all-photons-coincident slice carries no power."""


class UnsupportedVariant(ComputationError):
    """Operation undefined for this state variant."""


class TailTooHeavy(ComputationError):
    """Rasterization grid truncates more probability than allowed."""


class ResidualDispersion(ComputationError):
    """Operation requires fully compensated quantum dispersion."""
