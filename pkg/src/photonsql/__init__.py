"""photonsql: multiphoton spatial states and their quantum limits.

Build product, coincident-momentum, Kerr-soliton and grid-tabulated
N-photon states; compute beam-displacement and multiphoton-absorption
widths against the standard and ultimate quantum limits; expand solitons
adiabatically with quantum-dispersion compensation; shape interference
patterns through a 4f Fourier-plane chain; and validate everything
against an independent brute-force quadrature oracle.
"""

from .envelopes import (
    BandLimit,
    BandReport,
    DualDeltaEnvelope,
    GaussianEnvelope,
    SampledEnvelope,
    SpectralEnvelope,
    band_limit_check,
    envelope_at,
    envelope_power,
    k_moments,
    normalize,
    rms_kappa,
    spatial_transform,
    transform_moments,
)
from .errors import (
    ComputationError,
    DimensionMismatch,
    DistributionalState,
    EmptyTarget,
    GridMismatch,
    InfiniteMoment,
    OutOfGrid,
    PhotonSqlError,
    ResidualDispersion,
    ScheduleMismatch,
    SchemaError,
    TailTooHeavy,
    UnsupportedVariant,
    ValidationError,
    ZeroEnvelope,
    ZeroSlice,
)
from .states import (
    ComPoint,
    CoincidentState,
    GridState,
    ProductState,
    SolitonParams,
    SolitonState,
    StateSpec,
    eval_phi,
    eval_psi,
    from_com,
    slice_amplitude,
    soliton_prefactor,
    to_com,
)
from .observables import (
    PatternProfile,
    RateReport,
    WidthReport,
    absorption_pattern,
    conditional_width,
    estimate_fringe_period,
    marginal_width,
    relative_spread,
    scale_relative,
    soliton_relative_spread_exact,
    soliton_relative_spread_mc,
    sql_width,
    total_absorption_rate,
    uql_width,
    width_report,
)
from .soliton import (
    DispersionLedger,
    ExpansionSchedule,
    apply_dispersion,
    coincident_limit,
    compensate_dispersion,
    expand,
    make_soliton,
    soliton_initial_envelope,
    uql_convergence_metric,
)
from .fourier import (
    AuditEntry,
    ChainResult,
    FourierPlaneProfile,
    LensPair,
    QuadraticPhase,
    SampledFilter,
    TransferFunction,
    apply_modulation,
    chain,
    demagnify,
    demagnify_by,
    fourier_plane_map,
    modulation_power_kept,
    quadratic_phase,
)
from .design import (
    DesignResult,
    TargetPattern,
    design_report,
    pattern_to_envelope,
    solve_transfer,
)
from .oracle import (
    ComparisonRow,
    GridSpec,
    compare,
    default_grid,
    oracle_conditional_width,
    oracle_marginal_width,
    oracle_pattern,
    oracle_rate,
    oracle_relative_spread,
    rasterize,
)

__version__ = "0.1.0"
