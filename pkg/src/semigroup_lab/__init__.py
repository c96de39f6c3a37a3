"""Finite-truncation numerics for quantum dynamical semigroups with
unbounded generators: the GKLS standard form, the minimal-solution resolvent
series, the quantum birth process, diffusion along diagonals with an
absorbing boundary, and trace-resetting non-standard generators."""

__version__ = "0.1.0"

from .birth import (
    ArrivalBracket,
    BandDecayTable,
    GrowthReport,
    LeadingColumnReport,
    am_gm_gap,
    arrival_laplace,
    arrival_partial_product,
    band_domain_element,
    band_entry,
    band_functional,
    birth_generator,
    birth_generator_apply,
    birth_resolvent,
    birth_resolvent_entry,
    classical_birth_apply,
    conservativity_defect,
    geometric_band_decay,
    leading_column_report,
    moderate_growth_report,
    no_event_resolvent,
)
from .diffusion import (
    KernelGrid,
    QuadratureError,
    apply_resolvent,
    apply_semigroup,
    diagonal_slope,
    erfc,
    kernel_trace,
    support_extent,
    trace_loss,
)
from .generators import (
    StandardGeneratorSpec,
    apply_jump,
    apply_no_event,
    apply_standard,
    dissipativity_check,
    forward_form_residual,
    gauge_transform,
)
from .nonstandard import (
    ContractionReport,
    FalsifierReport,
    TraceResetGenerator,
    birth_reset_resolvent_series,
    conservativity_residual,
    falsifier_report,
    reset_contraction_report,
)
from .operators import (
    MatrixExponentialError,
    choi_matrix,
    is_positive_semidefinite,
    is_selfadjoint,
    matrix_exponential_apply,
    matrix_exponential_operator,
    matrix_unit,
    rank_one,
    superop_matrix,
    trace_norm,
)
from .rates import (
    ConstantRates,
    ExplicitRates,
    GeometricRates,
    PolynomialRates,
    RateRangeError,
    RateSequence,
    RateSpecError,
    format_rate_spec,
    parse_rate_spec,
)
from .resolvent import (
    ResolventSeriesResult,
    SeriesDivergenceError,
    direct_resolvent_factory,
    domain_element,
    euler_semigroup,
    resolvent_direct,
    resolvent_series,
)
from .trajectories import (
    BiasCheckError,
    ShiftArrivalTable,
    TrajectorySample,
    TrajectoryStreams,
    empirical_laplace,
    event_count_estimator,
    n_event_laplace_term,
    sample_trajectories,
    sample_trajectory,
    shift_arrival_density,
)
