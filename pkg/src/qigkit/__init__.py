"""qigkit: weighted-grid toolkit for quantum information geometry.

Finite sample grids with positive weights stand in for a configuration space
with a reference probability measure.  On top of them the package builds
parametric state families and their transport/osmotic velocities, symmetric
logarithmic derivative operators (two equivalent forms plus an inverse map),
the quantum Fisher metric (three independent routes), reference-measure
changes with their unitary transport, loop holonomies with integer winding,
and Monte-Carlo phase averaging with an exact Gaussian oracle.
"""

from .errors import (
    BoundaryError,
    DimensionMismatchError,
    MeasureMismatchError,
    NodalPointError,
    NonSingleValuedDensityError,
    NormalizationError,
    NotAnSldError,
    QigkitError,
    RefinementNeededError,
    UnwrapAmbiguityWarning,
    WiringError,
)
from .families import (
    DEFAULT_CONSTANTS,
    AnalyticStateFamily,
    DerivativeScheme,
    PhysicalConstants,
    TabulatedStateFamily,
    VelocityField,
    derivative_state,
    evaluate,
    family_from_spec,
    gaussian_shift_family,
    linear_phase_family,
    mixed_family,
    polar_decompose,
    tabulated_from_csv,
    velocities,
    vortex_family,
    with_phase_offset,
)
from .fisher import FisherMetric, qfi_anticommutator, qfi_covariance, qfi_overlap
from .holonomy import (
    CurvatureProbe,
    HolonomyReport,
    Loop,
    circle_loop,
    compute_holonomy,
    curvature,
    curvature_of_field,
    holonomy_integral,
    loop_from_spec,
    phase_accumulate,
    reverse_loop,
    square_loop,
    winding_decompose,
)
from .measure import (
    MeasureChange,
    MeasureIndependenceReport,
    change_measure,
    conjugate_by_j,
    j_map,
    random_smooth_log_density,
    verify_measure_independence,
    with_changed_measure,
)
from .sld import (
    EtaClass,
    GaugeShift,
    SldOperator,
    gauge_shift_sld,
    invert_sld,
    sld_canonical,
    sld_eta,
    sld_residual,
)
from .space import (
    ConfigurationSpace,
    LinearOperator,
    StateVector,
    diagonal_operator,
    grid_space,
    identity,
    inner_product,
    projector,
    uniform_space,
    weighted_adjoint,
    weighted_outer,
)
from .stochastic import (
    KERNEL_BACKEND,
    AveragedAmplitude,
    FluctuationEnsemble,
    ToyAction,
    averaged_amplitude,
    cumulant_oracle,
    emergent_velocities,
    gaussian_ensemble,
    oracle_eta_field,
    oracle_velocities,
    phase_mean,
    toy_action,
)

__version__ = "0.1.0"
