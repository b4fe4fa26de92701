"""Sensitivity limits of free-electron magnetic-spin sensing in TEM."""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    CONSTANTS,
    Constants,
    CustomRadialDensity,
    GaussianDensity,
    Hydrogen1sDensity,
    Probe,
    Sample,
    SpinDensity,
    UniformBallDensity,
    interaction_profile,
    phase_parameter,
    regularizer,
)
from .estimate import (  # noqa: F401
    DefocusMeasurement,
    EstimationConfig,
    MomentumMeasurement,
    OamMeasurement,
    PositionMeasurement,
    ball_g2_mc,
    cfi,
    cfi_momentum_pixelated,
    cfi_momentum_restricted,
    cfi_oam,
    coupling_g2,
    coupling_g4,
    electrons_for_snr,
    fisher_report,
    mixing_parameter,
    optimal_focus,
    qfi,
    zero_oam_likelihood,
)
from .discriminate import (  # noqa: F401
    DiscriminationReport,
    defocus_trace_distance,
    discrimination_report,
    distance_bound_from_info,
    momentum_reduction_factor,
    momentum_trace_distance_ba,
    oam_trace_distance,
    quantum_trace_distance_ba,
    quantum_trace_distance_nb,
    shots_for_confidence,
    success_probability,
)
from .scatter import (  # noqa: F401
    BackactionState,
    DefocusPlane,
    backaction_difference_matrix,
    defocus_amplitude,
    defocus_scatter_amplitude,
    defocus_series,
    momentum_amplitude,
    momentum_scatter_amplitude,
    optimal_povm_coefficients,
)
from .specfun import (  # noqa: F401
    McSpec,
    NonConvergenceError,
    QuadratureSpec,
    assoc_laguerre,
    bessel_j,
    bessel_k,
    erf,
    erf_inv,
    integrate,
    mc_integrate,
)
