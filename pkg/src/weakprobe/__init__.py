"""Optimal probe wave functions for weak-value amplification.

Probes live on the bounded momentum domain ``|k| <= pi/2``; postselection
multiplies them by the kernel ``B(k) = cos k - i A_w sin k``.  The package
builds the gauge-fixed stationary probe, analyzes final probes on the
discrete position spectrum ``x = 2n``, and sweeps trial families.
"""

from .errors import (
    BadParams,
    DegenerateConstraints,
    DegenerateFit,
    DomainMismatch,
    EmptySpectrum,
    KernelZero,
    NotConverged,
    NumericalError,
    OrthogonalSelection,
    PostselectionAnnihilated,
    ValidationError,
    WeakProbeError,
    ZeroNorm,
)
from .families import FamilyId, SweepRow, TrialFamily, evaluate, fit_scaling, make_family, sweep
from .grid import (
    MomentumGrid,
    ProbeWaveFunction,
    derivative,
    eigenstate,
    expectation_x,
    gauge_translate,
    norm_squared,
    normalize,
    variance_x,
)
from .postselection import (
    InvolutiveObservable,
    PostselectionKernel,
    QubitState,
    apply_kernel,
    final_probe,
    kernel_eval,
    shift,
    weak_value,
)
from .spectrum import (
    PositionAmplitudes,
    discrete_moments,
    from_position_coefficients,
    kronecker_check,
    position_amplitude_continuum,
    to_position_coefficients,
    variance_divergence_scan,
)
from .variational import (
    Branch,
    GaugeFixedFunctional,
    Normalizability,
    OptimizerConfig,
    StationaryResult,
    analytic_optimal_probe,
    find_stationary,
    functional_value,
    gauge_fix,
    gradient,
    normalizability_check,
    project_constraints,
    stationarity_check,
)

__version__ = "0.1.0"

__all__ = [
    "BadParams",
    "Branch",
    "DegenerateConstraints",
    "DegenerateFit",
    "DomainMismatch",
    "EmptySpectrum",
    "FamilyId",
    "GaugeFixedFunctional",
    "InvolutiveObservable",
    "KernelZero",
    "MomentumGrid",
    "Normalizability",
    "NotConverged",
    "NumericalError",
    "OptimizerConfig",
    "OrthogonalSelection",
    "PositionAmplitudes",
    "PostselectionAnnihilated",
    "PostselectionKernel",
    "ProbeWaveFunction",
    "QubitState",
    "StationaryResult",
    "SweepRow",
    "TrialFamily",
    "ValidationError",
    "WeakProbeError",
    "ZeroNorm",
    "analytic_optimal_probe",
    "apply_kernel",
    "derivative",
    "discrete_moments",
    "eigenstate",
    "evaluate",
    "expectation_x",
    "final_probe",
    "find_stationary",
    "fit_scaling",
    "from_position_coefficients",
    "functional_value",
    "gauge_fix",
    "gauge_translate",
    "gradient",
    "kernel_eval",
    "kronecker_check",
    "make_family",
    "norm_squared",
    "normalizability_check",
    "normalize",
    "position_amplitude_continuum",
    "project_constraints",
    "shift",
    "stationarity_check",
    "sweep",
    "to_position_coefficients",
    "variance_divergence_scan",
    "variance_x",
    "weak_value",
]
