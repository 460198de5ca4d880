"""Numerical toolkit for a coupled stellar-oscillation system, its residual
approximation, and asymptotic/integral-equation comparisons."""

__version__ = "0.1.0"

from .errors import (
    NumericsError,
    DomainError,
    DegeneracyError,
    PhaseError,
    StepFailure,
    BracketFailure,
    GapFailure,
    SingularBVP,
    SingularOperator,
    DegenerateDenominator,
)
from .model import (
    StellarModel,
    CoefficientSample,
    make_adiabatic_model,
    make_nonadiabatic_model,
    sample,
    curly_h,
    preset,
    model_from_config,
)
from .systems import (
    REGIMES,
    ModeParams,
    StateVector,
    mode_params,
    assemble_full_matrix,
    assemble_residual_matrix,
    assemble_lw_matrix,
    coupling_G,
    coupling_C,
    es_to_lw,
    lw_to_es,
)
from .propagate import (
    Grid,
    chebyshev_grid,
    integrate_fundamental,
    quad_gl,
    l2_norm,
    sup_norm,
)
from .asymptotics import (
    PhaseKind,
    theta,
    make_theta,
    phase_total,
    residual_basis,
    residual_delta,
    full_asymptotic_matrix,
    compare_asymptotic,
    matched_deviation,
    deviation_sweep,
)
from .bvp import (
    SLBC,
    PiBC,
    MultiPointSpec,
    solve_two_point,
    sl_eigenvalues,
    choose_sigma_bc,
)
from .greens import (
    KernelGrid,
    GreensEvaluator,
    gauss_grid,
    dense_residual_fundamental,
    greens_matrix,
    kernel_F,
    symmetric_kernel,
    pattern_kernel_block,
    kernel_coefficients,
    delta_pair_report,
)

__all__ = [
    "NumericsError", "DomainError", "DegeneracyError", "PhaseError",
    "StepFailure", "BracketFailure", "GapFailure", "SingularBVP",
    "SingularOperator", "DegenerateDenominator",
    "StellarModel", "CoefficientSample", "make_adiabatic_model",
    "make_nonadiabatic_model", "sample", "curly_h", "preset",
    "model_from_config",
    "REGIMES", "ModeParams", "StateVector", "mode_params",
    "assemble_full_matrix", "assemble_residual_matrix", "assemble_lw_matrix",
    "coupling_G", "coupling_C", "es_to_lw", "lw_to_es",
    "Grid", "chebyshev_grid", "integrate_fundamental", "quad_gl",
    "l2_norm", "sup_norm",
    "PhaseKind", "theta", "make_theta", "phase_total", "residual_basis",
    "residual_delta", "full_asymptotic_matrix", "compare_asymptotic",
    "matched_deviation", "deviation_sweep",
    "SLBC", "PiBC", "MultiPointSpec", "solve_two_point", "sl_eigenvalues",
    "choose_sigma_bc",
    "KernelGrid", "GreensEvaluator", "gauss_grid",
    "dense_residual_fundamental", "greens_matrix", "kernel_F",
    "symmetric_kernel", "pattern_kernel_block", "kernel_coefficients",
    "delta_pair_report",
    "__version__",
]
