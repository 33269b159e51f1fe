"""Numerical laboratory for the diffusively scaled Jin-Xin relaxation system."""
from .green import (
    KernelSplit,
    ProjectorSet,
    SymbolMatrix,
    eigenvalues_E,
    hyperbolic_kernel_hat,
    kernel_split,
    matexp_E,
    parabolic_kernel_hat,
    projectors_infinity,
    projectors_zero,
    symbol_E,
)
from .harness import (
    NormReport,
    RateFit,
    StudyResult,
    decay_study,
    e_m_functional,
    epsilon_study,
    fit_decay,
    norms,
    sup_functionals,
)
from .model import (
    Grid,
    ModelParams,
    ParameterDomainError,
    SpectralField,
    StateBGK,
    StateCD,
    StateUV,
    bgk_to_uv,
    cd_to_uv,
    gaussian,
    maxwellians,
    symmetrizer,
    uv_to_bgk,
    uv_to_cd,
    well_prepared_data,
)
from .solvers import (
    BlowUpError,
    SolverConfig,
    SolverError,
    Trajectory,
    bgk_solve,
    compute_S,
    default_dt,
    linear_propagate,
    nonlinear_jinxin_solve,
    parabolic_solve,
)

__version__ = "0.1.0"
