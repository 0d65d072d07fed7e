"""Time-fractional diffusion with a time-dependent potential: forward solver
and recovery of the potential from single-point observations."""

__version__ = "0.1.0"

from .fracquad import (  # noqa: F401
    CqWeights,
    TimeGrid,
    caputo_becq,
    caputo_l1_oracle,
    cq_weights,
    gamma_fn,
    log_gamma_fn,
    mittag_leffler,
)
from .fem1d import (  # noqa: F401
    FemOperators,
    Mesh1D,
    assemble,
    build_mesh,
    discrete_laplacian_apply,
    eval_at_point,
    l2_project,
    ritz_project,
)
from .forward import (  # noqa: F401
    PotentialPath,
    ProblemData,
    Trajectory,
    exact_constant_coeff_solution,
    solve_forward,
    solve_forward_nonlinear,
)
from .inverse import (  # noqa: F401
    Measurement,
    NoisePositivityError,
    ReconstructionConfig,
    ReconstructionReport,
    SolverContext,
    add_noise,
    cutoff,
    fixed_point_step,
    reconstruct,
)
from .metrics import NormSpec, empirical_rate, fitted_rate, lp_norm, reconstruction_error  # noqa: F401
