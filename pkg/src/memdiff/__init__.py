"""Solvers and verification suites for nonlinear diffusion with memory.

The equation family is d/dt (k*[u - u0]) = lap(Phi(u)) on Dirichlet boxes,
with k a nonnegative nonincreasing kernel admitting a complement that
convolves with it to the constant 1 (the power kernel
t^(-alpha)/Gamma(1-alpha) being the canonical case) and Phi an odd strictly
increasing flux law such as |r|^(m-1) r.
"""

from ._backend import NUMBA_ENABLED, backend_name
from .errors import (
    ConfigurationError,
    DomainError,
    GridMismatchError,
    InconsistentPairError,
    MemdiffError,
    SingularDeconvolutionError,
    StepFailureError,
    SupportError,
)
from .fracode import (
    OdeProblem,
    envelope_check,
    mittag_leffler,
    nonextinction_comparator,
    solve_power_ode,
)
from .harness import (
    Check,
    ExperimentConfig,
    VerificationReport,
    initial_profile,
    run_suites,
    suite_contraction,
    suite_kernels,
    suite_mass,
    suite_nonextinction,
    truncate_data,
)
from .kernels import (
    KernelWeights,
    SampledFunction,
    TimeGrid,
    discrete_convolve,
    kernel_l1_distance,
    nonlocal_derivative,
    numeric_complement,
    resolvent_kernel,
    rl_weights,
    sonine_complement,
    sonine_residual,
    volterra_relaxation,
    yosida_kernel,
)
from .nonlinearity import Nonlinearity, power_law, regularize
from .spatial import (
    SpaceGrid,
    build_laplacian,
    bump_weight,
    cutoff,
    gaussian,
    lq_norm,
    mass,
    torsion_zeta,
    weighted_l1,
)
from .stepper import SolveConfig, StateHistory, diagnostics, solve, step, weak_residual

__version__ = "0.1.0"
