"""Random k-XORSAT finite-size scaling: theory and Monte Carlo validation.

The satisfiability probability of a configuration-model k-XORSAT system
with n equations and m = floor(n rho_k + r sqrt(n)) variables approaches
Phi(r * s_k).  This package computes rho_k and s_k from first principles
(root-finding, the mean peeling ODE, covariance integration) and validates
the law end to end by simulation: instance generation, peeling to the
2-core, exact GF(2) satisfiability.
"""

from .instance import DegreeTable, Instance, ParseError, decode, degrees, encode, generate, m_from_r
from .gf2 import Gf2System, SolveResult, brute_force, from_instance, solve
from .peel import CoreResult, PeelTrace, core_of, peel_run, sample_kernel
from .theory import (
    KernelProbs,
    NumericError,
    StatePoint,
    SymMatrix2,
    TheoryConstants,
    ValidityWarning,
    constants,
    crit_derivatives,
    discrete_moments,
    drift,
    f1,
    f1_inv,
    jacobian,
    kernel_probs,
    noise_cov,
    normal_cdf,
    q_init,
    q_integrate,
    scaling_constant,
    theta_star,
    thresholds,
    y_closed,
    y_init,
)
from .experiments import (
    KernelCompareReport,
    ScanConfig,
    ScanRow,
    SurplusReport,
    TrajReport,
    compare_kernels,
    run_scan,
    run_trajectory,
    surplus_stats,
    wilson_interval,
)

__version__ = "0.1.0"
