"""Numerics for a worst-case-optimal second-price auction with a random reserve.

The package solves the reserve parameter from the known signal mean, builds
the reserve and worst-case signal distributions in closed form, evaluates
revenue three independent ways (closed form, quadrature, Monte Carlo), runs
the adversary's constrained minimization, bounds all incentive-compatible
mechanisms with a quantile-grid LP, and covers the second-moment and
multi-valuation extensions.
"""

from .adversary import (
    AdversaryResult,
    GridDistribution,
    P1P2Report,
    SaddleReport,
    check_p1_p2,
    minimize_revenue,
    pav_nondecreasing,
    reserve_with_linear_ramp,
    reserve_with_zero_atom,
    verify_pointwise_saddle,
)
from .constants import (
    ModelParams,
    SolvedConstants,
    reserve_cdf,
    reserve_cdf_integral,
    reserve_pdf,
    signal_cdf,
    signal_pdf,
    signal_quantile,
    solve_a,
)
from .distributions import PiecewiseCdf, read_cdf_csv, write_cdf_csv
from .errors import (
    ConvergenceError,
    DegenerateError,
    DomainError,
    MaxminError,
    MeanMismatchError,
    MonotonicityError,
)
from .extensions import (
    MpsReport,
    SecondMomentParams,
    SecondMomentSolution,
    mps_check,
    second_moment_solution,
)
from .functional import FunctionalValue, check_ode, lagrangian_integrand, revenue_functional
from .mechanism import (
    BidProfile,
    Outcome,
    RevenueReport,
    dominated_equilibrium_revenue,
    mc_revenue,
    outcome,
    sample_reserve,
    uniform_pairs,
)
from .upper_bound import (
    DiscreteDirectMechanism,
    analytic_bound,
    bic_bir_violations,
    discretize_truthful_mechanism,
    envelope_payments,
    lp_max_revenue,
    truthful_interim_allocation,
)

__version__ = "0.1.0"
