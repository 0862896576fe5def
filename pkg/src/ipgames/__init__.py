"""Equilibrium computation for integer programming games.

Games with bilateral (pairwise separable) payoffs, solved by growing a
finite sampled game one exact best response at a time.  Includes a
support-enumeration solver with forced/excluded support constraints, a
backtracking search variant, correlated-equilibrium computation, exact
per-game best-response engines, and independent verification.
"""

from .driver import (
    EQUILIBRIUM,
    ITERATION_LIMIT,
    TIME_LIMIT,
    SgmConfig,
    SgmOutcome,
    deviation_reaction,
    initialization,
    player_order,
    run,
    run_msgm,
    run_sgm,
    run_sgm_ce,
)
from .lp import LpProblem, LpResult, SolverFailure, solve_lp
from .model import (
    BilateralGame,
    DeviationRecord,
    DuplicateStrategyError,
    JointDistribution,
    MixedStrategy,
    NoStrategyError,
    Profile,
    PureStrategy,
    SampledGame,
    expected_payoff,
)
from .support_search import (
    SampledEquilibrium,
    conditionally_dominated,
    find_ne,
    solve_ce,
    solve_feasibility,
    sort_sizes,
    sort_strategies,
    tau_based_ne,
)
from .verify import VerificationReport, direct_pns, enumerate_strategies, verify_ce, verify_ne

__all__ = [
    "BilateralGame",
    "DeviationRecord",
    "DuplicateStrategyError",
    "EQUILIBRIUM",
    "ITERATION_LIMIT",
    "JointDistribution",
    "LpProblem",
    "LpResult",
    "MixedStrategy",
    "NoStrategyError",
    "Profile",
    "PureStrategy",
    "SampledEquilibrium",
    "SampledGame",
    "SgmConfig",
    "SgmOutcome",
    "SolverFailure",
    "TIME_LIMIT",
    "VerificationReport",
    "conditionally_dominated",
    "deviation_reaction",
    "direct_pns",
    "enumerate_strategies",
    "expected_payoff",
    "find_ne",
    "initialization",
    "player_order",
    "run",
    "run_msgm",
    "run_sgm",
    "run_sgm_ce",
    "solve_ce",
    "solve_feasibility",
    "solve_lp",
    "sort_sizes",
    "sort_strategies",
    "tau_based_ne",
    "verify_ce",
    "verify_ne",
]
