"""Budget-constrained repeated Colonel Blotto: primal-dual bandit learner and exact oracles."""

__version__ = "0.1.0"

from .edge import EdgeBandit  # noqa: E402
from .game import (  # noqa: E402
    BudgetState,
    Categorical,
    FixedAllocation,
    GameConfig,
    IndependentBinomial,
    UniformSum,
    payoff,
    sample_adversary,
    step_state,
)
from .hedge import Hedge  # noqa: E402
from .lagrange import EpisodeResult, LagrangeBwKEdge, RoundRecord, lagrange_payoffs, run_batch, run_episode  # noqa: E402

__all__ = [
    "BudgetState",
    "Categorical",
    "EdgeBandit",
    "EpisodeResult",
    "FixedAllocation",
    "GameConfig",
    "Hedge",
    "IndependentBinomial",
    "LagrangeBwKEdge",
    "RoundRecord",
    "UniformSum",
    "lagrange_payoffs",
    "payoff",
    "run_batch",
    "run_episode",
    "sample_adversary",
    "step_state",
]
