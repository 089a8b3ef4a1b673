"""Full-information Hedge over the two resources of the Lagrangian game."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .exceptions import InvalidInputError
from .validation import check_generator, check_positive_int

TROOP = "troop"
TIME = "time"
RESOURCES = (TROOP, TIME)


def cost_range(c):
    """Joint range of the two Lagrangian payoffs: troop in ``[1 - c, 2]``, time in ``[0, 1]``."""
    return min(0.0, 1.0 - float(c)), 2.0


class Hedge(BaseEstimator):
    """Exponential weights over ``(troop, time)`` minimizing Lagrangian payoffs.

    Costs arrive in ``cost_range(c)`` (``[1 - c, 2]`` once ``c >= 1``) and
    are mapped affinely to ``[0, 1]`` before the update
    ``w_i <- w_i * exp(-epsilon * cost_i)`` with ``epsilon = sqrt(8 ln 2 / T)``.
    """

    def __init__(self, horizon=1000, c=1.0, epsilon=None):
        self.horizon = horizon
        self.c = c
        self.epsilon = epsilon

    def fit(self, X=None, y=None):
        T = check_positive_int(self.horizon, "horizon")
        if float(self.c) <= 0:
            raise InvalidInputError("c must be positive")
        self.cost_range_ = cost_range(self.c)
        self.epsilon_ = (
            float(np.sqrt(8.0 * np.log(2.0) / T)) if self.epsilon is None else float(self.epsilon)
        )
        self.weights_ = np.ones(2)
        return self

    def normalize(self, cost):
        lo, hi = self.cost_range_
        return (np.asarray(cost, dtype=float) - lo) / (hi - lo)

    def predict_proba(self, X=None):
        """Current selection probabilities of ``(troop, time)``."""
        return self.weights_ / self.weights_.sum()

    def sample_resource(self, rng):
        rng = check_generator(rng)
        p_troop = self.weights_[0] / self.weights_.sum()
        return TROOP if rng.random() < p_troop else TIME

    def partial_fit(self, cost_troop, cost_time):
        """Full-feedback update with both resources' costs."""
        lo, hi = self.cost_range_
        costs = np.array([cost_troop, cost_time], dtype=float)
        tol = 1e-12 * max(1.0, hi - lo)
        if np.any(costs < lo - tol) or np.any(costs > hi + tol):
            raise InvalidInputError(f"costs {costs.tolist()} outside [{lo}, {hi}]")
        w = self.weights_ * np.exp(-self.epsilon_ * self.normalize(costs))
        self.weights_ = w / w.max()
        return self

    update = partial_fit
