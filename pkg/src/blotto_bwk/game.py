"""One-shot Colonel Blotto payoff, budget dynamics and stochastic adversaries."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import stats

from .exceptions import BudgetViolationError, InvalidInputError
from .validation import check_allocation, check_battlefield_weights, check_positive_int


def _as_fraction(c):
    if isinstance(c, Fraction):
        return c
    if isinstance(c, float):
        # decimal string keeps e.g. 0.1 exact instead of its binary expansion
        return Fraction(repr(c))
    return Fraction(c)


@dataclass(frozen=True)
class GameConfig:
    """Parameters of the budget-constrained repeated Blotto game.

    The per-round cap ``m = floor(c * B / T)`` is derived, not passed.
    """

    n: int
    T: int
    B: int
    c: Fraction | float | int = 1
    weights: tuple | None = None
    m: int = field(init=False)

    def __post_init__(self):
        check_positive_int(self.n, "n")
        check_positive_int(self.T, "T")
        check_positive_int(self.B, "B")
        c = _as_fraction(self.c)
        if c <= 0:
            raise InvalidInputError(f"c must be positive, got {self.c!r}")
        b = check_battlefield_weights(self.weights, self.n)
        m = math.floor(c * self.B / self.T)
        if m < 1:
            raise InvalidInputError(
                f"per-round cap m = floor(c*B/T) = {m}; need c*B >= T"
            )
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "weights", tuple(float(x) for x in b))
        object.__setattr__(self, "m", m)

    @property
    def battlefield_weights(self):
        return np.asarray(self.weights)

    def to_dict(self):
        return {
            "n": self.n,
            "T": self.T,
            "B": self.B,
            "c": str(self.c),
            "m": self.m,
            "weights": list(self.weights),
        }


@dataclass(frozen=True)
class BudgetState:
    x: int
    t: int = 1

    def __post_init__(self):
        if self.x < 0:
            raise BudgetViolationError(f"negative budget {self.x}")


def payoff(u, v, weights):
    """Learner's reward: won weight plus half of every tied battlefield."""
    b = np.asarray(weights, dtype=float)
    u = check_allocation(u, b.shape[0], "u")
    v = check_allocation(v, b.shape[0], "v")
    return float(b @ (u > v) + 0.5 * (b @ (u == v)))


def step_state(state, u):
    spend = int(check_allocation(u, name="u").sum())
    if spend > state.x:
        raise BudgetViolationError(
            f"allocation spends {spend} troops but only {state.x} remain"
        )
    return BudgetState(state.x - spend, state.t + 1)


# -- adversaries ------------------------------------------------------------


class FixedAllocation:
    """Point mass on a single allocation."""

    def __init__(self, allocation):
        self.allocation = check_allocation(allocation, name="allocation")
        self.n = self.allocation.shape[0]

    def sample(self, rng):
        return self.allocation.copy()

    def support(self):
        return [(self.allocation.copy(), 1.0)]

    def to_dict(self):
        return {"type": "FixedAllocation", "allocation": self.allocation.tolist()}


class Categorical:
    """Finite distribution over explicitly listed allocations."""

    def __init__(self, allocations, probabilities):
        allocs = [check_allocation(a, name="support allocation") for a in allocations]
        if not allocs:
            raise InvalidInputError("Categorical needs a nonempty support")
        n = allocs[0].shape[0]
        if any(a.shape[0] != n for a in allocs):
            raise InvalidInputError("support allocations differ in length")
        p = np.asarray(probabilities, dtype=float)
        if p.shape != (len(allocs),):
            raise InvalidInputError("one probability per support allocation required")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise InvalidInputError("probabilities must be nonnegative and sum to 1")
        self.allocations = np.array(allocs)
        self.probabilities = p
        self._cdf = np.cumsum(p)
        self.n = n

    def sample(self, rng):
        k = int(np.searchsorted(self._cdf, rng.random(), side="right"))
        return self.allocations[min(k, len(self._cdf) - 1)].copy()

    def support(self):
        return [(a.copy(), float(q)) for a, q in zip(self.allocations, self.probabilities)]

    def to_dict(self):
        return {
            "type": "Categorical",
            "allocations": self.allocations.tolist(),
            "probabilities": self.probabilities.tolist(),
        }


class UniformSum:
    """Uniform over nonnegative integer vectors of length ``n`` summing to ``total``."""

    def __init__(self, total, n):
        self.total = check_positive_int(total, "total", minimum=0)
        self.n = check_positive_int(n, "n")

    def sample(self, rng):
        # stars and bars: n-1 distinct bar slots among total+n-1 positions
        slots = self.total + self.n - 1
        bars = np.sort(rng.choice(slots, size=self.n - 1, replace=False))
        edges = np.concatenate(([-1], bars, [slots]))
        return (np.diff(edges) - 1).astype(np.int64)

    def support(self):
        comps = compositions(self.total, self.n)
        p = 1.0 / len(comps)
        return [(np.array(a, dtype=np.int64), p) for a in comps]

    def to_dict(self):
        return {"type": "UniformSum", "total": self.total}


class IndependentBinomial:
    """Each battlefield receives an independent Binomial(trials, p) troop count."""

    def __init__(self, trials, p, n):
        self.n = check_positive_int(n, "n")
        self.trials = check_allocation(np.broadcast_to(trials, (self.n,)), self.n, "trials")
        self.p = np.broadcast_to(np.asarray(p, dtype=float), (self.n,)).copy()
        if np.any((self.p < 0) | (self.p > 1)):
            raise InvalidInputError("success probabilities must lie in [0, 1]")

    def sample(self, rng):
        return rng.binomial(self.trials, self.p).astype(np.int64)

    def support(self):
        marginals = [
            stats.binom.pmf(np.arange(k + 1), k, q) for k, q in zip(self.trials, self.p)
        ]
        out = []
        for combo in itertools.product(*(range(k + 1) for k in self.trials)):
            prob = float(np.prod([marginals[i][j] for i, j in enumerate(combo)]))
            if prob > 0:
                out.append((np.array(combo, dtype=np.int64), prob))
        return out

    def to_dict(self):
        return {"type": "IndependentBinomial", "trials": self.trials.tolist(), "p": self.p.tolist()}


def sample_adversary(model, rng):
    return model.sample(rng)


def compositions(total, n):
    """All nonnegative integer n-vectors summing to ``total``, lexicographic."""
    if n == 1:
        return [(total,)]
    return [(k,) + rest for k in range(total + 1) for rest in compositions(total - k, n - 1)]


def adversary_from_dict(spec, n):
    """Build an adversary model from its ``to_dict`` form."""
    kind = spec.get("type")
    if kind == "FixedAllocation":
        model = FixedAllocation(spec["allocation"])
    elif kind == "Categorical":
        model = Categorical(spec["allocations"], spec["probabilities"])
    elif kind == "UniformSum":
        model = UniformSum(spec["total"], n)
    elif kind == "IndependentBinomial":
        model = IndependentBinomial(spec["trials"], spec["p"], n)
    else:
        raise InvalidInputError(f"unknown adversary type {kind!r}")
    if model.n != n:
        raise InvalidInputError(f"adversary plays {model.n} battlefields, game has {n}")
    return model
