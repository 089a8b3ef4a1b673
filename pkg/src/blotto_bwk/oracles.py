"""Exact brute-force benchmarks for small instances.

``opt_dp`` is the best expected cumulative reward of a budget-feasible
dynamic policy that knows the adversary's distribution; ``opt_lp`` is the
per-round value of the linear relaxation, with ``T * opt_lp >= opt_dp``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidInputError, SizeLimitError
from .game import compositions
from .validation import check_allocation, check_generator

MAX_ACTIONS = 10**6
MAX_SUPPORT = 10**5
# cells x actions touched by the arm-level value iteration
MAX_DP_WORK = 10**8
# cells x consumption levels touched by the level-aggregated value iteration
MAX_LEVEL_DP_WORK = 2 * 10**10


def enumerate_actions(m, n):
    """All nonnegative integer ``n``-vectors with sum at most ``m``, lexicographic."""
    if m < 0 or n < 1:
        raise InvalidInputError(f"need m >= 0 and n >= 1, got m={m}, n={n}")
    size = math.comb(m + n, n)
    if size > MAX_ACTIONS:
        raise SizeLimitError(f"action set has {size} > {MAX_ACTIONS} allocations")
    acts = [c for total in range(m + 1) for c in compositions(total, n)]
    acts.sort()
    return np.array(acts, dtype=np.int64).reshape(len(acts), n)


@dataclass
class ArmTable:
    actions: np.ndarray
    rewards: np.ndarray
    consumption: np.ndarray
    exact: bool = True

    def __post_init__(self):
        self._index = {tuple(a): i for i, a in enumerate(self.actions.tolist())}

    def __len__(self):
        return self.actions.shape[0]

    def expected_reward(self, allocation):
        return float(self.rewards[self._index[tuple(int(x) for x in allocation)]])

    def level_best(self, m=None):
        """Best expected reward among arms spending exactly ``k``, for k = 0..m."""
        m = int(self.consumption.max()) if m is None else m
        best = np.full(m + 1, -np.inf)
        np.maximum.at(best, self.consumption[self.consumption <= m], self.rewards[self.consumption <= m])
        return best


def _expected_payoffs(actions, support, weights, chunk=2048):
    b = np.asarray(weights, dtype=float)
    V = np.array([v for v, _ in support], dtype=np.int64)
    P = np.array([p for _, p in support], dtype=float)
    out = np.zeros(actions.shape[0])
    for start in range(0, V.shape[0], chunk):
        v = V[start : start + chunk]
        a = actions[:, None, :]
        score = ((a > v[None]) + 0.5 * (a == v[None])) @ b
        out += score @ P[start : start + chunk]
    return out


def expected_reward_table(actions, adversary, weights, mc_samples=None, rng=None):
    """Per-arm expected reward against ``adversary``.

    Exact when the adversary's support can be listed (at most ``MAX_SUPPORT``
    points); otherwise a Monte-Carlo estimate from ``mc_samples`` draws.
    """
    actions = np.asarray(actions, dtype=np.int64)
    support = None
    try:
        if _support_size(adversary) <= MAX_SUPPORT:
            support = adversary.support()
    except (AttributeError, NotImplementedError):
        support = None
    if support is not None:
        rewards = _expected_payoffs(actions, support, weights)
        exact = True
    else:
        if not mc_samples:
            raise SizeLimitError("adversary support too large; pass mc_samples")
        rng = check_generator(rng)
        draws = [(adversary.sample(rng), 1.0 / mc_samples) for _ in range(mc_samples)]
        rewards = _expected_payoffs(actions, draws, weights)
        exact = False
    return ArmTable(actions, rewards, actions.sum(axis=1), exact)


def _support_size(adversary):
    if hasattr(adversary, "total"):
        return math.comb(adversary.total + adversary.n - 1, adversary.n - 1)
    if hasattr(adversary, "trials"):
        return int(np.prod(np.asarray(adversary.trials) + 1))
    return len(adversary.support())


def opt_lp(table, B, T):
    """Optimal per-round value of the single-resource LP relaxation.

    Returns ``(value, mixture)`` where ``mixture`` maps arm indices to
    probabilities.  With one budget row plus the simplex, some optimum uses
    at most two consumption levels; within a level only its best arm
    matters, so every single level and every straddling pair is checked.
    """
    rho = B / T
    levels = np.unique(table.consumption)
    best_arm = {}
    for k in levels:
        idx = np.flatnonzero(table.consumption == k)
        best_arm[int(k)] = int(idx[np.argmax(table.rewards[idx])])
    g = {k: float(table.rewards[i]) for k, i in best_arm.items()}
    best = (-np.inf, None)
    for k in g:
        if k <= rho and g[k] > best[0]:
            best = (g[k], {best_arm[k]: 1.0})
    for k1 in g:
        for k2 in g:
            if k1 < rho < k2:
                theta = (k2 - rho) / (k2 - k1)
                val = theta * g[k1] + (1.0 - theta) * g[k2]
                if val > best[0]:
                    best = (val, {best_arm[k1]: theta, best_arm[k2]: 1.0 - theta})
    if best[1] is None:
        raise InvalidInputError("no arm satisfies the budget constraint")
    return best


def opt_dp(table, B, T, m):
    """Best expected cumulative reward of a budget-feasible dynamic policy.

    Value iteration ``V(t, x) = max_{w(a) <= min(m, x)} rbar(a) + V(t+1, x - w(a))``
    with ``V(T+1, .) = 0``; since only ``w(a)`` enters the dynamics the max
    over arms is taken per consumption level first.
    """
    g = table.level_best(m)
    work = (m + 1) * (B + 1) * T
    if work > MAX_LEVEL_DP_WORK:
        raise SizeLimitError(f"value iteration needs {work:.3g} cell updates")
    V = np.zeros(B + 1)
    nxt = np.empty(B + 1)
    for _ in range(T):
        nxt.fill(-np.inf)
        for k in range(min(m, B) + 1):
            if np.isfinite(g[k]):
                np.maximum(nxt[k:], g[k] + V[: B + 1 - k], out=nxt[k:])
        V, nxt = nxt, V
    return float(V[B])


def opt_dp_arms(table, B, T, m):
    """Arm-level value iteration (reference implementation for small instances)."""
    S = len(table)
    if S * (B + 1) * T > MAX_DP_WORK:
        raise SizeLimitError("instance too large for the arm-level dynamic program")
    V = [0.0] * (B + 1)
    arms = list(zip(table.rewards.tolist(), table.consumption.tolist()))
    for _ in range(T):
        V = [
            max(r + V[x - w] for r, w in arms if w <= min(m, x))
            for x in range(B + 1)
        ]
    return V[B]


def regret(episode, opt_dp_value):
    """Realized regret: benchmark minus the learner's collected reward."""
    return float(opt_dp_value) - float(episode.total_reward)


def expected_reward_sum(episode, table):
    """Sum of per-round expected rewards of the allocations actually played."""
    return float(sum(table.expected_reward(check_allocation(r.u)) for r in episode.records))
