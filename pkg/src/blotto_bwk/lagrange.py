"""Primal-dual learner for the budget-constrained repeated Blotto game.

Each round the Edge bandit proposes an allocation from the fixed action set,
Hedge picks which resource (troops or time) prices the round, and the
chosen Lagrangian payoff is fed back to the bandit.  When the proposed
allocation overspends the remaining budget (or the budget is already
exhausted) one last allocation spending exactly the remainder is drawn
from the reduced graph and the episode ends.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator

from . import __version__
from .edge import EdgeBandit
from .exceptions import BudgetViolationError, InvalidInputError
from .game import GameConfig, payoff
from .hedge import TROOP, Hedge, cost_range
from .validation import seed_sequence

RNG_NAME = "numpy.random.PCG64 via SeedSequence(seed).spawn(2): [adversary, learner]"

CSV_COLUMNS = ["t", "u", "v", "r", "w", "L_troop", "L_time", "dual", "fed_payoff", "x_after", "terminated"]


@dataclass
class RoundRecord:
    t: int
    u: tuple
    v: tuple
    r: float
    w: int
    L_troop: float
    L_time: float
    dual: str | None
    fed_payoff: float | None
    x_after: int
    terminated: bool
    l_hat_inf: float | None = None
    path_estimate_max: float | None = None


@dataclass
class EpisodeResult:
    config: GameConfig
    records: list
    parameters: dict = field(default_factory=dict)
    adversary: dict | None = None

    @property
    def stopping_round(self):
        return self.records[-1].t if self.records else 0

    @property
    def total_reward(self):
        return float(sum(r.r for r in self.records))

    @property
    def total_consumption(self):
        return int(sum(r.w for r in self.records))

    @property
    def terminated_early(self):
        return bool(self.records) and self.records[-1].terminated

    def summary(self):
        return {
            "stopping_round": self.stopping_round,
            "total_reward": self.total_reward,
            "total_consumption": self.total_consumption,
            "terminated_early": self.terminated_early,
        }

    def to_dict(self, rounds=True):
        out = {
            "version": __version__,
            "config": self.config.to_dict(),
            "adversary": self.adversary,
            "parameters": self.parameters,
            "summary": self.summary(),
        }
        if rounds:
            out["rounds"] = [asdict(r) for r in self.records]
            for r in out["rounds"]:
                r["u"], r["v"] = list(r["u"]), list(r["v"])
        return out

    def to_json(self, rounds=True):
        # repr-based float output round-trips exactly
        return json.dumps(self.to_dict(rounds), sort_keys=True, separators=(",", ":"))

    def to_csv(self):
        """Per-round CSV; ``u`` and ``v`` expand to one column per battlefield."""
        n = self.config.n
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        header = ["t"] + [f"u{i}" for i in range(n)] + [f"v{i}" for i in range(n)]
        header += CSV_COLUMNS[3:]
        writer.writerow(header)
        for r in self.records:
            writer.writerow(
                [r.t, *r.u, *r.v, _fmt(r.r), r.w, _fmt(r.L_troop), _fmt(r.L_time),
                 r.dual or "", _fmt(r.fed_payoff), r.x_after, int(r.terminated)]
            )
        return buf.getvalue()


def _fmt(x):
    return "" if x is None else format(x, ".17g")


def lagrange_payoffs(r, w, T, B, c=None):
    """Lagrangian payoffs ``(r + 1 - (T/B) w, r)`` of the troop and time resources."""
    if not 0.0 <= r <= 1.0:
        raise InvalidInputError(f"reward {r} outside [0, 1]")
    if w < 0:
        raise InvalidInputError(f"consumption {w} is negative")
    L_troop = r + 1.0 - T * w / B
    L_time = r
    if c is not None and L_troop < 1.0 - float(c) - 1e-12:
        raise AssertionError(f"troop payoff {L_troop} below 1 - c; consumption exceeds cap")
    return L_troop, L_time


def _play(config, adversary, seed, initial_budget=None, edge_params=None):
    if adversary.n != config.n:
        raise InvalidInputError(f"adversary plays {adversary.n} battlefields, game has {config.n}")
    ss = seed_sequence(seed)
    adv_ss, learner_ss = ss.spawn(2)
    adv_rng = np.random.default_rng(adv_ss)
    rng = np.random.default_rng(learner_ss)
    T, B, c, m = config.T, config.B, config.c, config.m
    b = config.battlefield_weights
    lo, hi = cost_range(c)
    edge = EdgeBandit(
        n_battlefields=config.n, max_troops=m, horizon=T, reward_scale=hi - lo,
        **(edge_params or {}),
    ).fit()
    hedge = Hedge(horizon=T, c=float(c)).fit()
    x = B if initial_budget is None else int(initial_budget)
    if x < 0:
        raise InvalidInputError("initial budget must be nonnegative")
    records = []
    max_path_est = 0.0
    max_eta_est = 0.0
    for t in range(1, T + 1):
        v = adversary.sample(adv_rng)
        u, path = edge.sample_allocation(rng)
        w = int(u.sum())
        if w > x or x == 0:
            u, _, _ = edge.sample_reduced(x, rng)
            w = int(u.sum())
            if w != x:
                raise BudgetViolationError(f"fallback allocation spends {w}, remaining {x}")
            r = payoff(u, v, b)
            L_troop, L_time = lagrange_payoffs(r, w, T, B, c)
            x -= w
            records.append(RoundRecord(t, tuple(int(k) for k in u), tuple(int(k) for k in v),
                                       r, w, L_troop, L_time, None, None, x, True))
            break
        r = payoff(u, v, b)
        L_troop, L_time = lagrange_payoffs(r, w, T, B, c)
        dual = hedge.sample_resource(rng)
        fed = L_troop if dual == TROOP else L_time
        edge.partial_fit(path, fed)
        hedge.partial_fit(L_troop, L_time)
        x -= w
        diag = edge.last_diagnostics_
        max_path_est = max(max_path_est, diag["max_abs_path_estimate"])
        max_eta_est = max(max_eta_est, diag["eta_times_max"])
        records.append(RoundRecord(t, tuple(int(k) for k in u), tuple(int(k) for k in v),
                                   r, w, L_troop, L_time, dual, fed, x, False,
                                   diag["max_abs_edge_estimate"], diag["max_abs_path_estimate"]))
    parameters = {
        "gamma": edge.gamma_,
        "gamma_unclamped": edge.gamma_raw_,
        "eta": edge.eta_,
        "epsilon": hedge.epsilon_,
        "lambda_star": edge.lambda_star_,
        "n_edges": edge.graph_.n_edges,
        "n_paths": edge.n_paths_,
        "log_n_paths": edge.log_n_paths_,
        "reward_scale": edge.reward_scale,
        "estimator_bound": edge.estimator_bound() if edge.gamma_ > 0 else None,
        "max_abs_path_estimate": max_path_est,
        "max_eta_times_path_estimate": max_eta_est,
        "seed": [int(s) for s in np.atleast_1d(ss.entropy)],
        "initial_budget": B if initial_budget is None else int(initial_budget),
        "rng": RNG_NAME,
    }
    adv = adversary.to_dict() if hasattr(adversary, "to_dict") else None
    return EpisodeResult(config, records, parameters, adv), edge, hedge


def run_episode(config, adversary, seed, initial_budget=None, edge_params=None):
    """Play one episode; deterministic given ``seed`` (int or sequence of ints)."""
    return _play(config, adversary, seed, initial_budget, edge_params)[0]


def run_batch(config, adversary, seeds, n_jobs=1, **kwargs):
    """Independent episodes, one per seed, returned in ``seeds`` order."""
    if n_jobs == 1:
        return [run_episode(config, adversary, s, **kwargs) for s in seeds]
    return Parallel(n_jobs=n_jobs)(
        delayed(run_episode)(config, adversary, s, **kwargs) for s in seeds
    )


class LagrangeBwKEdge(BaseEstimator):
    """Estimator wrapper: ``fit(adversary)`` plays one seeded episode.

    Fitted attributes: ``result_`` (:class:`EpisodeResult`), ``edge_`` and
    ``hedge_`` (final learner states), ``config_``.
    """

    def __init__(self, n_battlefields=3, horizon=1000, budget=1000, c=1, weights=None,
                 random_state=None, pinv_method="range", eig_method="lapack"):
        self.n_battlefields = n_battlefields
        self.horizon = horizon
        self.budget = budget
        self.c = c
        self.weights = weights
        self.random_state = random_state
        self.pinv_method = pinv_method
        self.eig_method = eig_method

    def fit(self, adversary, y=None):
        self.config_ = GameConfig(self.n_battlefields, self.horizon, self.budget, self.c, self.weights)
        seed = 0 if self.random_state is None else self.random_state
        params = {"pinv_method": self.pinv_method, "eig_method": self.eig_method}
        self.result_, self.edge_, self.hedge_ = _play(self.config_, adversary, seed, edge_params=params)
        return self

    @property
    def total_reward_(self):
        return self.result_.total_reward

    @property
    def stopping_round_(self):
        return self.result_.stopping_round

    def predict_proba(self, allocations):
        """Probability the trained bandit would play each allocation next."""
        return self.edge_.predict_proba(allocations)
