"""Combinatorial bandit over the s,d-paths of a layered graph.

Paths are drawn from a mixture of the distribution induced by exponential
edge weights and a uniform exploration distribution; the single observed
path reward is turned into per-edge estimates through the pseudoinverse of
the exact co-occurrence matrix.
"""

from __future__ import annotations

import logging

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import graph as lg
from .exceptions import InvalidInputError, NumericalError
from .linalg import DEFAULT_REL_TOL, pinv, pinv_apply_on_range, range_basis, smallest_nonzero_eig
from .validation import check_generator, check_positive_int

logger = logging.getLogger(__name__)

# slack for the per-round estimator bound, which is exact in real arithmetic
_BOUND_RTOL = 1e-6


def cooccurrence_matrix(g, weights, pair_sums=None):
    """Exact ``E[u u^T]`` for the path law proportional to edge-weight products."""
    w = np.asarray(weights, dtype=float)
    M = lg.node_pair_sums(g, w) if pair_sums is None else pair_sums
    F = M[g.source]
    Bk = M[:, g.dest]
    Z = F[g.dest]
    src, dst = g.edge_src, g.edge_dst
    head = F[src] * w
    tail = w * Bk[dst]
    # X[e, f]: both edges used, e strictly before f on the path
    X = head[:, None] * M[np.ix_(dst, src)] * tail[None, :] / Z
    C = X + X.T
    C[np.diag_indices_from(C)] = head * Bk[dst] / Z
    return C


def transition_table(g, weights, backward=None):
    """Cumulative per-node probabilities of leaving through each padded out-edge."""
    w = np.asarray(weights, dtype=float)
    Bk = lg.forward_backward(g, w)[1] if backward is None else backward
    out = g.out_edges
    valid = out >= 0
    safe = np.where(valid, out, 0)
    mass = np.where(valid, w[safe] * Bk[g.edge_dst[safe]], 0.0)
    tot = mass.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        probs = np.where(tot > 0, mass / tot, 0.0)
    return np.cumsum(probs, axis=1)


def sample_edges(g, cum_weighted, cum_explore, gamma, rng, size):
    """Draw ``size`` paths as an ``(size, path_length)`` array of edge ids.

    Each path first flips a ``gamma``-coin to pick the component, then walks
    edge by edge from the source.
    """
    if size == 1:
        return _sample_one(g, cum_weighted, cum_explore, gamma, rng)[None, :]
    explore = rng.random(size) < gamma
    steps = rng.random((size, g.path_length))
    node = np.full(size, g.source, dtype=np.int64)
    out = np.empty((size, g.path_length), dtype=np.int64)
    for k in range(g.path_length):
        cum = np.where(explore[:, None], cum_explore[node], cum_weighted[node])
        choice = (steps[:, k : k + 1] >= cum).sum(axis=1)
        # guard against cumulative sums ending at 1 - eps
        last = (g.out_edges[node] >= 0).sum(axis=1) - 1
        choice = np.minimum(choice, last)
        e = g.out_edges[node, choice]
        out[:, k] = e
        node = g.edge_dst[e]
    return out


def _sample_one(g, cum_weighted, cum_explore, gamma, rng):
    # consumes the generator exactly like sample_edges(..., size=1)
    cum = cum_explore if rng.random() < gamma else cum_weighted
    steps = rng.random(g.path_length)
    node = g.source
    out = np.empty(g.path_length, dtype=np.int64)
    for k in range(g.path_length):
        row = cum[node]
        deg = int((g.out_edges[node] >= 0).sum())
        choice = min(int(np.searchsorted(row[:deg], steps[k], side="right")), deg - 1)
        e = g.out_edges[node, choice]
        out[k] = e
        node = g.edge_dst[e]
    return out


class PathDistribution:
    """Exact mixture law ``(1 - gamma) * weighted + gamma * uniform`` over paths."""

    def __init__(self, graph, weights, gamma):
        self.graph = graph
        self.weights = np.asarray(weights, dtype=float)
        self.gamma = float(gamma)
        F, _ = lg.forward_backward(graph, self.weights)
        self.Z = float(F[graph.dest])
        self.n_paths = lg.count_paths(graph)[0]

    def probability(self, edges):
        edges = np.asarray(edges, dtype=np.int64)
        weighted = float(np.prod(self.weights[edges])) / self.Z
        return (1.0 - self.gamma) * weighted + self.gamma / self.n_paths


class EdgeBandit(BaseEstimator):
    """Exponential-weights path bandit with exact co-occurrence estimation.

    Parameters
    ----------
    n_battlefields, max_troops : int
        Shape of the action set (allocations of at most ``max_troops`` troops).
    horizon : int
        Number of rounds ``T`` used by the default parameter schedule.
    reward_scale : float
        Bound on ``|reward|`` fed to :meth:`partial_fit`; the learning rate is
        divided by it.
    gamma, eta : float, optional
        Override the closed-form mixing and learning rates.
    graph : {"fixed", "original"}
        ``"fixed"`` allows spending less than ``max_troops``; ``"original"``
        forces spending exactly ``max_troops``.
    pinv_method : {"range", "eig"}
        ``"range"`` inverts the co-occurrence matrix on the (round-invariant)
        span of all path vectors; ``"eig"`` runs a full eigendecomposition
        every round.
    """

    def __init__(
        self,
        n_battlefields=3,
        max_troops=4,
        horizon=1000,
        reward_scale=1.0,
        gamma=None,
        eta=None,
        graph="fixed",
        rel_tol=DEFAULT_REL_TOL,
        eig_method="lapack",
        pinv_method="range",
        check_bounds=True,
    ):
        self.n_battlefields = n_battlefields
        self.max_troops = max_troops
        self.horizon = horizon
        self.reward_scale = reward_scale
        self.gamma = gamma
        self.eta = eta
        self.graph = graph
        self.rel_tol = rel_tol
        self.eig_method = eig_method
        self.pinv_method = pinv_method
        self.check_bounds = check_bounds

    def fit(self, X=None, y=None):
        """Build the graph, exploration statistics and the parameter schedule."""
        n = check_positive_int(self.n_battlefields, "n_battlefields")
        T = check_positive_int(self.horizon, "horizon")
        if self.reward_scale <= 0:
            raise InvalidInputError("reward_scale must be positive")
        if self.pinv_method not in ("range", "eig"):
            raise InvalidInputError(f"unknown pinv_method {self.pinv_method!r}")
        if self.graph == "fixed":
            g = lg.build_fixed(self.max_troops, n)
        elif self.graph == "original":
            g = lg.build_original(self.max_troops, n)
        else:
            raise InvalidInputError(f"unknown graph kind {self.graph!r}")
        self.graph_ = g
        self.n_paths_, self.log_n_paths_ = lg.count_paths(g)
        E = g.n_edges
        ones = np.ones(E)
        M_mu = cooccurrence_matrix(g, ones)
        self.exploration_cooccurrence_ = M_mu
        self.lambda_star_ = smallest_nonzero_eig(M_mu, self.rel_tol, self.eig_method)
        self.range_basis_ = range_basis(M_mu, self.rel_tol, self.eig_method)
        lam = self.lambda_star_
        base = np.sqrt(self.log_n_paths_ / ((n / (E * lam) + 1.0) * E * T ** (2.0 / 3.0)))
        self.gamma_raw_ = float(n / lam * base) if self.gamma is None else float(self.gamma)
        gamma = min(self.gamma_raw_, 1.0)
        if gamma < self.gamma_raw_:
            logger.warning("mixing rate %.4g exceeds 1 (T=%d); clamped to 1", self.gamma_raw_, T)
        if not 0.0 <= gamma <= 1.0:
            raise InvalidInputError(f"gamma must lie in [0, 1], got {gamma}")
        self.gamma_ = gamma
        if self.eta is None:
            # equals base / reward_scale whenever gamma was not clamped
            self.eta_ = gamma * lam / (self.reward_scale * n)
        else:
            self.eta_ = float(self.eta)
        self.log_weights_ = np.zeros(E)
        self._non_aux = [ids[~g.auxiliary[ids]] for ids, _, _ in g._transitions]
        self._cum_explore = transition_table(g, ones)
        self._reduced_cache = {}
        self._cache = None
        self.n_rounds_ = 0
        self.last_diagnostics_ = {}
        return self

    def _check(self):
        if not hasattr(self, "log_weights_"):
            check_is_fitted(self, "log_weights_")

    def _round_stats(self):
        # weights change only in update_weights, which drops this cache
        if self._cache is None:
            w = np.exp(self.log_weights_)
            M = lg.node_pair_sums(self.graph_, w)
            self._cache = {
                "w": w,
                "M": M,
                "cum": transition_table(self.graph_, w, backward=M[:, self.graph_.dest]),
            }
        return self._cache

    # -- state -----------------------------------------------------------------

    @property
    def edge_weights_(self):
        self._check()
        return np.exp(self.log_weights_)

    def path_distribution(self):
        self._check()
        return PathDistribution(self.graph_, self.edge_weights_, self.gamma_)

    def predict_proba(self, allocations):
        """Probability that the next draw plays each of ``allocations``."""
        dist = self.path_distribution()
        return np.array(
            [dist.probability(lg.allocation_to_edges(self.graph_, a)) for a in allocations]
        )

    # -- sampling --------------------------------------------------------------

    def sample_paths(self, rng, size):
        """``size`` i.i.d. draws as an ``(size, path_length)`` edge-id array."""
        self._check()
        rng = check_generator(rng)
        cum_w = self._round_stats()["cum"]
        return sample_edges(self.graph_, cum_w, self._cum_explore, self.gamma_, rng, size)

    def sample_path(self, rng):
        """One draw as a 0/1 path vector over the graph's edges."""
        edges = self.sample_paths(rng, 1)[0]
        return lg.edges_to_vector(self.graph_, edges)

    def sample_allocation(self, rng):
        """One draw as ``(allocation, path vector)``."""
        edges = self.sample_paths(rng, 1)[0]
        return lg._edges_to_allocation(self.graph_, edges), lg.edges_to_vector(self.graph_, edges)

    def sample_reduced(self, budget, rng):
        """Draw an allocation spending exactly ``budget`` troops.

        The reduced graph inherits the learned weights of coinciding edges and
        is sampled with the same exploration mixture.  Returns
        ``(allocation, reduced graph, path vector on that graph)``.
        """
        self._check()
        rng = check_generator(rng)
        if budget not in self._reduced_cache:
            g = lg.build_reduced(budget, self.graph_.n)
            idx = lg.carry_weights(self.graph_, np.arange(self.graph_.n_edges), g)
            self._reduced_cache[budget] = (g, idx, transition_table(g, np.ones(g.n_edges)))
        g, idx, cum_mu = self._reduced_cache[budget]
        cum_w = transition_table(g, self.edge_weights_[idx])
        edges = sample_edges(g, cum_w, cum_mu, self.gamma_, rng, 1)[0]
        return lg._edges_to_allocation(g, edges), g, lg.edges_to_vector(g, edges)

    # -- learning --------------------------------------------------------------

    def cooccurrence(self):
        """Exact co-occurrence matrix of the current sampling law."""
        self._check()
        st = self._round_stats()
        if "C" not in st:
            C = cooccurrence_matrix(self.graph_, st["w"], pair_sums=st["M"])
            st["C"] = (1.0 - self.gamma_) * C + self.gamma_ * self.exploration_cooccurrence_
        return st["C"]

    def estimate_loss(self, C, path, reward):
        """Per-edge reward estimate ``reward * pinv(C) @ path``."""
        u = np.asarray(path, dtype=float)
        if reward == 0:
            return np.zeros_like(u)
        if self.pinv_method == "range":
            return reward * pinv_apply_on_range(C, self.range_basis_, u)
        return reward * (pinv(C, self.rel_tol, self.eig_method) @ u)

    def update_weights(self, estimate):
        """Multiplicative update ``w_e <- w_e * exp(eta * estimate_e)`` on real edges."""
        self._check()
        est = np.asarray(estimate, dtype=float)
        g = self.graph_
        step = np.where(g.auxiliary, 0.0, self.eta_ * est)
        logw = self.log_weights_ + step
        # per-layer shifts scale every path by the same factor: law unchanged
        for ids in self._non_aux:
            if ids.size:
                logw[ids] -= logw[ids].max()
        if not np.all(np.isfinite(logw)):
            raise NumericalError("edge weights became non-finite")
        self.log_weights_ = logw
        self._cache = None
        return self

    def estimator_bound(self):
        """``reward_scale * |u|^2 / (gamma * lambda*)`` with ``|u|^2`` the path length."""
        return self.reward_scale * self.graph_.path_length / (self.gamma_ * self.lambda_star_)

    def partial_fit(self, path, reward):
        """Observe the reward of the path just played and update the weights."""
        self._check()
        if abs(reward) > self.reward_scale * (1 + 1e-12):
            raise InvalidInputError(f"|reward| = {abs(reward)} exceeds reward_scale")
        C = self.cooccurrence()
        est = self.estimate_loss(C, path, reward)
        lo, hi = lg.path_value_range(self.graph_, est)
        worst = max(abs(lo), abs(hi))
        diag = {
            "max_abs_path_estimate": worst,
            "eta_times_max": self.eta_ * worst,
            "max_abs_edge_estimate": float(np.abs(est).max()),
        }
        if self.check_bounds and self.gamma_ > 0:
            bound = self.estimator_bound()
            if worst > bound * (1 + _BOUND_RTOL):
                raise NumericalError(
                    f"estimated path reward {worst:.6g} exceeds bound {bound:.6g}"
                )
        self.update_weights(est)
        self.last_diagnostics_ = diag
        self.n_rounds_ += 1
        return self
