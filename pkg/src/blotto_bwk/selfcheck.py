"""Statistical self-tests of the path sampler, co-occurrence matrix and estimator.

Every check compares the production code path against an independent
reference: exhaustive path enumeration or plain Monte-Carlo averages.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import graph as lg
from .edge import EdgeBandit
from .linalg import pinv


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        extra = f" ({self.detail})" if self.detail else ""
        return f"[{status}] {self.name}: {self.value:.4g} vs tol {self.tolerance:.4g}{extra}"


def path_matrix(g):
    """All s,d-paths as rows of a 0/1 matrix, plus their edge-id arrays."""
    paths = lg.enumerate_paths(g)
    U = np.zeros((len(paths), g.n_edges))
    for i, p in enumerate(paths):
        U[i, p] = 1.0
    return U, paths


def enumerated_law(bandit, paths):
    """Exact mixture probability of each enumerated path, by direct products."""
    w = bandit.edge_weights_
    weighted = np.array([np.prod(w[p]) for p in paths])
    weighted /= weighted.sum()
    return (1.0 - bandit.gamma_) * weighted + bandit.gamma_ / len(paths)


def randomized_bandit(m, n, gamma, rng, graph="fixed", spread=1.0):
    eb = EdgeBandit(n_battlefields=n, max_troops=m, horizon=1000, gamma=gamma, graph=graph).fit()
    logw = rng.uniform(-spread, spread, eb.graph_.n_edges)
    logw[eb.graph_.auxiliary] = 0.0
    eb.log_weights_ = logw
    eb._cache = None
    return eb


def empirical_tv(bandit, paths, samples, rng):
    draws = bandit.sample_paths(rng, samples)
    index = {tuple(p): i for i, p in enumerate(paths)}
    counts = np.zeros(len(paths))
    for row in map(tuple, draws):
        counts[index[row]] += 1
    exact = np.array([bandit.path_distribution().probability(p) for p in paths])
    return 0.5 * np.abs(counts / samples - exact).sum()


def check_sampler(m=4, n=3, gammas=(0.0, 0.3, 1.0), samples=100_000, seed=0, tol=0.01):
    rng = np.random.default_rng(seed)
    out = []
    for gamma in gammas:
        eb = randomized_bandit(m, n, gamma, rng)
        _, paths = path_matrix(eb.graph_)
        tv = empirical_tv(eb, paths, samples, rng)
        out.append(CheckResult(f"sampler law gamma={gamma}", tv <= tol, tv, tol))
    return out


def check_cooccurrence(m=4, n=3, gamma=0.3, samples=100_000, seed=0, exact_tol=1e-12, mc_tol=0.01):
    rng = np.random.default_rng(seed)
    eb = randomized_bandit(m, n, gamma, rng)
    U, paths = path_matrix(eb.graph_)
    p = enumerated_law(eb, paths)
    reference = (U * p[:, None]).T @ U
    C = eb.cooccurrence()
    exact_err = float(np.abs(C - reference).max())
    draws = eb.sample_paths(rng, samples)
    V = np.zeros((samples, eb.graph_.n_edges))
    np.put_along_axis(V, draws, 1.0, axis=1)
    mc_err = float(np.abs(C - V.T @ V / samples).max())
    return [
        CheckResult("co-occurrence vs enumeration", exact_err <= exact_tol, exact_err, exact_tol),
        CheckResult("co-occurrence vs Monte-Carlo", mc_err <= mc_tol, mc_err, mc_tol),
    ]


def estimator_trial(m=4, n=3, gamma=0.3, samples=100_000, seed=0, reward_scale=1.0):
    """Sample paths under a fixed state with fixed per-edge rewards.

    Returns the estimates, the target ``pinv(C) C l`` and the bandit.
    """
    rng = np.random.default_rng(seed)
    eb = randomized_bandit(m, n, gamma, rng)
    eb.reward_scale = reward_scale
    g = eb.graph_
    # true per-edge rewards scaled so that every path reward lies in [0, reward_scale]
    l = rng.uniform(0.0, 1.0, g.n_edges)
    l *= reward_scale / lg.path_value_range(g, l)[1]
    C = eb.cooccurrence()
    P = pinv(C, method="lapack")
    draws = eb.sample_paths(rng, samples)
    V = np.zeros((samples, g.n_edges))
    np.put_along_axis(V, draws, 1.0, axis=1)
    r = V @ l
    est = r[:, None] * (V @ P)
    return est, P @ C @ l, eb


def check_estimator(m=4, n=3, gamma=0.3, samples=100_000, seed=0, z_tol=3.0, c=4.0):
    est, target, eb = estimator_trial(m, n, gamma, samples, seed, reward_scale=1.0 + c)
    mean = est.mean(axis=0)
    se = est.std(axis=0, ddof=1) / np.sqrt(samples)
    degenerate = se < 1e-12
    z = np.where(degenerate, 0.0, np.abs(mean - target) / np.where(degenerate, 1.0, se))
    det_err = float(np.abs(mean - target)[degenerate].max(initial=0.0))
    U, _ = path_matrix(eb.graph_)
    path_est = np.abs(est @ U.T).max(axis=1)
    bound = (1.0 + c) * eb.graph_.n / (eb.gamma_ * eb.lambda_star_)
    violations = int((path_est > bound).sum())
    return [
        CheckResult("estimator mean (max |z|)", float(z.max()) <= z_tol and det_err <= 1e-9,
                    float(z.max()), z_tol, f"{int(degenerate.sum())} zero-variance edges"),
        CheckResult("estimator path bound violations", violations == 0, violations, 0,
                    f"max {path_est.max():.4g} vs bound {bound:.4g}"),
    ]


def run_all(m=4, n=3, samples=100_000, seed=0):
    results = []
    results += check_sampler(m, n, samples=samples, seed=seed)
    results += check_cooccurrence(m, n, samples=samples, seed=seed)
    results += check_estimator(m, n, samples=samples, seed=seed)
    return results
