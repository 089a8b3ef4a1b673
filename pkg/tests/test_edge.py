import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blotto_bwk import graph as lg
from blotto_bwk.edge import EdgeBandit, PathDistribution, cooccurrence_matrix, sample_edges, transition_table
from blotto_bwk.exceptions import InvalidInputError
from blotto_bwk.linalg import smallest_nonzero_eig
from blotto_bwk.selfcheck import enumerated_law, path_matrix


def enumerated_cooccurrence(g, w, gamma):
    """Sum over listed paths of P(p) u u^T: the definition, no dynamic program."""
    U, _ = path_matrix(g)
    weighted = U.dot(np.log(w))
    p = np.exp(weighted - weighted.max())
    p /= p.sum()
    p = (1 - gamma) * p + gamma / len(p)
    return (U.T * p) @ U, p


class TestCooccurrence:
    def test_unit_weights_original_2_2(self):
        g = lg.build_original(2, 2)
        C = cooccurrence_matrix(g, np.ones(g.n_edges))
        want, _ = enumerated_cooccurrence(g, np.ones(g.n_edges), 0.0)
        np.testing.assert_allclose(C, want, atol=1e-15)
        np.testing.assert_allclose(np.diag(C), [1 / 3] * 6)

    @pytest.mark.parametrize("m,n", [(1, 2), (3, 3), (4, 3), (2, 5)])
    def test_matches_enumeration(self, rng, m, n):
        g = lg.build_fixed(m, n)
        w = rng.uniform(0.2, 5.0, g.n_edges)
        C = cooccurrence_matrix(g, w)
        want, _ = enumerated_cooccurrence(g, w, 0.0)
        np.testing.assert_allclose(C, want, atol=1e-13)

    def test_properties(self, rng):
        g = lg.build_fixed(3, 4)
        C = cooccurrence_matrix(g, rng.uniform(0.5, 2.0, g.n_edges))
        np.testing.assert_allclose(C, C.T, atol=0)
        assert np.linalg.eigvalsh(C).min() > -1e-12
        # every path has n+1 edges
        assert np.trace(C) == pytest.approx(g.path_length)
        assert C.sum() == pytest.approx(g.path_length**2)

    def test_lambda_star_fixed_1_2(self):
        g = lg.build_fixed(1, 2)
        M = cooccurrence_matrix(g, np.ones(7))
        ref = np.linalg.eigvalsh(enumerated_cooccurrence(g, np.ones(7), 0)[0])
        ref = ref[ref > 1e-9].min()
        assert smallest_nonzero_eig(M) == pytest.approx(ref, abs=1e-10)


class TestSampling:
    def test_transition_rows_sum_to_one(self, rng):
        g = lg.build_fixed(4, 3)
        cum = transition_table(g, rng.uniform(0.5, 2.0, g.n_edges))
        has_out = (g.out_edges >= 0).any(axis=1)
        np.testing.assert_allclose(cum[has_out, -1], 1.0)
        assert np.all(cum[~has_out] == 0)

    def test_doubled_edge_law(self):
        # fixed(1, 2) with w((0,0)->(1,1)) = 2: path laws 1/4, 1/4, 1/2
        g = lg.build_fixed(1, 2)
        w = np.ones(g.n_edges)
        w[g.edge_id(((0, 0), (1, 1)))] = 2.0
        dist = PathDistribution(g, w, 0.0)
        got = {
            tuple(lg._edges_to_allocation(g, p)): dist.probability(p) for p in lg.enumerate_paths(g)
        }
        assert got == pytest.approx({(0, 0): 0.25, (0, 1): 0.25, (1, 0): 0.5}, abs=1e-15)

    def test_empirical_law(self):
        bandit = EdgeBandit(3, 3, gamma=0.3).fit()
        bandit.log_weights_ = np.random.default_rng(1).normal(size=bandit.graph_.n_edges)
        bandit._cache = None
        paths = lg.enumerate_paths(bandit.graph_)
        law = enumerated_law(bandit, paths)
        draws = bandit.sample_paths(np.random.default_rng(2), 50_000)
        index = {tuple(p): i for i, p in enumerate(paths)}
        counts = np.bincount([index[tuple(d)] for d in draws], minlength=len(paths))
        assert 0.5 * np.abs(counts / 50_000 - law).sum() < 0.02

    def test_single_draw_law(self):
        bandit = EdgeBandit(2, 3, gamma=0.4).fit()
        bandit.log_weights_ = np.random.default_rng(3).normal(size=bandit.graph_.n_edges)
        bandit._cache = None
        paths = lg.enumerate_paths(bandit.graph_)
        law = enumerated_law(bandit, paths)
        index = {tuple(p): i for i, p in enumerate(paths)}
        rng = np.random.default_rng(7)
        counts = np.zeros(len(paths))
        for _ in range(20_000):
            counts[index[tuple(bandit.sample_paths(rng, 1)[0])]] += 1
        assert 0.5 * np.abs(counts / 20_000 - law).sum() < 0.02

    def test_predict_proba_sums_to_one(self):
        bandit = EdgeBandit(3, 2, horizon=100).fit()
        acts = [c for c in itertools.product(range(3), repeat=3) if sum(c) <= 2]
        assert bandit.predict_proba(acts).sum() == pytest.approx(1.0, abs=1e-12)

    def test_sample_reduced_spends_budget(self, rng):
        bandit = EdgeBandit(3, 4, horizon=100).fit()
        for x in range(4):
            u, g, vec = bandit.sample_reduced(x, rng)
            assert u.sum() == x
            assert vec.sum() == 3


class TestEstimator:
    def test_unbiased_exact(self, rng):
        # E[l_hat] = C^+ E[r u] = C^+ C l = l on the path span: check by enumeration
        bandit = EdgeBandit(3, 3, gamma=0.3).fit()
        g = bandit.graph_
        bandit.log_weights_ = rng.normal(size=g.n_edges)
        bandit._cache = None
        U, _ = path_matrix(g)
        p = enumerated_law(bandit, lg.enumerate_paths(g))
        true = rng.uniform(-0.2, 0.2, g.n_edges)
        C = bandit.cooccurrence()
        mean = sum(p[i] * bandit.estimate_loss(C, U[i], U[i] @ true) for i in range(len(p)))
        np.testing.assert_allclose(U @ mean, U @ true, atol=1e-10)

    def test_pinv_routes_agree(self, rng):
        a = EdgeBandit(3, 4, gamma=0.2, pinv_method="range").fit()
        b = EdgeBandit(3, 4, gamma=0.2, pinv_method="eig", eig_method="jacobi").fit()
        for bandit in (a, b):
            bandit.log_weights_ = np.random.default_rng(5).normal(size=a.graph_.n_edges)
            bandit._cache = None
        u = a.sample_path(rng)
        np.testing.assert_allclose(
            a.estimate_loss(a.cooccurrence(), u, 0.7), b.estimate_loss(b.cooccurrence(), u, 0.7), atol=1e-8
        )

    def test_partial_fit_layer_normalized(self, rng):
        bandit = EdgeBandit(3, 4, horizon=5000, reward_scale=5.0).fit()
        for _ in range(20):
            u = bandit.sample_path(rng)
            bandit.partial_fit(u, rng.uniform(-5, 5))
        g = bandit.graph_
        for ids in bandit._non_aux:
            if ids.size:
                assert bandit.log_weights_[ids].max() == 0.0
        np.testing.assert_array_equal(bandit.log_weights_[g.auxiliary], 0.0)
        d = bandit.last_diagnostics_
        assert d["max_abs_path_estimate"] <= bandit.estimator_bound()

    def test_reward_out_of_range(self, rng):
        bandit = EdgeBandit(3, 2, horizon=100).fit()
        with pytest.raises(InvalidInputError):
            bandit.partial_fit(bandit.sample_path(rng), 1.5)

    def test_update_direction(self):
        bandit = EdgeBandit(2, 1, horizon=100, gamma=0.5, eta=0.1).fit()
        g = bandit.graph_
        u = lg.allocation_to_path(g, (1, 0))
        before = bandit.predict_proba([(1, 0)])[0]
        bandit.partial_fit(u, 1.0)
        assert bandit.predict_proba([(1, 0)])[0] > before

    def test_schedule_closed_form(self):
        n, T = 3, 10**6
        bandit = EdgeBandit(n, 4, horizon=T).fit()
        E, lam, S = bandit.graph_.n_edges, bandit.lambda_star_, bandit.n_paths_
        base = np.sqrt(np.log(S) / ((n / (E * lam) + 1) * E * T ** (2 / 3)))
        assert bandit.gamma_ == pytest.approx(n / lam * base, rel=1e-12)
        assert bandit.eta_ == pytest.approx(base, rel=1e-12)

    def test_gamma_clamped(self, caplog):
        bandit = EdgeBandit(3, 4, horizon=10).fit()
        assert bandit.gamma_ == 1.0 and bandit.gamma_raw_ > 1
        assert "clamped" in caplog.text

    def test_sklearn_params(self):
        bandit = EdgeBandit(4, 2, horizon=50)
        assert bandit.get_params()["max_troops"] == 2
        assert bandit.set_params(horizon=70).horizon == 70

    @pytest.mark.parametrize("kw", [{"graph": "tree"}, {"pinv_method": "svd"}, {"reward_scale": 0}, {"horizon": 0}])
    def test_bad_params(self, kw):
        with pytest.raises(InvalidInputError):
            EdgeBandit(**kw).fit()

    @settings(max_examples=10, deadline=None)
    @given(st.integers(1, 3), st.integers(2, 4), st.integers(0, 10**6))
    def test_cooccurrence_psd_property(self, m, n, seed):
        bandit = EdgeBandit(n, m, gamma=0.25).fit()
        bandit.log_weights_ = np.random.default_rng(seed).normal(scale=2, size=bandit.graph_.n_edges)
        bandit._cache = None
        C = bandit.cooccurrence()
        want, _ = enumerated_cooccurrence(bandit.graph_, np.exp(bandit.log_weights_), 0.25)
        np.testing.assert_allclose(C, want, atol=1e-12)
