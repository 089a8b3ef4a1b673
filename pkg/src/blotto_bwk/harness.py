"""Seeded experiment execution and result persistence."""

from __future__ import annotations

import csv
import json
import logging
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed

from . import __version__
from . import oracles
from . import graph as lg
from .edge import cooccurrence_matrix
from .exceptions import SizeLimitError
from .lagrange import run_episode
from .linalg import smallest_nonzero_eig

logger = logging.getLogger(__name__)

BATCH_COLUMNS = ["T", "seed", "regret", "reward", "tau"]


def compute_oracles(game, adversary, mc_samples=None, seed=0):
    """OPT_LP and OPT_DP for one game, or the reason they were skipped."""
    try:
        actions = oracles.enumerate_actions(game.m, game.n)
        table = oracles.expected_reward_table(
            actions, adversary, game.battlefield_weights, mc_samples=mc_samples, rng=seed
        )
        lp_value, mixture = oracles.opt_lp(table, game.B, game.T)
        dp_value = oracles.opt_dp(table, game.B, game.T, game.m)
    except SizeLimitError as exc:
        return {"skipped": str(exc)}
    return {
        "opt_lp_per_round": lp_value,
        "opt_lp_total": game.T * lp_value,
        "opt_lp_mixture": {
            ",".join(map(str, actions[i].tolist())): p for i, p in sorted(mixture.items())
        },
        "opt_dp": dp_value,
        "exact": table.exact,
    }


def graph_stats(m, n, eig_method="lapack"):
    """Size of the fixed-set graph and lambda* of uniform exploration."""
    g = lg.build_fixed(m, n)
    count, log_count = lg.count_paths(g)
    M = cooccurrence_matrix(g, np.ones(g.n_edges))
    return {
        "n_edges": g.n_edges,
        "n_paths": count,
        "log_n_paths": log_count,
        "lambda_star": smallest_nonzero_eig(M, method=eig_method),
        "n_nodes": g.n_nodes,
    }


def _episode_summary(spec, game, seed, result, oracle):
    summary = {
        "version": __version__,
        "resolved_spec": spec.to_dict(),
        "config": game.to_dict(),
        "adversary": spec.adversary,
        "seed": seed,
        "parameters": result.parameters,
        "oracles": oracle,
        "total_reward": result.total_reward,
        "total_consumption": result.total_consumption,
        "tau": result.stopping_round,
        "terminated_early": result.terminated_early,
        "regret": oracles.regret(result, oracle["opt_dp"]) if "opt_dp" in oracle else None,
    }
    return summary


def _play_one(spec, T, seed):
    game = spec.game_for(T)
    return run_episode(game, spec.adversary_model(), spec.episode_seed(T, seed))


def run(spec, out_dir=None):
    """Run every (horizon, seed) episode and write outputs; returns 0 on success."""
    out = Path(out_dir or spec.output)
    episodes = out / "episodes"
    episodes.mkdir(parents=True, exist_ok=True)
    (out / "spec.json").write_text(json.dumps(spec.to_dict(), indent=2, sort_keys=True) + "\n")
    adversary = spec.adversary_model()
    rows = []
    for T in spec.horizons:
        game = spec.game_for(T)
        oracle = (
            compute_oracles(game, adversary, spec.mc_samples, seed=[spec.master_seed, T])
            if spec.emit_oracles
            else {"skipped": "disabled"}
        )
        if "skipped" in oracle:
            logger.warning("oracles skipped for T=%d: %s", T, oracle["skipped"])
        jobs = [delayed(_play_one)(spec, T, s) for s in spec.seeds]
        results = Parallel(n_jobs=spec.n_jobs)(jobs) if spec.n_jobs != 1 else [j[0](*j[1], **j[2]) for j in jobs]
        for seed, result in zip(spec.seeds, results):
            stem = episodes / f"T{T}_seed{seed}"
            summary = _episode_summary(spec, game, seed, result, oracle)
            stem.with_suffix(".json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
            if spec.emit_rounds:
                stem.with_suffix(".csv").write_text(result.to_csv())
            rows.append([T, seed, summary["regret"], result.total_reward, result.stopping_round])
            logger.info("T=%d seed=%d tau=%d reward=%.4f", T, seed, result.stopping_round, result.total_reward)
    with open(out / "batch_summary.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(BATCH_COLUMNS)
        for T, seed, reg, reward, tau in rows:
            writer.writerow([T, seed, "" if reg is None else format(reg, ".17g"), format(reward, ".17g"), tau])
    return 0


def regret_statistics(path):
    """Per-horizon mean and sample std of regret from a batch summary CSV."""
    by_T = {}
    with open(path) as fh:
        for row in csv.DictReader(fh):
            if row["regret"]:
                by_T.setdefault(int(row["T"]), []).append(float(row["regret"]))
    return {
        T: {"mean": float(np.mean(v)), "std": float(np.std(v, ddof=1)) if len(v) > 1 else 0.0, "count": len(v)}
        for T, v in sorted(by_T.items())
    }
