import csv
import json
import subprocess
import sys

import pytest

from blotto_bwk import harness
from blotto_bwk.cli import main
from blotto_bwk.config import build_spec, parse_adversary, parse_config
from blotto_bwk.exceptions import ConfigError

BASE = {"n": 3, "T": 120, "B": 120, "c": 4, "adversary": "UniformSum(4)"}


class TestConfig:
    def test_minimal(self):
        spec = build_spec(BASE)
        assert spec.game.m == 4
        assert spec.horizons == [120] and spec.seeds == [0]
        assert spec.adversary == {"type": "UniformSum", "total": 4}

    def test_shorthand(self):
        assert parse_adversary("FixedAllocation(1, 2, 1)") == {"type": "FixedAllocation", "allocation": [1, 2, 1]}

    @pytest.mark.parametrize(
        "patch,field",
        [
            ({"bogus": 1}, "bogus"),
            ({"seeds": [0, "a"]}, "seeds"),
            ({"seeds": []}, "seeds"),
            ({"adversary": {"type": "UniformSum"}}, "adversary.total"),
            ({"adversary": {"type": "UniformSum", "total": 4, "x": 1}}, "adversary.x"),
            ({"adversary": {"type": "Nash"}}, "adversary.type"),
            ({"adversary": "Mystery(1)"}, "adversary"),
            ({"adversary": "FixedAllocation(1,1)"}, "adversary"),
            ({"emit_rounds": "yes"}, "emit_rounds"),
            ({"B": 10}, "game"),
            ({"horizons": [0]}, "horizons"),
        ],
    )
    def test_rejections_name_field(self, patch, field):
        with pytest.raises(ConfigError) as err:
            build_spec({**BASE, **patch})
        assert err.value.field == field
        assert str(err.value).startswith(field + ":")

    def test_missing_required(self):
        raw = dict(BASE)
        del raw["c"]
        with pytest.raises(ConfigError, match="^c:"):
            build_spec(raw)

    def test_horizon_sweep_keeps_rate(self):
        spec = build_spec({**BASE, "T": 1000, "B": 1000, "horizons": [100, 1000]})
        assert spec.game_for(100).B == 100 and spec.game_for(100).m == 4

    def test_file_and_overrides(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(BASE))
        assert parse_config(path, {"T": 200, "B": 200, "n": None}).game.T == 200

    def test_malformed_file(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError, match="malformed"):
            parse_config(path)


class TestHarness:
    def test_outputs_and_determinism(self, tmp_path):
        spec = build_spec({**BASE, "seeds": [0, 1], "horizons": [60, 120]})
        harness.run(spec, tmp_path / "a")
        harness.run(spec, tmp_path / "b")
        files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
        assert len(files) == 2 + 2 * 2 * 2
        for f in files:
            assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()

    def test_batch_summary_matches_episodes(self, tmp_path):
        spec = build_spec({**BASE, "seeds": [0, 1, 2]})
        harness.run(spec, tmp_path)
        rows = list(csv.DictReader(open(tmp_path / "batch_summary.csv")))
        assert len(rows) == 3
        for row in rows:
            ep = json.loads((tmp_path / "episodes" / f"T120_seed{row['seed']}.json").read_text())
            assert float(row["regret"]) == ep["oracles"]["opt_dp"] - ep["total_reward"]
            rounds = list(csv.DictReader(open(tmp_path / "episodes" / f"T120_seed{row['seed']}.csv")))
            assert int(row["tau"]) == len(rounds) == ep["tau"]
            assert float(row["reward"]) == pytest.approx(sum(float(r["r"]) for r in rounds), abs=1e-12)
        stats = harness.regret_statistics(tmp_path / "batch_summary.csv")
        assert stats[120]["count"] == 3

    def test_graph_stats(self):
        stats = harness.graph_stats(4, 3)
        assert stats["n_edges"] == 40 and stats["n_paths"] == 35


class TestCli:
    def test_graph_edges(self, capsys):
        assert main(["graph", "--m", "1", "--battlefields", "2", "--edges"]) == 0
        out = capsys.readouterr().out
        head, _, edges = out.partition("}\n")
        assert json.loads(head + "}")["n_edges"] == 7
        assert len(edges.strip().splitlines()) == 7

    def test_oracle(self, capsys):
        assert main(["oracle", "--n", "2", "--T", "4", "--B", "4", "--c", "2", "--adversary", "FixedAllocation(0,0)"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["4"]["opt_dp"] == 3.0

    def test_run(self, tmp_path):
        code = main(["run", "--n", "2", "--T", "30", "--B", "30", "--c", "2",
                     "--adversary", "UniformSum(2)", "--seeds", "0,1", "--out", str(tmp_path)])
        assert code == 0
        assert (tmp_path / "batch_summary.csv").exists()

    def test_config_error_exit_code(self, capsys):
        assert main(["run", "--n", "3", "--T", "10", "--B", "10", "--c", "1"]) == 2
        assert "adversary" in capsys.readouterr().err

    def test_validate_default(self, capsys):
        assert main(["validate"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 7 and all(line.startswith("[PASS]") for line in lines)

    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "blotto_bwk", "graph", "--m", "2", "--battlefields", "2"],
                              capture_output=True, text=True)
        assert proc.returncode == 0 and '"n_paths": 6' in proc.stdout
