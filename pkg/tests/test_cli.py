"""Command line front end: exit codes, output files, seed override."""

from __future__ import annotations

import os
import subprocess
import sys

import pytest

from contim.cli import main
from contim.harness import load_manifest, read_results_csv, read_timing_csv

MICRO_CONFIG = """\
graph.n = 12
graph.m = 2
graph.num_train = 3
graph.num_val = 2
graph.num_test = 2
env.rounds = 2
env.budget = 2
env.num_sims = 15
env.willing_prob = 0.5
env.edge_prob = 0.2
train.embed_dim = 4
train.embed_iters = 2
train.hidden_dim = 6
train.batch_size = 4
train.replay_capacity = 64
train.max_steps = 8
train.validation_interval = 8
train.validation_episodes = 2
eval.runs_per_graph = 2
eval.methods = rl4im,random
bench.methods = random
"""


@pytest.fixture()
def config_file(tmp_path):
    path = tmp_path / "micro.cfg"
    path.write_text(MICRO_CONFIG)
    return str(path)


def test_pipeline_exit_codes_and_artifacts(tmp_path, config_file, capsys):
    out = str(tmp_path / "exp")
    assert main(["generate", "--config", config_file, "--out", out]) == 0
    assert "wrote 7 graphs" in capsys.readouterr().out
    cfg, files = load_manifest(out)
    assert cfg.graph_n == 12
    assert main(["train", "--config", config_file, "--out", out]) == 0
    assert "trained rl4im" in capsys.readouterr().out
    assert main(["evaluate", "--config", config_file, "--out", out]) == 0
    rows, summaries = read_results_csv(os.path.join(out, "results.csv"))
    assert {r["method"] for r in rows} == {"rl4im", "random"}
    assert main(["benchmark", "--config", config_file, "--out", out]) == 0
    rows = read_timing_csv(os.path.join(out, "timing.csv"))
    assert [m for m, _, _ in rows] == ["random", "random"]


def test_evaluate_methods_flag_overrides_config(tmp_path, config_file):
    out = str(tmp_path / "exp")
    main(["generate", "--config", config_file, "--out", out])
    code = main(["evaluate", "--config", config_file, "--out", out,
                 "--methods", "random"])
    assert code == 0
    rows, _ = read_results_csv(os.path.join(out, "results.csv"))
    assert {r["method"] for r in rows} == {"random"}


def test_reward_audit_prints_pass_table(capsys):
    assert main(["reward-audit"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 6
    assert "FAIL" not in out


def test_usage_errors_exit_one(tmp_path):
    for argv in ([], ["generate"], ["generate", "--out"],
                 ["generate", "--out", str(tmp_path), "--bogus"],
                 ["unknown-command"]):
        with pytest.raises(SystemExit) as err:
            main(argv)
        assert err.value.code == 1


def test_bad_config_exits_one(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("graph.n = -3\n")
    code = main(["generate", "--config", str(bad),
                 "--out", str(tmp_path / "exp")])
    assert code == 1
    assert "config error" in capsys.readouterr().err


def test_missing_config_file_exits_one(tmp_path, capsys):
    code = main(["generate", "--config", str(tmp_path / "nope.cfg"),
                 "--out", str(tmp_path / "exp")])
    assert code == 1


def test_missing_manifest_exits_two(tmp_path, config_file, capsys):
    code = main(["evaluate", "--config", config_file,
                 "--out", str(tmp_path / "empty")])
    assert code == 2
    assert "run the generate step" in capsys.readouterr().err


def test_missing_checkpoint_exits_two(tmp_path, config_file, capsys):
    out = str(tmp_path / "exp")
    main(["generate", "--config", config_file, "--out", out])
    code = main(["evaluate", "--config", config_file, "--out", out])
    assert code == 2
    assert "missing checkpoint" in capsys.readouterr().err


def test_seed_override_is_deterministic(tmp_path, config_file):
    a, b, c = (str(tmp_path / name) for name in "abc")
    for out in (a, b):
        assert main(["generate", "--config", config_file,
                     "--out", out, "--seed", "5"]) == 0
    assert main(["generate", "--config", config_file,
                 "--out", c, "--seed", "6"]) == 0

    def snap(out):
        return {
            rel: open(os.path.join(out, rel), "rb").read()
            for rel in ["manifest.txt", "graphs/train_000.edges"]
        }

    assert snap(a) == snap(b)
    assert snap(a)["graphs/train_000.edges"] != snap(c)["graphs/train_000.edges"]


def test_module_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "contim.cli", "reward-audit"],
        capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0
    assert "PASS" in proc.stdout
