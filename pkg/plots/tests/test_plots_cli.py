"""Plot CLI: exit codes, output files, JSON dump stability."""

from __future__ import annotations

import json

import pytest

from contim_plots.cli import main

LOG_TEXT = """\
step,loss,val_mean,val_std
20,0.51,3.25,0.5
40,0.25,4.0,0.25
"""

RESULTS_TEXT = """\
method,graph_id,run_id,influence,normalized_influence,inference_seconds
random,0,0,6.0,0.12,0.001
greedy,0,0,10.0,0.2,0.05
# summary,random,0.12,0.0
# summary,greedy,0.2,0.0
"""


@pytest.fixture()
def log_file(tmp_path):
    path = tmp_path / "training_log_rl4im.csv"
    path.write_text(LOG_TEXT)
    return str(path)


@pytest.fixture()
def results_file(tmp_path):
    path = tmp_path / "results.csv"
    path.write_text(RESULTS_TEXT)
    return str(path)


def test_plot_validation_writes_image_and_json(tmp_path, log_file, capsys):
    out = tmp_path / "curve.png"
    dump = tmp_path / "curve.json"
    code = main(["plot-validation", log_file,
                 "--out", str(out), "--dump-json", str(dump)])
    assert code == 0
    assert "wrote" in capsys.readouterr().out
    assert out.stat().st_size > 0
    payload = json.loads(dump.read_text())
    assert payload[0]["step"] == [20, 40]
    assert payload[0]["val_mean"] == [3.25, 4.0]


def test_plot_comparison_writes_image_and_json(tmp_path, results_file):
    out = tmp_path / "cmp.png"
    dump = tmp_path / "cmp.json"
    code = main(["plot-comparison", results_file,
                 "--out", str(out), "--dump-json", str(dump)])
    assert code == 0
    assert out.stat().st_size > 0
    payload = json.loads(dump.read_text())
    assert payload["method_means"] == {"random": 0.12, "greedy": 0.2}


def test_json_dump_is_byte_stable(tmp_path, log_file):
    dumps = []
    for name in ("a.json", "b.json"):
        path = tmp_path / name
        assert main(["plot-validation", log_file,
                     "--out", str(tmp_path / "img.png"),
                     "--dump-json", str(path)]) == 0
        dumps.append(path.read_bytes())
    assert dumps[0] == dumps[1]


def test_usage_errors_exit_one(tmp_path, log_file):
    for argv in ([], ["plot-validation"],
                 ["plot-validation", log_file],  # --out missing
                 ["plot-comparison"],
                 ["nonsense"]):
        with pytest.raises(SystemExit) as err:
            main(argv)
        assert err.value.code == 1


def test_runtime_errors_exit_two(tmp_path, results_file, capsys):
    missing = str(tmp_path / "nope.csv")
    assert main(["plot-validation", missing,
                 "--out", str(tmp_path / "x.png")]) == 2
    assert main(["plot-comparison", results_file,
                 "--out", str(tmp_path / "x.png"),
                 "--group-by", "q"]) == 2
    assert "has no q column" in capsys.readouterr().err

    bad = tmp_path / "bad.csv"
    bad.write_text("step,loss\n")
    assert main(["plot-validation", str(bad),
                 "--out", str(tmp_path / "x.png")]) == 2
