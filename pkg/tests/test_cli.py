"""End-to-end tests for the command-line interface."""

import json
import subprocess
import sys

import pytest

from watchcpd.cli import main


@pytest.fixture(scope="module")
def shift_dir(tmp_path_factory):
    """One mean-shift dataset generated through the synth subcommand."""
    root = tmp_path_factory.mktemp("clidata")
    rc = main(
        [
            "synth", "--T", "400", "--d", "10", "--cps", "200",
            "--shift", "5", "--sd", "1", "--seed", "7",
            "--name", "shifted", "--out-dir", str(root),
        ]
    )
    assert rc == 0
    return root


def test_synth_writes_dataset_and_annotations(shift_dir):
    data = json.loads((shift_dir / "shifted.json").read_text())
    ann = json.loads((shift_dir / "shifted.annotations.json").read_text())
    assert data["name"] == "shifted"
    assert len(data["series"]) == 400
    assert len(data["series"][0]) == 10
    assert ann["n_obs"] == 400
    assert ann["annotations"] == {"synthetic": [200]}


def test_synth_without_changes_has_empty_annotations(tmp_path):
    rc = main(
        [
            "synth", "--T", "100", "--d", "3", "--seed", "1",
            "--name", "flat", "--out-dir", str(tmp_path),
        ]
    )
    assert rc == 0
    ann = json.loads((tmp_path / "flat.annotations.json").read_text())
    assert ann["annotations"] == {"synthetic": []}


def test_detect_eval_pipeline(shift_dir, tmp_path):
    det = tmp_path / "det.json"
    rc = main(
        ["detect", "--input", str(shift_dir / "shifted.json"), "--output", str(det)]
    )
    assert rc == 0
    result = json.loads(det.read_text())
    assert result["dataset"] == "shifted"
    assert result["n_obs"] == 400
    assert result["config"]["omega"] == 20
    assert result["config"]["kappa"] == 60
    assert result["config"]["mu"] == 600
    assert [c["index"] for c in result["changepoints"]] == [220]

    scores = tmp_path / "scores.json"
    rc = main(
        [
            "eval", "--pred", str(det),
            "--truth", str(shift_dir / "shifted.annotations.json"),
            "--margin", "20", "--out", str(scores),
        ]
    )
    assert rc == 0
    metrics = json.loads(scores.read_text())
    assert set(metrics) == {"f1", "cover", "precision", "recall"}
    assert metrics["f1"] == 1.0
    assert metrics["precision"] == 1.0
    assert metrics["recall"] == 1.0


def test_detect_prints_to_stdout_by_default(shift_dir, capsys):
    rc = main(["detect", "--input", str(shift_dir / "shifted.json")])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["dataset"] == "shifted"


def test_detect_is_byte_deterministic(shift_dir, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert main(
            ["detect", "--input", str(shift_dir / "shifted.json"), "--output", str(out)]
        ) == 0
    assert a.read_bytes() == b.read_bytes()


def test_detect_normalize_still_finds_the_change(shift_dir, tmp_path):
    out = tmp_path / "norm.json"
    rc = main(
        [
            "detect", "--input", str(shift_dir / "shifted.json"),
            "--normalize", "--output", str(out),
        ]
    )
    assert rc == 0
    result = json.loads(out.read_text())
    assert result["config"]["normalize"] is True
    assert len(result["changepoints"]) == 1
    assert abs(result["changepoints"][0]["index"] - 200) <= 20


def test_detect_kappa_mu_default_scale_with_omega(shift_dir, capsys):
    rc = main(["detect", "--input", str(shift_dir / "shifted.json"), "--omega", "10"])
    assert rc == 0
    cfg = json.loads(capsys.readouterr().out)["config"]
    assert cfg["kappa"] == 30
    assert cfg["mu"] == 300


def test_detect_missing_input_is_input_error(tmp_path):
    assert main(["detect", "--input", str(tmp_path / "nope.json")]) == 1


def test_detect_invalid_config_is_config_error(shift_dir):
    rc = main(
        [
            "detect", "--input", str(shift_dir / "shifted.json"),
            "--kappa", "10", "--omega", "20",
        ]
    )
    assert rc == 2


def test_unknown_flag_is_config_error(shift_dir, capsys):
    rc = main(["detect", "--input", str(shift_dir / "shifted.json"), "--bogus"])
    capsys.readouterr()
    assert rc == 2


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    capsys.readouterr()


def test_detect_timeout_exit_code(tmp_path):
    rc = main(
        [
            "synth", "--T", "12000", "--d", "100", "--cps", "6000",
            "--shift", "3", "--seed", "3", "--name", "slow",
            "--out-dir", str(tmp_path),
        ]
    )
    assert rc == 0
    rc = main(
        [
            "detect", "--input", str(tmp_path / "slow.json"),
            "--timeout", "0.01", "--output", str(tmp_path / "never.json"),
        ]
    )
    assert rc == 3
    assert not (tmp_path / "never.json").exists()


def test_eval_accepts_bare_index_list(shift_dir, tmp_path):
    pred = tmp_path / "bare.json"
    pred.write_text("[210]")
    rc = main(
        [
            "eval", "--pred", str(pred),
            "--truth", str(shift_dir / "shifted.annotations.json"),
            "--margin", "10", "--out", str(tmp_path / "m.json"),
        ]
    )
    assert rc == 0
    assert json.loads((tmp_path / "m.json").read_text())["f1"] == 1.0


def test_eval_clamps_indices_to_series_end(shift_dir, tmp_path, capsys):
    pred = tmp_path / "late.json"
    pred.write_text("[400]")
    rc = main(
        [
            "eval", "--pred", str(pred),
            "--truth", str(shift_dir / "shifted.annotations.json"),
        ]
    )
    assert rc == 0
    clamped = json.loads(capsys.readouterr().out)
    pred.write_text("[399]")
    rc = main(
        [
            "eval", "--pred", str(pred),
            "--truth", str(shift_dir / "shifted.annotations.json"),
        ]
    )
    assert rc == 0
    in_range = json.loads(capsys.readouterr().out)
    # an index one past the series scores exactly like the final index
    assert clamped == in_range
    assert clamped["f1"] == 0.5


def test_eval_length_mismatch_is_input_error(shift_dir, tmp_path):
    pred = tmp_path / "short.json"
    pred.write_text(json.dumps({"n_obs": 300, "changepoints": [200]}))
    rc = main(
        [
            "eval", "--pred", str(pred),
            "--truth", str(shift_dir / "shifted.annotations.json"),
        ]
    )
    assert rc == 1


def test_eval_negative_margin_is_config_error(shift_dir, tmp_path):
    pred = tmp_path / "p.json"
    pred.write_text("[200]")
    rc = main(
        [
            "eval", "--pred", str(pred),
            "--truth", str(shift_dir / "shifted.annotations.json"),
            "--margin", "-1",
        ]
    )
    assert rc == 2


def test_eval_malformed_prediction_is_input_error(shift_dir, tmp_path):
    pred = tmp_path / "bad.json"
    pred.write_text("{nope")
    rc = main(
        [
            "eval", "--pred", str(pred),
            "--truth", str(shift_dir / "shifted.annotations.json"),
        ]
    )
    assert rc == 1


def test_bench_default_writes_all_outputs(shift_dir, tmp_path):
    out = tmp_path / "bench"
    rc = main(
        [
            "bench", "--datasets", str(shift_dir), "--out", str(out),
            "--margin", "20",
        ]
    )
    assert rc == 0
    for name in (
        "results.json", "summary.csv", "summary_zero.csv",
        "ranks.csv", "pairwise.csv", "bench_meta.json",
    ):
        assert (out / name).exists(), name
    rows = json.loads((out / "results.json").read_text())
    watch_rows = [r for r in rows if r["method"] == "watch"]
    assert len(watch_rows) == 1
    assert watch_rows[0]["f1"] == 1.0
    header = (out / "summary.csv").read_text().splitlines()[0]
    assert header == "group,mode,metric,mean,count"


def test_bench_reruns_are_byte_identical(shift_dir, tmp_path):
    outs = []
    for tag in ("r1", "r2"):
        out = tmp_path / tag
        assert main(
            [
                "bench", "--datasets", str(shift_dir), "--out", str(out),
                "--margin", "20",
            ]
        ) == 0
        outs.append(out)
    for name in ("results.json", "summary.csv", "ranks.csv", "pairwise.csv"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_bench_best_mode_with_grid(shift_dir, tmp_path):
    grid = tmp_path / "grid.json"
    grid.write_text(
        json.dumps(
            [
                {"omega": 20, "kappa": 60, "mu": 600, "epsilon": 1.5},
                {"omega": 20, "kappa": 60, "mu": 600, "epsilon": 3.0},
            ]
        )
    )
    out = tmp_path / "best"
    rc = main(
        [
            "bench", "--datasets", str(shift_dir), "--out", str(out),
            "--mode", "best", "--grid", str(grid), "--margin", "20",
        ]
    )
    assert rc == 0
    rows = json.loads((out / "results.json").read_text())
    best_f1 = [r for r in rows if r["method"] == "watch" and r["target"] == "f1"]
    assert len(best_f1) == 1
    assert best_f1[0]["f1"] == 1.0


def test_bench_missing_directory_is_input_error(tmp_path):
    rc = main(
        ["bench", "--datasets", str(tmp_path / "void"), "--out", str(tmp_path / "o")]
    )
    assert rc == 1


def test_bench_invalid_grid_is_config_error(shift_dir, tmp_path):
    grid = tmp_path / "bad.json"
    grid.write_text(json.dumps([{"omega": 20, "what": 1}]))
    rc = main(
        [
            "bench", "--datasets", str(shift_dir), "--out", str(tmp_path / "o"),
            "--mode", "best", "--grid", str(grid),
        ]
    )
    assert rc == 2


def test_module_entry_point(shift_dir, tmp_path):
    out = tmp_path / "via_module.json"
    proc = subprocess.run(
        [
            sys.executable, "-m", "watchcpd", "detect",
            "--input", str(shift_dir / "shifted.json"), "--output", str(out),
        ],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert json.loads(out.read_text())["changepoints"][0]["index"] == 220
