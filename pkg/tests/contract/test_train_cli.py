"""Contract tests for 'rolegrad train', 'eval', 'coverage' and 'compare'.

Training runs use a tiny synthetic split and a shortened schedule so each
command finishes in seconds.
"""

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from rolegrad.cli.__main__ import cli

runner = CliRunner()


def _data_args(split: dict[str, Path]) -> list[str]:
    return [
        "--train", str(split["train"]),
        "--dev", str(split["dev"]),
        "--test", str(split["test"]),
        "--frames", str(split["frames"]),
    ]


@pytest.fixture
def trained(tmp_path: Path, synthetic_split: dict[str, Path], fast_schedule: list[str]) -> Path:
    """Train once with all three constraints and return the run directory."""
    out = tmp_path / "run"
    result = runner.invoke(
        cli,
        [
            "train", "--preset", "conll05-full-ufo", "--out", str(out),
            *_data_args(synthetic_split), *fast_schedule,
        ],
    )
    assert result.exit_code == 0, result.output
    return out


@pytest.mark.ai_generated
def test_train_writes_run_directory(trained: Path) -> None:
    for name in ("model.pt", "metrics.jsonl", "config.json", "report.json"):
        assert (trained / name).exists(), name
    records = [json.loads(line) for line in (trained / "metrics.jsonl").read_text().splitlines()]
    assert [(r["stage"], r["epoch"]) for r in records] == [(1, 1), (1, 2), (2, 1)]
    config = json.loads((trained / "config.json").read_text())
    assert config["weights"]["lambda_u"] == 1
    assert config["weights"]["beam_k"] == 4
    report = json.loads((trained / "report.json").read_text())
    assert {"f1", "rho_u", "rho_o", "rho_f"} <= set(report)
    assert report["rho_f"] is not None


@pytest.mark.ai_generated
def test_train_json_summary(
    tmp_path: Path, synthetic_split: dict[str, Path], fast_schedule: list[str]
) -> None:
    result = runner.invoke(
        cli,
        [
            "--json", "--quiet", "train", "--out", str(tmp_path / "run"),
            "--train", str(synthetic_split["train"]), "--dev", str(synthetic_split["dev"]),
            "--lambda-u", "1", *fast_schedule,
        ],
    )
    assert result.exit_code == 0, result.output
    summary = json.loads(result.stdout)
    assert summary["epochs"] == 3
    assert len(summary["config_hash"]) == 16
    assert summary["report"]["rho_f"] is None


@pytest.mark.ai_generated
def test_train_without_corpus_exits_2(tmp_path: Path) -> None:
    result = runner.invoke(cli, ["train", "--out", str(tmp_path)])
    assert result.exit_code == 2
    assert "no training corpus given (--train)" in result.stderr


@pytest.mark.ai_generated
def test_train_without_propositions_exits_2(tmp_path: Path) -> None:
    corpus = tmp_path / "bare.jsonl"
    corpus.write_text(json.dumps({"tokens": ["Hello", "there"], "propositions": []}) + "\n")
    result = runner.invoke(
        cli, ["train", "--train", str(corpus), "--out", str(tmp_path / "run")]
    )
    assert result.exit_code == 2
    assert "training corpus has no propositions" in result.stderr
    assert not (tmp_path / "run" / "model.pt").exists()


@pytest.mark.ai_generated
def test_frame_weight_without_frames_exits_2(synthetic_split: dict[str, Path]) -> None:
    result = runner.invoke(
        cli, ["train", "--train", str(synthetic_split["train"]), "--lambda-f", "0.1"]
    )
    assert result.exit_code == 2
    assert "--frames" in result.stderr


@pytest.mark.ai_generated
def test_disabled_constraint_with_weight_exits_2(synthetic_split: dict[str, Path]) -> None:
    result = runner.invoke(
        cli,
        [
            "train", "--train", str(synthetic_split["train"]),
            "--constraints", "U", "--lambda-o", "0.5",
        ],
    )
    assert result.exit_code == 2
    assert "disabled constraint" in result.stderr


@pytest.mark.ai_generated
def test_eval_writes_report(trained: Path, synthetic_split: dict[str, Path]) -> None:
    result = runner.invoke(
        cli,
        [
            "eval", str(trained / "model.pt"), str(synthetic_split["test"]),
            "--frames", str(synthetic_split["frames"]),
        ],
    )
    assert result.exit_code == 0, result.output
    assert result.stdout.splitlines()[0].split() == ["P", "R", "F1", "rho_u", "rho_o", "rho_f"]
    report = json.loads((trained / "eval-test.json").read_text())
    assert report["propositions"] > 0
    assert report["rho_f"] is not None


@pytest.mark.ai_generated
def test_eval_matches_training_report(trained: Path, synthetic_split: dict[str, Path]) -> None:
    """The reloaded checkpoint reproduces the held-out scores of training."""
    report_path = trained / "reeval.json"
    result = runner.invoke(
        cli,
        [
            "--json", "eval", str(trained / "model.pt"), str(synthetic_split["test"]),
            "--frames", str(synthetic_split["frames"]), "--report", str(report_path),
        ],
    )
    assert result.exit_code == 0, result.output
    assert json.loads(report_path.read_text()) == json.loads(
        (trained / "report.json").read_text()
    )


@pytest.mark.ai_generated
def test_eval_rejects_non_checkpoint(tmp_path: Path, synthetic_split: dict[str, Path]) -> None:
    fake = tmp_path / "model.pt"
    fake.write_bytes(b"not a checkpoint")
    result = runner.invoke(cli, ["eval", str(fake), str(synthetic_split["test"])])
    assert result.exit_code == 2
    assert "Error:" in result.stderr


@pytest.mark.ai_generated
def test_eval_rejects_unknown_labels(trained: Path, tmp_path: Path) -> None:
    data = tmp_path / "other.jsonl"
    data.write_text(
        '{"tokens": ["n000", "v00"], "propositions": '
        '[{"pred": 1, "lemma": "v00", "sense": "01", "tags": ["B-AM-DIS", "O"]}]}\n'
    )
    result = runner.invoke(cli, ["eval", str(trained / "model.pt"), str(data)])
    assert result.exit_code == 2
    assert "AM-DIS" in result.stderr


@pytest.mark.ai_generated
def test_coverage(trained: Path, synthetic_split: dict[str, Path]) -> None:
    result = runner.invoke(
        cli,
        ["--json", "coverage", str(trained / "model.pt"), str(synthetic_split["dev"]),
         "--k", "1,4"],
    )
    assert result.exit_code == 0, result.output
    payload = json.loads(result.stdout)
    assert set(payload["missed"]) == {"1", "4"}
    assert payload["missed"]["4"] <= payload["missed"]["1"] <= payload["crossing_sentences"]


@pytest.mark.ai_generated
def test_coverage_rejects_bad_beam(trained: Path, synthetic_split: dict[str, Path]) -> None:
    result = runner.invoke(
        cli, ["coverage", str(trained / "model.pt"), str(synthetic_split["dev"]), "--k", "0"]
    )
    assert result.exit_code == 2


@pytest.mark.ai_generated
def test_compare(
    tmp_path: Path, synthetic_split: dict[str, Path], fast_schedule: list[str]
) -> None:
    out = tmp_path / "cmp"
    result = runner.invoke(
        cli,
        [
            "--json", "--quiet", "compare", "--seeds", "0,1", "--lambda-u", "1",
            "--out", str(out), "--train", str(synthetic_split["train"]),
            "--test", str(synthetic_split["test"]), *fast_schedule,
        ],
    )
    assert result.exit_code == 0, result.output
    payload = json.loads(result.stdout)
    assert [s["seed"] for s in payload["seeds"]] == [0, 1]
    assert "median_rho_u_reduction" in payload
    for seed in (0, 1):
        for name in ("control", "constrained"):
            assert (out / f"seed{seed}" / name / "model.pt").exists()


@pytest.mark.ai_generated
def test_compare_needs_held_out_data(synthetic_split: dict[str, Path]) -> None:
    result = runner.invoke(cli, ["compare", "--train", str(synthetic_split["train"])])
    assert result.exit_code == 2
    assert "held-out" in result.stderr


@pytest.mark.ai_generated
def test_compare_rejects_bad_seeds(synthetic_split: dict[str, Path]) -> None:
    result = runner.invoke(
        cli, ["compare", "--seeds", "a,b", "--train", str(synthetic_split["train"])]
    )
    assert result.exit_code == 2
