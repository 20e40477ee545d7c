"""Tests for the evaluation report model."""

import json

import pytest

from rolegrad.models.report import EvalReport, LabelScore


def _report(rho_f: float | None = 12.5) -> EvalReport:
    return EvalReport(
        precision=80.0,
        recall=75.0,
        f1=77.41935,
        rho_u=10.0,
        rho_o=2,
        rho_f=rho_f,
        propositions=10,
        sentences=8,
        frame_scored=8 if rho_f is not None else 0,
        frame_skipped=2 if rho_f is not None else 0,
        per_label={"A0": LabelScore(90.0, 90.0, 90.0, 10), "A1": LabelScore(50.0, 40.0, 44.4, 5)},
    )


@pytest.mark.ai_generated
def test_headline_formats_six_numbers() -> None:
    assert _report().headline() == {
        "P": "80.00",
        "R": "75.00",
        "F1": "77.42",
        "rho_u": "10.00",
        "rho_o": "2",
        "rho_f": "12.50",
    }


@pytest.mark.ai_generated
def test_headline_without_frames_is_na() -> None:
    assert _report(rho_f=None).headline()["rho_f"] == "NA"


@pytest.mark.ai_generated
def test_json_has_stable_fields() -> None:
    data = json.loads(_report(rho_f=None).to_json())
    assert data["rho_f"] is None
    assert set(data) == {
        "precision", "recall", "f1", "rho_u", "rho_o", "rho_f", "propositions",
        "sentences", "frame_scored", "frame_skipped", "per_label",
    }
    assert data["per_label"]["A1"]["support"] == 5


@pytest.mark.ai_generated
def test_from_dict_restores_report() -> None:
    report = _report()
    assert EvalReport.from_dict(report.to_dict()) == report


@pytest.mark.ai_generated
def test_text_table() -> None:
    text = _report().to_text()
    lines = text.splitlines()
    assert lines[0].split() == ["P", "R", "F1", "rho_u", "rho_o", "rho_f"]
    assert lines[1].split() == ["80.00", "75.00", "77.42", "10.00", "2", "12.50"]
    assert "frame_skipped=2" in lines[2]
    assert lines[4].split() == ["label", "P", "R", "F1", "n"]
    assert lines[5].split() == ["A0", "90.00", "90.00", "90.00", "10"]
    assert "label" not in _report().to_text(label_wise=False)
