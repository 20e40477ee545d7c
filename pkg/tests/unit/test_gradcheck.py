"""Tests for the finite-difference gradient checker."""

import pytest
import torch

from rolegrad.lib.error_utils import GradientCheckError
from rolegrad.services.gradcheck import (
    COMPONENTS,
    END_TO_END_TOLERANCE,
    TOLERANCE,
    ComponentReport,
    gradcheck,
    require_passed,
    run_suite,
)


@pytest.mark.ai_generated
class TestGradcheck:
    def test_smooth_function(self) -> None:
        point = torch.tensor([0.3, -1.2, 2.0], dtype=torch.float64)
        result = gradcheck(lambda x: (x**3).sum() + x.prod(), point)
        assert result.max_error < 1e-6
        assert (result.checked, result.skipped) == (3, 0)

    def test_flipped_sign_is_caught(self) -> None:
        point = torch.tensor([0.5, 1.5], dtype=torch.float64)
        result = gradcheck(lambda x: (x**2).sum(), point, flip_sign=True)
        assert result.max_error > 1.0

    def test_kink_is_skipped(self) -> None:
        point = torch.tensor([0.0, 2.0], dtype=torch.float64)
        result = gradcheck(lambda x: torch.relu(x).sum(), point)
        assert result.skipped == 1
        assert result.checked == 1
        assert result.max_error < 1e-6

    def test_constant_function(self) -> None:
        result = gradcheck(lambda x: torch.tensor(1.0, dtype=torch.float64), torch.zeros(2))
        assert result.max_error == 0.0

    @pytest.mark.parametrize("step", [0.0, -1e-5, 1e-2])
    def test_rejects_bad_step(self, step: float) -> None:
        with pytest.raises(ValueError, match="step"):
            gradcheck(lambda x: x.sum(), torch.zeros(1), step=step)


@pytest.mark.ai_generated
@pytest.mark.parametrize("component", COMPONENTS)
def test_suite_passes(component: str) -> None:
    (report,) = run_suite(seed=0, trials=2, components=[component])
    assert report.component == component
    assert report.passed
    assert report.checked > 0
    expected = END_TO_END_TOLERANCE if component == "end_to_end" else TOLERANCE
    assert report.tolerance == expected


@pytest.mark.slow
@pytest.mark.ai_generated
def test_full_suite_passes() -> None:
    """The default 100 points per component, as ``rolegrad gradcheck`` runs them."""
    reports = run_suite(seed=0, trials=100)
    assert [r.component for r in reports] == list(COMPONENTS)
    assert all(r.trials == 100 for r in reports)
    failed = {r.component: r.max_error for r in reports if not r.passed}
    assert failed == {}
    require_passed(reports)


@pytest.mark.ai_generated
@pytest.mark.parametrize("component", ["crf_nll", "L_F"])
def test_injected_fault_fails(component: str) -> None:
    reports = run_suite(seed=0, trials=2, components=[component], fault=component)
    assert not reports[0].passed
    with pytest.raises(GradientCheckError, match=component):
        require_passed(reports)


@pytest.mark.ai_generated
def test_suite_is_deterministic() -> None:
    a = run_suite(seed=3, trials=2, components=["L_O"])
    b = run_suite(seed=3, trials=2, components=["L_O"])
    assert a == b


@pytest.mark.ai_generated
def test_suite_rejects_bad_arguments() -> None:
    with pytest.raises(ValueError, match="unknown component"):
        run_suite(components=["L_X"])
    with pytest.raises(ValueError, match="trials"):
        run_suite(trials=0)


@pytest.mark.ai_generated
def test_require_passed_accepts_passing_reports() -> None:
    require_passed([ComponentReport("L_U", 1e-8, TOLERANCE, 1, 10, 0)])
    assert ComponentReport("L_U", 1e-8, TOLERANCE, 1, 10, 0).to_dict()["passed"] is True
