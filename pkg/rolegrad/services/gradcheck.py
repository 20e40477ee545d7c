"""Finite-difference verification of the analytic gradients.

``gradcheck`` compares the autograd gradient of a scalar function with
central differences, coordinate by coordinate, in float64.  Coordinates
sitting on a kink (a min/max tie, a hinge boundary, a change in the top-k
span set) are recognised by their one-sided differences disagreeing, and
are excluded from the error and counted as skipped.

``run_suite`` applies the check to every loss component at random
interior points.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass

import torch
from torch.func import functional_call

from rolegrad.lib.config import ConstraintWeights, ModelConfig
from rolegrad.lib.error_utils import GradientCheckError
from rolegrad.lib.logging_config import get_logger
from rolegrad.models.corpus import FrameInventory
from rolegrad.models.grid import ScoreGrid
from rolegrad.models.labels import LabelSet
from rolegrad.services.constraints import (
    combine_loss,
    loss_frame,
    loss_overlap,
    loss_unique,
    sentence_losses,
)
from rolegrad.services.crf import allowed_transitions, crf_nll
from rolegrad.services.synth import CORE_POOL, synth_corpus, synth_frames
from rolegrad.services.tagger import SrlTagger, Vocabulary

logger = get_logger(__name__)

DEFAULT_STEP = 1e-5
TOLERANCE = 1e-4
END_TO_END_TOLERANCE = 1e-3
COMPONENTS = ("L_U", "L_O", "L_F", "crf_nll", "end_to_end")

# one-sided slopes differing by more than this share of the error mark a kink
KINK_RATIO = 0.75
# errors below this are accepted without kink classification
AGREEMENT = 1e-7


@dataclass
class GradcheckResult:
    max_error: float
    checked: int
    skipped: int


def gradcheck(
    fn: Callable[[torch.Tensor], torch.Tensor],
    point: torch.Tensor,
    step: float = DEFAULT_STEP,
    flip_sign: bool = False,
) -> GradcheckResult:
    """Max relative gradient error of ``fn`` at ``point``.

    The error of a coordinate is |analytic - numeric| / max(1, |analytic|).

    Args:
        fn: Scalar function of a float64 tensor
        point: Where to check
        step: Central-difference step, in (0, 1e-3]
        flip_sign: Negate the analytic gradient (harness self-test)

    Raises:
        ValueError: If ``step`` is out of range
    """
    if not 0 < step <= 1e-3:
        raise ValueError(f"step must lie in (0, 1e-3], got {step}")
    x = point.detach().to(torch.float64).clone().requires_grad_(True)
    value = fn(x)
    if value.requires_grad:
        (analytic,) = torch.autograd.grad(value, x, allow_unused=True)
        if analytic is None:
            analytic = torch.zeros_like(x)
    else:
        analytic = torch.zeros_like(x)
    analytic = analytic.detach().reshape(-1)
    if flip_sign:
        analytic = -analytic

    base = x.detach().reshape(-1)
    f0 = float(value.detach())
    result = GradcheckResult(max_error=0.0, checked=0, skipped=0)
    with torch.no_grad():
        for k in range(base.numel()):
            shifted = base.clone()
            shifted[k] += step
            f_plus = float(fn(shifted.view_as(x)))
            shifted[k] -= 2 * step
            f_minus = float(fn(shifted.view_as(x)))

            numeric = (f_plus - f_minus) / (2 * step)
            a = float(analytic[k])
            err_abs = abs(a - numeric)
            error = err_abs / max(1.0, abs(a))
            one_sided_gap = abs((f_plus - f0) - (f0 - f_minus)) / step
            if error > AGREEMENT and err_abs <= KINK_RATIO * one_sided_gap:
                result.skipped += 1
                continue
            result.checked += 1
            result.max_error = max(result.max_error, error)
    return result


@dataclass
class ComponentReport:
    """Outcome of all trials of one loss component."""

    component: str
    max_error: float
    tolerance: float
    trials: int
    checked: int
    skipped: int

    @property
    def passed(self) -> bool:
        return self.max_error < self.tolerance

    def to_dict(self) -> dict:
        return {
            "component": self.component,
            "max_error": self.max_error,
            "tolerance": self.tolerance,
            "trials": self.trials,
            "checked": self.checked,
            "skipped": self.skipped,
            "passed": self.passed,
        }


LABELS = LabelSet(all=("A0", "A1", "AM-TMP"), core=("A0", "A1"))
FRAMES = FrameInventory(roles={("go", "01"): frozenset({"A0"})})
SENTENCE_LENGTH = 4


def _random_grid(generator: torch.Generator, *shape: int) -> torch.Tensor:
    logits = 2.0 * torch.randn(*shape, LABELS.num_tags, generator=generator, dtype=torch.float64)
    return torch.softmax(logits, dim=-1)


def _case_unique(generator: torch.Generator) -> tuple[Callable, torch.Tensor]:
    def fn(x: torch.Tensor) -> torch.Tensor:
        return loss_unique(ScoreGrid(x, 0), LABELS).loss

    return fn, _random_grid(generator, SENTENCE_LENGTH)


def _case_overlap(generator: torch.Generator) -> tuple[Callable, torch.Tensor]:
    def fn(x: torch.Tensor) -> torch.Tensor:
        grids = [ScoreGrid(x[0], 0), ScoreGrid(x[1], SENTENCE_LENGTH - 1)]
        return loss_overlap(grids, LABELS, k=4).loss

    return fn, _random_grid(generator, 2, SENTENCE_LENGTH)


def _case_frame(generator: torch.Generator) -> tuple[Callable, torch.Tensor]:
    def fn(x: torch.Tensor) -> torch.Tensor:
        return loss_frame(ScoreGrid(x, 0), "go", "01", FRAMES, LABELS).loss

    return fn, _random_grid(generator, SENTENCE_LENGTH)


def _case_crf(generator: torch.Generator) -> tuple[Callable, torch.Tensor]:
    num_tags = LABELS.num_tags
    transitions = torch.randn(num_tags + 2, num_tags + 2, generator=generator, dtype=torch.float64)
    allowed = allowed_transitions(LABELS)
    gold = LABELS.encode(["B-A0", "I-A0", "O", "B-A1"])

    def fn(x: torch.Tensor) -> torch.Tensor:
        return crf_nll(x, gold, transitions, allowed)

    logits = torch.randn(SENTENCE_LENGTH, num_tags, generator=generator, dtype=torch.float64)
    return fn, logits


def _case_end_to_end(
    generator: torch.Generator, coordinates: int = 20
) -> tuple[Callable, torch.Tensor]:
    """Combined training loss of one synthetic sentence w.r.t. model weights."""
    seed = int(torch.randint(0, 2**31 - 1, (1,), generator=generator))
    corpus = synth_corpus(seed, n_sentences=1, max_len=6)
    sentence = corpus[0]
    frames = synth_frames(seed)
    labels = LabelSet.from_labels(corpus.labels(), core=CORE_POOL)
    vocab = Vocabulary.from_corpus(corpus)
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        model = SrlTagger(
            len(vocab), labels, ModelConfig(embed_dim=4, hidden_dim=4, dropout=0.0)
        ).double().eval()
    weights = ConstraintWeights(lambda_u=1.0, lambda_o=0.5, lambda_f=0.1)

    base = {name: p.detach() for name, p in model.named_parameters()}
    names = list(base)
    sizes = torch.tensor([base[n].numel() for n in names])
    flat = torch.randperm(int(sizes.sum()), generator=generator)[:coordinates]
    offsets = torch.cumsum(sizes, 0) - sizes
    owner = torch.bucketize(flat, torch.cumsum(sizes, 0), right=True)
    token_ids = vocab.encode(sentence.tokens)
    pred_indices = [p.pred_index for p in sentence.propositions]
    gold = [labels.encode(p.tags) for p in sentence.propositions]
    senses = [p.frame_key for p in sentence.propositions]

    def fn(x: torch.Tensor) -> torch.Tensor:
        params = dict(base)
        for k, name in enumerate(names):
            chosen = (owner == k).nonzero().flatten()
            if len(chosen):
                local = flat[chosen] - offsets[k]
                params[name] = (
                    base[name].flatten().index_put((local,), x[chosen]).view_as(base[name])
                )
        logits = functional_call(model, params, (token_ids, pred_indices))
        ce = sum(
            (
                crf_nll(block, tags, params["crf.transitions"], model.crf.allowed)
                for block, tags in zip(logits, gold)
            ),
            logits.new_zeros(()),
        )
        grids = model.grids(logits, sentence)
        penalties = sentence_losses(grids, senses, labels, weights, frames)
        total = combine_loss(ce, penalties.unique, penalties.overlap, penalties.frame, weights)
        assert isinstance(total, torch.Tensor)
        return total

    point = torch.cat([p.flatten() for p in base.values()])[flat]
    return fn, point


CASES: dict[str, Callable[[torch.Generator], tuple[Callable, torch.Tensor]]] = {
    "L_U": _case_unique,
    "L_O": _case_overlap,
    "L_F": _case_frame,
    "crf_nll": _case_crf,
    "end_to_end": _case_end_to_end,
}


def run_suite(
    seed: int = 0,
    trials: int = 100,
    step: float = DEFAULT_STEP,
    components: Sequence[str] = COMPONENTS,
    fault: str | None = None,
) -> list[ComponentReport]:
    """Check every component at ``trials`` random points.

    Args:
        seed: Seed of the point sampler
        trials: Points per component (>= 1)
        step: Finite-difference step
        components: Which components to check
        fault: Component whose analytic gradient gets its sign flipped

    Raises:
        ValueError: On ``trials`` < 1 or an unknown component name
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    unknown = [c for c in (*components, *([fault] if fault else [])) if c not in CASES]
    if unknown:
        raise ValueError(f"unknown component(s): {', '.join(unknown)}")

    reports = []
    for index, component in enumerate(components):
        generator = torch.Generator().manual_seed(seed * len(COMPONENTS) + index)
        tolerance = END_TO_END_TOLERANCE if component == "end_to_end" else TOLERANCE
        report = ComponentReport(component, 0.0, tolerance, trials, 0, 0)
        for _ in range(trials):
            fn, point = CASES[component](generator)
            result = gradcheck(fn, point, step, flip_sign=component == fault)
            report.max_error = max(report.max_error, result.max_error)
            report.checked += result.checked
            report.skipped += result.skipped
        if report.skipped:
            logger.warning(
                f"{component}: skipped {report.skipped} nondifferentiable coordinate(s)"
            )
        logger.info(
            f"{component}: max relative error {report.max_error:.2e} "
            f"over {report.checked} coordinate(s)",
            extra={"fields": report.to_dict()},
        )
        reports.append(report)
    return reports


def require_passed(reports: Sequence[ComponentReport]) -> None:
    """Raise if any component exceeded its tolerance.

    Raises:
        GradientCheckError: Naming every failing component
    """
    failed = [r for r in reports if not r.passed]
    if failed:
        detail = ", ".join(f"{r.component} ({r.max_error:.2e})" for r in failed)
        raise GradientCheckError(f"gradient check failed: {detail}")
