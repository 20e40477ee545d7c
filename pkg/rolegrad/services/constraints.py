"""Constraint regularizers over score grids.

Three rules about SRL output structure, each relaxed into a nonnegative
log-space penalty on the per-token softmax probabilities:

- unique core roles (L_U): a core label begins at most one span per
  proposition
- exclusively overlapping roles (L_O): argument spans of different
  (predicate, label) owners nest or are disjoint, never partially cross
- frame core roles (L_F): a proposition uses only the core labels its
  (lemma, sense) roleset allows

Probabilities are clamped to [epsilon, 1 - epsilon] before any log.  The
scalar helpers ``span_begin_score`` and ``crossing_guard`` work on raw
probabilities; the losses clamp first and then build the same quantities
for all spans at once.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import torch

from rolegrad.lib.config import ConstraintWeights
from rolegrad.lib.error_utils import NonFiniteLossError, SoftLogicError, UnknownFrameError
from rolegrad.lib.logging_config import get_logger
from rolegrad.models.corpus import FrameInventory
from rolegrad.models.grid import ScoreGrid, SpanTriple
from rolegrad.models.labels import LabelSet
from rolegrad.services.softlogic import (
    DEFAULT_EPSILON,
    PenaltyTerm,
    clamp,
    godel_and,
    godel_and2,
    godel_or,
    godel_or2,
    log_imply,
    track,
)

logger = get_logger(__name__)


def loss_unique(
    grid: ScoreGrid, labels: LabelSet, epsilon: float = DEFAULT_EPSILON
) -> PenaltyTerm:
    """Unique core roles penalty for one proposition.

    Sums, over tokens i and core labels X,
    max(0, log B_X(i) - min_{j != i} log(1 - B_X(j))).
    A single-token sentence has an empty inner conjunction and scores zero.
    """
    probs = track(grid.probs)
    n = len(grid)
    if n < 2 or not labels.core:
        return PenaltyTerm.zero(probs)

    begin = clamp(probs[:, labels.b_indices(labels.core)], epsilon)  # [n, C]
    log_not = torch.log(1.0 - begin).unsqueeze(0).expand(n, n, -1)  # [i, j, C]
    diagonal = torch.eye(n, dtype=torch.bool, device=probs.device).unsqueeze(-1)
    rhs = godel_and(log_not.masked_fill(diagonal, math.inf), dim=1)
    loss = log_imply(torch.log(begin), rhs).sum()
    return PenaltyTerm(loss=loss, inputs=probs)


def _check_span(n: int, i: int, j: int) -> None:
    if j <= i:
        raise SoftLogicError(f"degenerate span ({i}, {j})")
    if i < 0 or j >= n:
        raise SoftLogicError(f"span ({i}, {j}) outside sentence of length {n}")


def _inside_after(inside: torch.Tensor, j: int) -> torch.Tensor:
    """I probability at j + 1; a position past the end is a false literal."""
    if j + 1 < inside.shape[0]:
        return inside[j + 1]
    return inside.new_zeros(())


def span_begin_score(
    grid: ScoreGrid, i: int, j: int, label: str, labels: LabelSet
) -> torch.Tensor:
    """Truth of "an X span runs exactly from i to j" for the grid's predicate.

    min(B_X(i), I_X(j), 1 - I_X(j + 1)), with I_X past the sentence end 0.

    Raises:
        SoftLogicError: If j <= i or the span leaves the sentence
    """
    _check_span(len(grid), i, j)
    inside = grid.probs[:, labels.i_index(label)]
    begin = grid.probs[i, labels.b_index(label)]
    return godel_and(torch.stack([begin, inside[j], 1.0 - _inside_after(inside, j)]))


def crossing_guard(
    grid: ScoreGrid, i: int, j: int, label: str, labels: LabelSet
) -> torch.Tensor:
    """Truth of "the grid's Y spans do not partially cross [i, j]".

    min(1 - min(B_Y(j), I_Y(j+1)),
        max(B_Y(i), I_Y(i), 1 - I_Y(j), 1 - I_Y(j+1)))

    Raises:
        SoftLogicError: If j <= i or the span leaves the sentence
    """
    _check_span(len(grid), i, j)
    begin = grid.probs[:, labels.b_index(label)]
    inside = grid.probs[:, labels.i_index(label)]
    after = _inside_after(inside, j)
    leaves_right = 1.0 - godel_and(torch.stack([begin[j], after]))
    enters_left = godel_or(torch.stack([begin[i], inside[i], 1.0 - inside[j], 1.0 - after]))
    return godel_and(torch.stack([leaves_right, enters_left]))


@dataclass
class SpanTables:
    """Span and guard truth values for all (i, j) of one sentence.

    Attributes:
        span: P(u, i, j, X), shape [U, n, n, L]
        guard: Q(v, i, j, Y), shape [U, n, n, L]
    """

    span: torch.Tensor
    guard: torch.Tensor

    @property
    def length(self) -> int:
        return int(self.span.shape[1])


def span_tables(clamped: torch.Tensor, labels: LabelSet) -> SpanTables:
    """Vectorized ``span_begin_score`` / ``crossing_guard`` for every span.

    Args:
        clamped: Clamped probabilities of all grids of a sentence, [U, n, T]
        labels: Label set defining the tag layout

    Returns:
        Tables indexed [predicate, i, j, label]; entries with j <= i are
        computed but meaningless
    """
    begin = clamped[..., labels.b_indices()]  # [U, n, L]
    inside = clamped[..., labels.i_indices()]
    after = torch.cat([inside[:, 1:], torch.zeros_like(inside[:, :1])], dim=1)
    not_after = 1.0 - after

    def conj(*parts: torch.Tensor) -> torch.Tensor:
        return godel_and(torch.stack(torch.broadcast_tensors(*parts), dim=-1))

    def disj(*parts: torch.Tensor) -> torch.Tensor:
        return godel_or(torch.stack(torch.broadcast_tensors(*parts), dim=-1))

    # i on axis 1, j on axis 2
    span = conj(begin[:, :, None], inside[:, None], not_after[:, None])
    leaves_right = 1.0 - godel_and2(begin, after)  # indexed by j
    enters_left = disj(
        begin[:, :, None], inside[:, :, None], 1.0 - inside[:, None], not_after[:, None]
    )
    guard = conj(leaves_right[:, None], enters_left)
    return SpanTables(span=span, guard=guard)


def _candidate_order(scores: torch.Tensor, k: int | None) -> torch.Tensor:
    """Indices of the top-k spans per row of flattened [.., n * n] scores.

    Only j > i is a candidate.  The stable descending sort keeps equal
    scores in flattened order, which is (i, j) lexicographic.
    """
    n = int(math.isqrt(scores.shape[-1]))
    valid = torch.ones(n, n, dtype=torch.bool, device=scores.device).triu(diagonal=1).reshape(-1)
    num_spans = n * (n - 1) // 2
    keep = num_spans if k is None else min(k, num_spans)
    ranked = scores.masked_fill(~valid, -math.inf)
    order = torch.sort(ranked, dim=-1, descending=True, stable=True).indices
    return order[..., :keep]


def topk_spans(
    grid: ScoreGrid,
    label: str,
    k: int,
    labels: LabelSet,
    epsilon: float = DEFAULT_EPSILON,
) -> list[SpanTriple]:
    """The k highest-scoring multi-token spans for one label, best first.

    Scores are ``span_begin_score`` on the clamped grid.  Ties go to the
    lexicographically smaller (i, j); short sentences yield fewer than k.
    """
    if k < 1:
        raise SoftLogicError(f"k must be >= 1, got {k}")
    n = len(grid)
    if n < 2:
        return []
    with torch.no_grad():
        tables = span_tables(clamp(grid.probs, epsilon).unsqueeze(0), labels)
        scores = tables.span[0, :, :, labels.label_index(label)].reshape(-1)
        order = _candidate_order(scores, k)
    return [
        SpanTriple(start=int(s) // n, end=int(s) % n, label=label, score=float(scores[s]))
        for s in order
    ]


def _stack_grids(grids: Sequence[ScoreGrid]) -> torch.Tensor:
    lengths = {len(g) for g in grids}
    if len(lengths) != 1:
        raise SoftLogicError(f"grids of one sentence differ in length: {sorted(lengths)}")
    return torch.stack([g.probs for g in grids])


def loss_overlap(
    grids: Sequence[ScoreGrid],
    labels: LabelSet,
    k: int | None = 4,
    epsilon: float = DEFAULT_EPSILON,
) -> PenaltyTerm:
    """Exclusively overlapping roles penalty for one sentence.

    For every predicate u, label X and each of the top-k spans (i, j) of
    (u, X), adds max(0, log P(u,i,j,X) - min_{(v,Y) != (u,X)} log Q(v,i,j,Y)).

    P reads only B at i, I at j and I at j + 1, never the tokens in
    between.  When (u, X) begins two X spans, a pseudo-span from the first
    B to the end of the second is fully true, and it can cross a span of
    another owner that the real spans only nest in.  So a zero loss means
    no crossing only for taggings with at most one span per label per
    proposition.

    Args:
        grids: All grids of one sentence, equal lengths
        labels: Label set
        k: Beam size per (u, X); None enumerates every span
        epsilon: Clamp value

    Returns:
        Penalty whose inputs are the stacked grid probabilities [U, n, T]
    """
    if not grids:
        raise SoftLogicError("loss_overlap needs at least one grid")
    if k is not None and k < 1:
        raise SoftLogicError(f"k must be >= 1, got {k}")
    probs = track(_stack_grids(grids))
    num_preds, n, _ = probs.shape
    num_labels = len(labels.all)
    owners = num_preds * num_labels
    if n < 2 or owners < 2:
        return PenaltyTerm.zero(probs)

    tables = span_tables(clamp(probs, epsilon), labels)
    log_span = torch.log(tables.span).permute(0, 3, 1, 2).reshape(num_preds, num_labels, n * n)
    # guards as [span, owner] with owner = v * L + Y
    log_guard = torch.log(tables.guard).permute(1, 2, 0, 3).reshape(n * n, owners)

    order = _candidate_order(log_span.detach(), k)  # [U, L, K]
    antecedent = log_span.gather(-1, order)
    guards = log_guard[order]  # [U, L, K, owners]
    owner = (
        torch.arange(num_preds, device=probs.device)[:, None] * num_labels
        + torch.arange(num_labels, device=probs.device)[None, :]
    )
    is_owner = torch.arange(owners, device=probs.device) == owner[..., None]
    rhs = godel_and(guards.masked_fill(is_owner[:, :, None, :], math.inf), dim=-1)
    loss = log_imply(antecedent, rhs).sum()
    return PenaltyTerm(loss=loss, inputs=probs)


def overlap_term(
    grids: Sequence[ScoreGrid],
    owner: int,
    i: int,
    j: int,
    label: str,
    labels: LabelSet,
    epsilon: float = DEFAULT_EPSILON,
) -> torch.Tensor:
    """A single summand of ``loss_overlap``: span (i, j) of (grids[owner], label)."""
    clamped = [
        ScoreGrid(clamp(g.probs, epsilon), g.predicate_index, g.sentence_id) for g in grids
    ]
    antecedent = torch.log(span_begin_score(clamped[owner], i, j, label, labels))
    others = [
        torch.log(crossing_guard(g, i, j, other, labels))
        for v, g in enumerate(clamped)
        for other in labels.all
        if (v, other) != (owner, label)
    ]
    if not others:
        return antecedent.new_zeros(())
    return log_imply(antecedent, godel_and(torch.stack(others)))


def loss_frame(
    grid: ScoreGrid,
    lemma: str,
    sense: str,
    frames: FrameInventory,
    labels: LabelSet,
    epsilon: float = DEFAULT_EPSILON,
    literal: str = "conjunction",
    unknown: str = "warn",
) -> PenaltyTerm:
    """Frame core roles penalty for one proposition with a gold sense.

    -min_{i, X not in R} log(1 - lit_X(i)) where lit is min(B_X, I_X) for
    the "conjunction" literal and max(B_X, I_X) for "disjunction".

    Raises:
        UnknownFrameError: If (lemma, sense) is not in ``frames`` and
            ``unknown`` is "error"
    """
    probs = track(grid.probs)
    allowed = frames.allowed(lemma, sense)
    if allowed is None:
        message = f"no roleset for {lemma}.{sense}"
        if unknown == "error":
            raise UnknownFrameError(message)
        logger.warning(f"Skipping frame loss: {message}")
        return PenaltyTerm.zero(probs)
    disallowed = [x for x in labels.core if x not in allowed]
    if not disallowed:
        return PenaltyTerm.zero(probs)

    clamped = clamp(probs, epsilon)
    begin = clamped[:, labels.b_indices(disallowed)]
    inside = clamped[:, labels.i_indices(disallowed)]
    if literal == "conjunction":
        lit = godel_and2(begin, inside)
    elif literal == "disjunction":
        lit = godel_or2(begin, inside)
    else:
        raise SoftLogicError(f"unknown frame literal: {literal!r}")
    rhs = godel_and(torch.log(1.0 - lit).reshape(-1))
    loss = log_imply(rhs.new_zeros(()), rhs)
    return PenaltyTerm(loss=loss, inputs=probs)


def _check_finite(name: str, value: float | torch.Tensor, sentence_id: str | None) -> None:
    number = float(value.detach()) if isinstance(value, torch.Tensor) else float(value)
    if not math.isfinite(number):
        raise NonFiniteLossError(name, number, sentence_id)


def combine_loss(
    ce: float | torch.Tensor,
    lu: float | torch.Tensor,
    lo: float | torch.Tensor,
    lf: float | torch.Tensor,
    weights: ConstraintWeights,
    sentence_id: str | None = None,
) -> float | torch.Tensor:
    """L_E + lambda_U L_U + lambda_O L_O + lambda_F L_F.

    Tensors stay on the autograd graph.

    Raises:
        NonFiniteLossError: Naming the first NaN/inf component
    """
    for name, value in (("L_E", ce), ("L_U", lu), ("L_O", lo), ("L_F", lf)):
        _check_finite(name, value, sentence_id)
    return ce + weights.lambda_u * lu + weights.lambda_o * lo + weights.lambda_f * lf


@dataclass
class ConstraintLosses:
    """Per-sentence constraint penalties (summed over the sentence's predicates)."""

    unique: torch.Tensor
    overlap: torch.Tensor
    frame: torch.Tensor


def sentence_losses(
    grids: Sequence[ScoreGrid],
    senses: Sequence[tuple[str, str]],
    labels: LabelSet,
    weights: ConstraintWeights,
    frames: FrameInventory | None = None,
) -> ConstraintLosses:
    """All three penalties for one sentence.

    L_U and L_F add up over the sentence's propositions; L_O is defined on
    the sentence as a whole.  Propositions whose sense has no roleset are
    skipped quietly for L_F (callers report them once per corpus), or fail
    under ``unknown_frame="error"``.
    """
    eps = weights.epsilon
    zero = grids[0].probs.new_zeros(())
    unique = sum((loss_unique(g, labels, eps).loss for g in grids), zero)
    overlap = loss_overlap(grids, labels, weights.beam_k, eps).loss
    frame = zero
    if frames is not None:
        scored = [
            (g, lemma, sense)
            for g, (lemma, sense) in zip(grids, senses)
            if weights.unknown_frame == "error" or (lemma, sense) in frames
        ]
        frame = sum(
            (
                loss_frame(
                    g, lemma, sense, frames, labels, eps,
                    literal=weights.frame_literal, unknown=weights.unknown_frame,
                ).loss
                for g, lemma, sense in scored
            ),
            zero,
        )
    return ConstraintLosses(unique=unique, overlap=overlap, frame=frame)


def topk_missed(
    sentences: Sequence[Sequence[ScoreGrid]],
    crossing: Sequence[bool],
    labels: LabelSet,
    ks: Sequence[int] = (1, 2, 4, 6),
    threshold: float = 1e-3,
    epsilon: float = DEFAULT_EPSILON,
) -> dict[int, int]:
    """Count crossing violations the beam-k overlap loss fails to see.

    A sentence is missed at k when its decoded output has a crossing pair
    but the beam-k L_O of its probabilities is at most ``threshold``.

    Args:
        sentences: Grids per sentence
        crossing: Per sentence, whether the decoded output has a crossing
        labels: Label set
        ks: Beam sizes to compare
        threshold: Loss level treated as "no penalty"
        epsilon: Clamp value

    Returns:
        Mapping k -> number of missed sentences
    """
    if len(sentences) != len(crossing):
        raise ValueError("sentences and crossing flags differ in length")
    missed = {k: 0 for k in ks}
    with torch.no_grad():
        for grids, has_crossing in zip(sentences, crossing):
            if not has_crossing:
                continue
            for k in ks:
                if loss_overlap(grids, labels, k, epsilon).value <= threshold:
                    missed[k] += 1
    return missed
