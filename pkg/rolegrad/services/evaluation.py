"""Span scoring and structure-violation measurements.

Spans are exact-match (start, end, label) triples read off BIO tags.  The
three violation measurements mirror the constraint losses:

- rho_u: percent of propositions where some core label begins twice
- rho_o: number of argument-span pairs from different propositions of a
  sentence that partially cross
- rho_f: percent of propositions (with a known roleset) predicting a core
  label outside that roleset
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from rolegrad.lib.logging_config import get_logger
from rolegrad.models.corpus import Corpus, FrameInventory
from rolegrad.models.labels import LabelSet, split_tag
from rolegrad.models.report import EvalReport, LabelScore
from rolegrad.services.decoding import Span, extract_spans

logger = get_logger(__name__)


def _prf(correct: int, predicted: int, gold: int) -> tuple[float, float, float]:
    precision = 100.0 * correct / predicted if predicted else 0.0
    recall = 100.0 * correct / gold if gold else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def _check_aligned(gold: Sequence, pred: Sequence) -> None:
    if len(gold) != len(pred):
        raise ValueError(
            f"misaligned corpora: {len(gold)} gold vs {len(pred)} predicted propositions"
        )


def span_prf(gold: Sequence[set[Span]], pred: Sequence[set[Span]]) -> tuple[float, float, float]:
    """Micro-averaged exact-match span precision, recall and F1 in percent.

    Raises:
        ValueError: If the proposition lists differ in length
    """
    _check_aligned(gold, pred)
    correct = sum(len(g & p) for g, p in zip(gold, pred))
    return _prf(correct, sum(len(p) for p in pred), sum(len(g) for g in gold))


def label_prf(gold: Sequence[set[Span]], pred: Sequence[set[Span]]) -> dict[str, LabelScore]:
    """Exact-match scores broken down by argument label."""
    _check_aligned(gold, pred)
    correct: Counter[str] = Counter()
    predicted: Counter[str] = Counter()
    expected: Counter[str] = Counter()
    for g, p in zip(gold, pred):
        correct.update(span[2] for span in g & p)
        predicted.update(span[2] for span in p)
        expected.update(span[2] for span in g)
    scores = {}
    for label in sorted(set(predicted) | set(expected)):
        precision, recall, f1 = _prf(correct[label], predicted[label], expected[label])
        scores[label] = LabelScore(precision, recall, f1, support=expected[label])
    return scores


def has_duplicate_core(tags: Sequence[str], core: Iterable[str]) -> bool:
    """True if some core label begins more than one span."""
    core = set(core)
    begins = Counter(label for prefix, label in map(split_tag, tags) if prefix == "B")
    return any(n > 1 for label, n in begins.items() if label in core)


def rho_u(pred_tags: Sequence[Sequence[str]], core: Iterable[str]) -> float:
    """Percent of propositions with a duplicated core label.

    Raises:
        ValueError: If there are no propositions
    """
    if not pred_tags:
        raise ValueError("rho_u of zero propositions")
    core = tuple(core)
    duplicated = sum(has_duplicate_core(tags, core) for tags in pred_tags)
    return 100.0 * duplicated / len(pred_tags)


def crosses(a: tuple[int, int], b: tuple[int, int]) -> bool:
    """Partial overlap: the spans share a token but neither contains the other."""
    (s1, e1), (s2, e2) = sorted([a, b])
    return s1 < s2 <= e1 < e2


def crossing_pairs(propositions: Sequence[set[Span]]) -> set[frozenset[tuple[int, int]]]:
    """Unordered boundary pairs that partially cross, across propositions of one sentence."""
    found: set[frozenset[tuple[int, int]]] = set()
    for k, spans in enumerate(propositions):
        for other in propositions[k + 1:]:
            for s1, e1, _ in spans:
                for s2, e2, _ in other:
                    if crosses((s1, e1), (s2, e2)):
                        found.add(frozenset({(s1, e1), (s2, e2)}))
    return found


def rho_o(sentences: Sequence[Sequence[set[Span]]]) -> int:
    """Total number of crossing span pairs over all sentences."""
    return sum(len(crossing_pairs(props)) for props in sentences)


def out_of_frame(spans: Iterable[Span], allowed: Iterable[str], core: Iterable[str]) -> bool:
    """True if some core span label is not in the roleset."""
    allowed, core = set(allowed), set(core)
    return any(label in core and label not in allowed for _, _, label in spans)


@dataclass
class FrameScore:
    """rho_f with the bookkeeping of which propositions were scored."""

    rate: float | None
    scored: int = 0
    skipped: list[tuple[str, str]] = field(default_factory=list)


def rho_f(
    pred_spans: Sequence[set[Span]],
    senses: Sequence[tuple[str, str]],
    frames: FrameInventory,
    core: Iterable[str],
) -> FrameScore:
    """Percent of scored propositions with an out-of-roleset core argument.

    Propositions whose (lemma, sense) is missing from ``frames`` are
    skipped with a warning; if none can be scored the rate is None.

    Raises:
        ValueError: If the inventory is empty
    """
    if len(frames) == 0:
        raise ValueError("rho_f needs a non-empty frame inventory")
    _check_aligned(senses, pred_spans)
    core = tuple(core)
    violating = 0
    score = FrameScore(rate=None)
    for spans, (lemma, sense) in zip(pred_spans, senses):
        allowed = frames.allowed(lemma, sense)
        if allowed is None:
            score.skipped.append((lemma, sense))
            continue
        score.scored += 1
        violating += out_of_frame(spans, allowed, core)
    if score.skipped:
        unique = sorted({f"{lemma}.{sense}" for lemma, sense in score.skipped})
        preview = ", ".join(unique[:5]) + (" ..." if len(unique) > 5 else "")
        logger.warning(
            f"rho_f skipped {len(score.skipped)} proposition(s) without a roleset: {preview}"
        )
    if score.scored:
        score.rate = 100.0 * violating / score.scored
    return score


def evaluate(
    corpus: Corpus,
    predicted: Sequence[Sequence[Sequence[str]]],
    labels: LabelSet,
    frames: FrameInventory | None = None,
) -> EvalReport:
    """Score predicted tags against the corpus gold.

    Args:
        corpus: Gold corpus
        predicted: Tags per sentence per proposition, aligned with ``corpus``
        labels: Label set (its core labels scope rho_u and rho_f)
        frames: Roleset inventory; None reports rho_f as NA

    Raises:
        ValueError: On misaligned input or an empty corpus
    """
    if len(predicted) != len(corpus):
        raise ValueError(
            f"misaligned corpora: {len(corpus)} gold vs {len(predicted)} predicted sentences"
        )
    gold_spans: list[set[Span]] = []
    pred_spans: list[set[Span]] = []
    pred_tags: list[Sequence[str]] = []
    senses: list[tuple[str, str]] = []
    by_sentence: list[list[set[Span]]] = []
    for sentence, tags_per_prop in zip(corpus, predicted):
        _check_aligned(sentence.propositions, tags_per_prop)
        sentence_spans = []
        for prop, tags in zip(sentence.propositions, tags_per_prop):
            spans = extract_spans(tags)
            gold_spans.append(extract_spans(prop.tags))
            pred_spans.append(spans)
            pred_tags.append(tags)
            senses.append(prop.frame_key)
            sentence_spans.append(spans)
        by_sentence.append(sentence_spans)

    precision, recall, f1 = span_prf(gold_spans, pred_spans)
    frame_score = FrameScore(rate=None)
    if frames is not None:
        frame_score = rho_f(pred_spans, senses, frames, labels.core)
    return EvalReport(
        precision=precision,
        recall=recall,
        f1=f1,
        rho_u=rho_u(pred_tags, labels.core),
        rho_o=rho_o(by_sentence),
        rho_f=frame_score.rate,
        propositions=len(pred_tags),
        sentences=len(corpus),
        frame_scored=frame_score.scored,
        frame_skipped=len(frame_score.skipped),
        per_label=label_prf(gold_spans, pred_spans),
    )


def gold_tags(corpus: Corpus) -> list[list[list[str]]]:
    """The corpus's own gold tags in ``evaluate``'s input shape."""
    return [[list(p.tags) for p in sentence.propositions] for sentence in corpus]


@dataclass
class Violations:
    """Ids of propositions (``<sentence id>#<predicate index>``) breaking each rule."""

    unique: list[str] = field(default_factory=list)
    overlap: list[str] = field(default_factory=list)
    frame: list[str] = field(default_factory=list)


def list_violations(
    corpus: Corpus,
    predicted: Sequence[Sequence[Sequence[str]]],
    labels: LabelSet,
    frames: FrameInventory | None = None,
) -> Violations:
    """Which propositions violate which constraint; for detailed reports."""
    found = Violations()
    for sentence, tags_per_prop in zip(corpus, predicted):
        spans = [extract_spans(tags) for tags in tags_per_prop]
        ids = [f"{sentence.sentence_id}#{p.pred_index}" for p in sentence.propositions]
        crossing_owners: set[int] = set()
        for k, own in enumerate(spans):
            for m in range(k + 1, len(spans)):
                if any(
                    crosses((a, b), (c, d)) for a, b, _ in own for c, d, _ in spans[m]
                ):
                    crossing_owners.update((k, m))
        for k, (prop, tags) in enumerate(zip(sentence.propositions, tags_per_prop)):
            if has_duplicate_core(tags, labels.core):
                found.unique.append(ids[k])
            if k in crossing_owners:
                found.overlap.append(ids[k])
            if frames is not None:
                allowed = frames.allowed(prop.lemma, prop.sense)
                if allowed is not None and out_of_frame(spans[k], allowed, labels.core):
                    found.frame.append(ids[k])
    return found
