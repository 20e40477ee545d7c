"""Viterbi decoding under hard BIO transitions and span extraction."""

from __future__ import annotations

from collections.abc import Sequence

import torch

from rolegrad.models.labels import bio_error, split_tag

Span = tuple[int, int, str]


def viterbi(logits: torch.Tensor, transitions: torch.Tensor) -> tuple[list[int], float]:
    """Highest-scoring tag path.

    Args:
        logits: Emission scores [length x T]
        transitions: Transition scores [T + 2, T + 2] with START = T and
            STOP = T + 1; banned moves already at -inf

    Returns:
        (tag indices, path score).  Backpointer ties go to the lowest tag
        index, so with equal scores ``O`` (index 0) wins.
    """
    with torch.no_grad():
        num_tags = logits.shape[-1]
        start, stop = num_tags, num_tags + 1
        inner = transitions[:num_tags, :num_tags]
        score = transitions[start, :num_tags] + logits[0]
        backpointers: list[torch.Tensor] = []
        for t in range(1, logits.shape[0]):
            candidates = score.unsqueeze(1) + inner  # [previous, current]
            best = torch.argmax(candidates, dim=0)
            score = candidates.gather(0, best.unsqueeze(0)).squeeze(0) + logits[t]
            backpointers.append(best)
        final = score + transitions[:num_tags, stop]
        last = int(torch.argmax(final))
        path = [last]
        for best in reversed(backpointers):
            path.append(int(best[path[-1]]))
        path.reverse()
        return path, float(final[last])


def extract_spans(tags: Sequence[str]) -> set[Span]:
    """Read (start, end, label) spans off a BIO-valid tag sequence.

    Raises:
        ValueError: If the sequence is not BIO-valid
    """
    error = bio_error(tags)
    if error is not None:
        raise ValueError(f"invalid BIO sequence: {error}")
    spans: set[Span] = set()
    begin: int | None = None
    current: str | None = None
    for position, tag in enumerate(tags):
        prefix, label = split_tag(tag)
        if prefix != "I" and current is not None:
            assert begin is not None
            spans.add((begin, position - 1, current))
            begin, current = None, None
        if prefix == "B":
            begin, current = position, label
    if current is not None:
        assert begin is not None
        spans.add((begin, len(tags) - 1, current))
    return spans
