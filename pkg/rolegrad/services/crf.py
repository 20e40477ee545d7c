"""Linear-chain CRF over BIO tags.

Transition scores live in a (T + 2) x (T + 2) matrix whose last two states
are START and STOP.  Structurally invalid BIO moves (an ``I-X`` that does
not continue ``B-X``/``I-X``, anything into START, anything out of STOP)
are fixed at -inf while hard constraints are active.
"""

from __future__ import annotations

import math

import torch
from torch import nn

from rolegrad.lib.error_utils import DataFormatError
from rolegrad.models.labels import LabelSet


def allowed_transitions(labels: LabelSet) -> torch.Tensor:
    """Boolean mask [T + 2, T + 2] of legal (from, to) moves."""
    num_tags = labels.num_tags
    start, stop = num_tags, num_tags + 1
    allowed = torch.zeros(num_tags + 2, num_tags + 2, dtype=torch.bool)
    allowed[:num_tags, :num_tags] = True
    allowed[start, :num_tags] = True
    allowed[:num_tags, stop] = True
    for label in labels.all:
        inside = labels.i_index(label)
        allowed[:, inside] = False
        allowed[labels.b_index(label), inside] = True
        allowed[inside, inside] = True
    return allowed


def constrained(transitions: torch.Tensor, allowed: torch.Tensor | None) -> torch.Tensor:
    """Transitions with banned moves set to -inf (unchanged if ``allowed`` is None)."""
    if allowed is None:
        return transitions
    return transitions.masked_fill(~allowed, -math.inf)


def path_score(
    logits: torch.Tensor, gold: torch.Tensor, transitions: torch.Tensor
) -> torch.Tensor:
    """Unnormalized score of one tag path, START and STOP included."""
    num_tags = logits.shape[-1]
    start, stop = num_tags, num_tags + 1
    positions = torch.arange(logits.shape[0], device=logits.device)
    emission = logits[positions, gold].sum()
    moves = transitions[gold[:-1], gold[1:]].sum()
    return transitions[start, gold[0]] + emission + moves + transitions[gold[-1], stop]


def log_partition(logits: torch.Tensor, transitions: torch.Tensor) -> torch.Tensor:
    """log Z by the forward algorithm in log space."""
    num_tags = logits.shape[-1]
    start, stop = num_tags, num_tags + 1
    inner = transitions[:num_tags, :num_tags]
    alpha = transitions[start, :num_tags] + logits[0]
    for t in range(1, logits.shape[0]):
        alpha = torch.logsumexp(alpha.unsqueeze(1) + inner, dim=0) + logits[t]
    return torch.logsumexp(alpha + transitions[:num_tags, stop], dim=0)


def crf_nll(
    logits: torch.Tensor,
    gold: torch.Tensor | list[int],
    transitions: torch.Tensor,
    allowed: torch.Tensor | None = None,
) -> torch.Tensor:
    """Negative log-likelihood of ``gold`` under the linear-chain model.

    Args:
        logits: Emission scores [length x T]
        gold: Gold tag indices, one per token
        transitions: Raw transition scores [T + 2, T + 2]
        allowed: Legal-move mask; when given, banned moves score -inf

    Raises:
        DataFormatError: If the gold path uses a banned transition
    """
    gold = torch.as_tensor(gold, dtype=torch.long, device=logits.device)
    if gold.shape[0] != logits.shape[0]:
        raise ValueError(f"{gold.shape[0]} gold tags for {logits.shape[0]} tokens")
    if allowed is not None:
        num_tags = logits.shape[-1]
        path = [num_tags, *gold.tolist(), num_tags + 1]
        for position, (a, b) in enumerate(zip(path[:-1], path[1:])):
            if not allowed[a, b]:
                raise DataFormatError(
                    f"gold violates transition constraints at token {position}"
                )
    scores = constrained(transitions, allowed)
    return log_partition(logits, scores) - path_score(logits, gold, scores)


class LinearChainCRF(nn.Module):
    """Trainable transition matrix with optional hard BIO bans."""

    def __init__(self, labels: LabelSet, hard_constraints: bool = True):
        super().__init__()
        self.num_tags = labels.num_tags
        self.hard_constraints = hard_constraints
        self.transitions = nn.Parameter(torch.zeros(self.num_tags + 2, self.num_tags + 2))
        self.register_buffer("allowed", allowed_transitions(labels))

    def scores(self) -> torch.Tensor:
        """Transition scores with the bans applied."""
        return constrained(self.transitions, self.allowed if self.hard_constraints else None)

    def nll(self, logits: torch.Tensor, gold: torch.Tensor | list[int]) -> torch.Tensor:
        allowed = self.allowed if self.hard_constraints else None
        return crf_nll(logits, gold, self.transitions, allowed)
