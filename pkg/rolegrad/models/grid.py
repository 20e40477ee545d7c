"""Per-proposition label distributions and scored spans."""

from __future__ import annotations

from dataclasses import dataclass

import torch

from rolegrad.models.labels import LabelSet


@dataclass
class ScoreGrid:
    """Per-token label distributions for one (sentence, predicate) pair.

    Attributes:
        probs: Tensor [sentence_length x num_tags]; row t is the softmax
            distribution over BIO tags of token t for this predicate
        predicate_index: Token position of the predicate
        sentence_id: Identifier of the owning sentence
    """

    probs: torch.Tensor
    predicate_index: int
    sentence_id: str = ""

    def __post_init__(self) -> None:
        if self.probs.dim() != 2:
            raise ValueError(f"score grid must be 2-D, got shape {tuple(self.probs.shape)}")
        if not 0 <= self.predicate_index < self.probs.shape[0]:
            raise ValueError(
                f"predicate index {self.predicate_index} outside sentence of length "
                f"{self.probs.shape[0]}"
            )

    def __len__(self) -> int:
        return int(self.probs.shape[0])

    def begin(self, labels: LabelSet, subset: tuple[str, ...] | None = None) -> torch.Tensor:
        """B-X probabilities, shape [length x |subset|]."""
        return self.probs[:, labels.b_indices(subset)]

    def inside(self, labels: LabelSet, subset: tuple[str, ...] | None = None) -> torch.Tensor:
        """I-X probabilities, shape [length x |subset|]."""
        return self.probs[:, labels.i_indices(subset)]

    def is_normalized(self, tol: float = 1e-6) -> bool:
        rows = self.probs.detach().sum(dim=-1)
        return bool(torch.all((rows - 1).abs() <= tol)) and bool(
            torch.all((self.probs >= 0) & (self.probs <= 1))
        )

    @classmethod
    def one_hot(
        cls,
        tag_indices: list[int],
        num_tags: int,
        predicate_index: int,
        sentence_id: str = "",
        dtype: torch.dtype = torch.float64,
    ) -> ScoreGrid:
        """Hard grid placing all mass on the given tag per token."""
        probs = torch.zeros(len(tag_indices), num_tags, dtype=dtype)
        probs[torch.arange(len(tag_indices)), torch.tensor(tag_indices)] = 1.0
        return cls(probs=probs, predicate_index=predicate_index, sentence_id=sentence_id)


@dataclass(frozen=True)
class SpanTriple:
    """A candidate argument span [start, end] (inclusive) with its label and score."""

    start: int
    end: int
    label: str
    score: float
