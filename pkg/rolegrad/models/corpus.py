"""Corpus data models: propositions, sentences, frame inventory."""

from __future__ import annotations

from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field

from rolegrad.models.labels import split_tag


@dataclass(frozen=True)
class Proposition:
    """One predicate instance with its gold argument structure.

    Attributes:
        pred_index: Token position of the predicate
        lemma: Predicate lemma
        sense: Gold sense id, e.g. "01"
        tags: Gold BIO tags, one per sentence token
    """

    pred_index: int
    lemma: str
    sense: str
    tags: tuple[str, ...]

    @property
    def frame_key(self) -> tuple[str, str]:
        return (self.lemma, self.sense)

    def labels(self) -> set[str]:
        """Argument labels occurring in the gold tags."""
        found = set()
        for tag in self.tags:
            _, label = split_tag(tag)
            if label is not None:
                found.add(label)
        return found

    def to_dict(self) -> dict:
        return {
            "pred": self.pred_index,
            "lemma": self.lemma,
            "sense": self.sense,
            "tags": list(self.tags),
        }


@dataclass(frozen=True)
class Sentence:
    """A tokenized sentence and all of its propositions."""

    tokens: tuple[str, ...]
    propositions: tuple[Proposition, ...]
    sentence_id: str = ""

    def __len__(self) -> int:
        return len(self.tokens)

    def to_dict(self) -> dict:
        return {
            "tokens": list(self.tokens),
            "propositions": [p.to_dict() for p in self.propositions],
        }


@dataclass(frozen=True)
class Corpus:
    """Immutable ordered collection of sentences."""

    sentences: tuple[Sentence, ...] = ()
    name: str = ""

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self) -> Iterator[Sentence]:
        return iter(self.sentences)

    def __getitem__(self, index: int) -> Sentence:
        return self.sentences[index]

    @property
    def num_propositions(self) -> int:
        return sum(len(s.propositions) for s in self.sentences)

    def labels(self) -> set[str]:
        """Every argument label used by any gold proposition."""
        found: set[str] = set()
        for sentence in self.sentences:
            for prop in sentence.propositions:
                found |= prop.labels()
        return found

    def vocabulary(self) -> set[str]:
        return {tok for s in self.sentences for tok in s.tokens}


@dataclass(frozen=True)
class FrameInventory:
    """Allowed core roles per (lemma, sense)."""

    roles: Mapping[tuple[str, str], frozenset[str]] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.roles)

    def __contains__(self, key: object) -> bool:
        return key in self.roles

    def allowed(self, lemma: str, sense: str) -> frozenset[str] | None:
        """Allowed core labels for a predicate sense, or None if unknown."""
        return self.roles.get((lemma, sense))

    def to_dict(self) -> dict[str, list[str]]:
        return {
            f"{lemma}.{sense}": sorted(allowed)
            for (lemma, sense), allowed in sorted(self.roles.items())
        }
