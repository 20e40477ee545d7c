"""Argument label inventory and BIO tag layout."""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

DEFAULT_CORE: tuple[str, ...] = ("A0", "A1", "A2", "A3", "A4", "A5")
OUTSIDE = "O"


def split_tag(tag: str) -> tuple[str, str | None]:
    """Split a BIO tag into (prefix, label); ``O`` yields ("O", None).

    Raises:
        ValueError: If the tag is neither O nor B-X / I-X
    """
    if tag == OUTSIDE:
        return OUTSIDE, None
    prefix, sep, label = tag.partition("-")
    if not sep or prefix not in ("B", "I") or not label:
        raise ValueError(f"invalid BIO tag: {tag!r}")
    return prefix, label


def bio_error(tags: Sequence[str]) -> str | None:
    """Return a description of the first BIO violation, or None if valid.

    An ``I-X`` must follow ``B-X`` or ``I-X``.
    """
    previous: str | None = None
    for position, tag in enumerate(tags):
        try:
            prefix, label = split_tag(tag)
        except ValueError as e:
            return f"position {position}: {e}"
        if prefix == "I" and previous not in (f"B-{label}", f"I-{label}"):
            return f"position {position}: {tag} does not continue a {label} span"
        previous = tag
    return None


def is_valid_bio(tags: Sequence[str]) -> bool:
    """True if ``tags`` is a BIO-valid sequence."""
    return bio_error(tags) is None


@dataclass(frozen=True)
class LabelSet:
    """Ordered argument labels and the derived BIO tag indices.

    Tag layout is ``O`` at index 0 followed by ``B-X, I-X`` for every label
    in ``all`` order, so ``B-X`` sits at ``1 + 2k`` and ``I-X`` at ``2 + 2k``.
    Indices stay fixed for the life of a model.
    """

    all: tuple[str, ...]
    core: tuple[str, ...] = DEFAULT_CORE
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(set(self.all)) != len(self.all):
            raise ValueError("duplicate argument labels")
        missing = [c for c in self.core if c not in self.all]
        if missing:
            raise ValueError(f"core labels not in label set: {missing}")
        object.__setattr__(self, "_index", {label: k for k, label in enumerate(self.all)})

    @classmethod
    def from_labels(cls, labels: Iterable[str], core: Sequence[str] = DEFAULT_CORE) -> LabelSet:
        """Build a label set with core labels first, then the rest sorted."""
        extra = sorted(set(labels) - set(core))
        return cls(all=tuple(core) + tuple(extra), core=tuple(core))

    @property
    def num_tags(self) -> int:
        return 2 * len(self.all) + 1

    def tags(self) -> list[str]:
        """All BIO tags in index order."""
        out = [OUTSIDE]
        for label in self.all:
            out.extend((f"B-{label}", f"I-{label}"))
        return out

    def label_index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise KeyError(f"unknown argument label: {label!r}") from None

    def b_index(self, label: str) -> int:
        return 1 + 2 * self.label_index(label)

    def i_index(self, label: str) -> int:
        return 2 + 2 * self.label_index(label)

    def b_indices(self, labels: Sequence[str] | None = None) -> list[int]:
        return [self.b_index(x) for x in (self.all if labels is None else labels)]

    def i_indices(self, labels: Sequence[str] | None = None) -> list[int]:
        return [self.i_index(x) for x in (self.all if labels is None else labels)]

    def tag_index(self, tag: str) -> int:
        prefix, label = split_tag(tag)
        if label is None:
            return 0
        return self.b_index(label) if prefix == "B" else self.i_index(label)

    def tag_name(self, index: int) -> str:
        if index == 0:
            return OUTSIDE
        k, offset = divmod(index - 1, 2)
        return f"{'B' if offset == 0 else 'I'}-{self.all[k]}"

    def encode(self, tags: Sequence[str]) -> list[int]:
        return [self.tag_index(t) for t in tags]

    def decode(self, indices: Iterable[int]) -> list[str]:
        return [self.tag_name(int(i)) for i in indices]

    def is_core(self, label: str) -> bool:
        return label in self.core

    def to_dict(self) -> dict:
        return {"all": list(self.all), "core": list(self.core)}

    @classmethod
    def from_dict(cls, data: dict) -> LabelSet:
        return cls(all=tuple(data["all"]), core=tuple(data["core"]))
