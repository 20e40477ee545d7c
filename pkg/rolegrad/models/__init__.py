"""Data models for rolegrad."""

from rolegrad.models.corpus import Corpus, FrameInventory, Proposition, Sentence
from rolegrad.models.grid import ScoreGrid, SpanTriple
from rolegrad.models.labels import LabelSet
from rolegrad.models.report import EvalReport, LabelScore

__all__ = [
    "Corpus",
    "EvalReport",
    "FrameInventory",
    "LabelScore",
    "LabelSet",
    "Proposition",
    "ScoreGrid",
    "Sentence",
    "SpanTriple",
]
