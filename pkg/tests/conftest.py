"""Shared test fixtures for rolegrad tests.

- FIXTURES: small hand-written corpora with planted violations
- synthetic_split: a tiny synthetic train/dev/test split on disk, produced
  by the same generator ``rolegrad synth`` uses
"""

import logging
from collections.abc import Generator
from pathlib import Path

import pytest

from rolegrad.models.labels import LabelSet
from rolegrad.services.corpus_io import write_frames, write_jsonl
from rolegrad.services.synth import synth_corpus, synth_frames

FIXTURES = Path(__file__).parent / "fixtures"

# Flags that shrink a training run to a few seconds
FAST_SCHEDULE = [
    "--epochs1", "2",
    "--lr1", "0.01",
    "--epochs2", "1",
    "--lr2", "0.005",
]


@pytest.fixture(autouse=True)
def _reset_rolegrad_logger() -> Generator[None, None, None]:
    """Undo ``setup_logging`` between tests.

    The CLI group installs its own handlers and turns propagation off, which
    would hide later records from ``caplog``.
    """
    logger = logging.getLogger("rolegrad")

    def reset() -> None:
        logger.handlers = []
        logger.propagate = True
        logger.setLevel(logging.NOTSET)

    reset()
    yield
    reset()


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def fast_schedule() -> list[str]:
    return list(FAST_SCHEDULE)


@pytest.fixture
def two_labels() -> LabelSet:
    """A0 and A1, both core: tags O, B-A0, I-A0, B-A1, I-A1."""
    return LabelSet(all=("A0", "A1"), core=("A0", "A1"))


@pytest.fixture
def synthetic_split(tmp_path: Path) -> dict[str, Path]:
    """Write train/dev/test JSONL and frames.json for a tiny synthetic corpus."""
    frames = synth_frames(seed=0, n_lemmas=4)
    out = tmp_path / "data"
    paths = {}
    for offset, (split, size) in enumerate((("train", 24), ("dev", 8), ("test", 8))):
        corpus = synth_corpus(
            offset, n_sentences=size, vocab_size=16, max_len=7, frame_inventory=frames
        )
        paths[split] = out / f"{split}.jsonl"
        write_jsonl(corpus, paths[split])
    paths["frames"] = out / "frames.json"
    write_frames(frames, paths["frames"])
    return paths
