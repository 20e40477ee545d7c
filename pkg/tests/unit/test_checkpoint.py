"""Tests for saving and loading model checkpoints."""

from pathlib import Path

import pytest
import torch

from rolegrad.lib.config import ModelConfig, RunConfig
from rolegrad.lib.error_utils import CheckpointMismatchError
from rolegrad.models.corpus import Corpus, Proposition, Sentence
from rolegrad.models.labels import LabelSet
from rolegrad.services.checkpoint import check_compatible, load_checkpoint, save_checkpoint
from rolegrad.services.tagger import SrlTagger, Vocabulary, predict_tags


def _corpus(tokens=("the", "cat", "sat"), tag="B-A0") -> Corpus:
    return Corpus(
        sentences=(
            Sentence(
                tokens=tokens,
                propositions=(Proposition(2, "sit", "01", (tag, "I-A0", "O")),),
                sentence_id="s0",
            ),
        )
    )


@pytest.fixture
def saved(tmp_path: Path, two_labels: LabelSet) -> tuple[Path, SrlTagger, Vocabulary]:
    torch.manual_seed(0)
    config = RunConfig(model=ModelConfig(embed_dim=8, hidden_dim=8))
    vocab = Vocabulary.from_corpus(_corpus())
    model = SrlTagger(len(vocab), two_labels, config.model)
    with torch.no_grad():
        model.crf.transitions.normal_()
    path = tmp_path / "out" / "model.pt"
    save_checkpoint(path, model, vocab, config)
    return path, model, vocab


@pytest.mark.ai_generated
def test_round_trip_preserves_predictions(saved) -> None:
    path, model, vocab = saved
    loaded = load_checkpoint(path)
    assert loaded.labels == model.labels
    assert loaded.vocab == vocab
    assert loaded.config_hash == loaded.config.config_hash()
    assert not loaded.model.training
    assert predict_tags(loaded.model, loaded.vocab, _corpus()) == predict_tags(
        model, vocab, _corpus()
    )


@pytest.mark.ai_generated
def test_not_a_checkpoint(tmp_path: Path) -> None:
    path = tmp_path / "model.pt"
    torch.save({"weights": []}, path)
    with pytest.raises(CheckpointMismatchError, match="not a rolegrad checkpoint"):
        load_checkpoint(path)


@pytest.mark.ai_generated
def test_unreadable_file(tmp_path: Path) -> None:
    path = tmp_path / "model.pt"
    path.write_text("garbage")
    with pytest.raises(CheckpointMismatchError):
        load_checkpoint(path)


@pytest.mark.ai_generated
def test_future_format_version(saved) -> None:
    path = saved[0]
    blob = torch.load(path, weights_only=True)
    blob["format_version"] = 99
    torch.save(blob, path)
    with pytest.raises(CheckpointMismatchError, match="format version 99"):
        load_checkpoint(path)


@pytest.mark.ai_generated
def test_compatible_corpus_passes(saved) -> None:
    check_compatible(load_checkpoint(saved[0]), _corpus())


@pytest.mark.ai_generated
def test_unknown_label_rejected(saved) -> None:
    with pytest.raises(CheckpointMismatchError, match="A3"):
        check_compatible(load_checkpoint(saved[0]), _corpus(tag="B-A3"))


@pytest.mark.ai_generated
def test_foreign_vocabulary_rejected(saved) -> None:
    with pytest.raises(CheckpointMismatchError, match="vocabulary mismatch"):
        check_compatible(load_checkpoint(saved[0]), _corpus(tokens=("un", "deux", "trois")))
