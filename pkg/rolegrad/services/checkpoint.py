"""Model checkpoints.

A checkpoint is a ``torch.save`` dictionary::

    format          "rolegrad-checkpoint"
    format_version  1 (bumped on incompatible changes)
    state_dict      tagger + CRF parameter tensors
    labels          {"all": [...], "core": [...]}
    vocab           token list, index 0 = <unk>
    vocab_hash      short SHA-256 of the token list
    config          RunConfig.to_dict() of the training run
    config_hash     RunConfig.config_hash()

Only plain containers and tensors are stored, so checkpoints load with
``torch.load(..., weights_only=True)``.
"""

from __future__ import annotations

import io
import pickle
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import torch

from rolegrad.lib.config import ModelConfig, RunConfig
from rolegrad.lib.error_utils import CheckpointMismatchError
from rolegrad.lib.file_utils import atomic_write_bytes
from rolegrad.lib.logging_config import get_logger
from rolegrad.models.corpus import Corpus
from rolegrad.models.labels import LabelSet
from rolegrad.services.tagger import SrlTagger, Vocabulary

logger = get_logger(__name__)

FORMAT = "rolegrad-checkpoint"
FORMAT_VERSION = 1

# Below this share of known tokens the data is treated as foreign to the model
MIN_VOCAB_OVERLAP = 0.5


@dataclass
class LoadedModel:
    model: SrlTagger
    vocab: Vocabulary
    labels: LabelSet
    config: RunConfig
    config_hash: str


def save_checkpoint(
    path: Path, model: SrlTagger, vocab: Vocabulary, config: RunConfig
) -> None:
    blob: dict[str, Any] = {
        "format": FORMAT,
        "format_version": FORMAT_VERSION,
        "state_dict": model.state_dict(),
        "labels": model.labels.to_dict(),
        "vocab": list(vocab.tokens),
        "vocab_hash": vocab.digest(),
        "config": config.to_dict(),
        "config_hash": config.config_hash(),
    }
    buffer = io.BytesIO()
    torch.save(blob, buffer)
    atomic_write_bytes(path, buffer.getvalue())
    logger.info(f"Saved checkpoint to {path} (config {blob['config_hash']})")


def load_checkpoint(path: Path) -> LoadedModel:
    """Rebuild the tagger stored at ``path``.

    Raises:
        CheckpointMismatchError: If the file is not a readable checkpoint of
            a supported format version
    """
    try:
        blob = torch.load(path, map_location="cpu", weights_only=True)
    except (OSError, RuntimeError, EOFError, pickle.UnpicklingError) as e:
        raise CheckpointMismatchError(f"cannot read checkpoint {path}: {e}") from e
    if not isinstance(blob, dict) or blob.get("format") != FORMAT:
        raise CheckpointMismatchError(f"{path} is not a rolegrad checkpoint")
    if blob.get("format_version") != FORMAT_VERSION:
        raise CheckpointMismatchError(
            f"checkpoint format version {blob.get('format_version')} is not supported "
            f"(expected {FORMAT_VERSION})"
        )
    vocab = Vocabulary(tokens=tuple(blob["vocab"]))
    if vocab.digest() != blob["vocab_hash"]:
        raise CheckpointMismatchError(f"vocabulary hash mismatch in {path}")
    labels = LabelSet.from_dict(blob["labels"])
    config = RunConfig.from_dict(blob["config"])
    model_config = ModelConfig(**blob["config"]["model"])
    model = SrlTagger(len(vocab), labels, model_config)
    model.load_state_dict(blob["state_dict"])
    model.eval()
    return LoadedModel(model, vocab, labels, config, blob["config_hash"])


def check_compatible(loaded: LoadedModel, corpus: Corpus) -> None:
    """Refuse data whose labels or vocabulary the checkpoint does not cover.

    Raises:
        CheckpointMismatchError: On unknown argument labels, or when fewer
            than half of the corpus tokens are in the model vocabulary
    """
    unknown = sorted(corpus.labels() - set(loaded.labels.all))
    if unknown:
        raise CheckpointMismatchError(
            f"labels not in checkpoint label set: {', '.join(unknown)}"
        )
    tokens = [tok for sentence in corpus for tok in sentence.tokens]
    overlap = loaded.vocab.overlap(tokens)
    if tokens and overlap < MIN_VOCAB_OVERLAP:
        raise CheckpointMismatchError(
            f"vocabulary mismatch: only {overlap:.0%} of tokens known to the checkpoint"
        )
