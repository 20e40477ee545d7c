"""Corpus and frame-inventory readers and writers.

JSONL is the canonical on-disk format, one sentence per line::

    {"tokens": ["he", "ran"],
     "propositions": [{"pred": 1, "lemma": "run", "sense": "01", "tags": ["B-A0", "O"]}]}

The CoNLL column importer reads blank-line separated blocks: column 0 is
the token, column 1 is ``lemma.sense`` on predicate rows and ``-``
elsewhere, and columns 2+ hold one BIO tag column per predicate in order
of appearance.  Bracketed props columns are not supported.

Gold data is validated (schema, lengths, BIO well-formedness) and either
loads intact or fails with the offending path and line.  Gold that
violates the structural constraints is loaded as-is.
"""

from __future__ import annotations

import json
from collections.abc import Sequence
from functools import cache
from pathlib import Path
from typing import Any

import numpy as np
from jsonschema import Draft202012Validator

from rolegrad.lib.error_utils import DataFormatError
from rolegrad.lib.file_utils import AtomicFileWriter, atomic_write, write_json
from rolegrad.lib.logging_config import get_logger
from rolegrad.models.corpus import Corpus, FrameInventory, Proposition, Sentence
from rolegrad.models.labels import DEFAULT_CORE, bio_error

logger = get_logger(__name__)

SCHEMA_DIR = Path(__file__).resolve().parent.parent / "schema"


@cache
def _validator(name: str) -> Draft202012Validator:
    schema = json.loads((SCHEMA_DIR / name).read_text(encoding="utf-8"))
    Draft202012Validator.check_schema(schema)
    return Draft202012Validator(schema)


def _first_schema_error(validator: Draft202012Validator, instance: Any) -> str | None:
    errors = sorted(validator.iter_errors(instance), key=lambda e: list(e.absolute_path))
    if not errors:
        return None
    error = errors[0]
    where = "/".join(str(p) for p in error.absolute_path)
    return f"{where or '<record>'}: {error.message}"


def _check_sentence(sentence: Sentence) -> str | None:
    n = len(sentence.tokens)
    for k, prop in enumerate(sentence.propositions):
        if len(prop.tags) != n:
            return f"proposition {k}: {len(prop.tags)} tags for {n} tokens"
        if not 0 <= prop.pred_index < n:
            return f"proposition {k}: predicate index {prop.pred_index} outside sentence"
        error = bio_error(prop.tags)
        if error is not None:
            return f"proposition {k}: invalid BIO gold at {error}"
    return None


def sentence_from_dict(record: dict[str, Any], sentence_id: str = "") -> Sentence:
    return Sentence(
        tokens=tuple(record["tokens"]),
        propositions=tuple(
            Proposition(
                pred_index=p["pred"],
                lemma=p["lemma"],
                sense=p["sense"],
                tags=tuple(p["tags"]),
            )
            for p in record["propositions"]
        ),
        sentence_id=sentence_id,
    )


def load_jsonl(path: Path | str) -> Corpus:
    """Load and validate a JSONL corpus.

    Raises:
        DataFormatError: With the line number of the first bad record
    """
    path = Path(path)
    validator = _validator("corpus.schema.json")
    sentences: list[Sentence] = []
    try:
        handle = open(path, encoding="utf-8")
    except OSError as e:
        raise DataFormatError(f"cannot read corpus: {e.strerror}", path) from e
    with handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise DataFormatError(f"malformed JSON: {e.msg}", path, lineno) from e
            error = _first_schema_error(validator, record)
            if error is not None:
                raise DataFormatError(error, path, lineno)
            sentence = sentence_from_dict(record, sentence_id=f"{path.stem}:{lineno}")
            error = _check_sentence(sentence)
            if error is not None:
                raise DataFormatError(error, path, lineno)
            sentences.append(sentence)
    if not sentences:
        logger.warning(f"Corpus {path} is empty")
    logger.debug(f"Loaded {len(sentences)} sentences from {path}")
    return Corpus(sentences=tuple(sentences), name=path.stem)


def write_jsonl(corpus: Corpus, path: Path | str) -> None:
    """Write ``corpus`` in the canonical JSONL format (atomically)."""
    with AtomicFileWriter(Path(path)) as f:
        for sentence in corpus:
            f.write(json.dumps(sentence.to_dict(), ensure_ascii=False) + "\n")


def _split_frame_key(key: str) -> tuple[str, str] | None:
    lemma, sep, sense = key.rpartition(".")
    if not sep or not lemma or not sense:
        return None
    return lemma, sense


def load_conll_cols(path: Path | str) -> Corpus:
    """Load a BIO column file (see module docstring for the layout).

    Raises:
        DataFormatError: On inconsistent column counts, a predicate/tag
            column mismatch, bad tags or an unreadable file
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise DataFormatError(f"cannot read corpus: {e.strerror}", path) from e

    sentences: list[Sentence] = []
    block: list[tuple[int, list[str]]] = []

    def flush() -> None:
        if not block:
            return
        first_line = block[0][0]
        width = len(block[0][1])
        for lineno, cols in block:
            if len(cols) != width:
                raise DataFormatError(
                    f"expected {width} columns, found {len(cols)}", path, lineno
                )
        if width < 2:
            raise DataFormatError("need at least token and predicate columns", path, first_line)
        predicates = [
            (k, cols[1], lineno) for k, (lineno, cols) in enumerate(block) if cols[1] != "-"
        ]
        if len(predicates) != width - 2:
            raise DataFormatError(
                f"{len(predicates)} predicate(s) but {width - 2} tag column(s)", path, first_line
            )
        props = []
        for column, (position, frame, lineno) in enumerate(predicates, start=2):
            key = _split_frame_key(frame)
            if key is None:
                raise DataFormatError(f"predicate {frame!r} is not lemma.sense", path, lineno)
            props.append(
                Proposition(
                    pred_index=position,
                    lemma=key[0],
                    sense=key[1],
                    tags=tuple(cols[column] for _, cols in block),
                )
            )
        sentence = Sentence(
            tokens=tuple(cols[0] for _, cols in block),
            propositions=tuple(props),
            sentence_id=f"{path.stem}:{first_line}",
        )
        error = _check_sentence(sentence)
        if error is not None:
            raise DataFormatError(error, path, first_line)
        sentences.append(sentence)
        block.clear()

    for lineno, line in enumerate(lines, start=1):
        if line.startswith("#"):
            continue
        if not line.strip():
            flush()
            continue
        block.append((lineno, line.split()))
    flush()

    if not sentences:
        logger.warning(f"Corpus {path} is empty")
    return Corpus(sentences=tuple(sentences), name=path.stem)


def _column_field_error(text: str) -> str | None:
    """Why ``text`` cannot be a column cell, or None."""
    if not text:
        return "is empty"
    if any(ch.isspace() for ch in text):
        return "contains whitespace"
    return None


def write_conll_cols(corpus: Corpus, path: Path | str) -> None:
    """Write ``corpus`` in the BIO column layout read by ``load_conll_cols``.

    Predicates must appear in token order with at most one per token.
    Tokens and lemmas must be non-empty and free of whitespace, and no
    token may start a line with ``#``.

    Raises:
        DataFormatError: If a sentence cannot be laid out in columns
    """
    blocks = []
    for sentence in corpus:
        props = sorted(sentence.propositions, key=lambda p: p.pred_index)
        frames = {p.pred_index: f"{p.lemma}.{p.sense}" for p in props}
        if len(frames) != len(props):
            raise DataFormatError(
                f"sentence {sentence.sentence_id}: two propositions share a predicate token"
            )
        for i, token in enumerate(sentence.tokens):
            error = _column_field_error(token)
            if error is None and token.startswith("#"):
                error = "would read as a comment line"
            if error is not None:
                raise DataFormatError(
                    f"sentence {sentence.sentence_id}: token {i} {token!r} {error}"
                )
        for frame in frames.values():
            error = _column_field_error(frame)
            if error is not None:
                raise DataFormatError(
                    f"sentence {sentence.sentence_id}: predicate {frame!r} {error}"
                )
        rows = [
            "\t".join([token, frames.get(i, "-"), *(p.tags[i] for p in props)])
            for i, token in enumerate(sentence.tokens)
        ]
        blocks.append("\n".join(rows) + "\n")
    atomic_write(Path(path), "\n".join(blocks))


def load_corpus(path: Path | str) -> Corpus:
    """Dispatch on suffix: ``.jsonl`` (and ``.json``) or column text otherwise."""
    path = Path(path)
    if path.suffix in (".jsonl", ".json"):
        return load_jsonl(path)
    return load_conll_cols(path)


def load_frames(path: Path | str, core: Sequence[str] = DEFAULT_CORE) -> FrameInventory:
    """Load a ``{"lemma.sense": [core labels]}`` roleset file.

    Raises:
        DataFormatError: On malformed keys, duplicate keys, or labels
            outside ``core``
    """
    path = Path(path)

    def no_duplicates(pairs: list[tuple[str, Any]]) -> dict[str, Any]:
        seen: dict[str, Any] = {}
        for key, value in pairs:
            if key in seen:
                raise DataFormatError(f"duplicate frame key {key!r}", path)
            seen[key] = value
        return seen

    try:
        data = json.loads(path.read_text(encoding="utf-8"), object_pairs_hook=no_duplicates)
    except OSError as e:
        raise DataFormatError(f"cannot read frames: {e.strerror}", path) from e
    except json.JSONDecodeError as e:
        raise DataFormatError(f"malformed JSON: {e.msg}", path, e.lineno) from e
    error = _first_schema_error(_validator("frames.schema.json"), data)
    if error is not None:
        raise DataFormatError(error, path)

    core_set = set(core)
    roles: dict[tuple[str, str], frozenset[str]] = {}
    for key, allowed in data.items():
        split = _split_frame_key(key)
        if split is None:
            raise DataFormatError(f"malformed frame key {key!r} (expected lemma.sense)", path)
        unknown = sorted(set(allowed) - core_set)
        if unknown:
            raise DataFormatError(f"unknown core label {unknown[0]!r} in {key!r}", path)
        roles[split] = frozenset(allowed)
    if not roles:
        logger.warning(f"Frame inventory {path} is empty")
    return FrameInventory(roles=roles)


def write_frames(frames: FrameInventory, path: Path | str) -> None:
    write_json(Path(path), frames.to_dict())


def subsample(corpus: Corpus, fraction: float, seed: int = 0) -> Corpus:
    """Seeded random subset of ``fraction`` of the sentences, in corpus order.

    The same (corpus, fraction, seed) always selects the same sentences.
    At least one sentence is kept from a non-empty corpus.
    """
    if not 0 < fraction <= 1:
        raise ValueError(f"fraction must lie in (0, 1], got {fraction}")
    if fraction == 1 or not len(corpus):
        return corpus
    keep = max(1, round(fraction * len(corpus)))
    rng = np.random.default_rng(seed)
    chosen = np.sort(rng.choice(len(corpus), size=keep, replace=False))
    return Corpus(
        sentences=tuple(corpus[int(i)] for i in chosen),
        name=f"{corpus.name}[{fraction:g}]",
    )
