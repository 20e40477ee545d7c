"""Unit tests for corpus and frame-inventory input/output."""

import json
from pathlib import Path

import pytest

from rolegrad.lib.error_utils import DataFormatError
from rolegrad.models.corpus import Corpus, Proposition, Sentence
from rolegrad.services.corpus_io import (
    load_conll_cols,
    load_corpus,
    load_frames,
    load_jsonl,
    subsample,
    write_conll_cols,
    write_frames,
    write_jsonl,
)

GOOD_RECORD = {
    "tokens": ["he", "ran"],
    "propositions": [{"pred": 1, "lemma": "run", "sense": "01", "tags": ["B-A0", "O"]}],
}


def _write_lines(path: Path, records: list) -> Path:
    lines = [r if isinstance(r, str) else json.dumps(r) for r in records]
    path.write_text("\n".join(lines) + "\n")
    return path


def _with_prop(**changes) -> dict:
    prop = {**GOOD_RECORD["propositions"][0], **changes}
    return {"tokens": GOOD_RECORD["tokens"], "propositions": [prop]}


@pytest.mark.ai_generated
class TestLoadJsonl:
    def test_fixture(self, fixtures_dir: Path) -> None:
        corpus = load_jsonl(fixtures_dir / "planted_duplicate.jsonl")
        assert len(corpus) == 10
        assert corpus.num_propositions == 10
        assert corpus.name == "planted_duplicate"
        first = corpus[0]
        assert first.sentence_id == "planted_duplicate:1"
        assert first.tokens == ("the", "cat", "ate", "fish")
        assert first.propositions[0].frame_key == ("eat", "01")
        assert corpus.labels() == {"A0", "A1", "A2", "AM-TMP", "AM-LOC"}

    def test_blank_lines_are_skipped(self, tmp_path: Path) -> None:
        path = _write_lines(tmp_path / "c.jsonl", [GOOD_RECORD, "", GOOD_RECORD])
        corpus = load_jsonl(path)
        assert [s.sentence_id for s in corpus] == ["c:1", "c:3"]

    def test_sentence_without_propositions(self, tmp_path: Path) -> None:
        path = _write_lines(tmp_path / "c.jsonl", [{"tokens": ["hi"], "propositions": []}])
        assert load_jsonl(path).num_propositions == 0

    def test_malformed_json_names_line(self, tmp_path: Path) -> None:
        path = _write_lines(tmp_path / "c.jsonl", [GOOD_RECORD, "{not json"])
        with pytest.raises(DataFormatError, match=r"c\.jsonl:2: malformed JSON") as excinfo:
            load_jsonl(path)
        assert excinfo.value.line == 2

    def test_schema_violation(self, tmp_path: Path) -> None:
        path = _write_lines(tmp_path / "c.jsonl", [{"tokens": ["a"]}])
        with pytest.raises(DataFormatError, match="propositions"):
            load_jsonl(path)

    def test_tag_count_mismatch(self, tmp_path: Path) -> None:
        path = _write_lines(tmp_path / "c.jsonl", [_with_prop(tags=["O"])])
        with pytest.raises(DataFormatError, match="1 tags for 2 tokens"):
            load_jsonl(path)

    def test_invalid_bio(self, tmp_path: Path) -> None:
        path = _write_lines(tmp_path / "c.jsonl", [_with_prop(tags=["I-A0", "O"])])
        with pytest.raises(DataFormatError, match="invalid BIO"):
            load_jsonl(path)

    def test_predicate_outside_sentence(self, tmp_path: Path) -> None:
        path = _write_lines(tmp_path / "c.jsonl", [_with_prop(pred=5)])
        with pytest.raises(DataFormatError, match="predicate index 5"):
            load_jsonl(path)

    def test_missing_file(self, tmp_path: Path) -> None:
        with pytest.raises(DataFormatError, match="cannot read corpus"):
            load_jsonl(tmp_path / "missing.jsonl")

    def test_gold_violations_load_as_is(self, fixtures_dir: Path) -> None:
        corpus = load_jsonl(fixtures_dir / "planted_duplicate.jsonl")
        assert corpus[4].propositions[0].tags == ("B-A0", "O", "B-A1", "O", "B-A1")


@pytest.mark.ai_generated
class TestConllColumns:
    def test_fixture(self, fixtures_dir: Path) -> None:
        corpus = load_conll_cols(fixtures_dir / "two_sentences.conll")
        assert len(corpus) == 2
        first, second = corpus
        assert first.sentence_id == "two_sentences:2"
        assert first.tokens == ("The", "cat", "saw", "birds", "fly")
        see, fly = first.propositions
        assert (see.pred_index, see.lemma, see.sense) == (2, "see", "01")
        assert see.tags == ("B-A0", "I-A0", "O", "B-A1", "O")
        assert (fly.pred_index, fly.frame_key) == (4, ("fly", "01"))
        assert fly.tags == ("O", "O", "O", "B-A0", "O")
        assert second.sentence_id == "two_sentences:8"
        assert second.propositions[0].tags == ("B-A0", "O")

    def test_column_count_mismatch(self, tmp_path: Path) -> None:
        path = tmp_path / "bad.conll"
        path.write_text("he\t-\tB-A0\nran\trun.01\n")
        with pytest.raises(DataFormatError, match="bad.conll:2: expected 3 columns"):
            load_conll_cols(path)

    def test_predicate_and_tag_columns_disagree(self, tmp_path: Path) -> None:
        path = tmp_path / "bad.conll"
        path.write_text("he\t-\tB-A0\tO\nran\trun.01\tO\tO\n")
        with pytest.raises(DataFormatError, match="1 predicate"):
            load_conll_cols(path)

    def test_predicate_needs_sense(self, tmp_path: Path) -> None:
        path = tmp_path / "bad.conll"
        path.write_text("he\t-\tB-A0\nran\trun\tO\n")
        with pytest.raises(DataFormatError, match="lemma.sense"):
            load_conll_cols(path)

    def test_written_columns_read_back(self, fixtures_dir: Path, tmp_path: Path) -> None:
        corpus = load_conll_cols(fixtures_dir / "two_sentences.conll")
        target = tmp_path / "out.conll"
        write_conll_cols(corpus, target)
        again = load_conll_cols(target)
        assert [s.to_dict() for s in again] == [s.to_dict() for s in corpus]

    def test_shared_predicate_token_cannot_be_written(self, tmp_path: Path) -> None:
        prop = Proposition(0, "go", "01", ("O",))
        corpus = Corpus(sentences=(Sentence(("go",), (prop, prop), "s"),))
        with pytest.raises(DataFormatError, match="share a predicate token"):
            write_conll_cols(corpus, tmp_path / "out.conll")

    @pytest.mark.parametrize(
        ("token", "reason"),
        [
            ("New York", "contains whitespace"),
            ("a\tb", "contains whitespace"),
            ("", "is empty"),
            ("#1", "would read as a comment line"),
        ],
    )
    def test_token_that_breaks_columns_is_rejected(
        self, tmp_path: Path, token: str, reason: str
    ) -> None:
        prop = Proposition(1, "go", "01", ("B-A0", "O"))
        corpus = Corpus(sentences=(Sentence((token, "go"), (prop,), "s7"),))
        target = tmp_path / "out.conll"
        with pytest.raises(DataFormatError, match=reason) as info:
            write_conll_cols(corpus, target)
        assert str(info.value).startswith(f"sentence s7: token 0 {token!r}")
        assert not target.exists()

    def test_lemma_with_whitespace_is_rejected(self, tmp_path: Path) -> None:
        prop = Proposition(0, "give up", "01", ("O",))
        corpus = Corpus(sentences=(Sentence(("quit",), (prop,), "s"),))
        with pytest.raises(DataFormatError, match="predicate 'give up.01' contains whitespace"):
            write_conll_cols(corpus, tmp_path / "out.conll")


@pytest.mark.ai_generated
def test_conll_to_jsonl_preserves_content(fixtures_dir: Path, tmp_path: Path) -> None:
    corpus = load_corpus(fixtures_dir / "two_sentences.conll")
    target = tmp_path / "out.jsonl"
    write_jsonl(corpus, target)
    again = load_corpus(target)
    assert [s.to_dict() for s in again] == [s.to_dict() for s in corpus]
    assert not list(tmp_path.glob(".out.jsonl.*"))


@pytest.mark.ai_generated
class TestFrames:
    def test_fixture(self, fixtures_dir: Path) -> None:
        frames = load_frames(fixtures_dir / "frames.json")
        assert len(frames) == 4
        assert frames.allowed("give", "01") == frozenset({"A0", "A1", "A2"})
        assert frames.allowed("give", "02") is None
        assert ("run", "01") in frames

    def test_lemma_with_dots(self, tmp_path: Path) -> None:
        path = tmp_path / "frames.json"
        path.write_text(json.dumps({"e.g.01": ["A0"]}))
        assert load_frames(path).allowed("e.g", "01") == frozenset({"A0"})

    def test_duplicate_key(self, tmp_path: Path) -> None:
        path = tmp_path / "frames.json"
        path.write_text('{"go.01": ["A0"], "go.01": ["A1"]}')
        with pytest.raises(DataFormatError, match="duplicate frame key"):
            load_frames(path)

    def test_malformed_key(self, tmp_path: Path) -> None:
        path = tmp_path / "frames.json"
        path.write_text(json.dumps({"go": ["A0"]}))
        with pytest.raises(DataFormatError, match="malformed frame key"):
            load_frames(path)

    def test_unknown_core_label(self, tmp_path: Path) -> None:
        path = tmp_path / "frames.json"
        path.write_text(json.dumps({"go.01": ["A0", "AM-TMP"]}))
        with pytest.raises(DataFormatError, match="unknown core label 'AM-TMP'"):
            load_frames(path)

    def test_schema_violation(self, tmp_path: Path) -> None:
        path = tmp_path / "frames.json"
        path.write_text(json.dumps({"go.01": "A0"}))
        with pytest.raises(DataFormatError):
            load_frames(path)

    def test_written_inventory_reads_back(self, fixtures_dir: Path, tmp_path: Path) -> None:
        frames = load_frames(fixtures_dir / "frames.json")
        write_frames(frames, tmp_path / "copy.json")
        assert load_frames(tmp_path / "copy.json") == frames


@pytest.mark.ai_generated
class TestSubsample:
    def _corpus(self, fixtures_dir: Path) -> Corpus:
        return load_jsonl(fixtures_dir / "planted_duplicate.jsonl")

    def test_same_seed_same_subset(self, fixtures_dir: Path) -> None:
        corpus = self._corpus(fixtures_dir)
        first = subsample(corpus, 0.3, seed=4)
        assert len(first) == 3
        assert first.sentences == subsample(corpus, 0.3, seed=4).sentences

    def test_keeps_corpus_order(self, fixtures_dir: Path) -> None:
        corpus = self._corpus(fixtures_dir)
        positions = [corpus.sentences.index(s) for s in subsample(corpus, 0.5, seed=1)]
        assert positions == sorted(positions)

    def test_keeps_at_least_one(self, fixtures_dir: Path) -> None:
        assert len(subsample(self._corpus(fixtures_dir), 0.01)) == 1

    def test_full_fraction_is_identity(self, fixtures_dir: Path) -> None:
        corpus = self._corpus(fixtures_dir)
        assert subsample(corpus, 1.0) is corpus

    @pytest.mark.parametrize("fraction", [0.0, -0.5, 1.5])
    def test_rejects_bad_fraction(self, fixtures_dir: Path, fraction: float) -> None:
        with pytest.raises(ValueError):
            subsample(self._corpus(fixtures_dir), fraction)
