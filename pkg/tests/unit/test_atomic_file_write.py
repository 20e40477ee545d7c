"""Unit tests for atomic file write utilities."""

import json
from pathlib import Path

import pytest

from rolegrad.lib.file_utils import AtomicFileWriter, atomic_write, atomic_write_bytes, write_json


@pytest.mark.ai_generated
def test_atomic_write_new_file(tmp_path: Path) -> None:
    """Test atomic_write creates a new file successfully."""
    file_path = tmp_path / "report.txt"

    atomic_write(file_path, "F1 = 80.00")

    assert file_path.read_text() == "F1 = 80.00"


@pytest.mark.ai_generated
def test_atomic_write_overwrites_existing_file(tmp_path: Path) -> None:
    """Test atomic_write replaces an earlier report."""
    file_path = tmp_path / "report.txt"
    file_path.write_text("old")

    atomic_write(file_path, "new")

    assert file_path.read_text() == "new"
    assert [p.name for p in tmp_path.iterdir()] == ["report.txt"]


@pytest.mark.ai_generated
def test_atomic_write_bytes_new_file(tmp_path: Path) -> None:
    """Test atomic_write_bytes writes a checkpoint blob."""
    file_path = tmp_path / "model.pt"

    atomic_write_bytes(file_path, b"\x80\x02}q\x00")

    assert file_path.read_bytes() == b"\x80\x02}q\x00"


@pytest.mark.ai_generated
def test_atomic_write_creates_parent_dirs(tmp_path: Path) -> None:
    """Test atomic_write creates the run directory if needed."""
    file_path = tmp_path / "runs" / "seed0" / "control" / "report.json"

    atomic_write(file_path, "{}")

    assert file_path.read_text() == "{}"


@pytest.mark.ai_generated
def test_write_json_is_sorted_and_newline_terminated(tmp_path: Path) -> None:
    file_path = tmp_path / "config.json"

    write_json(file_path, {"b": 1, "a": {"d": 2, "c": 3}})

    text = file_path.read_text()
    assert text.endswith("}\n")
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"a": {"c": 3, "d": 2}, "b": 1}


@pytest.mark.ai_generated
def test_atomic_file_writer_streams_lines(tmp_path: Path) -> None:
    """Test AtomicFileWriter for a line-per-record file."""
    file_path = tmp_path / "metrics.jsonl"

    with AtomicFileWriter(file_path) as f:
        for epoch in range(3):
            f.write(json.dumps({"epoch": epoch}) + "\n")

    lines = file_path.read_text().splitlines()
    assert [json.loads(line)["epoch"] for line in lines] == [0, 1, 2]


@pytest.mark.ai_generated
def test_atomic_file_writer_binary_mode(tmp_path: Path) -> None:
    """Test AtomicFileWriter with binary mode."""
    file_path = tmp_path / "binary.dat"

    with AtomicFileWriter(file_path, mode="wb") as f:
        f.write(b"\x00\x01\x02")

    assert file_path.read_bytes() == b"\x00\x01\x02"


@pytest.mark.ai_generated
def test_atomic_file_writer_keeps_old_content_on_error(tmp_path: Path) -> None:
    """A failure inside the block leaves the previous file untouched."""
    file_path = tmp_path / "train.jsonl"
    file_path.write_text("previous\n")

    with pytest.raises(RuntimeError):
        with AtomicFileWriter(file_path) as f:
            f.write("partial")
            raise RuntimeError("boom")

    assert file_path.read_text() == "previous\n"
    assert [p.name for p in tmp_path.iterdir()] == ["train.jsonl"]
