"""File utilities for writing run artifacts (checkpoints, reports, metrics)."""

import json
import os
import tempfile
from pathlib import Path
from typing import IO, Any


def _temp_sibling(file_path: Path) -> tuple[int, Path]:
    """Create a temporary file next to ``file_path`` (same filesystem)."""
    file_path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{file_path.name}.", dir=file_path.parent)
    return fd, Path(tmp)


def atomic_write(file_path: Path, content: str, encoding: str = "utf-8") -> None:
    """Atomically write text content to a file.

    The content goes to a temporary sibling first and is then renamed over
    the target, so readers never observe a half-written report.

    Args:
        file_path: Path to file to write
        content: Content to write
        encoding: Text encoding (default: utf-8)

    Example:
        >>> atomic_write(Path("runs/report.txt"), report.to_text())
    """
    atomic_write_bytes(Path(file_path), content.encode(encoding))


def atomic_write_bytes(file_path: Path, content: bytes) -> None:
    """Atomically write binary content to a file.

    Args:
        file_path: Path to file to write
        content: Binary content to write
    """
    file_path = Path(file_path)
    fd, tmp = _temp_sibling(file_path)
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(content)
        os.replace(tmp, file_path)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise


def write_json(file_path: Path, data: Any) -> None:
    """Atomically write ``data`` as pretty, key-sorted JSON."""
    atomic_write(file_path, json.dumps(data, indent=2, sort_keys=True) + "\n")


class AtomicFileWriter:
    """Context manager for atomic file writes.

    Usage:
        with AtomicFileWriter(path) as f:
            for record in records:
                f.write(json.dumps(record) + "\\n")
    """

    def __init__(self, file_path: Path, mode: str = "w", encoding: str | None = "utf-8"):
        """Initialize atomic file writer.

        Args:
            file_path: Path to file to write
            mode: File mode ('w' for text, 'wb' for binary)
            encoding: Text encoding (only for text mode)
        """
        self.file_path = Path(file_path)
        self.mode = mode
        self.encoding = encoding if "b" not in mode else None
        self.file: IO[Any] | None = None
        self._tmp: Path | None = None

    def __enter__(self):
        """Enter context: open a temporary sibling for writing."""
        fd, self._tmp = _temp_sibling(self.file_path)
        if self.encoding:
            self.file = os.fdopen(fd, self.mode, encoding=self.encoding)
        else:
            self.file = os.fdopen(fd, self.mode)
        return self.file

    def __exit__(self, exc_type, exc_val, exc_tb):
        """Exit context: close and move into place, or discard on error."""
        if self.file:
            self.file.close()
        assert self._tmp is not None
        if exc_type is None:
            os.replace(self._tmp, self.file_path)
        else:
            self._tmp.unlink(missing_ok=True)
        return False
