"""Error types and exit-code mapping.

Exit codes are a stable contract of the command line:

- 0: success
- 2: usage, configuration or input-data error
- 3: numerical failure (non-finite loss, failed gradient check)
"""

from __future__ import annotations

from pathlib import Path

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3


class RolegradError(Exception):
    """Base class for errors raised by rolegrad."""

    exit_code = EXIT_USAGE


class SoftLogicError(RolegradError, ValueError):
    """Misuse of a relaxation primitive (empty conjunction, degenerate span)."""


class ConfigError(RolegradError):
    """Invalid or inconsistent run configuration."""


class DataFormatError(RolegradError):
    """Malformed corpus or frames input.

    Carries the offending path and 1-based line number when known so the
    message points at the exact record.
    """

    def __init__(self, message: str, path: Path | str | None = None, line: int | None = None):
        self.path = Path(path) if path is not None else None
        self.line = line
        location = ""
        if path is not None:
            location = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(f"{location}{message}")


class UnknownFrameError(RolegradError, KeyError):
    """A (lemma, sense) pair is missing from the frame inventory."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class CheckpointMismatchError(RolegradError):
    """Checkpoint incompatible with the data it is applied to."""


class NonFiniteLossError(RolegradError):
    """A loss component became NaN or infinite."""

    exit_code = EXIT_NUMERIC

    def __init__(self, component: str, value: float, sentence_id: str | None = None):
        self.component = component
        self.value = value
        self.sentence_id = sentence_id
        where = f" (sentence {sentence_id})" if sentence_id is not None else ""
        super().__init__(f"nonfinite loss: {component} = {value}{where}")


class GradientCheckError(RolegradError):
    """Analytic and numeric gradients disagree beyond tolerance."""

    exit_code = EXIT_NUMERIC


def exit_code_for(e: BaseException) -> int:
    """Map an exception to the command-line exit code.

    Args:
        e: Exception raised by a command

    Returns:
        Exit code per the module contract; unexpected exceptions map to 1
    """
    if isinstance(e, RolegradError):
        return e.exit_code
    return 1
