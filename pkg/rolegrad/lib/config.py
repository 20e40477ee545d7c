"""Run configuration for rolegrad.

A run is described by a ``RunConfig`` tree.  Values are merged from (lowest
to highest precedence):

1. Built-in defaults
2. A named preset (``rolegrad/presets/<name>.json``)
3. A config file given with ``--config`` (JSON, or TOML by suffix)
4. Environment variables (ROLEGRAD_SEED, ROLEGRAD_THREADS)
5. Command-line flags

``--config`` accepts either a path or the name of a shipped preset, so
``--config conll05-full-ufo.json`` works from any directory.
"""

from __future__ import annotations

import copy
import hashlib
import json
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

from rolegrad.lib.error_utils import ConfigError
from rolegrad.lib.logging_config import get_logger
from rolegrad.models.labels import DEFAULT_CORE

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

logger = get_logger(__name__)

PRESETS_DIR = Path(__file__).resolve().parent.parent / "presets"
CONSTRAINT_NAMES = "UOF"
FRAME_LITERALS = ("conjunction", "disjunction")
UNKNOWN_FRAME_POLICIES = ("warn", "error")


@dataclass
class ConstraintWeights:
    """Weights of the constraint regularizers in the combined loss.

    Attributes:
        lambda_u: Weight of the unique-core-roles loss
        lambda_o: Weight of the exclusively-overlapping-roles loss
        lambda_f: Weight of the frame-core-roles loss
        beam_k: Number of top-scoring spans per (predicate, label) in L_O
        epsilon: Probability clamp applied before logs and divisions
        frame_literal: "conjunction" scores not(B and I) per token,
            "disjunction" scores not(B or I)
        unknown_frame: "warn" skips predicates missing from the inventory,
            "error" fails
    """

    lambda_u: float = 0.0
    lambda_o: float = 0.0
    lambda_f: float = 0.0
    beam_k: int = 4
    epsilon: float = 1e-6
    frame_literal: str = "conjunction"
    unknown_frame: str = "warn"

    def __post_init__(self) -> None:
        for name in ("lambda_u", "lambda_o", "lambda_f"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.beam_k < 1:
            raise ConfigError(f"beam_k must be >= 1, got {self.beam_k}")
        if not 0 < self.epsilon < 0.5:
            raise ConfigError(f"epsilon must lie in (0, 0.5), got {self.epsilon}")
        if self.frame_literal not in FRAME_LITERALS:
            raise ConfigError(f"frame_literal must be one of {FRAME_LITERALS}")
        if self.unknown_frame not in UNKNOWN_FRAME_POLICIES:
            raise ConfigError(f"unknown_frame must be one of {UNKNOWN_FRAME_POLICIES}")

    @property
    def active(self) -> str:
        """Constraint letters with a nonzero weight, e.g. "UF"."""
        return "".join(
            name
            for name, lam in zip(CONSTRAINT_NAMES, (self.lambda_u, self.lambda_o, self.lambda_f))
            if lam > 0
        )


@dataclass
class TrainSchedule:
    """Two-stage finetuning schedule.

    The dataclass defaults are the large-model finetuning values (30 epochs
    at 3e-5, then 5 epochs at 1e-5, 10% linear warmup).  A desk-scale tagger
    trained from scratch needs larger rates; see ``desk_scale()``.
    """

    stage1_epochs: int = 30
    stage1_lr: float = 3e-5
    stage2_epochs: int = 5
    stage2_lr: float = 1e-5
    warmup_fraction: float = 0.1
    batch_size: int = 8
    seed: int = 0

    def __post_init__(self) -> None:
        if self.stage1_epochs < 0 or self.stage2_epochs < 0:
            raise ConfigError("epochs must be >= 0")
        if self.stage1_lr <= 0 or self.stage2_lr <= 0:
            raise ConfigError("learning rates must be > 0")
        if not 0 <= self.warmup_fraction < 1:
            raise ConfigError(f"warmup_fraction must lie in [0, 1), got {self.warmup_fraction}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")

    @classmethod
    def desk_scale(cls) -> TrainSchedule:
        return cls(
            stage1_epochs=12,
            stage1_lr=5e-3,
            stage2_epochs=6,
            stage2_lr=2e-3,
            warmup_fraction=0.1,
            batch_size=8,
        )


@dataclass
class ModelConfig:
    """Dimensions of the desk-scale tagger."""

    embed_dim: int = 32
    hidden_dim: int = 64
    dropout: float = 0.5
    min_count: int = 1
    core_labels: list[str] = field(default_factory=lambda: list(DEFAULT_CORE))

    def __post_init__(self) -> None:
        if self.embed_dim < 1 or self.hidden_dim < 1:
            raise ConfigError("model dimensions must be positive")
        if not 0 <= self.dropout < 1:
            raise ConfigError(f"dropout must lie in [0, 1), got {self.dropout}")


@dataclass
class PathsConfig:
    """Input and output locations of a run."""

    train: str | None = None
    dev: str | None = None
    test: str | None = None
    frames: str | None = None
    out: str = "runs/default"

    @property
    def out_dir(self) -> Path:
        return Path(self.out)

    @property
    def checkpoint(self) -> Path:
        return self.out_dir / "model.pt"

    @property
    def metrics(self) -> Path:
        return self.out_dir / "metrics.jsonl"

    @property
    def report(self) -> Path:
        return self.out_dir / "report.json"


@dataclass
class RunConfig:
    """Complete description of a training run."""

    paths: PathsConfig = field(default_factory=PathsConfig)
    schedule: TrainSchedule = field(default_factory=TrainSchedule.desk_scale)
    weights: ConstraintWeights = field(default_factory=ConstraintWeights)
    model: ModelConfig = field(default_factory=ModelConfig)
    constraints: str | None = None  # subset of "UOF"; None = derived from weights
    threads: int = 1
    train_fraction: float = 1.0

    @property
    def seed(self) -> int:
        return self.schedule.seed

    def validate(self, check_paths: bool = True) -> None:
        """Check cross-field consistency and, optionally, input paths.

        Raises:
            ConfigError: On the first inconsistency found
        """
        if self.constraints is not None:
            unknown = set(self.constraints) - set(CONSTRAINT_NAMES)
            if unknown:
                raise ConfigError(f"unknown constraint letters: {''.join(sorted(unknown))}")
            extra = set(self.weights.active) - set(self.constraints)
            if extra:
                raise ConfigError(
                    f"nonzero lambda for disabled constraint(s) {''.join(sorted(extra))}; "
                    f"enabled: {self.constraints or 'none'}"
                )
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")
        if not 0 < self.train_fraction <= 1:
            raise ConfigError(f"train_fraction must lie in (0, 1], got {self.train_fraction}")
        if check_paths:
            if self.paths.train is None:
                raise ConfigError("no training corpus given (--train)")
            for name in ("train", "dev", "test", "frames"):
                value = getattr(self.paths, name)
                if value is not None and not Path(value).exists():
                    raise ConfigError(f"{name} path does not exist: {value}")
        if self.weights.lambda_f > 0 and self.paths.frames is None and check_paths:
            raise ConfigError("lambda_f > 0 requires a frames file (--frames)")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RunConfig:
        """Build a config from a (possibly partial) nested dictionary."""
        return _merge(cls(), data)

    def config_hash(self) -> str:
        """Stable hash of the parts that shape the trained model."""
        relevant = {
            "model": asdict(self.model),
            "weights": asdict(self.weights),
            "schedule": asdict(self.schedule),
            "train_fraction": self.train_fraction,
        }
        canonical = json.dumps(relevant, sort_keys=True)
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]


_SECTIONS: dict[str, type] = {
    "paths": PathsConfig,
    "schedule": TrainSchedule,
    "weights": ConstraintWeights,
    "model": ModelConfig,
}


def _merge(config: RunConfig, data: dict[str, Any]) -> RunConfig:
    """Return a copy of ``config`` with ``data`` applied on top."""
    merged = copy.deepcopy(config)
    for key, value in data.items():
        if key in _SECTIONS:
            if not isinstance(value, dict):
                raise ConfigError(f"section '{key}' must be a table/object")
            section = getattr(merged, key)
            known = {f.name for f in fields(section)}
            unknown = set(value) - known
            if unknown:
                raise ConfigError(f"unknown key(s) in '{key}': {', '.join(sorted(unknown))}")
            current = asdict(section)
            current.update(value)
            try:
                setattr(merged, key, _SECTIONS[key](**current))
            except TypeError as e:
                raise ConfigError(f"invalid '{key}' section: {e}") from e
        elif key in ("constraints", "threads", "train_fraction"):
            setattr(merged, key, value)
        else:
            raise ConfigError(f"unknown config key: {key}")
    return merged


def list_presets() -> list[str]:
    """Names of the shipped presets."""
    return sorted(p.stem for p in PRESETS_DIR.glob("*.json"))


def _read_config_file(path: Path) -> dict[str, Any]:
    try:
        if path.suffix == ".toml":
            with open(path, "rb") as f:
                return tomllib.load(f)
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, ValueError) as e:
        raise ConfigError(f"failed to parse config {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must contain an object at top level")
    return data


def resolve_config_source(name_or_path: str) -> Path:
    """Find a config file by path, falling back to the shipped presets.

    Raises:
        ConfigError: If neither a file nor a preset of that name exists
    """
    path = Path(name_or_path)
    if path.exists():
        return path
    preset = PRESETS_DIR / f"{path.stem}.json"
    if preset.exists():
        return preset
    raise ConfigError(
        f"config not found: {name_or_path} (presets: {', '.join(list_presets())})"
    )


def _env_overrides() -> dict[str, Any]:
    overrides: dict[str, Any] = {}
    seed = os.environ.get("ROLEGRAD_SEED")
    if seed:
        try:
            overrides.setdefault("schedule", {})["seed"] = int(seed)
        except ValueError:
            logger.warning(f"Ignoring non-integer ROLEGRAD_SEED={seed!r}")
    threads = os.environ.get("ROLEGRAD_THREADS")
    if threads:
        try:
            overrides["threads"] = int(threads)
        except ValueError:
            logger.warning(f"Ignoring non-integer ROLEGRAD_THREADS={threads!r}")
    return overrides


def load_run_config(
    config: str | None = None,
    overrides: dict[str, Any] | None = None,
    preset: str | None = None,
) -> RunConfig:
    """Assemble a RunConfig from preset, file, environment and flag overrides.

    Args:
        config: Path to a JSON/TOML config file, or a preset name
        overrides: Nested dict of command-line values (flags win)
        preset: Optional preset name applied below the config file

    Returns:
        Merged configuration (not yet validated)

    Raises:
        ConfigError: On unreadable files or unknown keys
    """
    run = RunConfig()
    if preset is not None:
        source = resolve_config_source(preset)
        logger.debug(f"Applying preset {source}")
        run = _merge(run, _read_config_file(source))
    if config is not None:
        source = resolve_config_source(config)
        logger.info(f"Loading config from {source}")
        run = _merge(run, _read_config_file(source))
    run = _merge(run, _env_overrides())
    if overrides:
        run = _merge(run, overrides)
    if run.constraints is not None:
        explicit = (overrides or {}).get("weights", {})
        run = _apply_toggle(run, set(explicit))
    return run


_LAMBDA_KEYS = dict(zip(CONSTRAINT_NAMES, ("lambda_u", "lambda_o", "lambda_f")))


def _apply_toggle(run: RunConfig, explicit: set[str]) -> RunConfig:
    """Zero the weights of disabled constraints unless set on the command line.

    A weight given explicitly for a disabled constraint is left in place so
    ``RunConfig.validate`` reports the conflict.
    """
    assert run.constraints is not None
    zeroed = {
        key: 0.0
        for letter, key in _LAMBDA_KEYS.items()
        if letter not in run.constraints and key not in explicit
        and getattr(run.weights, key) > 0
    }
    if zeroed:
        logger.debug(f"Constraint toggle {run.constraints!r} zeroes {', '.join(sorted(zeroed))}")
        run = _merge(run, {"weights": zeroed})
    return run
