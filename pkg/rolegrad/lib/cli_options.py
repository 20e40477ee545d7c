"""Shared Click option definitions.

Training-style commands (``train``, ``compare``) accept the same run
configuration flags.  Use as decorators and turn the collected values into
a config with ``run_config_from_options``::

    @click.command()
    @run_config_options
    def my_cmd(**options: Any) -> None:
        run = run_config_from_options(options)
"""

from collections.abc import Callable
from pathlib import Path
from typing import Any, TypeVar

import click

from rolegrad.lib.config import RunConfig, list_presets, load_run_config

F = TypeVar("F", bound=Callable[..., Any])

existing_path = click.Path(exists=True, dir_okay=False, path_type=Path)

# flag name -> (config section or None for top level, config key)
_FLAG_TARGETS: dict[str, tuple[str | None, str]] = {
    "train": ("paths", "train"),
    "dev": ("paths", "dev"),
    "test": ("paths", "test"),
    "frames": ("paths", "frames"),
    "out": ("paths", "out"),
    "lambda_u": ("weights", "lambda_u"),
    "lambda_o": ("weights", "lambda_o"),
    "lambda_f": ("weights", "lambda_f"),
    "beam_k": ("weights", "beam_k"),
    "frame_literal": ("weights", "frame_literal"),
    "epochs1": ("schedule", "stage1_epochs"),
    "lr1": ("schedule", "stage1_lr"),
    "epochs2": ("schedule", "stage2_epochs"),
    "lr2": ("schedule", "stage2_lr"),
    "warmup": ("schedule", "warmup_fraction"),
    "seed": ("schedule", "seed"),
    "threads": (None, "threads"),
    "train_fraction": (None, "train_fraction"),
    "constraints": (None, "constraints"),
}


def frames_option(**click_kwargs: Any) -> Callable[[F], F]:
    """``--frames`` roleset inventory (JSON)."""
    kwargs: dict[str, Any] = {
        "type": existing_path,
        "default": None,
        "help": "Frame inventory JSON ({\"lemma.sense\": [core labels]})",
    }
    kwargs.update(click_kwargs)
    return click.option("--frames", **kwargs)


def seed_option(**click_kwargs: Any) -> Callable[[F], F]:
    kwargs: dict[str, Any] = {"type": int, "default": None, "help": "Random seed"}
    kwargs.update(click_kwargs)
    return click.option("--seed", **kwargs)


def run_config_options(f: F) -> F:
    """All flags that feed a ``RunConfig``; unset flags are None."""
    options = [
        click.option(
            "--config",
            "config_source",
            default=None,
            help="Config file (JSON or TOML) or the name of a shipped preset",
        ),
        click.option(
            "--preset",
            type=click.Choice(list_presets()),
            default=None,
            help="Named lambda preset applied below --config",
        ),
        click.option("--train", type=existing_path, default=None, help="Training corpus"),
        click.option("--dev", type=existing_path, default=None, help="Development corpus"),
        click.option("--test", type=existing_path, default=None, help="Test corpus"),
        frames_option(),
        click.option("--out", default=None, help="Output directory (default: runs/default)"),
        click.option("--lambda-u", type=float, default=None, help="Weight of L_U"),
        click.option("--lambda-o", type=float, default=None, help="Weight of L_O"),
        click.option("--lambda-f", type=float, default=None, help="Weight of L_F"),
        click.option("--beam-k", type=int, default=None, help="Top-k spans per owner in L_O"),
        click.option(
            "--frame-literal",
            type=click.Choice(["conjunction", "disjunction"]),
            default=None,
            help="Per-token literal of the frame rule",
        ),
        click.option(
            "--constraints",
            default=None,
            help="Enabled constraints, a subset of UOF ('' disables all)",
        ),
        click.option("--epochs1", type=int, default=None, help="Stage-1 epochs"),
        click.option("--lr1", type=float, default=None, help="Stage-1 learning rate"),
        click.option("--epochs2", type=int, default=None, help="Stage-2 epochs"),
        click.option("--lr2", type=float, default=None, help="Stage-2 learning rate"),
        click.option("--warmup", type=float, default=None, help="Warmup fraction per stage"),
        seed_option(),
        click.option("--threads", type=int, default=None, help="Worker threads (default 1)"),
        click.option(
            "--train-fraction",
            type=float,
            default=None,
            help="Train on a seeded random subset of this share of sentences",
        ),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def overrides_from_options(options: dict[str, Any]) -> dict[str, Any]:
    """Nested config overrides from the flags that were actually given."""
    overrides: dict[str, Any] = {}
    for flag, (section, key) in _FLAG_TARGETS.items():
        value = options.get(flag)
        if value is None:
            continue
        if isinstance(value, Path):
            value = str(value)
        if section is None:
            overrides[key] = value
        else:
            overrides.setdefault(section, {})[key] = value
    return overrides


def run_config_from_options(options: dict[str, Any], check_paths: bool = True) -> RunConfig:
    """Merge preset, config file, environment and flags, then validate.

    Raises:
        ConfigError: On any invalid or inconsistent setting
    """
    run = load_run_config(
        config=options.get("config_source"),
        overrides=overrides_from_options(options),
        preset=options.get("preset"),
    )
    run.validate(check_paths=check_paths)
    return run
