"""Train command for rolegrad."""

import json
from typing import Any

import click

from rolegrad.lib.cli_options import run_config_from_options, run_config_options
from rolegrad.lib.logging_config import get_logger
from rolegrad.services.trainer import train_from_config

logger = get_logger(__name__)


@click.command()
@run_config_options
@click.pass_context
def train(ctx: click.Context, **options: Any):
    """Train a tagger in two stages and save checkpoint, metrics and report.

    Stage 1 fits the CRF likelihood alone; stage 2 adds the enabled
    constraint penalties with their lambda weights.

    Examples:

        # Shipped preset, lambda = (1, 0.5, 0.1), k = 4
        rolegrad train --config conll05-full-ufo.json --train train.jsonl \\
            --dev dev.jsonl --frames frames.json

        # Unconstrained control
        rolegrad train --train train.jsonl --lambda-u 0 --lambda-o 0 --lambda-f 0
    """
    run = run_config_from_options(options)
    weights = run.weights
    logger.info(
        f"Config {run.config_hash()}: lambda_u={weights.lambda_u} lambda_o={weights.lambda_o} "
        f"lambda_f={weights.lambda_f} k={weights.beam_k} seed={run.seed}"
    )
    outcome = train_from_config(run)

    summary: dict[str, Any] = {
        "checkpoint": str(run.paths.checkpoint),
        "metrics": str(run.paths.metrics),
        "config_hash": run.config_hash(),
        "epochs": len(outcome.result.metrics),
    }
    if outcome.report is not None:
        summary["report"] = outcome.report.to_dict()

    if ctx.obj.get("json_output"):
        click.echo(json.dumps(summary, indent=2, sort_keys=True))
        return
    click.echo(f"Checkpoint: {summary['checkpoint']}")
    click.echo(f"Metrics:    {summary['metrics']}")
    if outcome.report is not None:
        click.echo()
        click.echo(outcome.report.to_text(label_wise=False))
