"""Coverage command for rolegrad: how much the top-k span beam misses."""

import json
from pathlib import Path

import click

from rolegrad.lib.cli_options import existing_path
from rolegrad.lib.logging_config import get_logger
from rolegrad.services.checkpoint import check_compatible, load_checkpoint
from rolegrad.services.constraints import topk_missed
from rolegrad.services.corpus_io import load_corpus
from rolegrad.services.decoding import extract_spans
from rolegrad.services.evaluation import crossing_pairs
from rolegrad.services.tagger import predict_grids, predict_tags

logger = get_logger(__name__)


def _parse_ks(value: str) -> list[int]:
    try:
        ks = sorted({int(k) for k in value.split(",") if k.strip()})
    except ValueError as e:
        raise click.BadParameter(f"expected comma-separated integers, got {value!r}") from e
    if not ks or ks[0] < 1:
        raise click.BadParameter("beam sizes must be >= 1")
    return ks


@click.command()
@click.argument("checkpoint", type=existing_path)
@click.argument("data", type=existing_path)
@click.option("--k", "ks", default="1,2,4,6", show_default=True,
              help="Comma-separated beam sizes")
@click.option("--threshold", type=float, default=1e-3, show_default=True,
              help="L_O at or below this counts as no penalty")
@click.pass_context
def coverage(ctx: click.Context, checkpoint: Path, data: Path, ks: str, threshold: float):
    """Count crossing predictions that the beam-k overlap loss does not see.

    A sentence counts as missed at k when its decoded output contains a
    crossing span pair but L_O with beam k is at most THRESHOLD.
    """
    beams = _parse_ks(ks)
    loaded = load_checkpoint(checkpoint)
    corpus = load_corpus(data)
    check_compatible(loaded, corpus)
    sentences = [s for s in corpus if s.propositions]

    tags = predict_tags(loaded.model, loaded.vocab, sentences)
    crossing = [
        bool(crossing_pairs([extract_spans(t) for t in per_prop])) for per_prop in tags
    ]
    grids = predict_grids(loaded.model, loaded.vocab, sentences)
    missed = topk_missed(
        grids, crossing, loaded.labels, ks=beams, threshold=threshold,
        epsilon=loaded.config.weights.epsilon,
    )
    total = sum(crossing)

    if ctx.obj.get("json_output"):
        payload = {"crossing_sentences": total, "missed": {str(k): v for k, v in missed.items()}}
        click.echo(json.dumps(payload, indent=2, sort_keys=True))
        return
    click.echo(f"{total} sentence(s) with a crossing prediction")
    click.echo(f"{'k':>4}{'missed':>8}")
    for k in beams:
        click.echo(f"{k:>4}{missed[k]:>8}")
