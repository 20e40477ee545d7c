"""Eval command for rolegrad."""

from pathlib import Path

import click

from rolegrad.lib.cli_options import existing_path, frames_option
from rolegrad.lib.file_utils import write_json
from rolegrad.lib.logging_config import get_logger
from rolegrad.services.checkpoint import check_compatible, load_checkpoint
from rolegrad.services.corpus_io import load_corpus, load_frames
from rolegrad.services.evaluation import evaluate
from rolegrad.services.tagger import predict_tags

logger = get_logger(__name__)


@click.command("eval")
@click.argument("checkpoint", type=existing_path)
@click.argument("data", type=existing_path)
@frames_option(help="Frame inventory; without it rho_f is reported as NA")
@click.option(
    "--report",
    "report_path",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="Where to write the JSON report (default: next to the checkpoint)",
)
@click.option("--label-wise/--no-label-wise", default=True, help="Per-label P/R/F1 table")
@click.pass_context
def eval_cmd(
    ctx: click.Context,
    checkpoint: Path,
    data: Path,
    frames: Path | None,
    report_path: Path | None,
    label_wise: bool,
):
    """Score a checkpoint on DATA: span P/R/F1 and rho_u, rho_o, rho_f.

    Arguments:
        CHECKPOINT: model.pt written by 'rolegrad train'
        DATA: Gold corpus (.jsonl or BIO columns)
    """
    loaded = load_checkpoint(checkpoint)
    corpus = load_corpus(data)
    check_compatible(loaded, corpus)
    inventory = load_frames(frames, loaded.labels.core) if frames else None

    predicted = predict_tags(loaded.model, loaded.vocab, corpus)
    report = evaluate(corpus, predicted, loaded.labels, inventory)

    report_path = report_path or checkpoint.parent / f"eval-{data.stem}.json"
    write_json(report_path, report.to_dict())
    logger.info(f"Wrote report to {report_path}")

    if ctx.obj.get("json_output"):
        click.echo(report.to_json())
    else:
        click.echo(report.to_text(label_wise=label_wise))
