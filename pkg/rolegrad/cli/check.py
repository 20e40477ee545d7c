"""Check command for rolegrad: structure violations of gold annotation."""

import json
from pathlib import Path

import click

from rolegrad.lib.cli_options import existing_path, frames_option
from rolegrad.lib.logging_config import get_logger
from rolegrad.models.labels import DEFAULT_CORE, LabelSet
from rolegrad.services.corpus_io import load_corpus, load_frames
from rolegrad.services.evaluation import evaluate, gold_tags, list_violations

logger = get_logger(__name__)


@click.command()
@click.argument("data", type=existing_path)
@frames_option(help="Frame inventory; without it rho_f is reported as NA")
@click.option(
    "--core",
    default=",".join(DEFAULT_CORE),
    show_default=True,
    help="Comma-separated core labels",
)
@click.option("--verbose", "-v", is_flag=True, help="List the violating proposition ids")
@click.pass_context
def check(ctx: click.Context, data: Path, frames: Path | None, core: str, verbose: bool):
    """Report rho_u, rho_o and rho_f of the gold annotation in DATA.

    Gold that breaks a rule is reported, never repaired or dropped.
    """
    core_labels = tuple(label for label in core.split(",") if label)
    corpus = load_corpus(data)
    if corpus.num_propositions == 0:
        click.echo(f"{data}: no propositions to check")
        return
    labels = LabelSet.from_labels(corpus.labels(), core=core_labels)
    inventory = load_frames(frames, core_labels) if frames else None
    gold = gold_tags(corpus)
    report = evaluate(corpus, gold, labels, inventory)
    violations = list_violations(corpus, gold, labels, inventory) if verbose else None

    if ctx.obj.get("json_output"):
        payload = {k: report.to_dict()[k] for k in ("rho_u", "rho_o", "rho_f", "propositions")}
        if violations is not None:
            payload["violations"] = {
                "unique": violations.unique,
                "overlap": violations.overlap,
                "frame": violations.frame,
            }
        click.echo(json.dumps(payload, indent=2, sort_keys=True))
        return

    head = report.headline()
    click.echo(f"{data}: {report.propositions} proposition(s) in {report.sentences} sentence(s)")
    click.echo(f"  rho_u = {head['rho_u']}")
    click.echo(f"  rho_o = {head['rho_o']}")
    click.echo(f"  rho_f = {head['rho_f']}")
    if violations is not None:
        for name, ids in (
            ("unique", violations.unique),
            ("overlap", violations.overlap),
            ("frame", violations.frame),
        ):
            for proposition_id in ids:
                click.echo(f"{name}\t{proposition_id}")
