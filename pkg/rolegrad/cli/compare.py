"""Compare command for rolegrad: constrained model vs. lambda = 0 control."""

import json
from typing import Any

import click

from rolegrad.lib.cli_options import run_config_from_options, run_config_options
from rolegrad.lib.logging_config import get_logger
from rolegrad.services.trainer import compare_seeds, median_reduction

logger = get_logger(__name__)


def _parse_seeds(value: str) -> list[int]:
    try:
        seeds = [int(s) for s in value.split(",") if s.strip()]
    except ValueError as e:
        raise click.BadParameter(f"expected comma-separated integers, got {value!r}") from e
    if not seeds:
        raise click.BadParameter("at least one seed is required")
    return seeds


@click.command()
@run_config_options
@click.option("--seeds", "seed_list", default="0,1,2", show_default=True,
              help="Comma-separated seeds; each trains a control and a constrained model")
@click.pass_context
def compare(ctx: click.Context, seed_list: str, **options: Any):
    """Train the configured model and its unconstrained control per seed.

    Reports held-out F1 and rho_u for both and the median relative rho_u
    reduction over seeds.
    """
    seeds = _parse_seeds(seed_list)
    run = run_config_from_options(options)
    comparisons = compare_seeds(run, seeds)
    median = median_reduction(comparisons)

    if ctx.obj.get("json_output"):
        payload = {
            "seeds": [c.to_dict() for c in comparisons],
            "median_rho_u_reduction": median,
        }
        click.echo(json.dumps(payload, indent=2, sort_keys=True))
        return
    click.echo(f"{'seed':>6}{'F1 ctl':>9}{'F1 con':>9}{'rho_u ctl':>11}{'rho_u con':>11}")
    for c in comparisons:
        click.echo(
            f"{c.seed:>6}{c.control.f1:>9.2f}{c.constrained.f1:>9.2f}"
            f"{c.control.rho_u:>11.2f}{c.constrained.rho_u:>11.2f}"
        )
    shown = "NA" if median is None else f"{median:.1f}%"
    click.echo(f"median relative rho_u reduction: {shown}")
