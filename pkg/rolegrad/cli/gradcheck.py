"""Gradcheck command for rolegrad."""

import json

import click

from rolegrad.lib.cli_options import seed_option
from rolegrad.lib.logging_config import get_logger
from rolegrad.services.gradcheck import COMPONENTS, DEFAULT_STEP, require_passed, run_suite

logger = get_logger(__name__)


@click.command("gradcheck")
@seed_option(default=0, show_default=True)
@click.option("--trials", type=click.IntRange(min=1), default=100, show_default=True,
              help="Random points per component")
@click.option("--step", type=click.FloatRange(0, 1e-3, min_open=True), default=DEFAULT_STEP,
              show_default=True, help="Central-difference step")
@click.option("--component", "components", type=click.Choice(COMPONENTS), multiple=True,
              help="Component to check (repeatable; default: all)")
@click.option("--inject-fault", type=click.Choice(COMPONENTS), default=None,
              help="Flip the sign of this component's analytic gradient (self-test)")
@click.pass_context
def gradcheck_cmd(
    ctx: click.Context,
    seed: int,
    trials: int,
    step: float,
    components: tuple[str, ...],
    inject_fault: str | None,
):
    """Compare analytic gradients of every loss with finite differences.

    Exits with status 3 if any component exceeds its tolerance (1e-4, or
    1e-3 for the end-to-end training loss).
    """
    reports = run_suite(
        seed=seed,
        trials=trials,
        step=step,
        components=components or COMPONENTS,
        fault=inject_fault,
    )
    if ctx.obj.get("json_output"):
        click.echo(json.dumps([r.to_dict() for r in reports], indent=2))
    else:
        click.echo(f"{'component':<12}{'max error':>12}{'tolerance':>12}{'checked':>9}"
                   f"{'skipped':>9}  result")
        for r in reports:
            click.echo(
                f"{r.component:<12}{r.max_error:>12.2e}{r.tolerance:>12.0e}{r.checked:>9d}"
                f"{r.skipped:>9d}  {'pass' if r.passed else 'FAIL'}"
            )
    require_passed(reports)
