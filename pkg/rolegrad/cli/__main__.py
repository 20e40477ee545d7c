"""CLI entry point for rolegrad."""

import sys

import click

from rolegrad.cli.check import check
from rolegrad.cli.compare import compare
from rolegrad.cli.convert import convert
from rolegrad.cli.coverage import coverage
from rolegrad.cli.eval import eval_cmd
from rolegrad.cli.gradcheck import gradcheck_cmd
from rolegrad.cli.synth import synth
from rolegrad.cli.train import train
from rolegrad.lib.error_utils import RolegradError, exit_code_for
from rolegrad.lib.logging_config import LOG_LEVELS, setup_logging

# Version - dynamically generated by hatch-vcs
try:
    from rolegrad._version import version as __version__
except ImportError:
    # Fallback for development without installation
    __version__ = "unknown"


class RolegradGroup(click.Group):
    """Click group that turns rolegrad errors into the documented exit codes."""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except RolegradError as e:
            click.echo(f"Error: {e}", err=True)
            ctx.exit(e.exit_code)


@click.group(cls=RolegradGroup)
@click.option(
    "--log-level",
    type=click.Choice(list(LOG_LEVELS)),
    default=None,
    help="Log level (default: $ROLEGRAD_LOG or info; heavy-debug logs every batch)",
)
@click.option("--json", "json_output", is_flag=True, help="JSON output mode")
@click.option("--quiet", is_flag=True, help="Suppress console logging")
@click.version_option(version=__version__, prog_name="rolegrad")
@click.pass_context
def cli(ctx: click.Context, log_level: str | None, json_output: bool, quiet: bool):
    """rolegrad - structured tuning of a semantic role labeler.

    Trains a BIO tagger with differentiable penalties for three output
    rules (unique core roles, exclusively overlapping roles, frame core
    roles) and measures how often predictions break them.
    """
    logger = setup_logging(level=log_level, json_format=json_output, quiet=quiet)

    ctx.ensure_object(dict)
    ctx.obj["logger"] = logger
    ctx.obj["json_output"] = json_output


cli.add_command(train)
cli.add_command(eval_cmd)
cli.add_command(check)
cli.add_command(gradcheck_cmd)
cli.add_command(synth)
cli.add_command(convert)
cli.add_command(coverage)
cli.add_command(compare)


def main():
    """Main entry point."""
    try:
        cli(obj={})
    except Exception as e:
        click.echo(f"Error: {e}", err=True)
        sys.exit(exit_code_for(e))


if __name__ == "__main__":
    main()
