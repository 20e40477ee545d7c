"""Convert command for rolegrad."""

from pathlib import Path

import click

from rolegrad.lib.cli_options import existing_path
from rolegrad.services.corpus_io import load_corpus, write_conll_cols, write_jsonl


@click.command()
@click.argument("source", type=existing_path)
@click.argument("target", type=click.Path(dir_okay=False, path_type=Path))
def convert(source: Path, target: Path):
    """Convert a corpus between BIO columns and canonical JSONL.

    The output format follows TARGET's suffix: .jsonl writes JSONL, anything
    else writes BIO columns.  Input is validated on the way in.
    """
    corpus = load_corpus(source)
    if target.suffix == ".jsonl":
        write_jsonl(corpus, target)
    else:
        write_conll_cols(corpus, target)
    click.echo(f"{source} -> {target}: {len(corpus)} sentences")
