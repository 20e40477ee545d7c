"""Synth command for rolegrad: write a synthetic corpus split."""

from pathlib import Path

import click

from rolegrad.lib.cli_options import seed_option
from rolegrad.lib.logging_config import get_logger
from rolegrad.services.corpus_io import write_conll_cols, write_frames, write_jsonl
from rolegrad.services.synth import synth_corpus, synth_frames

logger = get_logger(__name__)

SPLITS = ("train", "dev", "test")


@click.command()
@click.argument("out_dir", type=click.Path(file_okay=False, path_type=Path))
@seed_option(default=0, show_default=True)
@click.option("--train-size", type=click.IntRange(min=0), default=200, show_default=True)
@click.option("--dev-size", type=click.IntRange(min=0), default=100, show_default=True)
@click.option("--test-size", type=click.IntRange(min=0), default=100, show_default=True)
@click.option("--vocab-size", type=click.IntRange(min=4), default=60, show_default=True,
              help="Distinct argument nouns")
@click.option("--max-len", type=click.IntRange(min=3), default=12, show_default=True)
@click.option("--lemmas", type=click.IntRange(min=1), default=12, show_default=True,
              help="Predicate lemmas in the frame inventory")
@click.option("--violation-bias", type=click.FloatRange(0, 1), default=0.3, show_default=True,
              help="How often an argument noun lures toward a wrong role")
@click.option("--format", "fmt", type=click.Choice(["jsonl", "conll"]), default="jsonl",
              show_default=True)
def synth(
    out_dir: Path,
    seed: int,
    train_size: int,
    dev_size: int,
    test_size: int,
    vocab_size: int,
    max_len: int,
    lemmas: int,
    violation_bias: float,
    fmt: str,
):
    """Write train/dev/test splits and frames.json into OUT_DIR.

    The splits share one frame inventory and vocabulary; split k is drawn
    with seed + k.  Gold annotation satisfies all three rules.
    """
    frames = synth_frames(seed, lemmas)
    sizes = dict(zip(SPLITS, (train_size, dev_size, test_size)))
    for offset, (split, size) in enumerate(sizes.items()):
        corpus = synth_corpus(
            seed + offset,
            n_sentences=size,
            vocab_size=vocab_size,
            max_len=max_len,
            frame_inventory=frames,
            violation_bias=violation_bias,
        )
        if fmt == "jsonl":
            target = out_dir / f"{split}.jsonl"
            write_jsonl(corpus, target)
        else:
            target = out_dir / f"{split}.conll"
            write_conll_cols(corpus, target)
        click.echo(f"{target}: {len(corpus)} sentences, {corpus.num_propositions} propositions")
    write_frames(frames, out_dir / "frames.json")
    click.echo(f"{out_dir / 'frames.json'}: {len(frames)} rolesets")
