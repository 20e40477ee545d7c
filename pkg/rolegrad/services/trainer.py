"""Two-stage training.

Stage 1 minimizes the CRF negative log-likelihood alone; stage 2 continues
from the stage-1 weights on

    L_E + lambda_U L_U + lambda_O L_O + lambda_F L_F

with a fresh Adam optimizer at the (lower) stage-2 learning rate.  Each
stage warms its rate up linearly over the first ``warmup_fraction`` of its
updates and holds it constant afterwards.

Every L_* is computed per sentence and averaged over the batch.  Per-epoch
metrics (mean loss components, learning rate, dev scores) go to a JSONL
log that contains no timestamps, so equal seeds give byte-identical logs.
"""

from __future__ import annotations

import json
import math
import random
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import torch

from rolegrad.lib.config import RunConfig
from rolegrad.lib.error_utils import ConfigError, DataFormatError, NonFiniteLossError
from rolegrad.lib.file_utils import atomic_write, write_json
from rolegrad.lib.logging_config import HEAVY_DEBUG, get_logger
from rolegrad.models.corpus import Corpus, FrameInventory, Sentence
from rolegrad.models.labels import LabelSet
from rolegrad.models.report import EvalReport
from rolegrad.services.checkpoint import save_checkpoint
from rolegrad.services.constraints import combine_loss, sentence_losses
from rolegrad.services.corpus_io import load_corpus, load_frames, subsample
from rolegrad.services.evaluation import evaluate
from rolegrad.services.tagger import SrlTagger, Vocabulary, predict_tags

logger = get_logger(__name__)

COMPONENTS = ("L_E", "L_U", "L_O", "L_F")


def seed_everything(seed: int, threads: int = 1) -> None:
    """Seed every RNG in play and pin torch to deterministic kernels."""
    random.seed(seed)
    np.random.seed(seed)
    torch.manual_seed(seed)
    torch.use_deterministic_algorithms(True)
    if threads == 1:
        torch.set_num_threads(1)


def seeded_generator(*key: int) -> torch.Generator:
    """A torch generator seeded from an integer key such as (seed, stage, epoch, step)."""
    state = np.random.SeedSequence(list(key)).generate_state(1, dtype=np.uint64)[0]
    return torch.Generator().manual_seed(int(state))


@dataclass
class SentenceLoss:
    """Loss components of one sentence; ``total`` is on the graph."""

    total: torch.Tensor
    parts: dict[str, float]


@dataclass
class EpochMetrics:
    stage: int
    epoch: int
    lr: float
    losses: dict[str, float]
    dev: dict[str, Any] | None = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"stage": self.stage, "epoch": self.epoch, "lr": self.lr}
        out.update(self.losses)
        if self.dev is not None:
            out["dev"] = self.dev
        return out


@dataclass
class TrainResult:
    model: SrlTagger
    vocab: Vocabulary
    metrics: list[EpochMetrics] = field(default_factory=list)


def warmup_factor(warmup_steps: int) -> Callable[[int], float]:
    """LambdaLR multiplier: linear ramp over ``warmup_steps`` updates, then 1."""

    def factor(step: int) -> float:
        if warmup_steps <= 0:
            return 1.0
        return min(1.0, (step + 1) / warmup_steps)

    return factor


class Trainer:
    """Runs both stages of training for one configuration.

    Args:
        config: Run configuration (schedule, weights, model dims, threads)
        labels: Label set fixing the tag layout
        vocab: Token vocabulary
        frames: Roleset inventory; required for L_F and rho_f
    """

    def __init__(
        self,
        config: RunConfig,
        labels: LabelSet,
        vocab: Vocabulary,
        frames: FrameInventory | None = None,
    ):
        self.config = config
        self.labels = labels
        self.vocab = vocab
        self.frames = frames
        seed_everything(config.seed, config.threads)
        self.model = SrlTagger(len(vocab), labels, config.model)
        self.metrics: list[EpochMetrics] = []

    def _sentence_loss(
        self, sentence: Sentence, generator: torch.Generator, constrained: bool
    ) -> SentenceLoss:
        weights = self.config.weights
        embeddings = self.model.encode(self.vocab.encode(sentence.tokens))
        logits = self.model.logits(
            embeddings, [p.pred_index for p in sentence.propositions], generator
        )
        ce = sum(
            (
                self.model.crf.nll(block, self.labels.encode(prop.tags))
                for block, prop in zip(logits, sentence.propositions)
            ),
            logits.new_zeros(()),
        )
        grids = self.model.grids(logits, sentence)
        senses = [p.frame_key for p in sentence.propositions]
        if constrained:
            penalties = sentence_losses(grids, senses, self.labels, weights, self.frames)
        else:
            with torch.no_grad():
                penalties = sentence_losses(grids, senses, self.labels, weights, self.frames)
        lu, lo, lf = penalties.unique, penalties.overlap, penalties.frame

        # zero-weight terms stay out of the graph
        total = combine_loss(
            ce,
            lu if constrained and weights.lambda_u > 0 else 0.0,
            lo if constrained and weights.lambda_o > 0 else 0.0,
            lf if constrained and weights.lambda_f > 0 else 0.0,
            weights,
            sentence_id=sentence.sentence_id,
        )
        # combine_loss only sees the weighted terms; log-only ones are checked here
        parts = {}
        for name, value in zip(COMPONENTS, (ce, lu, lo, lf)):
            number = float(value.detach())
            if not math.isfinite(number):
                raise NonFiniteLossError(name, number, sentence.sentence_id)
            parts[name] = number
        assert isinstance(total, torch.Tensor)
        return SentenceLoss(total=total, parts=parts)

    def _batch_losses(
        self,
        batch: Sequence[Sentence],
        generators: Sequence[torch.Generator],
        constrained: bool,
        pool: ThreadPoolExecutor | None,
    ) -> list[SentenceLoss]:
        if pool is None:
            return [
                self._sentence_loss(s, g, constrained) for s, g in zip(batch, generators)
            ]
        futures = [
            pool.submit(self._sentence_loss, s, g, constrained)
            for s, g in zip(batch, generators)
        ]
        # reduction follows input order, not completion order
        return [f.result() for f in futures]

    def _run_stage(
        self,
        stage: int,
        epochs: int,
        lr: float,
        train: Sequence[Sentence],
        dev: Corpus | None,
        metrics_path: Path | None,
    ) -> None:
        if epochs == 0:
            return
        schedule = self.config.schedule
        batch_size = schedule.batch_size
        steps_per_epoch = math.ceil(len(train) / batch_size)
        warmup_steps = math.ceil(schedule.warmup_fraction * steps_per_epoch * epochs)
        optimizer = torch.optim.Adam(self.model.parameters(), lr=lr)
        scheduler = torch.optim.lr_scheduler.LambdaLR(optimizer, warmup_factor(warmup_steps))
        constrained = stage == 2
        logger.info(
            f"Stage {stage}: {epochs} epoch(s) at lr {lr:g}, "
            f"{steps_per_epoch} update(s)/epoch, warmup {warmup_steps}"
        )

        pool = (
            ThreadPoolExecutor(max_workers=self.config.threads)
            if self.config.threads > 1
            else None
        )
        try:
            for epoch in range(1, epochs + 1):
                order = torch.randperm(
                    len(train), generator=seeded_generator(self.config.seed, stage, epoch)
                ).tolist()
                totals = dict.fromkeys(COMPONENTS, 0.0)
                self.model.train()
                for step, start in enumerate(range(0, len(order), batch_size)):
                    batch = [train[i] for i in order[start:start + batch_size]]
                    generators = [
                        seeded_generator(self.config.seed, stage, epoch, step, k)
                        for k in range(len(batch))
                    ]
                    losses = self._batch_losses(batch, generators, constrained, pool)
                    loss = torch.stack([sl.total for sl in losses]).mean()
                    optimizer.zero_grad()
                    loss.backward()
                    optimizer.step()
                    scheduler.step()
                    for sl in losses:
                        for name, value in sl.parts.items():
                            totals[name] += value
                    logger.log(
                        HEAVY_DEBUG, f"stage {stage} epoch {epoch} step {step}: {loss.item():.4f}"
                    )

                means = {name: value / len(train) for name, value in totals.items()}
                record = EpochMetrics(
                    stage=stage,
                    epoch=epoch,
                    lr=optimizer.param_groups[0]["lr"],
                    losses=means,
                    dev=self._dev_scores(dev),
                )
                self.metrics.append(record)
                logger.info(
                    f"stage {stage} epoch {epoch}: "
                    + " ".join(f"{k}={v:.4f}" for k, v in means.items())
                    + (f" dev_f1={record.dev['f1']:.2f}" if record.dev else ""),
                    extra={"fields": record.to_dict()},
                )
                if metrics_path is not None:
                    write_metrics(self.metrics, metrics_path)
        finally:
            if pool is not None:
                pool.shutdown()

    def _dev_scores(self, dev: Corpus | None) -> dict[str, Any] | None:
        if dev is None or dev.num_propositions == 0:
            return None
        report = evaluate(dev, predict_tags(self.model, self.vocab, dev), self.labels, self.frames)
        return {
            "f1": report.f1,
            "precision": report.precision,
            "recall": report.recall,
            "rho_u": report.rho_u,
            "rho_o": report.rho_o,
            "rho_f": report.rho_f,
        }

    def fit(
        self,
        train: Corpus,
        dev: Corpus | None = None,
        metrics_path: Path | None = None,
    ) -> TrainResult:
        """Train both stages.

        Raises:
            DataFormatError: If ``train`` has no propositions
            NonFiniteLossError: If any loss component becomes NaN/inf
        """
        usable = [s for s in train if s.propositions]
        if not usable:
            raise DataFormatError("training corpus has no propositions")
        if self.frames is not None:
            unknown = {
                p.frame_key
                for s in usable
                for p in s.propositions
                if p.frame_key not in self.frames
            }
            if unknown:
                logger.warning(
                    f"{len(unknown)} predicate sense(s) have no roleset; "
                    "they are skipped in L_F"
                )
        schedule = self.config.schedule
        self._run_stage(1, schedule.stage1_epochs, schedule.stage1_lr, usable, dev, metrics_path)
        self._run_stage(2, schedule.stage2_epochs, schedule.stage2_lr, usable, dev, metrics_path)
        self.model.eval()
        return TrainResult(model=self.model, vocab=self.vocab, metrics=self.metrics)


def write_metrics(metrics: Sequence[EpochMetrics], path: Path) -> None:
    """One JSON object per epoch, keys sorted."""
    text = "".join(json.dumps(m.to_dict(), sort_keys=True) + "\n" for m in metrics)
    atomic_write(path, text)


@dataclass
class RunData:
    train: Corpus
    dev: Corpus | None
    test: Corpus | None
    frames: FrameInventory | None
    labels: LabelSet


def load_run_data(config: RunConfig) -> RunData:
    """Load the corpora and frames a config points at.

    The label set covers every label seen in any split, core labels first.
    """
    paths = config.paths
    if paths.train is None:
        raise ConfigError("no training corpus given (--train)")
    core = tuple(config.model.core_labels)
    train = subsample(load_corpus(paths.train), config.train_fraction, config.seed)
    dev = load_corpus(paths.dev) if paths.dev else None
    test = load_corpus(paths.test) if paths.test else None
    frames = load_frames(paths.frames, core) if paths.frames else None
    seen = set().union(*(c.labels() for c in (train, dev, test) if c is not None))
    labels = LabelSet.from_labels(seen, core=core)
    logger.info(
        f"Training on {len(train)} sentence(s), {train.num_propositions} proposition(s); "
        f"{len(labels.all)} argument label(s)"
    )
    return RunData(train=train, dev=dev, test=test, frames=frames, labels=labels)


@dataclass
class RunOutcome:
    result: TrainResult
    data: RunData
    report: EvalReport | None


def train_from_config(config: RunConfig, save: bool = True) -> RunOutcome:
    """Train per ``config`` and score the held-out split.

    With ``save`` the output directory receives ``model.pt``,
    ``metrics.jsonl``, ``config.json`` and (if test or dev data is given)
    ``report.json``.
    """
    data = load_run_data(config)
    vocab = Vocabulary.from_corpus(data.train, config.model.min_count)
    trainer = Trainer(config, data.labels, vocab, data.frames)
    paths = config.paths
    result = trainer.fit(data.train, data.dev, paths.metrics if save else None)

    held_out = data.test if data.test is not None else data.dev
    report = None
    if held_out is not None and held_out.num_propositions:
        predicted = predict_tags(result.model, vocab, held_out)
        report = evaluate(held_out, predicted, data.labels, data.frames)
    if save:
        save_checkpoint(paths.checkpoint, result.model, vocab, config)
        write_json(paths.out_dir / "config.json", config.to_dict())
        if report is not None:
            write_json(paths.report, report.to_dict())
    return RunOutcome(result=result, data=data, report=report)


@dataclass
class SeedComparison:
    """Held-out scores of the lambda = 0 control and the constrained run for one seed."""

    seed: int
    control: EvalReport
    constrained: EvalReport

    @property
    def rho_u_reduction(self) -> float | None:
        """Relative rho_u drop in percent; None when the control has no violations."""
        if self.control.rho_u == 0:
            return None
        return 100.0 * (self.control.rho_u - self.constrained.rho_u) / self.control.rho_u

    def to_dict(self) -> dict[str, Any]:
        return {
            "seed": self.seed,
            "control": {"f1": self.control.f1, "rho_u": self.control.rho_u},
            "constrained": {"f1": self.constrained.f1, "rho_u": self.constrained.rho_u},
            "rho_u_reduction": self.rho_u_reduction,
        }


def compare_seeds(config: RunConfig, seeds: Sequence[int]) -> list[SeedComparison]:
    """Train control and constrained models under each seed.

    Runs go to ``<out>/seed<N>/control`` and ``<out>/seed<N>/constrained``.

    Raises:
        ConfigError: If neither test nor dev data is configured
    """
    if config.paths.test is None and config.paths.dev is None:
        raise ConfigError("compare needs held-out data (--test or --dev)")
    base = Path(config.paths.out)
    data = config.to_dict()
    comparisons = []
    for seed in seeds:
        runs = {}
        for name, weights in (
            ("control", {"lambda_u": 0.0, "lambda_o": 0.0, "lambda_f": 0.0}),
            ("constrained", {}),
        ):
            variant = RunConfig.from_dict(
                {
                    **data,
                    "paths": {**data["paths"], "out": str(base / f"seed{seed}" / name)},
                    "schedule": {**data["schedule"], "seed": seed},
                    "weights": {**data["weights"], **weights},
                }
            )
            logger.info(f"seed {seed}: training {name} model")
            outcome = train_from_config(variant)
            assert outcome.report is not None
            runs[name] = outcome.report
        comparisons.append(SeedComparison(seed, runs["control"], runs["constrained"]))
    return comparisons


def median_reduction(comparisons: Sequence[SeedComparison]) -> float | None:
    values = [c.rho_u_reduction for c in comparisons if c.rho_u_reduction is not None]
    return float(np.median(values)) if values else None
