"""Desk-scale BIO tagger.

Token embeddings come from a trainable lookup table.  For a predicate u and
token i the tagger computes

    v_u = f_v(e_u),  a_i = f_a(e_i),  phi = f_va([v_u, a_i]),  y = g(phi)

and uses ``y`` twice: its softmax is the score grid the constraint losses
read, and the raw scores are the CRF emissions for L_E and decoding.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field

import torch
from torch import nn

from rolegrad.lib.config import ModelConfig
from rolegrad.models.corpus import Corpus, Sentence
from rolegrad.models.grid import ScoreGrid
from rolegrad.models.labels import LabelSet
from rolegrad.services.crf import LinearChainCRF
from rolegrad.services.decoding import viterbi

UNK = "<unk>"


@dataclass(frozen=True)
class Vocabulary:
    """Token inventory; id 0 is reserved for unknown tokens."""

    tokens: tuple[str, ...]
    _ids: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.tokens or self.tokens[0] != UNK:
            raise ValueError(f"vocabulary must start with {UNK}")
        object.__setattr__(self, "_ids", {tok: i for i, tok in enumerate(self.tokens)})

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: object) -> bool:
        return token in self._ids

    @classmethod
    def from_corpus(cls, corpus: Corpus, min_count: int = 1) -> Vocabulary:
        counts = Counter(tok for sentence in corpus for tok in sentence.tokens)
        kept = sorted(tok for tok, n in counts.items() if n >= min_count and tok != UNK)
        return cls(tokens=(UNK, *kept))

    def encode(self, tokens: Iterable[str]) -> torch.Tensor:
        return torch.tensor([self._ids.get(tok, 0) for tok in tokens], dtype=torch.long)

    def overlap(self, tokens: Iterable[str]) -> float:
        """Fraction of ``tokens`` that are known."""
        seen = list(tokens)
        if not seen:
            return 1.0
        return sum(tok in self for tok in seen) / len(seen)

    def digest(self) -> str:
        return hashlib.sha256("\n".join(self.tokens).encode()).hexdigest()[:16]


def _dropout(x: torch.Tensor, rate: float, generator: torch.Generator | None) -> torch.Tensor:
    """Inverted dropout drawing its mask from ``generator``."""
    if rate == 0.0:
        return x
    keep = 1.0 - rate
    mask = torch.empty_like(x).bernoulli_(keep, generator=generator)
    return x * mask / keep


class SrlTagger(nn.Module):
    """Predicate-argument scorer plus CRF.

    Dropout masks come from an explicit ``torch.Generator`` per call so that
    training is reproducible however sentences are scheduled.
    """

    def __init__(self, vocab_size: int, labels: LabelSet, config: ModelConfig | None = None):
        super().__init__()
        config = config or ModelConfig()
        self.labels = labels
        self.dropout = config.dropout
        h = config.hidden_dim
        self.embedding = nn.Embedding(vocab_size, config.embed_dim)
        self.f_v = nn.Linear(config.embed_dim, h)
        self.f_a = nn.Linear(config.embed_dim, h)
        self.f_va = nn.Sequential(nn.Linear(2 * h, h), nn.ReLU(), nn.Linear(h, h), nn.ReLU())
        self.g = nn.Linear(h, labels.num_tags)
        self.crf = LinearChainCRF(labels)

    def encode(self, token_ids: torch.Tensor) -> torch.Tensor:
        """Token embeddings [length x d]; id 0 is the unknown token."""
        return self.embedding(token_ids)

    def logits(
        self,
        embeddings: torch.Tensor,
        predicate_indices: Sequence[int],
        generator: torch.Generator | None = None,
    ) -> torch.Tensor:
        """Tag scores for every (predicate, token) pair, [U x length x T]."""
        rate = self.dropout if self.training else 0.0
        e = _dropout(embeddings, rate, generator)
        args = self.f_a(e)  # [n, h]
        preds = self.f_v(e[list(predicate_indices)])  # [U, h]
        n, h = args.shape
        pairs = torch.cat(
            [preds.unsqueeze(1).expand(-1, n, h), args.unsqueeze(0).expand(len(preds), n, h)],
            dim=-1,
        )
        phi = _dropout(self.f_va(pairs), rate, generator)
        return self.g(phi)

    def forward(
        self,
        token_ids: torch.Tensor,
        predicate_indices: Sequence[int],
        generator: torch.Generator | None = None,
    ) -> torch.Tensor:
        return self.logits(self.encode(token_ids), predicate_indices, generator)

    def score_pair(
        self, embeddings: torch.Tensor, predicate_index: int, sentence_id: str = ""
    ) -> ScoreGrid:
        """Softmax grid for one predicate."""
        probs = torch.softmax(self.logits(embeddings, [predicate_index])[0], dim=-1)
        return ScoreGrid(probs=probs, predicate_index=predicate_index, sentence_id=sentence_id)

    def grids(self, logits: torch.Tensor, sentence: Sentence) -> list[ScoreGrid]:
        """Score grids from the logits of all of ``sentence``'s predicates."""
        probs = torch.softmax(logits, dim=-1)
        return [
            ScoreGrid(
                probs=probs[k], predicate_index=p.pred_index, sentence_id=sentence.sentence_id
            )
            for k, p in enumerate(sentence.propositions)
        ]

    def decode(self, logits: torch.Tensor) -> list[list[int]]:
        """Viterbi paths for a [U x length x T] logits block."""
        transitions = self.crf.scores().detach()
        return [viterbi(block, transitions)[0] for block in logits.detach()]


def _eval_logits(
    model: SrlTagger, vocab: Vocabulary, sentences: Iterable[Sentence]
) -> Iterator[tuple[Sentence, torch.Tensor | None]]:
    """Logits per sentence in evaluation mode; None for predicate-less sentences."""
    was_training = model.training
    model.eval()
    try:
        with torch.no_grad():
            for sentence in sentences:
                if not sentence.propositions:
                    yield sentence, None
                    continue
                embeddings = model.encode(vocab.encode(sentence.tokens))
                yield sentence, model.logits(
                    embeddings, [p.pred_index for p in sentence.propositions]
                )
    finally:
        model.train(was_training)


def predict_tags(
    model: SrlTagger, vocab: Vocabulary, sentences: Iterable[Sentence]
) -> list[list[list[str]]]:
    """Decoded tags per sentence and proposition."""
    return [
        [] if logits is None else [model.labels.decode(path) for path in model.decode(logits)]
        for _, logits in _eval_logits(model, vocab, sentences)
    ]


def predict_grids(
    model: SrlTagger, vocab: Vocabulary, sentences: Iterable[Sentence]
) -> list[list[ScoreGrid]]:
    """Softmax grids per sentence."""
    return [
        [] if logits is None else model.grids(logits, sentence)
        for sentence, logits in _eval_logits(model, vocab, sentences)
    ]
