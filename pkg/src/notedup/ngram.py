"""Perplexity, relative perplexity, and information content over a pluggable
token-probability model.

The built-in model is an add-k smoothed n-gram trained on sentence token
streams with start padding. Evaluation instances are non-overlapping token
windows of at most `max_len` tokens per note; the default last_token mode
scores only the final token of each instance. An external model can replace
the built-in scorer through a JSONL file of per-instance log-probabilities.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Corpus
from .preprocess import normalize_text, note_tokens, split_sentences, tokenize

START = "<s>"
UNK = "<unk>"

MODEL_FORMAT = "notedup-ngram/1"


@dataclass
class NgramModel:
    """Add-k n-gram model with counts kept for every context length below
    `order`, so short evaluation windows back off to the longest available
    context instead of failing."""

    order: int
    k_smooth: float
    vocab: set[str] = field(default_factory=set)
    # counts[j]: contexts of length j -> token counter
    counts: list[dict[tuple[str, ...], Counter]] = field(default_factory=list)
    totals: list[dict[tuple[str, ...], int]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.order < 1:
            raise ValueError("order must be >= 1")
        if self.k_smooth <= 0:
            raise ValueError("k_smooth must be positive")
        while len(self.counts) < self.order:
            self.counts.append({})
        while len(self.totals) < self.order:
            self.totals.append({})

    @classmethod
    def uniform(cls, vocab: set[str], order: int = 1, k_smooth: float = 1.0) -> "NgramModel":
        """Model with no observations: every token is 1/|vocab ∪ {UNK}|."""
        return cls(order=order, k_smooth=k_smooth, vocab=set(vocab))

    @property
    def event_space(self) -> int:
        return len(self.vocab) + 1  # plus UNK

    def _observe(self, context: tuple[str, ...], token: str) -> None:
        j = len(context)
        self.counts[j].setdefault(context, Counter())[token] += 1
        self.totals[j][context] = self.totals[j].get(context, 0) + 1

    def log_prob(self, context: tuple[str, ...], token: str) -> float:
        """log P(token | context) using the last min(order-1, len(context))
        context tokens."""
        j = min(self.order - 1, len(context))
        ctx = tuple(context[len(context) - j :])
        counter = self.counts[j].get(ctx)
        count = counter.get(token, 0) if counter else 0
        total = self.totals[j].get(ctx, 0)
        prob = (count + self.k_smooth) / (total + self.k_smooth * self.event_space)
        return math.log(prob)

    def prob(self, context: tuple[str, ...], token: str) -> float:
        return math.exp(self.log_prob(context, token))


@dataclass(frozen=True)
class PplResult:
    ppl: float
    n_instances: int
    mode: str


def _token_stream(note) -> list[str]:
    return [t.text for t in note_tokens(normalize_text(note.text))]


def train_ngram(corpus: Corpus, order: int = 3, k_smooth: float = 0.1) -> NgramModel:
    """Count n-grams (all context lengths up to order-1) over sentence token
    streams with start-of-sentence padding."""
    model = NgramModel(order=order, k_smooth=k_smooth)
    n_tokens = 0
    for note in corpus.notes:
        text = normalize_text(note.text)
        for record in split_sentences(text, note_id=note.note_id):
            tokens = [t.text for t in tokenize(record.normalized)]
            if not tokens:
                continue
            n_tokens += len(tokens)
            model.vocab.update(tokens)
            padded = [START] * (order - 1) + tokens
            for i in range(order - 1, len(padded)):
                for j in range(order):
                    model._observe(tuple(padded[i - j : i]), padded[i])
    if n_tokens == 0:
        raise ValueError("cannot train on an empty corpus")
    return model


def _instances(corpus: Corpus, max_len: int) -> list[list[str]]:
    windows = []
    for note in corpus.notes:
        stream = _token_stream(note)
        for i in range(0, len(stream), max_len):
            window = stream[i : i + max_len]
            if window:
                windows.append(window)
    return windows


def perplexity(
    model: NgramModel,
    eval_corpus: Corpus,
    mode: str = "last_token",
    max_len: int = 128,
) -> PplResult:
    """exp of the mean negative log-probability over scored tokens.

    last_token scores only the final token of each window (given the window
    as context); full_sequence scores every token. The sum uses math.fsum,
    so the result is exact under any instance permutation.
    """
    if mode not in ("last_token", "full_sequence"):
        raise ValueError(f"unknown mode: {mode}")
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    windows = _instances(eval_corpus, max_len)
    if not windows:
        raise ValueError("evaluation corpus has no tokens")
    log_probs = []
    for window in windows:
        if mode == "last_token":
            log_probs.append(model.log_prob(tuple(window[:-1]), window[-1]))
        else:
            for t in range(len(window)):
                log_probs.append(model.log_prob(tuple(window[:t]), window[t]))
    ppl = math.exp(-math.fsum(log_probs) / len(log_probs))
    return PplResult(ppl=ppl, n_instances=len(windows), mode=mode)


def perplexity_from_scores(path: str | Path) -> PplResult:
    """PPL from an external scorer's JSONL of {instance_id, log_prob}."""
    log_probs = []
    with Path(path).open("r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            record = json.loads(line)
            try:
                log_probs.append(float(record["log_prob"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"line {line_no}: bad log_prob entry") from exc
    if not log_probs:
        raise ValueError("empty scores file")
    ppl = math.exp(-math.fsum(log_probs) / len(log_probs))
    return PplResult(ppl=ppl, n_instances=len(log_probs), mode="external")


def relative_ppl(ppl_i: float, ppl_none: float) -> float:
    """Signed relative difference against the baseline perplexity."""
    if ppl_none <= 0:
        raise ValueError("baseline perplexity must be positive")
    return (ppl_i - ppl_none) / ppl_none


def information_content(ppl: float) -> float:
    """Cross-entropy in bits per scored token: log2(ppl)."""
    if ppl < 1:
        raise ValueError("perplexity below 1 is invalid for a proper model")
    return math.log2(ppl)


def save_model(model: NgramModel, path: str | Path) -> None:
    payload = {
        "format": MODEL_FORMAT,
        "order": model.order,
        "k_smooth": model.k_smooth,
        "vocab": sorted(model.vocab),
        "counts": [
            {" ".join(ctx): dict(counter) for ctx, counter in sorted(level.items())}
            for level in model.counts
        ],
    }
    Path(path).write_text(
        json.dumps(payload, ensure_ascii=False, sort_keys=True), encoding="utf-8"
    )


def load_model(path: str | Path) -> NgramModel:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format") != MODEL_FORMAT:
        raise ValueError(f"unsupported model format: {payload.get('format')!r}")
    model = NgramModel(
        order=payload["order"], k_smooth=payload["k_smooth"], vocab=set(payload["vocab"])
    )
    for j, level in enumerate(payload["counts"]):
        for ctx_str, counter in level.items():
            ctx = tuple(ctx_str.split(" ")) if ctx_str else ()
            model.counts[j][ctx] = Counter(counter)
            model.totals[j][ctx] = sum(counter.values())
    return model
