"""Clinical-relevance labeling of between-note duplicate clusters.

Ships a rule/lexicon classifier: a sentence is NOT_RELEVANT as soon as any
trigger phrase matches (case-insensitive substring, '*' wildcards). Phrases
are organized under the boilerplate topics observed in practice (attestation,
legal notices, template procedural text, ...). External model predictions
can be applied through a TSV label-exchange file, and an annotation bootstrap
emits deterministic review batches.
"""

from __future__ import annotations

import csv
import hashlib
import json
import re
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

from .analysis import NOT_RELEVANT, RELEVANT, UNLABELED, DuplicateCluster

_DATA_DIR = Path(__file__).parent / "data"

LABELS = (RELEVANT, NOT_RELEVANT)
_LABEL_ALIASES = {
    "relevant": RELEVANT,
    "not_relevant": NOT_RELEVANT,
    "not relevant": NOT_RELEVANT,
    "r": RELEVANT,
    "nr": NOT_RELEVANT,
}


@dataclass(frozen=True)
class RelevanceLabel:
    label: str
    score: float
    source: str  # rule | external | gold


class LexiconError(ValueError):
    pass


def _compile_phrase(phrase: str) -> re.Pattern:
    parts = [re.escape(p) for p in phrase.split("*")]
    return re.compile(".*?".join(parts))


@dataclass
class TopicLexicon:
    """Trigger phrases grouped by topic. Phrases are lowercase and may
    contain '*' wildcards."""

    topics: list[tuple[str, list[str]]]

    def __post_init__(self) -> None:
        names = [name for name, _ in self.topics]
        if len(names) != len(set(names)):
            raise LexiconError("topic names must be unique")
        for name, phrases in self.topics:
            if not phrases:
                raise LexiconError(f"topic {name!r} has no phrases")
        self._compiled = [
            (name, [(p, _compile_phrase(p.lower())) for p in phrases])
            for name, phrases in self.topics
        ]

    @classmethod
    def from_file(cls, path: str | Path) -> "TopicLexicon":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(data, dict):
            raise LexiconError("lexicon file must be a JSON object {topic: [phrases]}")
        return cls(topics=[(name, list(phrases)) for name, phrases in data.items()])

    def phrases(self) -> list[str]:
        return [p for _, ps in self.topics for p in ps]


@lru_cache(maxsize=1)
def default_lexicon() -> TopicLexicon:
    return TopicLexicon.from_file(_DATA_DIR / "default_lexicon.json")


def classify_sentence(lexicon: TopicLexicon, sentence: str) -> RelevanceLabel:
    """NOT_RELEVANT iff any trigger phrase matches, scored by the longest
    matched span relative to sentence length; otherwise RELEVANT at 0.5."""
    lowered = sentence.lower()
    best = 0
    for _, compiled in lexicon._compiled:
        for _, pattern in compiled:
            m = pattern.search(lowered)
            if m and m.end() - m.start() > best:
                best = m.end() - m.start()
    if best:
        score = min(1.0, best / len(lowered)) if lowered else 1.0
        return RelevanceLabel(label=NOT_RELEVANT, score=score, source="rule")
    return RelevanceLabel(label=RELEVANT, score=0.5, source="rule")


def classify_clusters(
    clusters: list[DuplicateCluster], lexicon: TopicLexicon
) -> list[DuplicateCluster]:
    """Label every cluster in place with the rule classifier; returns clusters."""
    for cluster in clusters:
        label = classify_sentence(lexicon, cluster.sentence)
        cluster.relevance = label.label
        cluster.relevance_score = label.score
        cluster.relevance_source = label.source
    return clusters


def _parse_label(raw: str, line_no: int) -> str:
    label = _LABEL_ALIASES.get(raw.strip().lower())
    if label is None:
        raise ValueError(f"line {line_no}: unknown label {raw!r}")
    return label


def apply_external_labels(
    clusters: list[DuplicateCluster],
    labels_path: str | Path,
    source: str = "external",
) -> list[dict]:
    """Apply a TSV label file (cluster_id, sentence, label, optional score).

    Rows match clusters by cluster_id or by exact sentence. Returns the rows
    that matched nothing, as {line_no, key} dicts. Gold labels take
    precedence over external ones on re-application.
    """
    by_id = {c.cluster_id: c for c in clusters}
    by_sentence = {c.sentence: c for c in clusters}
    unmatched = []
    with Path(labels_path).open("r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle, delimiter="\t")
        for line_no, row in enumerate(reader, start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if row[0].lstrip().startswith("#"):
                continue
            if len(row) < 3:
                raise ValueError(f"line {line_no}: expected >=3 tab-separated columns")
            cluster_id, sentence, raw_label = row[0], row[1], row[2]
            label = _parse_label(raw_label, line_no)
            score = None
            if len(row) > 3 and row[3].strip():
                try:
                    score = float(row[3])
                except ValueError as exc:
                    raise ValueError(f"line {line_no}: bad score {row[3]!r}") from exc
            cluster = by_id.get(cluster_id) or by_sentence.get(sentence)
            if cluster is None:
                unmatched.append({"line_no": line_no, "key": cluster_id or sentence})
                continue
            if cluster.relevance_source == "gold" and source != "gold":
                continue
            cluster.relevance = label
            cluster.relevance_score = score if score is not None else 1.0
            cluster.relevance_source = source
    return unmatched


def _sample_key(seed: int, cluster_id: str) -> str:
    return hashlib.sha256(f"{seed}:{cluster_id}".encode("utf-8")).hexdigest()


def bootstrap_sample(
    clusters: list[DuplicateCluster],
    n: int,
    target_label: str = NOT_RELEVANT,
    seed: int = 0,
    out_path: str | Path | None = None,
) -> list[DuplicateCluster]:
    """Deterministic annotation batch: min(n, available) clusters with the
    target predicted label, ordered by the keyed hash of (seed, cluster_id).

    When `out_path` is given, writes a TSV review file with an empty gold
    column: cluster_id, sentence, predicted_label, score, gold.
    """
    if n <= 0:
        raise ValueError("sample size must be positive")
    candidates = [c for c in clusters if c.relevance == target_label]
    candidates.sort(key=lambda c: _sample_key(seed, c.cluster_id))
    sample = candidates[:n]
    if out_path is not None:
        with Path(out_path).open("w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, delimiter="\t", lineterminator="\n")
            for cluster in sample:
                writer.writerow(
                    [
                        cluster.cluster_id,
                        cluster.sentence,
                        cluster.relevance,
                        "" if cluster.relevance_score is None else cluster.relevance_score,
                        "",
                    ]
                )
    return sample


def write_labels(clusters: list[DuplicateCluster], path: str | Path) -> None:
    """Labels TSV: cluster_id, sentence, label, score (labeled clusters only)."""
    with Path(path).open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, delimiter="\t", lineterminator="\n")
        for cluster in clusters:
            if cluster.relevance == UNLABELED:
                continue
            writer.writerow(
                [
                    cluster.cluster_id,
                    cluster.sentence,
                    cluster.relevance,
                    "" if cluster.relevance_score is None else cluster.relevance_score,
                ]
            )


def _prf(tp: int, fp: int, fn: int) -> dict:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {"precision": precision, "recall": recall, "f1": f1}


def evaluate_classifier(predictions: dict[str, str], gold: dict[str, str]) -> dict:
    """Precision/recall/F1 of the NOT_RELEVANT class plus per-class values.

    Both inputs map the same keys (sentences or cluster ids) to labels; a
    mismatched key set is fatal and reports the symmetric difference.
    """
    diff = set(predictions) ^ set(gold)
    if diff:
        sample = ", ".join(sorted(diff)[:5])
        raise ValueError(
            f"prediction/gold key sets differ by {len(diff)} entries (e.g. {sample})"
        )
    per_class = {}
    for label in LABELS:
        tp = sum(1 for k, p in predictions.items() if p == label and gold[k] == label)
        fp = sum(1 for k, p in predictions.items() if p == label and gold[k] != label)
        fn = sum(1 for k, p in predictions.items() if p != label and gold[k] == label)
        per_class[label] = {**_prf(tp, fp, fn), "support": tp + fn}
    primary = per_class[NOT_RELEVANT]
    macro_f1 = sum(v["f1"] for v in per_class.values()) / len(per_class)
    return {
        "precision": primary["precision"],
        "recall": primary["recall"],
        "f1": primary["f1"],
        "macro_f1": macro_f1,
        "per_class": per_class,
    }
