"""Duplicate clustering, scope attribution, and corpus duplication statistics.

A cluster groups every detected occurrence of one distinct normalized
sentence. Scope separates within-note repetition (WN) from between-note
duplication (BN); copy-forward strength is the fraction of cross-note
occurrence pairs that stay within one patient.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from statistics import median

from .corpus import Corpus, Note
from .preprocess import (
    SentenceRecord,
    count_words,
    normalize_text,
    split_sentences,
)

SCOPE_WN = "WN"
SCOPE_BN = "BN"
SCOPE_BOTH = "BOTH"

UNLABELED = "UNLABELED"
RELEVANT = "RELEVANT"
NOT_RELEVANT = "NOT_RELEVANT"


def sentence_cluster_id(sentence: str) -> str:
    """Stable identifier for a normalized sentence."""
    return hashlib.sha256(sentence.encode("utf-8")).hexdigest()[:16]


@dataclass
class DuplicateCluster:
    cluster_id: str
    sentence: str
    occurrences: list[tuple[str, str, int]]  # (note_id, patient_id, sentence_index)
    scope: str
    n_notes: int
    n_patients: int
    copy_forward_fraction: float
    relevance: str = UNLABELED
    relevance_score: float | None = None
    relevance_source: str | None = None

    def to_json(self) -> str:
        record = asdict(self)
        record["occurrences"] = [list(o) for o in self.occurrences]
        return json.dumps(record, ensure_ascii=False, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "DuplicateCluster":
        record = json.loads(line)
        record["occurrences"] = [tuple(o) for o in record["occurrences"]]
        return cls(**record)


@dataclass
class DupStats:
    pct_notes_with_dup: float
    median_dup_sentences_per_note: tuple[float, float, float]
    median_words_per_note: tuple[float, float, float]
    word_reduction_pct: float


def find_within_note_duplicates(note: Note, min_chars: int = 5) -> list[SentenceRecord]:
    """Every occurrence of a sentence repeated within a single note.

    Sentences whose normalized text is at most `min_chars` characters are
    ignored. Occurrences carry is_first so downstream keep-first policies
    need no recount.
    """
    text = normalize_text(note.text)
    records = split_sentences(text, note_id=note.note_id)
    counts: dict[str, int] = {}
    for record in records:
        if len(record.normalized) > min_chars:
            counts[record.normalized] = counts.get(record.normalized, 0) + 1
    out = []
    seen: set[str] = set()
    for record in records:
        if counts.get(record.normalized, 0) < 2:
            continue
        first = record.normalized not in seen
        seen.add(record.normalized)
        out.append(
            SentenceRecord(
                note_id=record.note_id,
                index_in_note=record.index_in_note,
                char_span=record.char_span,
                normalized=record.normalized,
                is_first=first,
            )
        )
    return out


def _cluster_fields(occurrences: list[tuple[str, str, int]]) -> tuple[str, int, int, float]:
    notes = {o[0] for o in occurrences}
    patients = {o[1] for o in occurrences}
    per_note: dict[str, int] = {}
    for o in occurrences:
        per_note[o[0]] = per_note.get(o[0], 0) + 1
    has_wn = any(c >= 2 for c in per_note.values())
    has_bn = len(notes) >= 2
    if has_wn and has_bn:
        scope = SCOPE_BOTH
    elif has_wn:
        scope = SCOPE_WN
    else:
        scope = SCOPE_BN
    cross_pairs = 0
    same_patient_pairs = 0
    for i in range(len(occurrences)):
        for j in range(i + 1, len(occurrences)):
            if occurrences[i][0] == occurrences[j][0]:
                continue
            cross_pairs += 1
            if occurrences[i][1] == occurrences[j][1]:
                same_patient_pairs += 1
    fraction = same_patient_pairs / cross_pairs if cross_pairs else 0.0
    return scope, len(notes), len(patients), fraction


def cluster_duplicates(
    wn: list[SentenceRecord],
    bn: list[SentenceRecord],
    corpus: Corpus,
) -> list[DuplicateCluster]:
    """One cluster per distinct duplicated sentence, across both detectors.

    Occurrences are deduplicated per (note_id, sentence index). Sentences
    reported by the between-note detector whose identical sentence was not
    segmented in any second note (a match-boundary artifact) yield a single
    occurrence and no within-note repeat; such singletons are dropped so the
    scope partition stays exhaustive. Clusters are ordered by sentence.
    """
    patients = {n.note_id: n.patient_id for n in corpus.notes}
    occurrences: dict[str, dict[tuple[str, int], tuple[str, str, int]]] = {}
    for record in list(wn) + list(bn):
        if record.note_id not in patients:
            raise ValueError(f"occurrence references unknown note_id {record.note_id}")
        occ = (record.note_id, patients[record.note_id], record.index_in_note)
        occurrences.setdefault(record.normalized, {})[
            (record.note_id, record.index_in_note)
        ] = occ
    clusters = []
    for sentence in sorted(occurrences):
        occs = sorted(occurrences[sentence].values())
        scope, n_notes, n_patients, fraction = _cluster_fields(occs)
        if n_notes < 2 and scope == SCOPE_BN:
            continue
        clusters.append(
            DuplicateCluster(
                cluster_id=sentence_cluster_id(sentence),
                sentence=sentence,
                occurrences=occs,
                scope=scope,
                n_notes=n_notes,
                n_patients=n_patients,
                copy_forward_fraction=fraction,
            )
        )
    return clusters


def _is_copy_forward(
    occ: tuple[str, str, int], cluster: DuplicateCluster
) -> bool:
    return any(
        other[0] != occ[0] and other[1] == occ[1] for other in cluster.occurrences
    )


def copy_forward_stats(
    clusters: list[DuplicateCluster],
    group_by: str = "patient",
    corpus: Corpus | None = None,
) -> list[tuple[str, float, float, float]]:
    """Per-group carry-forward summary: (group, median_pct, min_pct, max_pct).

    For each patient, the percentage of their duplicated sentence occurrences
    that are copy-forward (shared with another note of the same patient).
    group_by="patient" summarizes all patients in one row; group_by="note_type"
    groups occurrences by their note's type (requires the corpus) and
    summarizes patients within each type.
    """
    if group_by not in ("patient", "note_type"):
        raise ValueError(f"unknown group_by: {group_by}")
    if group_by == "note_type" and corpus is None:
        raise ValueError("group_by='note_type' requires the corpus")
    note_types = (
        {n.note_id: n.note_type or "" for n in corpus.notes} if corpus else {}
    )
    # group -> patient -> [copy_forward_count, total]
    tallies: dict[str, dict[str, list[int]]] = {}
    for cluster in clusters:
        for occ in cluster.occurrences:
            group = "all" if group_by == "patient" else note_types.get(occ[0], "")
            counter = tallies.setdefault(group, {}).setdefault(occ[1], [0, 0])
            counter[1] += 1
            if _is_copy_forward(occ, cluster):
                counter[0] += 1
    rows = []
    for group in sorted(tallies):
        pcts = [100.0 * cf / total for cf, total in tallies[group].values() if total]
        rows.append((group, median(pcts), min(pcts), max(pcts)))
    return rows


def removal_occurrences(
    clusters: list[DuplicateCluster],
    config: str,
    bn_occurrence_rule: str = "drop_all",
    corpus: Corpus | None = None,
) -> set[tuple[str, int]]:
    """(note_id, sentence_index) pairs a configuration removes.

    WN: within each note, every occurrence after the first of a sentence
    repeated in that note. WNNR: WN plus all occurrences of NOT_RELEVANT
    between-note clusters. WNBN: WN plus between-note occurrences per
    `bn_occurrence_rule` (drop_all, or keep_first_global which spares the
    first occurrence in canonical corpus order).
    """
    config = config.upper()
    if config == "NONE":
        return set()
    removals: set[tuple[str, int]] = set()
    for cluster in clusters:
        per_note: dict[str, list[int]] = {}
        for note_id, _, idx in cluster.occurrences:
            per_note.setdefault(note_id, []).append(idx)
        for note_id, idxs in per_note.items():
            for idx in sorted(idxs)[1:]:
                removals.add((note_id, idx))
    if config == "WN":
        return removals
    bn_clusters = [c for c in clusters if c.scope in (SCOPE_BN, SCOPE_BOTH)]
    if config == "WNNR":
        unlabeled = [c.cluster_id for c in bn_clusters if c.relevance == UNLABELED]
        if unlabeled:
            raise ValueError(
                f"WNNR requires relevance labels on all between-note clusters; "
                f"{len(unlabeled)} unlabeled (e.g. {unlabeled[0]})"
            )
        for cluster in bn_clusters:
            if cluster.relevance == NOT_RELEVANT:
                removals.update((o[0], o[2]) for o in cluster.occurrences)
        return removals
    if config == "WNBN":
        if bn_occurrence_rule not in ("drop_all", "keep_first_global"):
            raise ValueError(f"unknown bn_occurrence_rule: {bn_occurrence_rule}")
        order: dict[str, int] = {}
        if bn_occurrence_rule == "keep_first_global":
            if corpus is None:
                raise ValueError("keep_first_global requires the corpus for ordering")
            order = {n.note_id: i for i, n in enumerate(corpus.notes)}
        for cluster in bn_clusters:
            occs = cluster.occurrences
            if bn_occurrence_rule == "keep_first_global":
                keep = min(occs, key=lambda o: (order.get(o[0], len(order)), o[2]))
                removals.update((o[0], o[2]) for o in occs if o != keep)
            else:
                removals.update((o[0], o[2]) for o in occs)
        return removals
    raise ValueError(f"unknown configuration: {config}")


def _summary(values: list[float]) -> tuple[float, float, float]:
    if not values:
        return (0.0, 0.0, 0.0)
    return (float(median(values)), float(min(values)), float(max(values)))


def corpus_dup_stats(
    corpus: Corpus,
    clusters: list[DuplicateCluster],
    config: str,
    bn_occurrence_rule: str = "drop_all",
    baseline_median_words: float | None = None,
) -> DupStats:
    """Duplication statistics for one configuration.

    `corpus` is the emitted corpus for the configuration (word medians come
    from it); duplicate counts per note are the occurrences the configuration
    removes, with the per-note median computed over notes that have at least
    one. `word_reduction_pct` is the percentage decrease of the median
    words-per-note against `baseline_median_words` (the NONE configuration).
    """
    removed = removal_occurrences(
        clusters, config, bn_occurrence_rule=bn_occurrence_rule, corpus=corpus
    )
    per_note: dict[str, int] = {}
    for note_id, _ in removed:
        per_note[note_id] = per_note.get(note_id, 0) + 1
    n_notes = len(corpus.notes)
    pct = 100.0 * len(per_note) / n_notes if n_notes else 0.0
    counts = count_words(corpus)
    words = [float(v["words"]) for v in counts["per_note"].values()]
    med_words = _summary(words)
    if baseline_median_words:
        reduction = 100.0 * (baseline_median_words - med_words[0]) / baseline_median_words
    else:
        reduction = 0.0
    return DupStats(
        pct_notes_with_dup=pct,
        median_dup_sentences_per_note=_summary([float(c) for c in per_note.values()]),
        median_words_per_note=med_words,
        word_reduction_pct=reduction,
    )


def write_clusters(clusters: list[DuplicateCluster], path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for cluster in clusters:
            handle.write(cluster.to_json())
            handle.write("\n")


def read_clusters(path) -> list[DuplicateCluster]:
    clusters = []
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                clusters.append(DuplicateCluster.from_json(line))
    return clusters
