"""Materialize the deduplication configurations NONE / WN / WNNR / WNBN.

Removal granularity is the sentence. Emitted notes carry normalized text:
kept sentences verbatim, gaps copied through where nothing was removed, and
collapsed to a single newline (when the excised region crossed a line break)
or space otherwise. Fully emptied notes are retained with empty text and an
"emptied_by_dedup" flag in their extras.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .analysis import DuplicateCluster, removal_occurrences
from .corpus import Corpus, Note
from .preprocess import count_words, normalize_text, split_sentences

CONFIGS = ("NONE", "WN", "WNNR", "WNBN")


@dataclass(frozen=True)
class DedupPolicy:
    config: str
    bn_occurrence_rule: str = "drop_all"  # or keep_first_global
    wn_occurrence_rule: str = "keep_first_in_note"

    def __post_init__(self) -> None:
        if self.config.upper() not in CONFIGS:
            raise ValueError(f"unknown configuration: {self.config}")


def _rebuild(text: str, spans: list[tuple[int, int]], keep: list[bool]) -> str:
    """Reassemble note text from kept sentence spans.

    The gap between two kept neighbors is copied verbatim when no sentence
    between them was removed; otherwise it collapses to '\n' when the skipped
    region contained a newline, else to ' '.
    """
    parts: list[str] = []
    prev_end: int | None = None
    pending_removal = False
    for (start, end), keep_it in zip(spans, keep):
        if not keep_it:
            pending_removal = True
            continue
        if prev_end is not None:
            gap = text[prev_end:start]
            if pending_removal:
                parts.append("\n" if "\n" in gap else " ")
            else:
                parts.append(gap)
        parts.append(text[start:end])
        prev_end = end
        pending_removal = False
    return "".join(parts)


def emit_config(
    corpus: Corpus,
    clusters: list[DuplicateCluster],
    policy: DedupPolicy,
) -> Corpus:
    """Apply one deduplication configuration and return the emitted corpus.

    NONE is the identity (modulo text normalization). WN keeps the first
    within-note occurrence of each repeated sentence. WNNR additionally
    removes every occurrence of NOT_RELEVANT between-note clusters (fatal if
    any between-note cluster is unlabeled). WNBN removes between-note
    occurrences per the policy's bn_occurrence_rule. Note count is always
    preserved.
    """
    config = policy.config.upper()
    removals = removal_occurrences(
        clusters, config, bn_occurrence_rule=policy.bn_occurrence_rule, corpus=corpus
    )
    notes = []
    for note in corpus.notes:
        text = normalize_text(note.text)
        if config == "NONE":
            notes.append(replace(note, text=text))
            continue
        records = split_sentences(text, note_id=note.note_id)
        spans = [r.char_span for r in records]
        keep = [(note.note_id, r.index_in_note) not in removals for r in records]
        new_text = _rebuild(text, spans, keep)
        extras = dict(note.extras)
        if not new_text.strip() and text.strip():
            extras["emptied_by_dedup"] = True
        notes.append(replace(note, text=new_text, extras=extras))
    return Corpus(notes=notes, source_tag=corpus.source_tag, config_tag=config)


def percent_decrease(before: float, after: float) -> float:
    if before <= 0:
        raise ValueError("baseline word count must be positive")
    return 100.0 * (before - after) / before


def reduction_report(before, after) -> dict:
    """Word counts and percentage decrease between two corpora.

    Accepts Corpus objects or raw word counts. An empty baseline is an error.
    """
    words_before = before if isinstance(before, (int, float)) else count_words(before)["total_words"]
    words_after = after if isinstance(after, (int, float)) else count_words(after)["total_words"]
    return {
        "words_before": words_before,
        "words_after": words_after,
        "pct_decrease": percent_decrease(words_before, words_after),
    }
