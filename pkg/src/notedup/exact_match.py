"""Between-note exact-substring detection over a suffix-array index.

The index concatenates the normalized texts of all notes with a separator
byte that normalization guarantees absent from note text. Duplicate regions
are every position covered by a substring of length >= k that occurs
verbatim in at least two distinct notes; overlapping regions within a note
are merged. Matches are then reduced to the sentences that lie entirely
inside a duplicate region.
"""

from __future__ import annotations

import hashlib
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np
from numba import njit

from .corpus import Corpus
from .preprocess import SentenceRecord, normalize_text, split_sentences
from .sa import I32, code_points, lcp_array, suffix_array

SEPARATOR = "\x00"

_INF = np.int64(1) << 60


@dataclass
class SuffixIndex:
    """Concatenated normalized corpus plus its suffix array.

    boundaries[i] = (start offset of note i in concat, note_id); notes appear
    in canonical corpus order, separated by a single SEPARATOR character.
    """

    concat: str
    boundaries: list[tuple[int, str]]
    sa: np.ndarray

    def note_text(self, i: int) -> str:
        start = self.boundaries[i][0]
        end = (
            self.boundaries[i + 1][0] - 1
            if i + 1 < len(self.boundaries)
            else len(self.concat)
        )
        return self.concat[start:end]


@dataclass(frozen=True)
class MatchSpan:
    """A maximal duplicated region inside one note's normalized text."""

    note_id: str
    char_span: tuple[int, int]
    cluster_key: str


def build_index(corpus: Corpus) -> SuffixIndex:
    """Normalize every note and build the suffix array over the concatenation."""
    if not corpus.notes:
        raise ValueError("cannot index an empty corpus")
    texts = []
    boundaries = []
    offset = 0
    for note in corpus.notes:
        text = normalize_text(note.text)
        if SEPARATOR in text:
            raise ValueError(f"note {note.note_id} contains the separator byte")
        boundaries.append((offset, note.note_id))
        texts.append(text)
        offset += len(text) + 1
    concat = SEPARATOR.join(texts)
    return SuffixIndex(concat=concat, boundaries=boundaries, sa=suffix_array(concat))


@njit(cache=True)
def _cross_doc_lcp(sa, lcp, doc_of):
    """For each text position p: the longest prefix of suffix p shared with
    any suffix that starts in a different document.

    Two sweeps over suffix-array order. Tracking the two most recent distinct
    documents (with running minima of LCP since each) is enough, because the
    nearest suffix from a different document is either the previous suffix or
    the most recent one whose document differs from it.
    """
    n = sa.shape[0]
    out = np.zeros(n, dtype=I32)
    for direction in range(2):
        last1_doc = -1
        last2_doc = -1
        m1 = _INF
        m2 = _INF
        for step in range(n):
            i = step if direction == 0 else n - 1 - step
            if direction == 0:
                link = np.int64(lcp[i])  # lcp[i] = LCP(sa[i-1], sa[i]); unused at i=0
                have_link = i > 0
            else:
                have_link = i < n - 1
                link = np.int64(lcp[i + 1]) if have_link else np.int64(0)
            if have_link:
                if m1 > link:
                    m1 = link
                if m2 > link:
                    m2 = link
            d = doc_of[sa[i]]
            best = np.int64(0)
            if last1_doc != -1 and last1_doc != d:
                best = m1
            elif last2_doc != -1:
                best = m2
            p = sa[i]
            if best > out[p]:
                out[p] = I32(best)
            if d == last1_doc:
                m1 = _INF
            else:
                last2_doc = last1_doc
                m2 = m1
                last1_doc = d
                m1 = _INF
    return out


@njit(cache=True)
def _merged_intervals(cross, doc_end, k):
    """Union of [p, p + min(cross[p], doc_end[p]-p)) over positions where the
    capped length reaches k; contiguous/overlapping pieces merged per doc."""
    n = cross.shape[0]
    starts = []
    ends = []
    cur_s = np.int64(-1)
    cur_e = np.int64(-1)
    for p in range(n):
        length = np.int64(cross[p])
        cap = np.int64(doc_end[p]) - p
        if length > cap:
            length = cap
        if length < k:
            continue
        if cur_s >= 0 and p <= cur_e and doc_end[p] == doc_end[cur_s]:
            q = p + length
            if q > cur_e:
                cur_e = q
        else:
            if cur_s >= 0:
                starts.append(cur_s)
                ends.append(cur_e)
            cur_s = np.int64(p)
            cur_e = p + length
    if cur_s >= 0:
        starts.append(cur_s)
        ends.append(cur_e)
    out = np.empty((len(starts), 2), dtype=np.int64)
    for i in range(len(starts)):
        out[i, 0] = starts[i]
        out[i, 1] = ends[i]
    return out


def _span_key(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def find_duplicate_substrings(index: SuffixIndex, k: int) -> list[MatchSpan]:
    """All maximal regions of length >= k whose text occurs in >= 2 notes.

    Every occurrence in every note is reported; overlapping regions within a
    note are merged. No reported span crosses a note boundary.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    n = len(index.concat)
    if n == 0:
        return []
    cp = code_points(index.concat)
    lcp = lcp_array(cp, index.sa)
    n_docs = len(index.boundaries)
    starts = np.array([b[0] for b in index.boundaries], dtype=np.int64)
    lens = np.empty(n_docs, dtype=np.int64)
    lens[:-1] = starts[1:] - starts[:-1] - 1
    lens[-1] = n - starts[-1]
    doc_of = np.repeat(np.arange(n_docs, dtype=I32), lens + 1)[:n]
    doc_end = (starts + lens)[doc_of]
    cross = _cross_doc_lcp(index.sa, lcp, doc_of)
    intervals = _merged_intervals(cross, doc_end, k)
    spans = []
    for a, b in intervals:
        d = int(doc_of[a])
        local = (int(a - starts[d]), int(b - starts[d]))
        spans.append(
            MatchSpan(
                note_id=index.boundaries[d][1],
                char_span=local,
                cluster_key=_span_key(index.concat[a:b]),
            )
        )
    return spans


def split_matches_to_sentences(
    corpus: Corpus,
    matches: list[MatchSpan],
    min_sentence_chars: int = 5,
) -> list[SentenceRecord]:
    """Sentences lying entirely inside a duplicate region.

    A sentence is emitted iff its span is contained in a match span of its
    note and its normalized text is longer than `min_sentence_chars`.
    Output is deduplicated per (note_id, sentence index) and ordered by
    canonical note order then sentence index.
    """
    by_note: dict[str, list[tuple[int, int]]] = {}
    for m in matches:
        by_note.setdefault(m.note_id, []).append(m.char_span)
    out: list[SentenceRecord] = []
    seen: set[tuple[str, int]] = set()
    for note in corpus.notes:
        regions = sorted(by_note.get(note.note_id, ()))
        if not regions:
            continue
        region_starts = [r[0] for r in regions]
        text = normalize_text(note.text)
        for record in split_sentences(text, note_id=note.note_id):
            if len(record.normalized) <= min_sentence_chars:
                continue
            s, e = record.char_span
            idx = bisect_right(region_starts, s) - 1
            if idx < 0 or regions[idx][1] < e:
                continue
            key = (note.note_id, record.index_in_note)
            if key not in seen:
                seen.add(key)
                out.append(record)
    return out
