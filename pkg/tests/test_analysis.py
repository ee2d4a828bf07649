import random
from collections import Counter

import pytest

from notedup.analysis import (
    DuplicateCluster,
    cluster_duplicates,
    copy_forward_stats,
    corpus_dup_stats,
    find_within_note_duplicates,
    removal_occurrences,
    sentence_cluster_id,
)
from notedup.corpus import Corpus, Note
from notedup.preprocess import SentenceRecord

from conftest import make_corpus


def record(note_id, idx, sentence):
    return SentenceRecord(
        note_id=note_id, index_in_note=idx, char_span=(0, len(sentence)), normalized=sentence
    )


# --- find_within_note_duplicates -------------------------------------------

def test_wn_both_occurrences_reported():
    note = Note("a", "p", "Stable today. Stable today.")
    found = find_within_note_duplicates(note)
    assert [r.normalized for r in found] == ["Stable today.", "Stable today."]
    assert [r.is_first for r in found] == [True, False]
    assert [r.index_in_note for r in found] == [0, 1]


def test_wn_distinct_sentences_empty():
    note = Note("a", "p", "First thing. Second thing. Third thing.")
    assert find_within_note_duplicates(note) == []


def test_wn_short_sentences_filtered():
    note = Note("a", "p", "Ok. Ok. Ok.")
    assert find_within_note_duplicates(note) == []
    assert len(find_within_note_duplicates(note, min_chars=2)) == 3


def test_wn_matches_counting_oracle():
    rng = random.Random(40)
    pool = [f"Sentence number {i} with content." for i in range(12)]
    for _ in range(50):
        sentences = [rng.choice(pool) for _ in range(rng.randint(1, 25))]
        note = Note("a", "p", " ".join(sentences))
        counts = Counter(sentences)
        expected = [s for s in sentences if counts[s] >= 2]
        found = find_within_note_duplicates(note)
        assert [r.normalized for r in found] == expected


# --- cluster_duplicates ------------------------------------------------------

def test_cluster_same_patient_between_notes():
    corpus = make_corpus(["x", "y"], patients=["p1", "p1"])
    s = "Shared sentence content."
    clusters = cluster_duplicates([], [record("n000", 0, s), record("n001", 0, s)], corpus)
    assert len(clusters) == 1
    c = clusters[0]
    assert c.scope == "BN"
    assert c.n_notes == 2 and c.n_patients == 1
    assert c.copy_forward_fraction == 1.0
    assert c.relevance == "UNLABELED"
    assert c.cluster_id == sentence_cluster_id(s)


def test_cluster_within_single_note():
    corpus = make_corpus(["x"])
    s = "Repeated inside one note."
    clusters = cluster_duplicates(
        [record("n000", 0, s), record("n000", 2, s)], [], corpus
    )
    assert len(clusters) == 1
    assert clusters[0].scope == "WN"
    assert clusters[0].n_notes == 1
    assert clusters[0].copy_forward_fraction == 0.0


def test_cluster_both_scope():
    corpus = make_corpus(["x", "y"], patients=["p1", "p2"])
    s = "Seen everywhere sentence."
    clusters = cluster_duplicates(
        [record("n000", 0, s), record("n000", 3, s)],
        [record("n000", 0, s), record("n000", 3, s), record("n001", 1, s)],
        corpus,
    )
    assert len(clusters) == 1
    c = clusters[0]
    assert c.scope == "BOTH"
    # occurrences deduplicated per (note, index)
    assert len(c.occurrences) == 3
    # cross-note pairs: (n000#0,n001#1), (n000#3,n001#1) -> different patients
    assert c.copy_forward_fraction == 0.0


def test_cluster_unknown_note_fatal():
    corpus = make_corpus(["x"])
    with pytest.raises(ValueError):
        cluster_duplicates([record("zzz", 0, "Mystery sentence here.")], [], corpus)


def test_cluster_fields_match_recomputation_oracle():
    rng = random.Random(8)
    corpus = make_corpus(["x"] * 8, patients=[f"p{i % 3}" for i in range(8)])
    ids = [n.note_id for n in corpus.notes]
    patient_of = {n.note_id: n.patient_id for n in corpus.notes}
    pool = [f"Cluster sentence {i} body." for i in range(5)]
    wn, bn = [], []
    for _ in range(60):
        s = rng.choice(pool)
        nid = rng.choice(ids)
        (wn if rng.random() < 0.4 else bn).append(record(nid, rng.randint(0, 9), s))
    clusters = cluster_duplicates(wn, bn, corpus)
    for c in clusters:
        occs = {
            (r.note_id, r.index_in_note)
            for r in wn + bn
            if r.normalized == c.sentence
        }
        assert set((o[0], o[2]) for o in c.occurrences) == occs
        notes = {o for o, _ in occs}
        assert c.n_notes == len(notes)
        assert c.n_patients == len({patient_of[o] for o in notes})
        pairs = [
            (a, b)
            for i, a in enumerate(sorted(occs))
            for b in sorted(occs)[i + 1 :]
            if a[0] != b[0]
        ]
        same = sum(1 for a, b in pairs if patient_of[a[0]] == patient_of[b[0]])
        assert c.copy_forward_fraction == pytest.approx(
            same / len(pairs) if pairs else 0.0
        )
        assert c.n_patients <= c.n_notes <= len(c.occurrences)


def test_singleton_bn_artifacts_dropped():
    corpus = make_corpus(["x", "y"])
    clusters = cluster_duplicates([], [record("n000", 0, "Lonely artifact sentence.")], corpus)
    assert clusters == []


# --- copy_forward_stats ------------------------------------------------------

def _mk_cluster(sentence, occs):
    from notedup.analysis import _cluster_fields

    scope, n_notes, n_patients, frac = _cluster_fields(occs)
    return DuplicateCluster(
        cluster_id=sentence_cluster_id(sentence),
        sentence=sentence,
        occurrences=occs,
        scope=scope,
        n_notes=n_notes,
        n_patients=n_patients,
        copy_forward_fraction=frac,
    )


def test_cf_all_same_patient():
    clusters = [
        _mk_cluster("Sent one.", [("a", "p1", 0), ("b", "p1", 1)]),
        _mk_cluster("Sent two.", [("c", "p2", 0), ("d", "p2", 0)]),
    ]
    rows = copy_forward_stats(clusters, group_by="patient")
    assert rows == [("all", 100.0, 100.0, 100.0)]


def test_cf_all_cross_patient():
    clusters = [_mk_cluster("Sent one.", [("a", "p1", 0), ("b", "p2", 1)])]
    rows = copy_forward_stats(clusters, group_by="patient")
    assert rows == [("all", 0.0, 0.0, 0.0)]


def test_cf_table_construction_6389():
    # Build a note-type group whose per-patient copy-forward percentages are
    # [63.89, 0, 100], reproducing a median (min/max) row of 63.89 (0/100).
    # p1: 23 copy-forward occurrences of 36 total = 63.888...%
    #   10 clusters with two p1 occurrences (2 CF each) + 1 cluster with three
    #   p1 occurrences (3 CF) + 13 clusters pairing one p1 occurrence with a
    #   p2 occurrence (non-CF for both sides).
    clusters = []
    for i in range(10):
        clusters.append(
            _mk_cluster(f"Carried pair {i} text.", [(f"a{i}", "p1", 0), (f"b{i}", "p1", 0)])
        )
    clusters.append(
        _mk_cluster(
            "Carried triple text.", [("t0", "p1", 0), ("t1", "p1", 0), ("t2", "p1", 0)]
        )
    )
    for i in range(13):
        clusters.append(
            _mk_cluster(f"Boiler {i} text.", [(f"c{i}", "p1", 0), (f"x{i}", "p2", 0)])
        )
    # p3: one pure copy-forward pair -> 100%
    clusters.append(_mk_cluster("Full carry text.", [("h0", "p3", 0), ("h1", "p3", 0)]))
    notes = []
    for cluster in clusters:
        for note_id, patient_id, _ in cluster.occurrences:
            notes.append(Note(note_id, patient_id, "x", note_type="general"))
    corpus = Corpus(notes=list({n.note_id: n for n in notes}.values()))
    rows = copy_forward_stats(clusters, group_by="note_type", corpus=corpus)
    assert len(rows) == 1
    group, med, lo, hi = rows[0]
    assert group == "general"
    assert med == pytest.approx(63.89, abs=0.01)
    assert (lo, hi) == (0.0, 100.0)


def test_cf_note_type_grouping():
    notes = [
        Note("a", "p1", "x", note_type="general"),
        Note("b", "p1", "x", note_type="general"),
        Note("c", "p2", "x", note_type="ecg"),
        Note("d", "p3", "x", note_type="ecg"),
    ]
    corpus = Corpus(notes=notes)
    clusters = [
        _mk_cluster("Alpha beta gamma.", [("a", "p1", 0), ("b", "p1", 0)]),
        _mk_cluster("Delta epsilon zeta.", [("c", "p2", 0), ("d", "p3", 0)]),
    ]
    rows = copy_forward_stats(clusters, group_by="note_type", corpus=corpus)
    by_group = dict((g, (m, lo, hi)) for g, m, lo, hi in rows)
    assert by_group["general"] == (100.0, 100.0, 100.0)
    assert by_group["ecg"] == (0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        copy_forward_stats(clusters, group_by="note_type")


# --- corpus_dup_stats --------------------------------------------------------

def test_stats_no_duplicates():
    corpus = make_corpus(["Unique a.", "Unique b."])
    stats = corpus_dup_stats(corpus, [], "WNBN")
    assert stats.pct_notes_with_dup == 0.0
    assert stats.median_dup_sentences_per_note == (0.0, 0.0, 0.0)


def test_stats_every_note_one_duplicate():
    corpus = make_corpus(["x", "y"], patients=["p1", "p1"])
    s = "Shared sentence content."
    clusters = [_mk_cluster(s, [("n000", "p1", 0), ("n001", "p1", 0)])]
    stats = corpus_dup_stats(corpus, clusters, "WNBN")
    assert stats.pct_notes_with_dup == 100.0
    assert stats.median_dup_sentences_per_note == (1.0, 1.0, 1.0)


def test_stats_match_recount_oracle():
    corpus = make_corpus(
        ["One two three. Dup dup sentence.", "Dup dup sentence. Four five.", "Six seven eight."],
        patients=["p1", "p2", "p3"],
    )
    s = "Dup dup sentence."
    clusters = [_mk_cluster(s, [("n000", "p1", 1), ("n001", "p2", 0)])]
    stats = corpus_dup_stats(corpus, clusters, "WNBN")
    assert stats.pct_notes_with_dup == pytest.approx(100.0 * 2 / 3)
    removed = removal_occurrences(clusters, "WNBN")
    assert removed == {("n000", 1), ("n001", 0)}


def test_stats_word_reduction_vs_baseline():
    corpus = make_corpus(["one two three four."])
    stats = corpus_dup_stats(corpus, [], "NONE", baseline_median_words=8.0)
    # median words per note is 4; baseline 8 -> 50% reduction
    assert stats.median_words_per_note[0] == 4.0
    assert stats.word_reduction_pct == pytest.approx(50.0)


def test_stats_permutation_invariant():
    texts = ["Aa bb. Cc dd.", "Cc dd. Ee ff.", "Gg hh."]
    a = make_corpus(texts, patients=["p1", "p2", "p3"])
    s = "Cc dd."
    clusters = [_mk_cluster(s, [("n000", "p1", 1), ("n001", "p2", 0)])]
    s1 = corpus_dup_stats(a, clusters, "WNBN")
    b = Corpus(notes=list(reversed(a.notes)))
    s2 = corpus_dup_stats(b, clusters, "WNBN")
    assert s1 == s2
