import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from notedup.corpus import Corpus
from notedup.ngram import (
    NgramModel,
    information_content,
    load_model,
    perplexity,
    perplexity_from_scores,
    relative_ppl,
    save_model,
    train_ngram,
)
from conftest import make_corpus
from oracles import direct_ppl


# --- train_ngram ---------------------------------------------------------------

def test_unigram_closed_form():
    k = 0.1
    model = train_ngram(make_corpus(["a a a"]), order=1, k_smooth=k)
    assert model.vocab == {"a"}
    v = len(model.vocab) + 1
    assert model.prob((), "a") == pytest.approx((3 + k) / (3 + k * v))
    assert model.prob((), "zz") == pytest.approx(k / (3 + k * v))


def test_bigram_closed_form():
    k = 0.5
    model = train_ngram(make_corpus(["a b a b"]), order=2, k_smooth=k)
    v = len(model.vocab) + 1  # {a, b} + UNK
    assert v == 3
    assert model.prob(("a",), "b") == pytest.approx((2 + k) / (2 + k * v))


def test_probabilities_sum_to_one():
    model = train_ngram(
        make_corpus(["alpha beta gamma delta.", "beta gamma alpha."]), order=3, k_smooth=0.1
    )
    for level in range(model.order):
        for ctx in list(model.counts[level])[:20]:
            total = sum(model.prob(ctx, w) for w in model.vocab)
            total += model.prob(ctx, "<unk-token-never-seen>")
            assert total == pytest.approx(1.0, abs=1e-9)


def test_counts_match_recount_script():
    rng = random.Random(4)
    vocab = ["wa", "wb", "wc", "wd"]
    texts = [
        " ".join(rng.choice(vocab) for _ in range(rng.randint(1, 12))) + "."
        for _ in range(10)
    ]
    order = 2
    model = train_ngram(make_corpus(texts), order=order, k_smooth=1.0)
    # independent recount over the same padded sentence streams
    from notedup.preprocess import normalize_text, split_sentences, tokenize

    expected: dict[tuple, dict[str, int]] = {}
    for text in texts:
        for record in split_sentences(normalize_text(text)):
            tokens = [t.text for t in tokenize(record.normalized)]
            padded = ["<s>"] * (order - 1) + tokens
            for i in range(order - 1, len(padded)):
                ctx = tuple(padded[i - (order - 1) : i])
                expected.setdefault(ctx, {}).setdefault(padded[i], 0)
                expected[ctx][padded[i]] += 1
    level = model.counts[order - 1]
    assert {c: dict(v) for c, v in level.items()} == expected


def test_empty_corpus_rejected():
    with pytest.raises(ValueError):
        train_ngram(make_corpus([]), order=2, k_smooth=0.1)


# --- perplexity ------------------------------------------------------------------

def test_uniform_model_ppl_equals_vocab_size():
    vocab = {f"w{i}" for i in range(49)}  # |vocab ∪ UNK| = 50
    model = NgramModel.uniform(vocab, order=3, k_smooth=0.7)
    eval_corpus = make_corpus(["w1 w2 w3 w4 w5.", "w6 w7 w8."])
    for mode in ("last_token", "full_sequence"):
        result = perplexity(model, eval_corpus, mode=mode)
        assert result.ppl == pytest.approx(50.0, abs=1e-9)
        assert result.mode == mode


def test_memorization_limit():
    sentence = "alpha bravo charlie delta echo foxtrot"
    corpus = make_corpus([sentence])
    model = train_ngram(corpus, order=3, k_smooth=1e-6)
    result = perplexity(model, corpus, mode="last_token")
    assert result.ppl == pytest.approx(1.0, abs=1e-3)


def test_matches_direct_formula_oracle():
    rng = random.Random(12)
    vocab = [f"tok{i}" for i in range(15)]
    texts = [
        " ".join(rng.choice(vocab) for _ in range(rng.randint(3, 15))) + "."
        for _ in range(20)
    ]
    train = make_corpus(texts[:10])
    eval_corpus = make_corpus(texts[10:])
    model = train_ngram(train, order=3, k_smooth=0.1)
    from notedup.ngram import _instances

    for mode in ("last_token", "full_sequence"):
        got = perplexity(model, eval_corpus, mode=mode, max_len=8)
        want = direct_ppl(model, _instances(eval_corpus, 8), mode)
        assert got.ppl == pytest.approx(want, rel=1e-9)


def test_ppl_instance_permutation_invariant():
    rng = random.Random(13)
    texts = [
        " ".join(rng.choice(["aa", "bb", "cc"]) for _ in range(rng.randint(2, 9))) + "."
        for _ in range(12)
    ]
    model = train_ngram(make_corpus(texts), order=2, k_smooth=0.2)
    a = perplexity(model, make_corpus(texts), mode="last_token")
    b = perplexity(model, make_corpus(list(reversed(texts))), mode="last_token")
    assert a.ppl == b.ppl  # exact: fsum and identical instance multiset


def test_window_splitting_and_counts():
    text = " ".join(["wz"] * 300) + "."
    model = train_ngram(make_corpus([text]), order=2, k_smooth=0.1)
    result = perplexity(model, make_corpus([text]), mode="last_token", max_len=128)
    # 301 tokens -> windows of 128, 128, 45
    assert result.n_instances == 3


def test_short_window_backoff():
    model = train_ngram(make_corpus(["aa bb cc dd ee"]), order=5, k_smooth=0.1)
    result = perplexity(model, make_corpus(["aa"]), mode="last_token")
    assert result.ppl > 0  # single-token instance scored with empty context


def test_empty_eval_rejected():
    model = train_ngram(make_corpus(["aa bb"]), order=2, k_smooth=0.1)
    with pytest.raises(ValueError):
        perplexity(model, make_corpus([]))


# --- relative_ppl / information_content -----------------------------------------

def test_relative_ppl_identity():
    assert relative_ppl(35.30, 35.30) == 0.0


def test_relative_ppl_paper_values():
    assert relative_ppl(29.51, 28.16) == pytest.approx(0.0479, abs=5e-4)


@settings(max_examples=100, deadline=None)
@given(
    st.floats(min_value=0.1, max_value=1000, allow_nan=False),
    st.floats(min_value=0.1, max_value=1000, allow_nan=False),
)
def test_relative_ppl_symmetry(a, b):
    assert relative_ppl(a, b) == pytest.approx(-relative_ppl(2 * b - a, b), abs=1e-9)


def test_relative_ppl_rejects_nonpositive_baseline():
    with pytest.raises(ValueError):
        relative_ppl(10.0, 0.0)


def test_information_content_paper_values():
    assert information_content(35.30) == pytest.approx(5.14, abs=0.01)
    assert information_content(29.51) == pytest.approx(4.88, abs=0.01)
    assert information_content(1.0) == 0.0


def test_information_content_monotone():
    values = [1.0, 1.5, 2.0, 10.0, 29.51, 35.30, 100.0]
    mapped = [information_content(v) for v in values]
    assert mapped == sorted(mapped)


def test_information_content_rejects_below_one():
    with pytest.raises(ValueError):
        information_content(0.99)


# --- persistence and external scores ---------------------------------------------

def test_model_save_load_round_trip(tmp_path):
    model = train_ngram(make_corpus(["aa bb cc.", "bb cc dd."]), order=3, k_smooth=0.3)
    path = tmp_path / "model.json"
    save_model(model, path)
    loaded = load_model(path)
    corpus = make_corpus(["aa bb cc dd."])
    assert perplexity(loaded, corpus).ppl == perplexity(model, corpus).ppl


def test_external_scores(tmp_path):
    path = tmp_path / "scores.jsonl"
    lines = [
        '{"instance_id": "w1", "log_prob": -1.0}',
        '{"instance_id": "w2", "log_prob": -3.0}',
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    result = perplexity_from_scores(path)
    assert result.ppl == pytest.approx(math.exp(2.0))
    assert result.n_instances == 2
    assert result.mode == "external"


# --- redundancy direction ---------------------------------------------------------

def build_redundancy_pair(seed: int):
    """(duplicated corpus, deduplicated corpus) with matched shapes."""
    rng = random.Random(seed)
    vocab = [f"w{i:03d}" for i in range(150)]

    def sentence():
        return " ".join(rng.choice(vocab) for _ in range(rng.randint(6, 10))) + "."

    distinct = [sentence() for _ in range(8)]
    dup_notes = []
    dedup_notes = []
    for i in range(16):
        dup_notes.append(" ".join(rng.choice(distinct) for _ in range(12)))
        dedup_notes.append(" ".join(sentence() for _ in range(12)))
    return (
        make_corpus(dup_notes, source_tag="dup"),
        make_corpus(dedup_notes, source_tag="dedup"),
    )


def redundancy_direction(seed: int) -> bool:
    dup, dedup = build_redundancy_pair(seed)
    half = len(dup.notes) // 2

    def split(corpus):
        return (
            Corpus(notes=corpus.notes[:half], source_tag=corpus.source_tag),
            Corpus(notes=corpus.notes[half:], source_tag=corpus.source_tag),
        )

    dup_train, dup_eval = split(dup)
    dedup_train, dedup_eval = split(dedup)
    m_dup = train_ngram(dup_train, order=3, k_smooth=0.1)
    m_dedup = train_ngram(dedup_train, order=3, k_smooth=0.1)
    ppl_dup = perplexity(m_dup, dup_eval, mode="last_token").ppl
    ppl_dedup = perplexity(m_dedup, dedup_eval, mode="last_token").ppl
    return ppl_dup < ppl_dedup and information_content(ppl_dedup) > information_content(ppl_dup)


def test_redundancy_direction_single_seed():
    assert redundancy_direction(0)
