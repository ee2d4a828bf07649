import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from notedup.corpus import Corpus, Note


def make_corpus(texts, patients=None, **kwargs) -> Corpus:
    """Corpus from plain strings; note ids n000, n001, ... in input order."""
    notes = []
    for i, text in enumerate(texts):
        pid = patients[i] if patients else f"p{i:03d}"
        notes.append(
            Note(
                note_id=f"n{i:03d}",
                patient_id=pid,
                text=text,
                timestamp=f"2020-01-01T{i % 24:02d}:00:00",
            )
        )
    return Corpus(notes=notes, **kwargs)


def random_note_text(rng: random.Random, max_chars: int, alphabet: str) -> str:
    return "".join(rng.choice(alphabet) for _ in range(rng.randint(0, max_chars)))


def random_corpus_texts(rng: random.Random, max_notes=12, max_chars=300) -> list[str]:
    """Random texts with planted shared substrings so duplicates actually occur."""
    alphabet = rng.choice(["ab", "abc ", "abcd. ", "xy z."])
    shared = [
        random_note_text(rng, rng.randint(10, 80), alphabet)
        for _ in range(rng.randint(1, 4))
    ]
    texts = []
    for _ in range(rng.randint(2, max_notes)):
        parts = [random_note_text(rng, max_chars // 3, alphabet)]
        for block in shared:
            if rng.random() < 0.5:
                parts.append(block)
                parts.append(random_note_text(rng, max_chars // 4, alphabet))
        texts.append("".join(parts)[:max_chars])
    return texts


@pytest.fixture(scope="session", autouse=True)
def warm_numba():
    # compile (or load from cache) the suffix-array kernels once per session
    from notedup.exact_match import build_index, find_duplicate_substrings

    corpus = make_corpus(["warm up text one.", "warm up text two."])
    find_duplicate_substrings(build_index(corpus), 5)
