import random

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from notedup.sa import code_points, lcp_array, suffix_array

from oracles import brute_suffix_array


def test_empty_text():
    assert suffix_array("").tolist() == []


def test_two_chars():
    assert suffix_array("ab").tolist() == [0, 1]


def test_banana():
    assert suffix_array("banana").tolist() == [5, 3, 1, 0, 4, 2]


def test_repetitive_structures():
    for text in ["aaaaaaaa", "abababab", "abcabcabc", "mississippi", "aabaabaab" * 4]:
        assert suffix_array(text).tolist() == brute_suffix_array(text)


def test_fibonacci_word():
    a, b = "a", "ab"
    for _ in range(10):
        a, b = b, b + a
    assert suffix_array(b).tolist() == brute_suffix_array(b)


def test_unicode():
    text = "héllo wörld héllo é́ mix"
    assert suffix_array(text).tolist() == brute_suffix_array(text)


def test_random_strings_match_brute_force():
    rng = random.Random(1234)
    for _ in range(300):
        alphabet = rng.choice(["a", "ab", "abc", "abcdefgh", "ab \n."])
        n = rng.randint(0, 250)
        text = "".join(rng.choice(alphabet) for _ in range(n))
        assert suffix_array(text).tolist() == brute_suffix_array(text), repr(text)


@settings(max_examples=150, deadline=None)
@given(st.text(min_size=0, max_size=120))
def test_suffix_array_property(text):
    assert suffix_array(text).tolist() == brute_suffix_array(text)


@settings(max_examples=100, deadline=None)
@given(st.text(alphabet="ab", min_size=0, max_size=200))
def test_low_alphabet_property(text):
    assert suffix_array(text).tolist() == brute_suffix_array(text)


def test_sa_is_permutation():
    text = "the quick brown fox jumps over the lazy dog" * 5
    sa = suffix_array(text)
    assert sorted(sa.tolist()) == list(range(len(text)))


def _brute_lcp(a: str, b: str) -> int:
    n = 0
    for x, y in zip(a, b):
        if x != y:
            break
        n += 1
    return n


def test_lcp_array_matches_brute_force():
    rng = random.Random(99)
    for _ in range(50):
        text = "".join(rng.choice("abc") for _ in range(rng.randint(1, 150)))
        sa = suffix_array(text)
        lcp = lcp_array(code_points(text), sa)
        assert lcp[0] == 0
        for i in range(1, len(text)):
            expected = _brute_lcp(text[sa[i - 1] :], text[sa[i] :])
            assert lcp[i] == expected


def test_code_points_roundtrip():
    text = "abcé世"
    cp = code_points(text)
    assert cp.dtype == np.int32
    assert [chr(c) for c in cp] == list(text)
