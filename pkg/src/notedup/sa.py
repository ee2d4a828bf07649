"""Suffix array construction by induced sorting (SA-IS).

Linear-time construction over arbitrary Unicode text. The O(n) passes are
numba-compiled; the recursion on the reduced problem stays in Python (depth
is logarithmic, each level halves the problem, and all heavy work happens
inside the kernels).

`suffix_array(text)` returns the permutation of [0, len(text)) ordering all
suffixes lexicographically by code point, as an int32 numpy array.
"""

from __future__ import annotations

import numpy as np
from numba import njit

I32 = np.int32


@njit(cache=True)
def _classify(s):
    # is_s[i] == 1 iff suffix i is S-type (smaller than its successor).
    n = s.shape[0]
    is_s = np.zeros(n, dtype=np.uint8)
    is_s[n - 1] = 1
    for i in range(n - 2, -1, -1):
        if s[i] < s[i + 1]:
            is_s[i] = 1
        elif s[i] == s[i + 1] and is_s[i + 1] == 1:
            is_s[i] = 1
    return is_s


@njit(cache=True)
def _bucket_counts(s, k):
    counts = np.zeros(k, dtype=np.int64)
    for i in range(s.shape[0]):
        counts[s[i]] += 1
    return counts


@njit(cache=True)
def _place_lms(s, sa, is_s, counts):
    n = s.shape[0]
    tails = np.cumsum(counts)
    sa[:] = -1
    for i in range(n - 1, 0, -1):
        if is_s[i] == 1 and is_s[i - 1] == 0:
            c = s[i]
            tails[c] -= 1
            sa[tails[c]] = i


@njit(cache=True)
def _induce(s, sa, is_s, counts):
    n = s.shape[0]
    heads = np.empty_like(counts)
    heads[0] = 0
    for c in range(1, counts.shape[0]):
        heads[c] = heads[c - 1] + counts[c - 1]
    for i in range(n):
        j = sa[i] - 1
        if sa[i] > 0 and is_s[j] == 0:
            c = s[j]
            sa[heads[c]] = j
            heads[c] += 1
    tails = np.cumsum(counts)
    for i in range(n - 1, -1, -1):
        j = sa[i] - 1
        if sa[i] > 0 and is_s[j] == 1:
            c = s[j]
            tails[c] -= 1
            sa[tails[c]] = j


@njit(cache=True)
def _name_lms(s, sa, is_s):
    """Assign names to LMS substrings in their sorted order.

    Returns (names_by_position, number_of_distinct_names); equal LMS
    substrings receive equal names, so the reduced string preserves order.
    """
    n = s.shape[0]
    names = np.full(n, -1, dtype=I32)
    cur = -1
    prev = -1
    for i in range(n):
        p = sa[i]
        if p == 0 or not (is_s[p] == 1 and is_s[p - 1] == 0):
            continue
        if prev == -1:
            cur += 1
        else:
            a, b = prev, p
            same = True
            first = True
            while True:
                a_lms = a > 0 and is_s[a] == 1 and is_s[a - 1] == 0
                b_lms = b > 0 and is_s[b] == 1 and is_s[b - 1] == 0
                if not first and a_lms and b_lms:
                    break
                if a_lms != b_lms or s[a] != s[b] or is_s[a] != is_s[b]:
                    same = False
                    break
                if a == n - 1 or b == n - 1:
                    same = a == b
                    break
                a += 1
                b += 1
                first = False
            if not same:
                cur += 1
        names[p] = cur
        prev = p
    return names, cur + 1


@njit(cache=True)
def _place_sorted_lms(s, sa, counts, lms_order):
    n = s.shape[0]
    tails = np.cumsum(counts)
    sa[:] = -1
    for i in range(lms_order.shape[0] - 1, -1, -1):
        p = lms_order[i]
        c = s[p]
        tails[c] -= 1
        sa[tails[c]] = p


def _sais(s: np.ndarray, k: int) -> np.ndarray:
    """SA of an int32 array whose last element is the unique minimum 0."""
    n = s.shape[0]
    if n == 1:
        return np.zeros(1, dtype=I32)
    is_s = _classify(s)
    counts = _bucket_counts(s, k)
    sa = np.empty(n, dtype=I32)
    _place_lms(s, sa, is_s, counts)
    _induce(s, sa, is_s, counts)
    names, n_names = _name_lms(s, sa, is_s)
    lms_pos = np.flatnonzero(names >= 0).astype(I32)
    summary = names[lms_pos]
    if n_names < summary.shape[0]:
        sub_sa = _sais(summary, n_names)
        lms_order = lms_pos[sub_sa]
    else:
        lms_order = np.empty_like(lms_pos)
        lms_order[summary] = lms_pos
    _place_sorted_lms(s, sa, counts, lms_order)
    _induce(s, sa, is_s, counts)
    return sa


def code_points(text: str) -> np.ndarray:
    """Text as an int32 array of Unicode code points."""
    return np.frombuffer(text.encode("utf-32-le"), dtype=np.uint32).astype(I32)


def suffix_array(text: str) -> np.ndarray:
    """Lexicographic suffix order of `text`, by code point."""
    if not text:
        return np.empty(0, dtype=I32)
    cp = code_points(text)
    s = np.empty(cp.shape[0] + 1, dtype=I32)
    s[:-1] = cp + 1  # shift so the appended sentinel 0 is strictly minimal
    s[-1] = 0
    sa = _sais(s, int(s.max()) + 1)
    return sa[1:]  # drop the sentinel suffix


@njit(cache=True)
def lcp_array(cp, sa):
    """Kasai LCP: lcp[i] = longest common prefix of suffixes sa[i-1], sa[i]."""
    n = cp.shape[0]
    rank = np.empty(n, dtype=I32)
    for i in range(n):
        rank[sa[i]] = i
    lcp = np.zeros(n, dtype=I32)
    h = 0
    for p in range(n):
        r = rank[p]
        if r > 0:
            q = sa[r - 1]
            while p + h < n and q + h < n and cp[p + h] == cp[q + h]:
                h += 1
            lcp[r] = h
            if h > 0:
                h -= 1
        else:
            h = 0
    return lcp
