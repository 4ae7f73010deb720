"""Pure-Python text kernels.

Reference implementations of the hot loops used by the evaluation metrics.
``claimcheck.kernels`` prefers the compiled Cython twin of this module and
falls back to these functions when the extension is unavailable; both must
stay behaviourally identical (see tests/test_kernels.py).
"""

from __future__ import annotations

from typing import Sequence


def lcs_length(a: Sequence[int], b: Sequence[int]) -> int:
    """Length of the longest common subsequence of two id sequences.

    Classic two-row dynamic programme, O(len(a) * len(b)) time and
    O(min(len(a), len(b))) space.
    """
    if len(a) < len(b):
        a, b = b, a
    lb = len(b)
    if lb == 0:
        return 0
    prev = [0] * (lb + 1)
    curr = [0] * (lb + 1)
    for x in a:
        for j in range(lb):
            if x == b[j]:
                curr[j + 1] = prev[j] + 1
            else:
                left = curr[j]
                up = prev[j + 1]
                curr[j + 1] = left if left >= up else up
        prev, curr = curr, prev
    return prev[lb]


def char_ngram_counts(text: str, n: int) -> dict[str, int]:
    """Count overlapping character n-grams of ``text``.

    Strings shorter than ``n`` produce an empty mapping.
    """
    if n < 1:
        raise ValueError(f"n-gram size must be >= 1, got {n}")
    counts: dict[str, int] = {}
    for i in range(len(text) - n + 1):
        gram = text[i : i + n]
        counts[gram] = counts.get(gram, 0) + 1
    return counts
