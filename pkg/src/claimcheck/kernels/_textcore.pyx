# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled text kernels; behavioural twin of claimcheck.kernels.pure."""

from libc.stdlib cimport calloc, free


def lcs_length(a, b):
    """Length of the longest common subsequence of two id sequences."""
    cdef unsigned int[::1] av
    cdef unsigned int[::1] bv
    cdef Py_ssize_t la, lb, i, j
    cdef unsigned int x, left, up
    cdef unsigned int *prev
    cdef unsigned int *curr
    cdef unsigned int *tmp
    cdef unsigned int result

    if len(a) < len(b):
        a, b = b, a
    av = a
    bv = b
    la = av.shape[0]
    lb = bv.shape[0]
    if lb == 0:
        return 0

    prev = <unsigned int *> calloc(lb + 1, sizeof(unsigned int))
    curr = <unsigned int *> calloc(lb + 1, sizeof(unsigned int))
    if prev == NULL or curr == NULL:
        free(prev)
        free(curr)
        raise MemoryError()
    try:
        for i in range(la):
            x = av[i]
            for j in range(lb):
                if x == bv[j]:
                    curr[j + 1] = prev[j] + 1
                else:
                    left = curr[j]
                    up = prev[j + 1]
                    curr[j + 1] = left if left >= up else up
            tmp = prev
            prev = curr
            curr = tmp
        result = prev[lb]
    finally:
        free(prev)
        free(curr)
    return result


def char_ngram_counts(text, n):
    """Count overlapping character n-grams of ``text``."""
    cdef Py_ssize_t size = n
    cdef Py_ssize_t length = len(text)
    cdef Py_ssize_t i
    if size < 1:
        raise ValueError(f"n-gram size must be >= 1, got {n}")
    counts = {}
    for i in range(length - size + 1):
        gram = text[i : i + size]
        counts[gram] = counts.get(gram, 0) + 1
    return counts
