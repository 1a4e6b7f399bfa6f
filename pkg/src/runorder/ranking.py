"""Prefix-doubling ranking of strings that share tails.

Every node ``i`` spells the string ``codes[i], codes[nxt[i]], codes[nxt[nxt[i]]], ...``
which stops when the pointer becomes ``-1``.  Plain suffix sorting is the
special case ``nxt[i] = i + 1``; the CAO block builder and the Wheeler
ordering use other pointer structures (per-string suffixes, parent links).
"""

from __future__ import annotations

import numpy as np


def _dense(first: np.ndarray, second: np.ndarray | None = None) -> np.ndarray:
    if second is None:
        order = np.argsort(first, kind="stable")
        keys = first[order]
        step = np.empty(len(order), dtype=np.int64)
        step[0] = 0
        step[1:] = keys[1:] != keys[:-1]
    else:
        order = np.lexsort((second, first))
        a, b = first[order], second[order]
        step = np.empty(len(order), dtype=np.int64)
        step[0] = 0
        step[1:] = (a[1:] != a[:-1]) | (b[1:] != b[:-1])
    rank = np.empty(len(order), dtype=np.int64)
    rank[order] = np.cumsum(step)
    return rank


def rank_paths(codes, nxt) -> np.ndarray:
    """Dense ranks of the pointer-chained strings, shorter prefix first.

    Equal strings receive equal ranks.  Runs in O(n log n log h) for chains
    of height h (numpy sorts per doubling round).
    """
    codes = np.asarray(codes, dtype=np.int64)
    n = len(codes)
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    jump = np.asarray(nxt, dtype=np.int64).copy()
    rank = _dense(codes)
    while True:
        alive = jump >= 0
        if not alive.any() or rank.max() == n - 1:
            return rank
        safe = np.where(alive, jump, 0)
        second = np.where(alive, rank[safe], -1)
        rank = _dense(rank, second)
        jump = np.where(alive, jump[safe], -1)


def suffix_array(codes) -> np.ndarray:
    """Suffix array of ``codes`` (proper prefixes sort first)."""
    n = len(codes)
    nxt = np.arange(1, n + 1, dtype=np.int64)
    if n:
        nxt[-1] = -1
    rank = rank_paths(codes, nxt)
    return np.argsort(rank, kind="stable")
