"""Pure-Python shuffle decomposition kernel (reference and fallback).

Events and base words arrive integer-encoded.  A component is either idle
or part-way through one occurrence of a base word, described by the pair
``(word index, offset)``; ``(-1, 0)`` is an unused component.  Failed search
states are memoised up to permutation of components.
"""

from __future__ import annotations

from typing import Sequence


def decompose(word: Sequence[int], words: Sequence[Sequence[int]], m: int, strict: bool) -> list[tuple[int, int]] | None:
    """Colour ``word`` with at most ``m`` components.

    Each component's subsequence must be a concatenation of whole base words;
    with ``strict`` it must be repetitions of one fixed word.  Returns the
    ``(component, word index)`` chosen for every position, or ``None``.
    """
    n = len(word)
    by_first: dict[int, list[int]] = {}
    for idx, w in enumerate(words):
        if w:
            by_first.setdefault(w[0], []).append(idx)
    cw = [-1] * m
    co = [0] * m
    assign: list[tuple[int, int]] = [(0, 0)] * n
    failed: set = set()

    def dfs(i: int) -> bool:
        if i == n:
            return all(x == 0 for x in co)
        key = (i, tuple(sorted(zip(cw, co))))
        if key in failed:
            return False
        e = word[i]
        for j in range(m):
            wj, oj = cw[j], co[j]
            if any(cw[h] == wj and co[h] == oj for h in range(j)):
                continue
            if oj > 0:
                seq = words[wj]
                if seq[oj] != e:
                    continue
                nxt = oj + 1
                if nxt == len(seq):
                    nxt = 0
                    if not strict:
                        cw[j] = -1
                co[j] = nxt
                assign[i] = (j, wj)
                if dfs(i + 1):
                    return True
                cw[j], co[j] = wj, oj
            else:
                if strict and wj >= 0:
                    cands = [wj] if words[wj][0] == e else []
                else:
                    cands = by_first.get(e, [])
                for c in cands:
                    length = len(words[c])
                    if length == 1:
                        cw[j] = c if strict else -1
                        co[j] = 0
                    else:
                        cw[j], co[j] = c, 1
                    assign[i] = (j, c)
                    if dfs(i + 1):
                        return True
                    cw[j], co[j] = wj, oj
        failed.add(key)
        return False

    return list(assign) if dfs(0) else None
