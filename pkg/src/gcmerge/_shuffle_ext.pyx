# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled shuffle decomposition kernel.

Same search as ``_shuffle_py.decompose``; state lives in C arrays and the
memo key is packed into a 64-bit integer.  Callers must check ``fits`` first.
"""

from libc.stdlib cimport malloc, free


cdef struct Ctx:
    int n
    int m
    int strict
    long long base
    long long stride
    int nevents
    int *word
    int *flat
    int *wstart
    int *wlen
    int *cand_start
    int *cand_list
    int *cw
    int *co
    int *acomp
    int *aword
    long long *scratch


def fits(int n, int m, int nwords, int maxlen):
    """Whether the packed memo key fits in a signed 64-bit integer."""
    cdef double base = (nwords + 1.0) * (maxlen + 1.0)
    return (n + 1.0) * (base ** m) < 9.0e18


cdef long long _pack(Ctx *c, int i):
    # component codes sorted ascending, so permuted states share a key
    cdef long long *tmp = c.scratch
    cdef int j, h
    cdef long long v, key
    for j in range(c.m):
        v = (c.cw[j] + 1) * c.stride + c.co[j]
        h = j
        while h > 0 and tmp[h - 1] > v:
            tmp[h] = tmp[h - 1]
            h -= 1
        tmp[h] = v
    key = i
    for j in range(c.m):
        key = key * c.base + tmp[j]
    return key


cdef int _dfs(Ctx *c, int i, set failed) except -1:
    cdef int j, h, wj, oj, e, nxt, k, kend, cand, skip
    cdef long long key
    if i == c.n:
        for j in range(c.m):
            if c.co[j] != 0:
                return 0
        return 1
    key = _pack(c, i)
    if key in failed:
        return 0
    e = c.word[i]
    for j in range(c.m):
        wj = c.cw[j]
        oj = c.co[j]
        skip = 0
        for h in range(j):
            if c.cw[h] == wj and c.co[h] == oj:
                skip = 1
                break
        if skip:
            continue
        if oj > 0:
            if c.flat[c.wstart[wj] + oj] != e:
                continue
            nxt = oj + 1
            if nxt == c.wlen[wj]:
                nxt = 0
                if not c.strict:
                    c.cw[j] = -1
            c.co[j] = nxt
            c.acomp[i] = j
            c.aword[i] = wj
            if _dfs(c, i + 1, failed):
                return 1
            c.cw[j] = wj
            c.co[j] = oj
            continue
        if e < 0 or e >= c.nevents:
            continue
        if c.strict and wj >= 0:
            if c.flat[c.wstart[wj]] != e:
                continue
            k = -1
            kend = 0
        else:
            k = c.cand_start[e]
            kend = c.cand_start[e + 1]
        while k == -1 or k < kend:
            cand = wj if k == -1 else c.cand_list[k]
            if c.wlen[cand] == 1:
                c.cw[j] = cand if c.strict else -1
                c.co[j] = 0
            else:
                c.cw[j] = cand
                c.co[j] = 1
            c.acomp[i] = j
            c.aword[i] = cand
            if _dfs(c, i + 1, failed):
                return 1
            c.cw[j] = wj
            c.co[j] = oj
            if k == -1:
                break
            k += 1
    failed.add(key)
    return 0


def decompose(word, words, int m, bint strict):
    """See ``gcmerge._shuffle_py.decompose``."""
    cdef Ctx c
    cdef int n = len(word)
    cdef int nwords = len(words)
    cdef int total = 0, maxlen = 1, nevents = 0, i, j, e, pos
    for w in words:
        total += len(w)
        if len(w) > maxlen:
            maxlen = len(w)
        for e in w:
            if e + 1 > nevents:
                nevents = e + 1
    c.n = n
    c.m = m
    c.strict = strict
    c.stride = maxlen + 1
    c.base = (nwords + 1) * c.stride
    c.nevents = nevents
    c.word = <int *> malloc(max(n, 1) * sizeof(int))
    c.flat = <int *> malloc(max(total, 1) * sizeof(int))
    c.wstart = <int *> malloc(max(nwords, 1) * sizeof(int))
    c.wlen = <int *> malloc(max(nwords, 1) * sizeof(int))
    c.cand_start = <int *> malloc((nevents + 1) * sizeof(int))
    c.cand_list = <int *> malloc(max(nwords, 1) * sizeof(int))
    c.cw = <int *> malloc(max(m, 1) * sizeof(int))
    c.co = <int *> malloc(max(m, 1) * sizeof(int))
    c.acomp = <int *> malloc(max(n, 1) * sizeof(int))
    c.aword = <int *> malloc(max(n, 1) * sizeof(int))
    c.scratch = <long long *> malloc(max(m, 1) * sizeof(long long))
    try:
        for i in range(n):
            c.word[i] = word[i]
        pos = 0
        for i in range(nwords):
            c.wstart[i] = pos
            c.wlen[i] = len(words[i])
            for e in words[i]:
                c.flat[pos] = e
                pos += 1
        # bucket word indices by first event, keeping input order
        for e in range(nevents + 1):
            c.cand_start[e] = 0
        for i in range(nwords):
            if c.wlen[i] > 0:
                c.cand_start[c.flat[c.wstart[i]] + 1] += 1
        for e in range(nevents):
            c.cand_start[e + 1] += c.cand_start[e]
        fill = [c.cand_start[e] for e in range(nevents + 1)]
        for i in range(nwords):
            if c.wlen[i] > 0:
                e = c.flat[c.wstart[i]]
                c.cand_list[fill[e]] = i
                fill[e] += 1
        for j in range(m):
            c.cw[j] = -1
            c.co[j] = 0
        if _dfs(&c, 0, set()):
            return [(c.acomp[i], c.aword[i]) for i in range(n)]
        return None
    finally:
        free(c.word)
        free(c.flat)
        free(c.wstart)
        free(c.wlen)
        free(c.cand_start)
        free(c.cand_list)
        free(c.cw)
        free(c.co)
        free(c.acomp)
        free(c.aword)
        free(c.scratch)
