"""Pure-Python kernels. ``_kernels.pyx`` mirrors these signatures exactly."""
from __future__ import annotations


def greedy_segment(token, id_of, max_len, escape_base):
    """Greedy longest-match ids for ``token``.

    Characters with no matching entry are emitted as one escape id per
    UTF-8 byte (``escape_base + byte``); lone surrogates pass through.
    """
    ids = []
    i = 0
    n = len(token)
    while i < n:
        j = min(n, i + max_len)
        while j > i:
            sid = id_of.get(token[i:j])
            if sid is not None:
                ids.append(sid)
                i = j
                break
            j -= 1
        else:
            for b in token[i].encode("utf-8", "surrogatepass"):
                ids.append(escape_base + b)
            i += 1
    return ids


def count_substrings(token_counts, known, max_len):
    """Count every substring starting at a current segment boundary.

    ``token_counts`` is a sequence of ``(token, count)``; ``known`` is the
    current subword set used to segment each token greedily.
    """
    counts = {}
    for token, count in token_counts:
        n = len(token)
        start = 0
        while start < n:
            for end in range(start + 1, n + 1):
                sub = token[start:end]
                counts[sub] = counts.get(sub, 0) + count
            j = min(n, start + max_len)
            while j > start + 1 and token[start:j] not in known:
                j -= 1
            start = j
    return counts


def overlap(ids, cnts, a0, a1, b0, b1):
    """Set and multiset overlap of two sorted key slices.

    Returns ``(intersection, union, sum_min, sum_max)``.
    """
    i, j = a0, b0
    inter = union = smin = smax = 0
    while i < a1 and j < b1:
        x, y = ids[i], ids[j]
        if x == y:
            ca, cb = cnts[i], cnts[j]
            inter += 1
            union += 1
            if ca < cb:
                smin += ca
                smax += cb
            else:
                smin += cb
                smax += ca
            i += 1
            j += 1
        elif x < y:
            union += 1
            smax += cnts[i]
            i += 1
        else:
            union += 1
            smax += cnts[j]
            j += 1
    while i < a1:
        union += 1
        smax += cnts[i]
        i += 1
    while j < b1:
        union += 1
        smax += cnts[j]
        j += 1
    return inter, union, smin, smax


def similar_among(ids, cnts, offsets, i, candidates, set_num, set_den, ms_num, ms_den):
    """Candidates ``j`` whose key is similar to key ``i``.

    Similarity is strict: ``set > set_num/set_den`` and
    ``multiset > ms_num/ms_den``; two empty keys are similar.
    """
    out = []
    a0, a1 = offsets[i], offsets[i + 1]
    for j in candidates:
        b0, b1 = offsets[j], offsets[j + 1]
        inter, union, smin, smax = overlap(ids, cnts, a0, a1, b0, b1)
        if union == 0:
            out.append(j)
        elif inter * set_den > set_num * union and smin * ms_den > ms_num * smax:
            out.append(j)
    return out
