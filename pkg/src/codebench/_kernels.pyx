# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; see ``_kernels_py`` for the reference semantics."""


def greedy_segment(str token, dict id_of, Py_ssize_t max_len, long escape_base):
    cdef list ids = []
    cdef Py_ssize_t i = 0, j, n = len(token)
    cdef object sid
    while i < n:
        j = n if n < i + max_len else i + max_len
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


def count_substrings(token_counts, known, Py_ssize_t max_len):
    cdef dict counts = {}
    cdef Py_ssize_t n, start, end, j
    cdef long count
    cdef str token, sub
    for token, count in token_counts:
        n = len(token)
        start = 0
        while start < n:
            for end in range(start + 1, n + 1):
                sub = token[start:end]
                counts[sub] = counts.get(sub, 0) + count
            j = n if n < start + max_len else start + max_len
            while j > start + 1 and token[start:j] not in known:
                j -= 1
            start = j
    return counts


cdef inline void _overlap(const long long[:] ids, const long long[:] cnts,
                          Py_ssize_t a0, Py_ssize_t a1, Py_ssize_t b0, Py_ssize_t b1,
                          long long* out) noexcept nogil:
    cdef Py_ssize_t i = a0, j = b0
    cdef long long inter = 0, union_ = 0, smin = 0, smax = 0, x, y, ca, cb
    while i < a1 and j < b1:
        x = ids[i]
        y = ids[j]
        if x == y:
            ca = cnts[i]
            cb = cnts[j]
            inter += 1
            union_ += 1
            if ca < cb:
                smin += ca
                smax += cb
            else:
                smin += cb
                smax += ca
            i += 1
            j += 1
        elif x < y:
            union_ += 1
            smax += cnts[i]
            i += 1
        else:
            union_ += 1
            smax += cnts[j]
            j += 1
    while i < a1:
        union_ += 1
        smax += cnts[i]
        i += 1
    while j < b1:
        union_ += 1
        smax += cnts[j]
        j += 1
    out[0] = inter
    out[1] = union_
    out[2] = smin
    out[3] = smax


def overlap(ids, cnts, Py_ssize_t a0, Py_ssize_t a1, Py_ssize_t b0, Py_ssize_t b1):
    cdef long long res[4]
    _overlap(ids, cnts, a0, a1, b0, b1, res)
    return res[0], res[1], res[2], res[3]


def similar_among(ids, cnts, offsets, Py_ssize_t i, candidates,
                  long long set_num, long long set_den, long long ms_num, long long ms_den):
    cdef const long long[:] v_ids = ids
    cdef const long long[:] v_cnts = cnts
    cdef const long long[:] v_off = offsets
    cdef long long res[4]
    cdef Py_ssize_t a0 = v_off[i], a1 = v_off[i + 1], j
    cdef list out = []
    for j in candidates:
        _overlap(v_ids, v_cnts, a0, a1, v_off[j], v_off[j + 1], res)
        if res[1] == 0:
            out.append(j)
        elif res[0] * set_den > set_num * res[1] and res[2] * ms_den > ms_num * res[3]:
            out.append(j)
    return out
