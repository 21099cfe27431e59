# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same signatures and results as ``_pykernels``."""
import time

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free

cnp.import_array()

NAME = "cython"


def density_setting(int n, q_ptr, q_elems, q_axis, elem_m, covered, noise, int wscale):
    cdef const cnp.int64_t[:] qp = np.ascontiguousarray(q_ptr, dtype=np.int64)
    cdef const cnp.int32_t[:] qe = np.ascontiguousarray(q_elems, dtype=np.int32)
    cdef const cnp.int8_t[:] qa = np.ascontiguousarray(q_axis, dtype=np.int8)
    cdef const cnp.uint8_t[:] cov = np.ascontiguousarray(covered, dtype=np.uint8)
    cdef const double[:] nz = np.ascontiguousarray(noise, dtype=np.float64)
    cdef cnp.int32_t[:] unassigned = np.array(elem_m, dtype=np.int32)
    cdef cnp.uint8_t[:] conflict = np.zeros(len(elem_m), dtype=np.uint8)
    cdef cnp.int64_t[:] pow3 = np.array([3 ** i for i in range(wscale + 1)], dtype=np.int64)
    cdef double[:] key = np.zeros(n, dtype=np.float64)
    cdef cnp.int8_t[:] axes
    cdef Py_ssize_t q, i, j
    cdef int e, a, best, deg
    cdef cnp.int64_t score[3]
    out = np.zeros(n, dtype=np.int8)
    axes = out
    for q in range(n):
        deg = 0
        for i in range(qp[q], qp[q + 1]):
            if not cov[qe[i]]:
                deg += 1
        key[q] = -(deg + nz[q])
    order = sorted(range(n), key=lambda k: (key[k], k))
    for j in range(n):
        q = order[j]
        score[0] = 0
        score[1] = 0
        score[2] = 0
        for i in range(qp[q], qp[q + 1]):
            e = qe[i]
            if cov[e] or conflict[e]:
                continue
            score[qa[i]] += pow3[wscale - unassigned[e] + 1]
        best = 0
        for a in range(1, 3):
            if score[a] > score[best]:
                best = a
        axes[q] = best
        for i in range(qp[q], qp[q + 1]):
            e = qe[i]
            if qa[i] == best:
                unassigned[e] -= 1
            else:
                conflict[e] = 1
    return out


def count_gains(cand_ids, covered):
    cdef const cnp.int32_t[:, :] ids = np.ascontiguousarray(cand_ids, dtype=np.int32)
    cdef const cnp.uint8_t[:] cov = np.ascontiguousarray(covered, dtype=np.uint8)
    cdef Py_ssize_t C = ids.shape[0], S = ids.shape[1], c, s
    cdef int g
    out = np.zeros(C, dtype=np.int32)
    cdef cnp.int32_t[:] gains = out
    for c in range(C):
        g = 0
        for s in range(S):
            if not cov[ids[c, s]]:
                g += 1
        gains[c] = g
    return out


cdef struct Search:
    int C
    int S
    int E
    int nsub
    const cnp.int32_t* ids
    const cnp.int32_t* esub
    const cnp.int64_t* eptr
    const cnp.int32_t* ecand
    int* cover_cnt
    int* unc_sub
    int* avail
    char* excluded
    int* chosen
    int* best
    int best_size
    int U
    long long nodes
    double deadline
    bint timeout
    bint found


cdef inline void _choose(Search* st, int c) nogil:
    cdef int s, e
    for s in range(st.S):
        e = st.ids[c * st.S + s]
        if st.cover_cnt[e] == 0:
            st.U -= 1
            st.unc_sub[st.esub[e]] -= 1
        st.cover_cnt[e] += 1


cdef inline void _unchoose(Search* st, int c) nogil:
    cdef int s, e
    for s in range(st.S):
        e = st.ids[c * st.S + s]
        st.cover_cnt[e] -= 1
        if st.cover_cnt[e] == 0:
            st.U += 1
            st.unc_sub[st.esub[e]] += 1


cdef inline int _gain(Search* st, int c) nogil:
    cdef int s, g = 0
    for s in range(st.S):
        if st.cover_cnt[st.ids[c * st.S + s]] == 0:
            g += 1
    return g


cdef void _node(Search* st, int depth):
    cdef int r, active = 0, maxunc = 0, lb, e, pick = -1, fewest, i, j, nb = 0, c, t, g
    cdef int* branch
    cdef int* gains
    st.nodes += 1
    if (st.nodes & 1023) == 0 and time.perf_counter() > st.deadline:
        st.timeout = True
    if st.timeout:
        return
    if st.U == 0:
        for i in range(depth):
            st.best[i] = st.chosen[i]
        st.best_size = depth
        st.found = True
        return
    for i in range(st.nsub):
        r = st.unc_sub[i]
        if r:
            active += 1
            if r > maxunc:
                maxunc = r
    lb = (st.U + active - 1) // active
    if maxunc > lb:
        lb = maxunc
    if depth + lb >= st.best_size:
        return
    fewest = st.C + 1
    for e in range(st.E):
        if st.cover_cnt[e] == 0 and st.avail[e] < fewest:
            fewest = st.avail[e]
            pick = e
            if fewest == 0:
                return
    branch = <int*> malloc(fewest * sizeof(int))
    gains = <int*> malloc(fewest * sizeof(int))
    for i in range(st.eptr[pick], st.eptr[pick + 1]):
        c = st.ecand[i]
        if not st.excluded[c]:
            # insertion sort by (-gain, index)
            g = _gain(st, c)
            j = nb
            while j > 0 and gains[j - 1] < g:
                branch[j] = branch[j - 1]
                gains[j] = gains[j - 1]
                j -= 1
            branch[j] = c
            gains[j] = g
            nb += 1
    t = 0
    for i in range(nb):
        c = branch[i]
        st.chosen[depth] = c
        _choose(st, c)
        _node(st, depth + 1)
        _unchoose(st, c)
        st.excluded[c] = 1
        for j in range(st.S):
            st.avail[st.ids[c * st.S + j]] -= 1
        t = i + 1
        if st.timeout or depth + lb >= st.best_size:
            break
    for i in range(t):
        c = branch[i]
        st.excluded[c] = 0
        for j in range(st.S):
            st.avail[st.ids[c * st.S + j]] += 1
    free(branch)
    free(gains)


def bnb_search(cand_ids, elem_subset, subset_sizes, e_ptr, e_cands, int best_size, double time_limit):
    cdef cnp.ndarray[cnp.int32_t, ndim=2, mode="c"] ids = np.ascontiguousarray(cand_ids, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1, mode="c"] esub = np.ascontiguousarray(elem_subset, dtype=np.int32)
    cdef cnp.ndarray[cnp.int64_t, ndim=1, mode="c"] eptr = np.ascontiguousarray(e_ptr, dtype=np.int64)
    cdef cnp.ndarray[cnp.int32_t, ndim=1, mode="c"] ecand = np.ascontiguousarray(e_cands, dtype=np.int32)
    cdef int C = ids.shape[0], S = ids.shape[1], E = esub.shape[0], nsub = len(subset_sizes)
    cdef cnp.ndarray[cnp.int32_t, ndim=1, mode="c"] cover_cnt = np.zeros(E, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1, mode="c"] unc_sub = np.ascontiguousarray(subset_sizes, dtype=np.int32).copy()
    cdef cnp.ndarray[cnp.int32_t, ndim=1, mode="c"] avail = np.diff(eptr).astype(np.int32)
    cdef cnp.ndarray[cnp.int8_t, ndim=1, mode="c"] excluded = np.zeros(C, dtype=np.int8)
    depth_cap = max(best_size, 1) + 1
    cdef cnp.ndarray[cnp.int32_t, ndim=1, mode="c"] chosen = np.zeros(depth_cap, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1, mode="c"] best = np.zeros(depth_cap, dtype=np.int32)
    cdef Search st
    st.C = C
    st.S = S
    st.E = E
    st.nsub = nsub
    st.ids = &ids[0, 0]
    st.esub = &esub[0]
    st.eptr = &eptr[0]
    st.ecand = &ecand[0]
    st.cover_cnt = <int*> &cover_cnt[0]
    st.unc_sub = <int*> &unc_sub[0]
    st.avail = <int*> &avail[0]
    st.excluded = <char*> &excluded[0]
    st.chosen = <int*> &chosen[0]
    st.best = <int*> &best[0]
    st.best_size = best_size
    st.U = E
    st.nodes = 0
    st.deadline = time.perf_counter() + time_limit
    st.timeout = False
    st.found = False
    _node(&st, 0)
    result = [int(best[i]) for i in range(st.best_size)] if st.found else None
    return result, not st.timeout, st.nodes
