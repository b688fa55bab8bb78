# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled implementations of the hot kernels.

Semantics (results and traversal counters) match qmindex._kernels_np
exactly; tests assert parity between the two backends.
"""

import numpy as np

cimport numpy as cnp


def qdist_pair(const cnp.int64_t[:, ::1] dtab, const cnp.uint8_t[::1] x, const cnp.uint8_t[::1] y):
    cdef Py_ssize_t i, m = x.shape[0]
    cdef cnp.int64_t acc = 0
    for i in range(m):
        acc += dtab[x[i], y[i]]
    return int(acc)


def qdist_scan(const cnp.int64_t[:, ::1] dtab, const cnp.uint8_t[:, ::1] frags,
               const cnp.uint8_t[::1] query):
    cdef Py_ssize_t n = frags.shape[0], m = frags.shape[1], i, j
    out = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] o = out
    cdef cnp.int64_t acc
    with nogil:
        for j in range(n):
            acc = 0
            for i in range(m):
                acc += dtab[query[i], frags[j, i]]
            o[j] = acc
    return out


def qdist_cross(const cnp.int64_t[:, ::1] dtab, const cnp.uint8_t[:, ::1] a,
                const cnp.uint8_t[:, ::1] b, block: int = 4_000_000):
    cdef Py_ssize_t na = a.shape[0], nb = b.shape[0], m = a.shape[1], i, j, k
    out = np.empty((na, nb), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] o = out
    cdef cnp.int64_t acc
    with nogil:
        for i in range(na):
            for j in range(nb):
                acc = 0
                for k in range(m):
                    acc += dtab[a[i, k], b[j, k]]
                o[i, j] = acc
    return out


cdef Py_ssize_t _bisect_left(const cnp.int64_t* arr, Py_ssize_t lo, Py_ssize_t hi,
                             cnp.int64_t value) noexcept nogil:
    cdef Py_ssize_t mid
    while lo < hi:
        mid = (lo + hi) // 2
        if arr[mid] < value:
            lo = mid + 1
        else:
            hi = mid
    return lo


def lb_enumerate(const cnp.int64_t[:, ::1] lbtab, const cnp.int64_t[::1] codes,
                 int gamma, cnp.int64_t eps):
    cdef Py_ssize_t m = lbtab.shape[0]
    cdef Py_ssize_t nbins = codes.shape[0]
    out_pos_arr = np.empty(nbins, dtype=np.int64)
    out_lb_arr = np.empty(nbins, dtype=np.int64)
    cdef cnp.int64_t[::1] out_pos = out_pos_arr
    cdef cnp.int64_t[::1] out_lb = out_lb_arr

    # explicit DFS stack; at most (gamma - 1) pending siblings per level
    stack_depth_arr = np.empty(m * gamma + 1, dtype=np.int64)
    stack_code_arr = np.empty(m * gamma + 1, dtype=np.int64)
    stack_lb_arr = np.empty(m * gamma + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] st_depth = stack_depth_arr
    cdef cnp.int64_t[::1] st_code = stack_code_arr
    cdef cnp.int64_t[::1] st_lb = stack_lb_arr

    # precomputed powers gamma**0 .. gamma**m
    pow_arr = np.empty(m + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] powg = pow_arr
    cdef Py_ssize_t i
    powg[0] = 1
    for i in range(1, m + 1):
        powg[i] = powg[i - 1] * gamma

    cdef Py_ssize_t n_out = 0, sp = 0
    cdef cnp.int64_t nodes_expanded = 0, child_evals = 0
    cdef Py_ssize_t depth, d, lo, hi, pend_lo
    cdef cnp.int64_t code_lo, lb, step, child_lb, child_code
    cdef const cnp.int64_t* cp

    if nbins > 0:
        cp = &codes[0]
    else:
        cp = NULL

    st_depth[0] = 0
    st_code[0] = 0
    st_lb[0] = 0
    sp = 1
    with nogil:
        while sp > 0:
            sp -= 1
            depth = <Py_ssize_t> st_depth[sp]
            code_lo = st_code[sp]
            lb = st_lb[sp]
            nodes_expanded += 1
            step = powg[m - depth - 1]
            pend_lo = sp
            lo = _bisect_left(cp, 0, nbins, code_lo) if cp != NULL else 0
            for d in range(gamma):
                child_code = code_lo + d * step
                hi = _bisect_left(cp, lo, nbins, child_code + step) if cp != NULL else 0
                if hi == lo:
                    continue
                child_evals += 1
                child_lb = lb + lbtab[depth, d]
                if child_lb <= eps:
                    if depth + 1 == m:
                        out_pos[n_out] = lo
                        out_lb[n_out] = child_lb
                        n_out += 1
                    else:
                        st_depth[sp] = depth + 1
                        st_code[sp] = child_code
                        st_lb[sp] = child_lb
                        sp += 1
                lo = hi
            # pending children were appended in ascending digit order; reverse
            # them so the stack pops the smallest code first
            hi = sp - 1
            while pend_lo < hi:
                st_depth[pend_lo], st_depth[hi] = st_depth[hi], st_depth[pend_lo]
                st_code[pend_lo], st_code[hi] = st_code[hi], st_code[pend_lo]
                st_lb[pend_lo], st_lb[hi] = st_lb[hi], st_lb[pend_lo]
                pend_lo += 1
                hi -= 1
    return (out_pos_arr[:n_out].copy(), out_lb_arr[:n_out].copy(),
            int(nodes_expanded), int(child_evals))
