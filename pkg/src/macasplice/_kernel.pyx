# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled evolution kernel.

Bit-identical to the pure-python fallback by construction: each cell sums
its dependent cells in ascending index order, divides by the dependent
count, then complements if flagged.  Sum-then-divide, pair means as
(a + b) * 0.5, triple means as ((a + b) + c) / 3.0; no expression here
matches a fused multiply-add pattern, so IEEE double results agree with
numpy exactly.
"""

import numpy as np

from libc.math cimport fabs, floor

STATUS_FIXED = 0
STATUS_CYCLE = 1
STATUS_TRUNCATED = 2


def evolve_batch(idx, cnt, flips, s0, int max_steps, double eps, int k):
    """Evolve every configuration row of ``s0`` to its attractor.

    Returns (finals, steps, status).  Fixed point: first state whose update
    moved every cell by at most eps (steps counts the updates *before* the
    confirming one).  Period-2 cycle: state matches the state two steps back;
    the reported final is the lexicographically smaller quantized member.
    Otherwise truncated at max_steps.
    """
    cdef const int[:, ::1] idx_v = np.ascontiguousarray(idx, dtype=np.int32)
    cdef const unsigned char[::1] cnt_v = np.ascontiguousarray(cnt, dtype=np.uint8)
    cdef const unsigned char[::1] flip_v = np.ascontiguousarray(flips, dtype=np.uint8)
    s0_arr = np.ascontiguousarray(s0, dtype=np.float64)
    cdef const double[:, ::1] s0_v = s0_arr
    cdef Py_ssize_t m = s0_arr.shape[0]
    cdef Py_ssize_t n_cells = s0_arr.shape[1]

    finals_arr = np.empty_like(s0_arr)
    steps_arr = np.full(m, max_steps, dtype=np.int32)
    status_arr = np.full(m, STATUS_TRUNCATED, dtype=np.uint8)
    cdef double[:, ::1] finals = finals_arr
    cdef int[::1] steps = steps_arr
    cdef unsigned char[::1] status = status_arr

    scratch_arr = np.empty((3, n_cells), dtype=np.float64)
    cdef double[:, ::1] scratch = scratch_arr

    cdef Py_ssize_t r, i, t
    cdef int ia, ib, ic, tmp, c, pick
    cdef double v
    cdef bint fixed, cyc, finished
    cdef long long la, lb

    with nogil:
        for r in range(m):
            for i in range(n_cells):
                scratch[1, i] = s0_v[r, i]
            ia = 0  # state two steps back (valid once t >= 2)
            ib = 1  # previous state
            ic = 2  # freshly computed state
            finished = False
            for t in range(1, max_steps + 1):
                for i in range(n_cells):
                    c = cnt_v[i]
                    v = scratch[ib, idx_v[i, 0]]
                    if c == 2:
                        v = (v + scratch[ib, idx_v[i, 1]]) * 0.5
                    elif c == 3:
                        v = (v + scratch[ib, idx_v[i, 1]]) + scratch[ib, idx_v[i, 2]]
                        v = v / 3.0
                    if flip_v[i]:
                        v = 1.0 - v
                    scratch[ic, i] = v

                fixed = True
                for i in range(n_cells):
                    if fabs(scratch[ic, i] - scratch[ib, i]) > eps:
                        fixed = False
                        break
                if fixed:
                    for i in range(n_cells):
                        finals[r, i] = scratch[ib, i]
                    steps[r] = <int> (t - 1)
                    status[r] = 0
                    finished = True
                    break

                if t >= 2:
                    cyc = True
                    for i in range(n_cells):
                        if fabs(scratch[ic, i] - scratch[ia, i]) > eps:
                            cyc = False
                            break
                    if cyc:
                        pick = 0  # 0 = previous member, 1 = current; tie keeps previous
                        for i in range(n_cells):
                            la = <long long> floor(scratch[ib, i] * (k - 1) + 0.5)
                            lb = <long long> floor(scratch[ic, i] * (k - 1) + 0.5)
                            if la != lb:
                                if lb < la:
                                    pick = 1
                                break
                        if pick:
                            for i in range(n_cells):
                                finals[r, i] = scratch[ic, i]
                        else:
                            for i in range(n_cells):
                                finals[r, i] = scratch[ib, i]
                        steps[r] = <int> t
                        status[r] = 1
                        finished = True
                        break

                tmp = ia
                ia = ib
                ib = ic
                ic = tmp
            if not finished:
                for i in range(n_cells):
                    finals[r, i] = scratch[ib, i]

    return finals_arr, steps_arr, status_arr
