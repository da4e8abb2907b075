"""Pure-python (numpy) evolution kernel; fallback when the compiled one is absent.

Arithmetic contract shared with the compiled kernel and the test oracles:
each cell sums its dependent cells in ascending index order, divides by the
dependent count, then complements if flagged.  Sum-then-divide keeps the two
backends bit-identical (no reassociation, no fused multiply-add patterns).
"""

from __future__ import annotations

import numpy as np

STATUS_FIXED = 0
STATUS_CYCLE = 1
STATUS_TRUNCATED = 2


def step_batch(idx, cnt, flips, states):
    """One synchronous update of every row of ``states`` (m, L)."""
    out = np.empty_like(states)
    n_cells = idx.shape[0]
    for i in range(n_cells):
        c = cnt[i]
        v = states[:, idx[i, 0]]
        if c == 2:
            v = (v + states[:, idx[i, 1]]) * 0.5
        elif c == 3:
            v = (v + states[:, idx[i, 1]]) + states[:, idx[i, 2]]
            v = v / 3.0
        if flips[i]:
            v = 1.0 - v
        out[:, i] = v
    return out


def _lex_smaller_quantized(a, b, k):
    """Pick the cycle member whose quantized form is lexicographically smaller."""
    qa = np.floor(a * (k - 1) + 0.5).astype(np.int64)
    qb = np.floor(b * (k - 1) + 0.5).astype(np.int64)
    for la, lb in zip(qa, qb):
        if la != lb:
            return a if la < lb else b
    return a


def evolve_batch(idx, cnt, flips, s0, max_steps, eps, k):
    """Evolve every configuration row of ``s0`` to its attractor.

    Returns (finals, steps, status).  Fixed point: first state whose update
    moved every cell by at most eps (steps counts the updates *before* the
    confirming one).  Period-2 cycle: state matches the state two steps back;
    the reported final is the lexicographically smaller quantized member.
    Otherwise truncated at max_steps.
    """
    s0 = np.ascontiguousarray(s0, dtype=np.float64)
    m, _ = s0.shape
    finals = np.empty_like(s0)
    steps = np.full(m, max_steps, dtype=np.int32)
    status = np.full(m, STATUS_TRUNCATED, dtype=np.uint8)
    if m == 0:
        return finals, steps, status

    active = np.arange(m)
    prev = s0.copy()
    prev2 = None
    for t in range(1, max_steps + 1):
        cur = step_batch(idx, cnt, flips, prev)
        fixed = np.max(np.abs(cur - prev), axis=1) <= eps
        if prev2 is not None:
            cyc = ~fixed & (np.max(np.abs(cur - prev2), axis=1) <= eps)
        else:
            cyc = np.zeros(len(active), dtype=bool)

        if fixed.any():
            rows = np.flatnonzero(fixed)
            finals[active[rows]] = prev[rows]
            steps[active[rows]] = t - 1
            status[active[rows]] = STATUS_FIXED
        for r in np.flatnonzero(cyc):
            finals[active[r]] = _lex_smaller_quantized(prev[r], cur[r], k)
            steps[active[r]] = t
            status[active[r]] = STATUS_CYCLE

        done = fixed | cyc
        if done.any():
            keep = ~done
            active = active[keep]
            if active.size == 0:
                return finals, steps, status
            prev2 = prev[keep]
            prev = cur[keep]
        else:
            prev2 = prev
            prev = cur

    finals[active] = prev
    return finals, steps, status
