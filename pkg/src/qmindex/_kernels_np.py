"""NumPy implementations of the hot kernels.

Selected by :mod:`qmindex.kernels` when the compiled extension is not
available (or is disabled).  Both backends implement identical semantics,
including the traversal counters, so results and stats are
backend-independent.
"""

from __future__ import annotations

import numpy as np


def qdist_pair(dtab: np.ndarray, x: np.ndarray, y: np.ndarray) -> int:
    """Sum of per-position table distances between two ordinal vectors."""
    return int(dtab[x, y].sum())


def qdist_scan(dtab: np.ndarray, frags: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Distances from one query to every fragment row.

    ``out[j] = sum_i dtab[query[i], frags[j, i]]``; int64.
    """
    return dtab[query[np.newaxis, :], frags].sum(axis=1, dtype=np.int64)


def qdist_cross(dtab: np.ndarray, a: np.ndarray, b: np.ndarray,
                block: int = 4_000_000) -> np.ndarray:
    """All-pairs distances ``out[i, j] = sum_k dtab[a[i, k], b[j, k]]``.

    Processed in row blocks to bound the temporary gather.
    """
    na, m = a.shape
    nb = b.shape[0]
    out = np.empty((na, nb), dtype=np.int64)
    rows = max(1, block // max(1, nb * m))
    for start in range(0, na, rows):
        stop = min(na, start + rows)
        out[start:stop] = dtab[a[start:stop, None, :], b[None, :, :]].sum(
            axis=2, dtype=np.int64)
    return out


def lb_enumerate(lbtab: np.ndarray, codes: np.ndarray, gamma: int,
                 eps: int) -> tuple[np.ndarray, np.ndarray, int, int]:
    """Nonempty bins whose cylinder lower bound is <= eps, in code order.

    ``lbtab[i, d]`` is the query's per-position distance to group ``d``;
    ``codes`` is the ascending directory of nonempty bin codes.  Walks the
    base-``gamma`` prefix tree depth first, pruning every prefix whose
    accumulated bound exceeds ``eps`` and skipping prefixes with no nonempty
    bins underneath.  Returns (directory positions, bounds, prefix nodes
    expanded, child bound evaluations).
    """
    m = lbtab.shape[0]
    nbins = codes.shape[0]
    out_pos = np.empty(nbins, dtype=np.int64)
    out_lb = np.empty(nbins, dtype=np.int64)
    n_out = 0
    nodes_expanded = 0
    child_evals = 0

    # stack of (depth, code_lo, lb); directory ranges recomputed per node
    stack: list[tuple[int, int, int]] = [(0, 0, 0)]
    digit_range = np.arange(gamma + 1, dtype=np.int64)
    while stack:
        depth, code_lo, lb = stack.pop()
        nodes_expanded += 1
        step = gamma ** (m - depth - 1)
        bounds = code_lo + digit_range * step
        pos = np.searchsorted(codes, bounds, side="left")
        pending = []
        for d in range(gamma):
            lo, hi = int(pos[d]), int(pos[d + 1])
            if lo == hi:
                continue
            child_evals += 1
            child_lb = lb + int(lbtab[depth, d])
            if child_lb > eps:
                continue
            if depth + 1 == m:
                out_pos[n_out] = lo
                out_lb[n_out] = child_lb
                n_out += 1
            else:
                pending.append((depth + 1, code_lo + d * step, child_lb))
        stack.extend(reversed(pending))
    return out_pos[:n_out].copy(), out_lb[:n_out].copy(), nodes_expanded, child_evals
