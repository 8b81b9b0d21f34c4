"""Greedy rank-1 pattern detector used as the built-in baseline."""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .binmat import BinaryMatrix

DEFAULT_GAMMA = 0.6
MAX_SWEEPS = 50


@dataclass(frozen=True)
class PatternFactors:
    """Boolean factors ``U`` (m x k) and ``V`` (k x n).

    Unpacks as ``U, V = factors`` to satisfy the detector contract.
    """

    U: np.ndarray
    V: np.ndarray
    # Ones of the residual matrix each pattern covered when it was found.
    coverage: Tuple[int, ...] = ()

    @property
    def k(self) -> int:
        return self.U.shape[1]

    def __iter__(self):
        return iter((self.U, self.V))

    def supports(self) -> List[Tuple[np.ndarray, np.ndarray]]:
        return [(np.flatnonzero(self.U[:, l]), np.flatnonzero(self.V[l])) for l in range(self.k)]

    def reconstruct(self) -> np.ndarray:
        """Boolean product ``U V``."""
        return (self.U.astype(np.int64) @ self.V.astype(np.int64)) > 0


def _grow(R: np.ndarray, seed_col: int, gamma: float):
    cols = np.zeros(R.shape[1], dtype=bool)
    cols[seed_col] = True
    rows = np.zeros(R.shape[0], dtype=bool)
    for _ in range(MAX_SWEEPS):
        row_hits = R[:, cols].sum(axis=1)
        new_rows = (row_hits >= gamma * cols.sum()) & (row_hits > 0)
        if not new_rows.any():
            return new_rows, np.zeros_like(cols)
        col_hits = R[new_rows].sum(axis=0)
        new_cols = (col_hits >= gamma * new_rows.sum()) & (col_hits > 0)
        if not new_cols.any():
            return new_rows, new_cols
        if np.array_equal(new_rows, rows) and np.array_equal(new_cols, cols):
            break
        rows, cols = new_rows, new_cols
    return rows, cols


def greedy_rank1(X: BinaryMatrix, k: int = 1, gamma: float = DEFAULT_GAMMA,
                 seed: Optional[int] = None) -> PatternFactors:
    """Find up to ``k`` dense blocks one at a time.

    Each block starts from the column with the most remaining ones (lowest
    index on ties), then alternately keeps rows that hit at least ``gamma``
    of the block's columns and columns hit by at least ``gamma`` of its rows,
    until nothing changes or ``MAX_SWEEPS`` is reached.  The block's ones are
    removed before the next search.  ``seed`` is accepted for the detector
    contract; the search itself has no randomness.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if not 0 < gamma <= 1:
        raise ValueError("gamma must lie in (0, 1]")
    R = X.to_array().copy()
    us, vs, cov = [], [], []
    for _ in range(k):
        col_sums = R.sum(axis=0)
        if col_sums.max(initial=0) == 0:
            break
        rows, cols = _grow(R, int(np.argmax(col_sums)), gamma)
        if not rows.any() or not cols.any():
            break
        block = np.ix_(rows, cols)
        cov.append(int(R[block].sum()))
        R[block] = False
        us.append(rows)
        vs.append(cols)
    U = np.array(us, dtype=bool).T.reshape(X.m, len(us))
    V = np.array(vs, dtype=bool).reshape(len(vs), X.n)
    return PatternFactors(U, V, tuple(cov))
