"""Threshold quantile-shift weights, mask the matrix and hand it to a detector."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np

from .background import MarginProfile, MonteCarlo
from .binmat import BinaryMatrix, hadamard_mask
from .quantile_shift import WeightVector, all_weights

DEFAULT_TAU = 0.1
DENOISE_AXES = ("both", "row", "col")

# Detector contract: (X, k, **params) -> (U: m x k bool, V: k x n bool).
# Must be deterministic and return empty factors for an all-zero matrix.
Detector = Callable[..., Tuple[np.ndarray, np.ndarray]]


class DetectorError(RuntimeError):
    """A detector failed; ``result`` holds the denoising that preceded it."""

    def __init__(self, message, result: "BindResult"):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class Region:
    rows: np.ndarray
    cols: np.ndarray
    ones: int

    @property
    def cells(self) -> int:
        return int(self.rows.size * self.cols.size)

    @property
    def density(self) -> float:
        return self.ones / self.cells if self.cells else 0.0


@dataclass(frozen=True)
class RegionSummary:
    """Four-way split by row and column selection.

    1: selected rows x selected columns, 2: selected rows x rejected columns,
    3: rejected rows x selected columns, 4: rejected x rejected.
    """

    regions: Tuple[Region, Region, Region, Region]

    def __getitem__(self, label: int) -> Region:
        return self.regions[label - 1]

    @property
    def total_ones(self) -> int:
        return sum(r.ones for r in self.regions)

    def as_dict(self, row_labels=None, col_labels=None) -> Dict[str, Any]:
        def names(idx, labels):
            return [labels[i] if labels is not None else int(i) for i in idx]

        return {
            str(k + 1): {
                "ones": r.ones,
                "cells": r.cells,
                "density": r.density,
                "n_rows": int(r.rows.size),
                "n_cols": int(r.cols.size),
                "rows": names(r.rows, row_labels),
                "cols": names(r.cols, col_labels),
            }
            for k, r in enumerate(self.regions)
        }


@dataclass(frozen=True)
class BindResult:
    s_row: WeightVector
    s_col: WeightVector
    tau: float
    scale: str
    axis: str
    row_ind: np.ndarray
    col_ind: np.ndarray
    X_use: BinaryMatrix
    regions: RegionSummary

    @property
    def degenerate(self) -> bool:
        """True when no row or no column survives, leaving X_use empty."""
        return not (self.row_ind.any() and self.col_ind.any())


def region_summary(X: BinaryMatrix, row_ind, col_ind) -> RegionSummary:
    bits = X.to_array()
    r = np.asarray(row_ind, dtype=bool)
    c = np.asarray(col_ind, dtype=bool)
    regions = []
    for rsel, csel in ((r, c), (r, ~c), (~r, c), (~r, ~c)):
        rows, cols = np.flatnonzero(rsel), np.flatnonzero(csel)
        regions.append(Region(rows, cols, int(bits[np.ix_(rows, cols)].sum())))
    return RegionSummary(tuple(regions))


def threshold(s_row: WeightVector, s_col: WeightVector, tau: float, scale: str = "raw",
              axis: str = "both") -> Tuple[np.ndarray, np.ndarray]:
    """Indicators ``I(s > tau)``; the axis left out of one-direction denoising is all ones."""
    if axis not in DENOISE_AXES:
        raise ValueError(f"axis must be one of {DENOISE_AXES}, got {axis!r}")
    row_ind = s_row.scaled(scale) > tau
    col_ind = s_col.scaled(scale) > tau
    if axis == "row":
        col_ind = np.ones_like(col_ind)
    elif axis == "col":
        row_ind = np.ones_like(row_ind)
    return row_ind, col_ind


def apply_threshold(X: BinaryMatrix, s_row: WeightVector, s_col: WeightVector, tau: float,
                    scale: str = "raw", axis: str = "both") -> BindResult:
    """Mask ``X`` with already computed weights (weights are never re-estimated)."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    row_ind, col_ind = threshold(s_row, s_col, tau, scale, axis)
    return BindResult(s_row, s_col, tau, scale, axis, row_ind, col_ind,
                      hadamard_mask(X, row_ind, col_ind), region_summary(X, row_ind, col_ind))


def denoise(X: BinaryMatrix, tau: float = DEFAULT_TAU, mode: Optional[MonteCarlo] = None,
            scale: str = "raw", axis: str = "both",
            profile: Optional[MarginProfile] = None) -> BindResult:
    """Keep the entries of ``X`` whose row and column weights both exceed ``tau``.

    ``scale="raw"`` thresholds the summed quantile shifts directly;
    ``"normalized"`` divides them by the line length first.  ``axis`` set to
    ``"row"`` or ``"col"`` masks along that direction only.
    """
    s_row, s_col = all_weights(X, mode, profile)
    return apply_threshold(X, s_row, s_col, tau, scale, axis)


def run_pipeline(X: BinaryMatrix, detector: Detector, k: int = 1, tau: float = DEFAULT_TAU,
                 mode: Optional[MonteCarlo] = None, scale: str = "raw", axis: str = "both",
                 **params) -> Tuple[np.ndarray, np.ndarray, BindResult]:
    """Denoise ``X`` and run ``detector`` on the full-size masked matrix."""
    result = denoise(X, tau, mode, scale, axis)
    try:
        U, V = detector(result.X_use, k, **params)
    except Exception as exc:
        raise DetectorError(f"detector {getattr(detector, '__name__', detector)!r} failed: {exc}",
                            result) from exc
    return U, V, result


def compact(X: BinaryMatrix, row_ind, col_ind):
    """Submatrix of the selected lines plus the maps back to original indices."""
    rows = np.flatnonzero(np.asarray(row_ind, dtype=bool))
    cols = np.flatnonzero(np.asarray(col_ind, dtype=bool))
    sub = X.to_array()[np.ix_(rows, cols)]
    rl = tuple(X.row_labels[i] for i in rows) if X.row_labels is not None else None
    cl = tuple(X.col_labels[j] for j in cols) if X.col_labels is not None else None
    return BinaryMatrix.from_array(sub, rl, cl), rows, cols


def expand_factors(U, V, rows, cols, m: int, n: int):
    """Lift factors found on a compacted matrix back to the original shape."""
    U = np.asarray(U, dtype=bool)
    V = np.asarray(V, dtype=bool)
    U_full = np.zeros((m, U.shape[1]), dtype=bool)
    V_full = np.zeros((V.shape[0], n), dtype=bool)
    U_full[rows] = U
    V_full[:, cols] = V
    return U_full, V_full
