"""Margin estimates and the self-weighted empirical margin distribution.

A line's margin is its fraction of ones.  The background distribution over
margin values gives each entry mass proportional to its own value, which is
the closed form of drawing margins with probability equal to the margin.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .binmat import BinaryMatrix

# Weighted CDF values and quantile levels are ratios of small integers in
# estimated mode; ties must compare equal despite float rounding.
CDF_TOL = 1e-12

AXES = ("row", "col")


@dataclass(frozen=True)
class MonteCarlo:
    """Sample the background distribution instead of using its closed form.

    ``n_samples=None`` means ``10 * max(m, n)`` of the matrix being weighted.
    """

    seed: int
    n_samples: Optional[int] = None


@dataclass(frozen=True)
class MarginProfile:
    p_row: np.ndarray
    p_col: np.ndarray

    def opposing(self, axis: str) -> np.ndarray:
        """Margins of the axis that a line of ``axis`` runs across."""
        _check_axis(axis)
        return self.p_col if axis == "row" else self.p_row


@dataclass(frozen=True)
class WeightedDistribution:
    values: np.ndarray
    weights: np.ndarray
    total_weight: float
    cdf: np.ndarray

    @property
    def degenerate(self) -> bool:
        return self.total_weight <= 0


@dataclass(frozen=True)
class HitProfile:
    axis: str
    index: int
    hits: np.ndarray
    # Opposing-line indices matching ``hits`` element for element.
    positions: np.ndarray

    @property
    def a(self) -> int:
        return int(self.hits.size)


def _check_axis(axis):
    if axis not in AXES:
        raise ValueError(f"axis must be 'row' or 'col', got {axis!r}")


def margins(X: BinaryMatrix) -> MarginProfile:
    return MarginProfile(X.row_sums / X.n, X.col_sums / X.m)


def _from_masses(values, masses) -> WeightedDistribution:
    total = float(masses.sum())
    if total <= 0:
        empty = np.zeros(0)
        return WeightedDistribution(empty, empty, 0.0, empty)
    cdf = np.cumsum(masses) / total
    cdf[-1] = 1.0
    return WeightedDistribution(values, masses, total, cdf)


def weighted_distribution(p, mode: Optional[MonteCarlo] = None, n_samples: Optional[int] = None,
                          rng: Optional[np.random.Generator] = None) -> WeightedDistribution:
    """Distribution of margin values where each entry has mass equal to itself.

    Zero entries carry no mass and are left out.  With ``mode`` set, ``N``
    margins are drawn with probability proportional to their value and the
    result is the empirical distribution of the draws (unit mass each).
    """
    p = np.asarray(p, dtype=float).ravel()
    if p.size and (p.min() < 0 or p.max() > 1):
        raise ValueError("margins must lie in [0, 1]")
    p = p[p > 0]
    if mode is None:
        values, inverse = np.unique(p, return_inverse=True)
        masses = np.bincount(inverse.ravel(), weights=p, minlength=values.size)
        return _from_masses(values, masses)
    if p.size == 0:
        return _from_masses(np.zeros(0), np.zeros(0))
    if rng is None:
        rng = np.random.default_rng(mode.seed)
    N = n_samples or mode.n_samples
    if not N:
        raise ValueError("Monte Carlo mode needs a sample count")
    draws = rng.choice(p, size=N, p=p / p.sum())
    values, counts = np.unique(draws, return_counts=True)
    return _from_masses(values, counts.astype(float))


def quantile(F: WeightedDistribution, p):
    """Left-continuous inverse of the weighted CDF: smallest value with cdf >= p.

    Accepts a scalar or an array of levels in [0, 1].
    """
    if F.degenerate:
        raise ValueError("quantile of a degenerate (all-zero) distribution")
    levels = np.asarray(p, dtype=float)
    if levels.size and (levels.min() < 0 or levels.max() > 1):
        raise ValueError("quantile levels must lie in [0, 1]")
    idx = np.searchsorted(F.cdf, levels - CDF_TOL, side="left")
    out = F.values[np.minimum(idx, F.values.size - 1)]
    return float(out) if out.ndim == 0 else out


def hit_profile(X: BinaryMatrix, axis: str, index: int, opposing_margins) -> HitProfile:
    """Sorted opposing margins at the ones of a row or column."""
    _check_axis(axis)
    size = X.m if axis == "row" else X.n
    if not 0 <= index < size:
        raise IndexError(f"{axis} index {index} out of range [0, {size})")
    line = X.row(index) if axis == "row" else X.col(index)
    opposing_margins = np.asarray(opposing_margins, dtype=float)
    if opposing_margins.size != line.size:
        raise ValueError(f"expected {line.size} opposing margins, got {opposing_margins.size}")
    pos = np.flatnonzero(line)
    vals = opposing_margins[pos]
    order = np.argsort(vals, kind="stable")
    return HitProfile(axis, index, vals[order], pos[order])
