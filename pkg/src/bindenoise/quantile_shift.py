"""Significance weight of a row or column from its quantile shift.

For a row, the margins of the columns it hits are sorted and compared rank
by rank with the background quantile at level ``j / a``.  Every strict
excess is scaled by ``1 / (1 - hit margin)`` and summed.  Columns are
handled symmetrically with row margins.
"""
from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .background import (
    MarginProfile,
    MonteCarlo,
    WeightedDistribution,
    _check_axis,
    hit_profile,
    margins,
    quantile,
    weighted_distribution,
)
from .binmat import BinaryMatrix


@dataclass(frozen=True)
class Contribution:
    rank: int
    position: int
    hit: float
    background_quantile: float
    term: float


@dataclass(frozen=True)
class ShiftWeight:
    raw: float
    normalized: float
    degenerate: bool = False
    contributions: Optional[Tuple[Contribution, ...]] = None


@dataclass(frozen=True)
class WeightVector:
    """Weights of every row (or every column) of a matrix."""

    axis: str
    raw: np.ndarray
    normalized: np.ndarray
    degenerate: bool = False

    def __len__(self):
        return self.raw.size

    def __getitem__(self, i) -> ShiftWeight:
        return ShiftWeight(float(self.raw[i]), float(self.normalized[i]), self.degenerate)

    def scaled(self, scale: str) -> np.ndarray:
        if scale == "raw":
            return self.raw
        if scale == "normalized":
            return self.normalized
        raise ValueError(f"scale must be 'raw' or 'normalized', got {scale!r}")


def denominator_floor(X: BinaryMatrix, axis: str) -> float:
    """Half the resolution of the opposing margins (1/(2m) for row weights)."""
    return 0.5 / (X.m if axis == "row" else X.n)


def _line_seed(mode: MonteCarlo, axis: str, index: int) -> np.random.Generator:
    ss = np.random.SeedSequence([mode.seed, zlib.crc32(axis.encode()), index])
    return np.random.default_rng(ss)


def _background(X, axis, opposing, mode, index) -> WeightedDistribution:
    if mode is None:
        return weighted_distribution(opposing)
    n = mode.n_samples or 10 * max(X.m, X.n)
    return weighted_distribution(opposing, mode, n, rng=_line_seed(mode, axis, index))


def _shift(hits: np.ndarray, dist: WeightedDistribution, floor: float):
    a = hits.size
    q = quantile(dist, np.arange(1, a + 1) / a)
    terms = np.zeros(a)
    over = hits > q
    terms[over] = (hits[over] - q[over]) / np.maximum(1.0 - hits[over], floor)
    return q, terms


def line_weight(X: BinaryMatrix, axis: str, index: int, opposing_margins=None,
                mode: Optional[MonteCarlo] = None, dist: Optional[WeightedDistribution] = None,
                diagnostics: bool = False) -> ShiftWeight:
    """Quantile-shift weight of one row or column.

    ``opposing_margins`` defaults to the estimated margins of ``X``; pass the
    true background margins to weight against a known background.  A
    precomputed ``dist`` skips rebuilding the background distribution
    (deterministic mode only).
    """
    _check_axis(axis)
    if opposing_margins is None:
        opposing_margins = margins(X).opposing(axis)
    prof = hit_profile(X, axis, index, opposing_margins)
    length = X.n if axis == "row" else X.m
    if prof.a == 0:
        return ShiftWeight(0.0, 0.0, contributions=() if diagnostics else None)
    if dist is None or mode is not None:
        dist = _background(X, axis, opposing_margins, mode, index)
    if dist.degenerate:
        return ShiftWeight(0.0, 0.0, degenerate=True, contributions=() if diagnostics else None)
    q, terms = _shift(prof.hits, dist, denominator_floor(X, axis))
    raw = float(terms.sum())
    contribs = None
    if diagnostics:
        contribs = tuple(
            Contribution(r + 1, int(prof.positions[r]), float(prof.hits[r]), float(q[r]), float(terms[r]))
            for r in range(prof.a)
        )
    return ShiftWeight(raw, raw / length, contributions=contribs)


def axis_weights(X: BinaryMatrix, axis: str, opposing_margins=None,
                 mode: Optional[MonteCarlo] = None) -> WeightVector:
    """Weights of every line along ``axis``, sharing one background distribution."""
    _check_axis(axis)
    if opposing_margins is None:
        opposing_margins = margins(X).opposing(axis)
    opposing_margins = np.asarray(opposing_margins, dtype=float)
    bits = X.to_array()
    if axis == "col":
        bits = bits.T
    n_lines, length = bits.shape
    if opposing_margins.size != length:
        raise ValueError(f"expected {length} opposing margins, got {opposing_margins.size}")
    floor = denominator_floor(X, axis)
    raw = np.zeros(n_lines)
    shared = weighted_distribution(opposing_margins) if mode is None else None
    if shared is not None and shared.degenerate:
        return WeightVector(axis, raw, raw.copy(), degenerate=True)
    # Sorting the opposing margins once lets every line read its hits in order.
    order = np.argsort(opposing_margins, kind="stable")
    sorted_margins = opposing_margins[order]
    sorted_bits = bits[:, order]
    degenerate = False
    for i in range(n_lines):
        hits = sorted_margins[sorted_bits[i]]
        if hits.size == 0:
            continue
        dist = shared if shared is not None else _background(X, axis, opposing_margins, mode, i)
        if dist.degenerate:
            degenerate = True
            continue
        raw[i] = _shift(hits, dist, floor)[1].sum()
    return WeightVector(axis, raw, raw / length, degenerate)


def all_weights(X: BinaryMatrix, mode: Optional[MonteCarlo] = None,
                profile: Optional[MarginProfile] = None) -> Tuple[WeightVector, WeightVector]:
    """Row and column weights of ``X``.

    Margins are estimated once from ``X`` unless ``profile`` supplies them.
    """
    if profile is None:
        profile = margins(X)
    return (axis_weights(X, "row", profile.p_col, mode),
            axis_weights(X, "col", profile.p_row, mode))
