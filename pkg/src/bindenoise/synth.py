"""Synthetic binary matrices with planted rank-1 patterns on a biased background.

Each cell is a one when it belongs to a pattern and survives dropout
(probability ``p_l``) or when the background draws a one with probability
``p_row0[i] * p_col0[j]``.  Finally every cell flips with probability ``p0``.
"""
from __future__ import annotations

import itertools
import zlib
from dataclasses import asdict, dataclass, fields, replace
from typing import Iterator, List, Sequence, Tuple

import numpy as np

from .binmat import BinaryMatrix

PATTERN_SIZES = (10, 15, 20)
PATTERN_COUNTS = (1, 2)
OBSERVATION_PROBS = (0.8, 0.9, 1.0)
BACKGROUND_CAPS = (0.5, 0.6, 0.7)
FLIP_RATES = (0.0, 0.05)
N_REPLICATES = 30


@dataclass(frozen=True)
class ScenarioSpec:
    pattern_size: int = 15
    k: int = 1
    p_l: float = 1.0
    background_cap: float = 0.5
    p0: float = 0.0
    m: int = 100
    n: int = 100
    background_low: float = 0.1
    seed: int = 1

    def __post_init__(self):
        for name in ("p_l", "background_cap", "p0", "background_low"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.background_low > self.background_cap:
            raise ValueError("background_low exceeds background_cap")
        if self.m < 1 or self.n < 1:
            raise ValueError("dimensions must be positive")
        if self.k < 0:
            raise ValueError("k must be nonnegative")
        if self.k and not 1 <= self.pattern_size <= min(self.m, self.n):
            raise ValueError(
                f"pattern_size {self.pattern_size} does not fit a {self.m}x{self.n} matrix")

    @property
    def scenario_id(self) -> str:
        """Self-describing id, e.g. ``s15_k1_pl0.9_p0.5_e0.05``."""
        sid = f"s{self.pattern_size}_k{self.k}_pl{self.p_l:g}_p{self.background_cap:g}_e{self.p0:g}"
        if (self.m, self.n, self.background_low) != (100, 100, 0.1):
            sid += f"_m{self.m}_n{self.n}_lo{self.background_low:g}"
        return sid

    def to_text(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in asdict(self).items())

    @classmethod
    def from_text(cls, text: str) -> "ScenarioSpec":
        types = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in types:
                raise ValueError(f"unknown scenario field {key!r}")
            kwargs[key] = int(value) if types[key] in ("int", int) else float(value)
        return cls(**kwargs)


@dataclass(frozen=True)
class Pattern:
    rows: np.ndarray
    cols: np.ndarray
    p_l: float


@dataclass(frozen=True)
class GroundTruth:
    U: np.ndarray
    V: np.ndarray
    patterns: Tuple[Pattern, ...]
    p_row0: np.ndarray
    p_col0: np.ndarray
    p0: float
    background: np.ndarray  # X^0
    dropout: np.ndarray     # pattern cells removed by the observation error
    flips: np.ndarray       # cells flipped by the i.i.d. error

    @property
    def UV(self) -> np.ndarray:
        return (self.U.astype(np.int64) @ self.V.astype(np.int64)) > 0

    @property
    def background_row_margin(self) -> np.ndarray:
        """Expected background fraction of ones per row, ``p_row0 * mean(p_col0)``."""
        return self.p_row0 * self.p_col0.mean()

    @property
    def background_col_margin(self) -> np.ndarray:
        return self.p_col0 * self.p_row0.mean()

    def compose(self) -> np.ndarray:
        """Rebuild the observed matrix from the retained layers."""
        return ((self.UV & ~self.dropout) | self.background) ^ self.flips

    def to_json(self) -> dict:
        return {
            "m": int(self.U.shape[0]),
            "n": int(self.V.shape[1]),
            "p0": self.p0,
            "patterns": [
                {"rows": p.rows.tolist(), "cols": p.cols.tolist(), "p_l": p.p_l} for p in self.patterns
            ],
            "p_row0": self.p_row0.tolist(),
            "p_col0": self.p_col0.tolist(),
        }


def pattern_matrix(m: int, n: int, supports: Sequence[Tuple[Sequence[int], Sequence[int]]]):
    """``U`` and ``V`` for a list of (rows, cols) supports."""
    U = np.zeros((m, len(supports)), dtype=bool)
    V = np.zeros((len(supports), n), dtype=bool)
    for l, (rows, cols) in enumerate(supports):
        U[list(rows), l] = True
        V[l, list(cols)] = True
    return U, V


def truth_uv(doc: dict) -> np.ndarray:
    """Ground-truth pattern union ``UV`` from a sidecar document."""
    U, V = pattern_matrix(doc["m"], doc["n"], [(p["rows"], p["cols"]) for p in doc["patterns"]])
    return (U.astype(np.int64) @ V.astype(np.int64)) > 0


def _stream(spec: ScenarioSpec) -> np.random.Generator:
    key = [spec.seed, zlib.crc32(spec.scenario_id.encode())]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def generate(spec: ScenarioSpec, patterns=None, margins=None) -> Tuple[BinaryMatrix, GroundTruth]:
    """Draw one matrix for ``spec``.

    ``patterns`` (a list of (rows, cols)) and ``margins`` (p_row0, p_col0)
    pin those parts of the model so that only the remaining layers are
    redrawn; the random stream still advances as if they had been drawn.
    """
    rng = _stream(spec)
    m, n = spec.m, spec.n
    lo, hi = spec.background_low, spec.background_cap
    p_row0 = rng.uniform(lo, hi, m)
    p_col0 = rng.uniform(lo, hi, n)
    if margins is not None:
        p_row0, p_col0 = (np.asarray(v, dtype=float) for v in margins)
    background = rng.random((m, n)) < np.outer(p_row0, p_col0)
    supports, survived = [], np.zeros((m, n), dtype=bool)
    for l in range(spec.k):
        rows = np.sort(rng.choice(m, spec.pattern_size, replace=False))
        cols = np.sort(rng.choice(n, spec.pattern_size, replace=False))
        if patterns is not None:
            rows, cols = (np.asarray(v) for v in patterns[l])
        keep = rng.random((rows.size, cols.size)) < spec.p_l
        survived[np.ix_(rows, cols)] |= keep
        supports.append((rows, cols))
    flips = rng.random((m, n)) < spec.p0
    U, V = pattern_matrix(m, n, supports)
    uv = (U.astype(np.int64) @ V.astype(np.int64)) > 0
    gt = GroundTruth(
        U=U, V=V,
        patterns=tuple(Pattern(r, c, spec.p_l) for r, c in supports),
        p_row0=p_row0, p_col0=p_col0, p0=spec.p0,
        background=background, dropout=uv & ~survived, flips=flips,
    )
    return BinaryMatrix.from_array(gt.compose()), gt


def full_grid(m: int = 100, n: int = 100) -> List[ScenarioSpec]:
    """All 108 scenarios: size x k x p_l x background cap x flip rate."""
    return [
        ScenarioSpec(size, k, pl, cap, p0, m=m, n=n)
        for size, k, pl, cap, p0 in itertools.product(
            PATTERN_SIZES, PATTERN_COUNTS, OBSERVATION_PROBS, BACKGROUND_CAPS, FLIP_RATES)
    ]


def replicates(spec: ScenarioSpec, count: int = N_REPLICATES) -> Iterator[ScenarioSpec]:
    """The spec with seeds ``1..count``."""
    for r in range(1, count + 1):
        yield replace(spec, seed=r)
