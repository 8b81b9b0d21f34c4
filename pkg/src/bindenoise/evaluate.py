"""Jaccard metric, bias bounds and the simulation benchmark harness."""
from __future__ import annotations

import csv
import io
import logging
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .background import margins
from .binmat import BinaryMatrix
from .bind import DEFAULT_TAU, apply_threshold
from .detect import DEFAULT_GAMMA, greedy_rank1
from .quantile_shift import all_weights, denominator_floor
from .synth import N_REPLICATES, GroundTruth, ScenarioSpec, generate, replicates

logger = logging.getLogger(__name__)


def _bits(A) -> np.ndarray:
    if isinstance(A, BinaryMatrix):
        return A.to_array()
    return np.asarray(A).astype(bool)


def jaccard(A, B) -> float:
    """``|A & B| / |A | B|`` over the ones of two equal-shape binary matrices; 1 if both are empty."""
    a, b = _bits(A), _bits(B)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    union = np.count_nonzero(a | b)
    if union == 0:
        return 1.0
    return np.count_nonzero(a & b) / union


def _pattern_load(gt: GroundTruth, axis: str) -> np.ndarray:
    """Expected pattern ones per line: sum over patterns containing it of p_l * |other support|."""
    m, n = gt.U.shape[0], gt.V.shape[1]
    load = np.zeros(m if axis == "row" else n)
    for p in gt.patterns:
        if axis == "row":
            load[p.rows] += p.p_l * p.cols.size
        else:
            load[p.cols] += p.p_l * p.rows.size
    return load


def lemma2_bound(gt: GroundTruth, axis: str, index: int) -> float:
    """Largest drift of a line's estimated margin away from its background margin."""
    length = gt.V.shape[1] if axis == "row" else gt.U.shape[0]
    return float(_pattern_load(gt, axis)[index] / length)


def lemma3_bound(X: BinaryMatrix, gt: GroundTruth, index: int, axis: str = "row") -> float:
    """Bound on the expected excess of a line's weight over its pattern ones.

    ``a (max p + max load/dim * (|p| + 1)) / (min(1 - p) |p|)`` where ``p``
    are the estimated opposing margins and ``load`` the expected pattern
    ones of each opposing line.
    """
    prof = margins(X)
    p = prof.opposing(axis)
    a = X.row_sums[index] if axis == "row" else X.col_sums[index]
    if a == 0 or p.sum() == 0:
        return 0.0
    dim = X.m if axis == "row" else X.n
    other = "col" if axis == "row" else "row"
    drift = (_pattern_load(gt, other) / dim).max(initial=0.0)
    nz = p[p > 0]
    floor = denominator_floor(X, axis)
    denom = max((1 - nz).min(), floor) * p.sum()
    return float(a * (p.max() + drift * (p.sum() + 1)) / denom)


# ---------------------------------------------------------------------------
# Benchmark harness

@dataclass
class ReplicateResult:
    scenario: ScenarioSpec
    before: float = float("nan")
    after: Dict[float, float] = field(default_factory=dict)
    recovery_before: Optional[float] = None
    recovery_after: Optional[float] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


def run_replicate(spec: ScenarioSpec, taus: Sequence[float], scale: str = "raw",
                  detector: bool = False, gamma: float = DEFAULT_GAMMA,
                  detect_tau: float = DEFAULT_TAU) -> ReplicateResult:
    res = ReplicateResult(spec)
    try:
        X, gt = generate(spec)
        uv = gt.UV
        res.before = jaccard(X, uv)
        s_row, s_col = all_weights(X)
        for tau in taus:
            if tau == 0:
                # tau = 0 stands for the undenoised data in the sweep.
                res.after[tau] = res.before
            else:
                res.after[tau] = jaccard(apply_threshold(X, s_row, s_col, tau, scale).X_use, uv)
        if detector:
            k = max(spec.k, 1)
            x_use = apply_threshold(X, s_row, s_col, detect_tau, scale).X_use
            res.recovery_before = jaccard(greedy_rank1(X, k, gamma).reconstruct(), uv)
            res.recovery_after = jaccard(greedy_rank1(x_use, k, gamma).reconstruct(), uv)
    except Exception as exc:  # recorded per replicate, never fatal
        logger.warning("replicate %s seed %d failed: %s", spec.scenario_id, spec.seed, exc)
        res.error = f"{type(exc).__name__}: {exc}"
    return res


def _run_unit(args):
    return run_replicate(*args)


@dataclass
class ScenarioRow:
    scenario: ScenarioSpec
    tau: float
    mean_before: float
    mean_after: float
    n_replicates: int

    @property
    def fold(self) -> float:
        return self.mean_after / self.mean_before if self.mean_before > 0 else float("nan")


CSV_FIELDS = ("scenario_id", "pattern_size", "k", "p_l", "background_cap", "p0",
              "tau", "mean_before", "mean_after", "fold", "n_replicates")


@dataclass
class EvalReport:
    taus: Tuple[float, ...]
    results: List[ReplicateResult]
    scale: str = "raw"

    @property
    def failures(self) -> List[ReplicateResult]:
        return [r for r in self.results if not r.ok]

    def _by_scenario(self) -> Dict[str, List[ReplicateResult]]:
        groups: Dict[str, List[ReplicateResult]] = defaultdict(list)
        for r in self.results:
            if r.ok:
                groups[r.scenario.scenario_id].append(r)
        return groups

    def rows(self) -> List[ScenarioRow]:
        out = []
        for reps in self._by_scenario().values():
            spec = reps[0].scenario
            before = float(np.mean([r.before for r in reps]))
            for tau in self.taus:
                after = float(np.mean([r.after[tau] for r in reps]))
                out.append(ScenarioRow(spec, tau, before, after, len(reps)))
        return out

    def curve(self) -> Dict[float, float]:
        """Mean Jaccard over every successful replicate, per tau."""
        ok = [r for r in self.results if r.ok]
        return {tau: float(np.mean([r.after[tau] for r in ok])) for tau in self.taus}

    def pooled_fold(self, tau: float) -> float:
        ok = [r for r in self.results if r.ok]
        return float(np.mean([r.after[tau] for r in ok]) / np.mean([r.before for r in ok]))

    def mean_fold(self, tau: float) -> float:
        """Average over scenarios of the per-scenario ratio of means."""
        return float(np.mean([row.fold for row in self.rows() if row.tau == tau]))

    def recovery(self) -> List[Tuple[ScenarioSpec, float, float]]:
        return [(r.scenario, r.recovery_before, r.recovery_after)
                for r in self.results if r.ok and r.recovery_before is not None]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        for row in self.rows():
            s = row.scenario
            w.writerow([s.scenario_id, s.pattern_size, s.k, s.p_l, s.background_cap, s.p0,
                        row.tau, f"{row.mean_before:.6f}", f"{row.mean_after:.6f}",
                        f"{row.fold:.6f}", row.n_replicates])
        return buf.getvalue()

    def table1(self, pattern_size: int = 15, tau: float = DEFAULT_TAU) -> str:
        """Before/after means laid out as rows of background cap and columns of (k, p_l)."""
        cells = {(r.scenario.p0, r.scenario.background_cap, r.scenario.k, r.scenario.p_l):
                 (r.mean_before, r.mean_after)
                 for r in self.rows() if r.scenario.pattern_size == pattern_size and r.tau == tau}
        if not cells:
            return ""
        ks = sorted({c[2] for c in cells})
        pls = sorted({c[3] for c in cells})
        cols = [(k, pl) for k in ks for pl in pls]
        blocks = []
        for p0 in sorted({c[0] for c in cells}):
            head = f"pattern size {pattern_size}, tau={tau:g}, p0={p0:g}  (before/after)"
            lines = [head, "p \\ (k, p_l)".ljust(13) + "".join(f"k={k},{pl:g}".rjust(12) for k, pl in cols)]
            for cap in sorted({c[1] for c in cells}):
                cell = []
                for k, pl in cols:
                    v = cells.get((p0, cap, k, pl))
                    cell.append(f"{v[0]:.2f}/{v[1]:.2f}".rjust(12) if v else "-".rjust(12))
                lines.append(f"{cap:g}".ljust(13) + "".join(cell))
            blocks.append("\n".join(lines))
        return "\n\n".join(blocks) + "\n"

    def curve_text(self) -> str:
        return "".join(f"tau={tau:<6g} mean_jaccard={v:.4f}\n" for tau, v in self.curve().items())


def benchmark(grid: Iterable[ScenarioSpec], n_replicates: int = N_REPLICATES,
              taus: Sequence[float] = (DEFAULT_TAU,), detector: bool = False,
              gamma: float = DEFAULT_GAMMA, detect_tau: float = DEFAULT_TAU,
              scale: str = "raw", jobs: int = 1) -> EvalReport:
    """Run every scenario x replicate and collect before/after Jaccard values.

    Work units are independent; results are kept in grid order so the report
    does not depend on ``jobs``.
    """
    taus = tuple(float(t) for t in taus)
    units = [(spec, taus, scale, detector, gamma, detect_tau)
             for base in grid for spec in replicates(base, n_replicates)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_unit, units, chunksize=max(1, len(units) // (8 * jobs))))
    else:
        results = [_run_unit(u) for u in units]
    return EvalReport(taus, results, scale)
