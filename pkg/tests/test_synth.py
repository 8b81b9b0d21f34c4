import numpy as np
import pytest

from bindenoise import ScenarioSpec, full_grid, generate
from bindenoise.evaluate import lemma2_bound
from bindenoise.synth import replicates, truth_uv


def test_noiseless_limit():
    spec = ScenarioSpec(15, 1, 1.0, background_cap=0.0, p0=0.0, background_low=0.0, seed=3)
    X, gt = generate(spec)
    assert np.array_equal(X.to_array(), gt.UV)
    assert X.total == 225


def test_background_only_density():
    ones = expected = var = 0.0
    for spec in replicates(ScenarioSpec(15, 0, 1.0, 0.6, 0.0), 30):
        X, gt = generate(spec)
        assert np.array_equal(X.to_array(), gt.background)
        P = np.outer(gt.p_row0, gt.p_col0)
        ones += X.total
        expected += P.sum()
        var += (P * (1 - P)).sum()
        assert P.mean() == pytest.approx(gt.p_row0.mean() * gt.p_col0.mean())
    assert abs(ones - expected) <= 3 * np.sqrt(var)


def test_pattern_cell_probability():
    ones = expected = var = 0.0
    for spec in replicates(ScenarioSpec(15, 1, 0.9, 0.5, 0.0), 30):
        X, gt = generate(spec)
        p = gt.patterns[0]
        block = np.ix_(p.rows, p.cols)
        P0 = np.outer(gt.p_row0, gt.p_col0)[block]
        P = P0 + (1 - P0) * 0.9
        ones += X.to_array()[block].sum()
        expected += P.sum()
        var += (P * (1 - P)).sum()
    assert abs(ones - expected) <= 3 * np.sqrt(var)


def test_reproducible_and_layers():
    spec = ScenarioSpec(10, 2, 0.8, 0.7, 0.05, seed=12)
    X1, gt1 = generate(spec)
    X2, _ = generate(spec)
    assert X1 == X2
    assert np.array_equal(gt1.compose(), X1.to_array())
    assert gt1.U.shape == (100, 2) and gt1.V.shape == (2, 100)
    for l, p in enumerate(gt1.patterns):
        assert np.array_equal(np.flatnonzero(gt1.U[:, l]), p.rows)
        assert p.rows.size == p.cols.size == 10
    X3, _ = generate(ScenarioSpec(10, 2, 0.8, 0.7, 0.05, seed=13))
    assert X3 != X1


def test_margin_draws_in_range():
    _, gt = generate(ScenarioSpec(20, 1, 1.0, 0.7, 0.0, seed=5))
    assert gt.p_row0.min() >= 0.1 and gt.p_row0.max() < 0.7
    assert gt.p_col0.min() >= 0.1 and gt.p_col0.max() < 0.7


def test_invalid_specs():
    with pytest.raises(ValueError):
        ScenarioSpec(pattern_size=120)
    with pytest.raises(ValueError):
        ScenarioSpec(p_l=1.5)
    with pytest.raises(ValueError):
        ScenarioSpec(background_cap=0.05)


def test_full_grid():
    grid = full_grid()
    assert len(grid) == 108
    ids = [s.scenario_id for s in grid]
    assert len(set(ids)) == 108
    assert ids.count("s15_k2_pl0.9_p0.6_e0.05") == 1
    seeds = [s.seed for s in replicates(grid[0])]
    assert seeds == list(range(1, 31))


def test_spec_text_round_trip():
    spec = ScenarioSpec(20, 2, 0.8, 0.6, 0.05, m=50, n=60, seed=7)
    assert ScenarioSpec.from_text(spec.to_text()) == spec
    with pytest.raises(ValueError):
        ScenarioSpec.from_text("colour=3\n")


def test_truth_json_round_trip():
    X, gt = generate(ScenarioSpec(10, 2, 0.9, 0.5, 0.0, seed=2))
    assert np.array_equal(truth_uv(gt.to_json()), gt.UV)


def test_pinned_patterns_and_margins():
    base = ScenarioSpec(15, 1, 1.0, 0.5, 0.0, seed=1)
    _, gt = generate(base)
    pins = [(p.rows, p.cols) for p in gt.patterns]
    _, gt2 = generate(ScenarioSpec(15, 1, 1.0, 0.5, 0.0, seed=2), patterns=pins,
                      margins=(gt.p_row0, gt.p_col0))
    assert np.array_equal(gt2.UV, gt.UV)
    assert np.array_equal(gt2.p_col0, gt.p_col0)
    assert not np.array_equal(gt2.background, gt.background)


def test_margin_drift_within_lemma2_bound():
    """Estimated margins drift from the background margins by at most the pattern load."""
    drift = {}
    for spec in replicates(ScenarioSpec(15, 2, 0.9, 0.6, 0.0), 30):
        X, gt = generate(spec)
        P0 = np.outer(gt.p_row0, gt.p_col0)
        for axis, est, bg, var in (
            ("row", X.row_sums / X.n, gt.background_row_margin, (P0 * (1 - P0)).sum(1) / X.n ** 2),
            ("col", X.col_sums / X.m, gt.background_col_margin, (P0 * (1 - P0)).sum(0) / X.m ** 2),
        ):
            for i in np.flatnonzero((gt.U.any(1) if axis == "row" else gt.V.any(0))):
                bound = lemma2_bound(gt, axis, i)
                drift.setdefault((axis, i), []).append((est[i] - bg[i], bound, var[i]))
    # Supports differ per replicate, so pool every (line, replicate) excess.
    excess = np.array([d - b for cells in drift.values() for d, b, _ in cells])
    sd = np.sqrt(np.array([v for cells in drift.values() for *_, v in cells]))
    assert excess.mean() <= 3 * sd.mean() / np.sqrt(excess.size)
