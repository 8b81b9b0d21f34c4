from fractions import Fraction

import numpy as np
import pytest

from bindenoise import BinaryMatrix, MonteCarlo, hit_profile, margins, quantile, weighted_distribution


def expanded_multiset(counts):
    """Margins c/d drawn with probability ~ c are a multiset holding value c/d c times."""
    out = []
    for c in counts:
        out.extend([c] * c)
    return sorted(out)


def sup_quantile(multiset, level):
    """sup b over the multiset's values with |F < b| / |F| <= level."""
    L = len(multiset)
    best = None
    for v in sorted(set(multiset)):
        if Fraction(sum(x < v for x in multiset), L) <= level:
            best = v
    return best


def test_margins_trivial():
    z = margins(BinaryMatrix.zeros(4, 4))
    assert not z.p_row.any() and not z.p_col.any()
    o = margins(BinaryMatrix.from_array(np.ones((4, 4))))
    assert (o.p_row == 1).all() and (o.p_col == 1).all()


def test_margins_m1(M1):
    prof = margins(M1)
    np.testing.assert_allclose(prof.p_col, [.5, .5, .5] + [.1] * 8, atol=1e-12)
    np.testing.assert_allclose(prof.p_row, [3 / 11] * 5 + [2 / 11] * 3 + [1 / 11] * 2, atol=1e-12)
    assert prof.p_row.sum() * 11 == pytest.approx(M1.total)
    assert prof.p_col.sum() * 10 == pytest.approx(M1.total)


def test_weighted_distribution_small():
    F = weighted_distribution([.6, .3, .1])
    np.testing.assert_allclose(F.values, [.1, .3, .6])
    np.testing.assert_allclose(F.cdf, [.1, .4, 1.0], atol=1e-12)
    assert F.total_weight == pytest.approx(1.0)


def test_weighted_distribution_constant():
    F = weighted_distribution([.25] * 7)
    np.testing.assert_allclose(F.values, [.25])
    assert F.cdf.tolist() == [1.0]


def test_weighted_distribution_m1(M1):
    F = weighted_distribution(margins(M1).p_col)
    np.testing.assert_allclose(F.values, [.1, .5])
    np.testing.assert_allclose(F.weights, [.8, 1.5], atol=1e-12)
    assert F.total_weight == pytest.approx(2.3, abs=1e-12)
    np.testing.assert_allclose(F.cdf, [0.8 / 2.3, 1.0], atol=1e-12)


def test_zero_entries_carry_no_mass():
    F = weighted_distribution([0, 0, .2, .4])
    np.testing.assert_allclose(F.values, [.2, .4])
    assert weighted_distribution([0, 0]).degenerate


def test_weighted_distribution_rejects_out_of_range():
    with pytest.raises(ValueError):
        weighted_distribution([1.2])


@pytest.mark.parametrize("level,expected", [(0.05, .1), (0.4, .3), (0.5, .6), (1.0, .6), (0.0, .1)])
def test_quantile_small(level, expected):
    assert quantile(weighted_distribution([.6, .3, .1]), level) == expected


def test_quantile_constant():
    F = weighted_distribution([.3] * 4)
    assert all(quantile(F, p) == .3 for p in np.linspace(0, 1, 11))


def test_quantile_m1(M1):
    F = weighted_distribution(margins(M1).p_col)
    assert quantile(F, 1 / 3) == .1
    assert quantile(F, 2 / 3) == .5
    assert quantile(F, 1.0) == .5


def test_quantile_degenerate_and_range():
    with pytest.raises(ValueError):
        quantile(weighted_distribution([0.0]), 0.5)
    with pytest.raises(ValueError):
        quantile(weighted_distribution([0.5]), 1.5)


def test_quantile_matches_sup_form_off_ties():
    rng = np.random.default_rng(7)
    for _ in range(200):
        d = int(rng.integers(2, 12))
        counts = rng.integers(0, d + 1, size=int(rng.integers(1, 10)))
        if counts.sum() == 0:
            continue
        multiset = expanded_multiset(counts.tolist())
        F = weighted_distribution(counts / d)
        cdf_points = {Fraction(sum(x <= v for x in multiset), len(multiset)) for v in set(multiset)}
        for num in range(1, 40):
            level = Fraction(num, 40)
            if level in cdf_points:
                continue
            assert quantile(F, float(level)) == pytest.approx(sup_quantile(multiset, level) / d)


def test_hit_profile(M1):
    p_col = margins(M1).p_col
    h = hit_profile(M1, "row", 0, p_col)
    np.testing.assert_allclose(h.hits, [.5, .5, .5])
    assert h.a == 3
    h6 = hit_profile(M1, "row", 5, p_col)
    np.testing.assert_allclose(h6.hits, [.1, .1])
    assert sorted(h6.positions.tolist()) == [3, 8]
    z = hit_profile(BinaryMatrix.zeros(2, 3), "row", 1, np.zeros(3))
    assert z.a == 0 and z.hits.size == 0


def test_hit_profile_errors(M1):
    with pytest.raises(IndexError):
        hit_profile(M1, "row", 10, margins(M1).p_col)
    with pytest.raises(ValueError):
        hit_profile(M1, "row", 0, np.zeros(3))
    with pytest.raises(ValueError):
        hit_profile(M1, "diag", 0, margins(M1).p_col)


def test_monte_carlo_close_to_closed_form():
    rng = np.random.default_rng(11)
    for trial in range(20):
        p = np.round(rng.random(int(rng.integers(2, 30))), 2)
        F = weighted_distribution(p)
        if F.degenerate:
            continue
        S = weighted_distribution(p, MonteCarlo(seed=trial), n_samples=100_000)
        for level in np.linspace(0.01, 1, 25):
            exact = np.searchsorted(F.values, quantile(F, level))
            sampled = np.searchsorted(F.values, quantile(S, level))
            assert abs(int(exact) - int(sampled)) <= 1


def test_monte_carlo_reproducible():
    p = [.1, .2, .3, .7]
    a = weighted_distribution(p, MonteCarlo(seed=3, n_samples=500))
    b = weighted_distribution(p, MonteCarlo(seed=3, n_samples=500))
    assert np.array_equal(a.weights, b.weights) and np.array_equal(a.values, b.values)


def test_permutation_invariance():
    p = np.array([.2, .5, .2, .9, 0, .1])
    F = weighted_distribution(p)
    G = weighted_distribution(p[[3, 1, 5, 0, 4, 2]])
    assert np.array_equal(F.values, G.values)
    np.testing.assert_allclose(F.cdf, G.cdf, atol=1e-15)
