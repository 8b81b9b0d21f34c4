import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bindenoise import BinaryMatrix, ScenarioSpec, dumps, generate, hadamard_mask, jaccard, loads
from bindenoise import quantile, weighted_distribution
from bindenoise.bind import apply_threshold, region_summary
from bindenoise.quantile_shift import all_weights

FUZZ = settings(max_examples=1000, deadline=None, suppress_health_check=[HealthCheck.too_slow])

bool_matrices = st.tuples(st.integers(1, 12), st.integers(1, 12)).flatmap(
    lambda mn: arrays(bool, mn))
margin_vectors = st.integers(1, 12).flatmap(
    lambda d: st.lists(st.integers(0, d), min_size=1, max_size=25).map(lambda c: np.array(c) / d))


@FUZZ
@given(margin_vectors, st.floats(0, 1), st.floats(0, 1))
def test_quantile_monotone_and_in_range(p, a, b):
    F = weighted_distribution(p)
    if F.degenerate:
        return
    lo, hi = sorted((a, b))
    assert quantile(F, lo) <= quantile(F, hi)
    assert quantile(F, a) in F.values
    assert F.cdf[-1] == 1.0 and (np.diff(F.cdf) >= 0).all()


@FUZZ
@given(bool_matrices, st.randoms(use_true_random=False))
def test_weights_nonnegative_and_permutation_equivariant(A, rnd):
    m, n = A.shape
    pr = np.array(rnd.sample(range(m), m))
    pc = np.array(rnd.sample(range(n), n))
    s_row, s_col = all_weights(BinaryMatrix.from_array(A))
    t_row, t_col = all_weights(BinaryMatrix.from_array(A[pr][:, pc]))
    assert (s_row.raw >= 0).all() and (s_col.raw >= 0).all()
    np.testing.assert_allclose(t_row.raw, s_row.raw[pr], atol=1e-12)
    np.testing.assert_allclose(t_col.raw, s_col.raw[pc], atol=1e-12)
    assert not s_row.raw[A.sum(1) == 0].any()


@FUZZ
@given(bool_matrices, st.data())
def test_mask_sound_idempotent_and_cached(A, data):
    X = BinaryMatrix.from_array(A)
    r = np.array(data.draw(st.lists(st.booleans(), min_size=X.m, max_size=X.m)))
    c = np.array(data.draw(st.lists(st.booleans(), min_size=X.n, max_size=X.n)))
    Y = hadamard_mask(X, r, c)
    bits = Y.to_array()
    assert not (bits & ~A).any()
    assert np.array_equal(bits, A & np.outer(r, c))
    assert hadamard_mask(Y, r, c) == Y
    assert np.array_equal(Y.row_sums, bits.sum(1)) and np.array_equal(Y.col_sums, bits.sum(0))
    reg = region_summary(X, r, c)
    assert reg.total_ones == X.total
    assert sum(g.cells for g in reg.regions) == X.m * X.n


@FUZZ
@given(bool_matrices, st.floats(0, 2), st.floats(0, 2), st.sampled_from(["raw", "normalized"]))
def test_tau_monotone(A, t1, t2, scale):
    X = BinaryMatrix.from_array(A)
    s_row, s_col = all_weights(X)
    lo, hi = sorted((t1, t2))
    a = apply_threshold(X, s_row, s_col, lo, scale)
    b = apply_threshold(X, s_row, s_col, hi, scale)
    assert not (b.row_ind & ~a.row_ind).any()
    assert not (b.col_ind & ~a.col_ind).any()
    assert not (b.X_use.to_array() & ~a.X_use.to_array()).any()


@FUZZ
@given(st.tuples(st.integers(1, 8), st.integers(1, 8)).flatmap(
    lambda mn: st.tuples(arrays(bool, mn), arrays(bool, mn), arrays(bool, mn))))
def test_jaccard_axioms(abc):
    A, B, C = abc
    assert jaccard(A, B) == jaccard(B, A)
    assert jaccard(A, A) == 1
    assert 0 <= jaccard(A, B) <= 1
    # Adding ones present in both never lowers the index.
    shared = C & ~(A | B)
    if (A | B).any():
        assert jaccard(A | shared, B | shared) >= jaccard(A, B)


@FUZZ
@given(st.integers(1, 6), st.integers(0, 2), st.sampled_from([0.8, 0.9, 1.0]),
       st.floats(0.1, 0.9), st.sampled_from([0.0, 0.05, 0.3]), st.integers(0, 2**31),
       st.integers(6, 15), st.integers(6, 15))
def test_generator_layers(size, k, pl, cap, p0, seed, m, n):
    spec = ScenarioSpec(size, k, pl, cap, p0, m=m, n=n, seed=seed)
    X, gt = generate(spec)
    assert np.array_equal(gt.compose(), X.to_array())
    assert np.array_equal(gt.UV, gt.U.astype(int) @ gt.V.astype(int) > 0)
    assert not (gt.dropout & ~gt.UV).any()
    if p0 == 0:
        assert not gt.flips.any()
    if pl == 1.0:
        assert not gt.dropout.any()
    assert generate(spec)[0] == X


@FUZZ
@given(bool_matrices)
def test_io_round_trip(A):
    X = BinaryMatrix.from_array(A)
    for fmt in ("dense01", "triplets"):
        assert loads(dumps(X, fmt), fmt) == X
