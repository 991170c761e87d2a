import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from smoothroots.curve import CurveSamples, center_curve, from_root_functions
from smoothroots.errors import GluingAmbiguous, NotHyperbolic, OrderTooLow
from smoothroots.track import (
    _lex_perm,
    assignment_tracks,
    derivative_labels_at_degeneracy,
    detect_degeneracy_sets,
    ordered_tracks,
    proof_tracks,
)

T = np.linspace(-1, 1, 2001)
H = T[1] - T[0]
I0 = 1000  # index of t = 0


def curve(*cols, grid=T):
    return CurveSamples(grid, np.column_stack(cols))


SYM2 = curve(0 * T, -T**2)
TRIPLE = curve(0 * T, -3 * T**2, -2 * T**3)
CONST12 = curve(3 + 0 * T, 2 + 0 * T)  # roots {1, 2}


def rows_match(vals, expected, atol):
    """Max error of vals against expected rows, minimized over row order."""
    import itertools

    best = np.inf
    for p in itertools.permutations(range(len(expected))):
        best = min(best, np.abs(vals - np.asarray(expected)[list(p)]).max())
    return best <= atol


ALL_TRACKERS = [
    ("ordered", ordered_tracks),
    ("assignment:0", lambda c: assignment_tracks(c, 0)),
    ("assignment:1", lambda c: assignment_tracks(c, 1)),
    ("assignment:2", lambda c: assignment_tracks(c, 2)),
    ("proof", proof_tracks),
]


# -- ordered ---------------------------------------------------------------


def test_ordered_examples():
    tr = ordered_tracks(SYM2)
    np.testing.assert_allclose(tr.values, [-np.abs(T), np.abs(T)], atol=1e-15)
    assert tr.method == "ordered"
    tr = ordered_tracks(CONST12)
    np.testing.assert_allclose(tr.values, [np.ones_like(T), 2 * np.ones_like(T)], atol=1e-12)
    tr = ordered_tracks(TRIPLE)
    lo = np.where(T >= 0, -2 * T, T)
    hi = np.where(T >= 0, T, -2 * T)
    np.testing.assert_allclose(tr.values[0], lo, atol=1e-6)
    np.testing.assert_allclose(tr.values[2], hi, atol=1e-6)


def test_ordered_rejects_nonhyperbolic():
    with pytest.raises(NotHyperbolic):
        ordered_tracks(curve(0 * T, 1 + 0 * T))


def test_ordered_refinement_shrinks_first_differences():
    prev = None
    for M in (200, 400, 800, 1600):
        t = np.linspace(-1, 1, M + 1)
        tr = ordered_tracks(from_root_functions(t, np.column_stack([np.sin(3 * t), t**2, -t])))
        d = np.abs(np.diff(tr.values, axis=1)).max()
        if prev is not None:
            assert d < prev
        prev = d


# -- assignment ------------------------------------------------------------


def test_assignment_examples():
    tr = assignment_tracks(SYM2, 1)
    assert rows_match(tr.values, [T, -T], 1e-12)
    tr = assignment_tracks(curve(0 * T, -(T**2 + 0.01)), 1)
    r = np.sqrt(T**2 + 0.01)
    np.testing.assert_allclose(tr.values, [-r, r], atol=1e-12)
    for k in (0, 1, 2):
        tr = assignment_tracks(CONST12, k)
        np.testing.assert_allclose(tr.values, [np.ones_like(T), 2 * np.ones_like(T)], atol=1e-12)
        assert np.all(tr.perms == np.arange(2))
    with pytest.raises(ValueError):
        assignment_tracks(SYM2, 3)


def test_assignment_derivative_total_variation():
    tr = assignment_tracks(SYM2, 1)
    d1 = np.diff(tr.values, axis=1) / H
    assert np.abs(np.diff(d1, axis=1)).sum(axis=1).max() <= 1e-9
    d1o = np.diff(ordered_tracks(SYM2).values, axis=1) / H
    jumps = np.abs(np.diff(d1o, axis=1))
    assert jumps.max() == pytest.approx(2.0, abs=1e-9)
    assert np.count_nonzero(jumps > 0.1) == 2  # once per row, both at t = 0


def test_degree_limit():
    t = np.linspace(0, 1, 5)
    c = CurveSamples(t, np.zeros((5, 65)))
    with pytest.raises(ValueError):
        assignment_tracks(c)
    with pytest.raises(ValueError):
        proof_tracks(c)


# -- degeneracy sets -------------------------------------------------------


def test_degeneracy_examples():
    s = detect_degeneracy_sets(SYM2)
    assert list(s.E) == [I0] and s.Eprime.size == 0 and s.F.size == 0
    s = detect_degeneracy_sets(curve(0 * T, 0 * T, 0 * T))
    allidx = np.arange(T.size)
    for part in (s.E, s.Eprime, s.F, s.Fprime):
        np.testing.assert_array_equal(part, allidx)
    s = detect_degeneracy_sets(TRIPLE)
    assert list(s.E) == [I0] and s.F.size == 0


def _subset(a, b):
    return set(a.tolist()) <= set(b.tolist())


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_degeneracy_chain_and_monotonicity(seed):
    rng = np.random.default_rng(seed)
    t = np.linspace(-1, 1, 401)
    n = int(rng.integers(2, 5))
    # roots that all meet where the bump vanishes: two points, or a whole run
    z = rng.uniform(-1, 1, 2)
    bump = (t - z[0]) * (t - z[1]) * np.where(rng.random() < 0.5, 1.0, np.abs(t) > 0.2)
    roots = bump[:, None] * rng.normal(size=n)
    c = center_curve(from_root_functions(t, roots))
    small = detect_degeneracy_sets(c, eps_E=1e-6, eps_F=1e-7)
    big = detect_degeneracy_sets(c, eps_E=1e-3, eps_F=1e-5)
    for s in (small, big):
        assert _subset(s.Eprime, s.F) and _subset(s.F, s.E) and _subset(s.Fprime, s.F)
    assert _subset(small.E, big.E) and _subset(small.F, big.F)


def test_derivative_labels_examples():
    np.testing.assert_allclose(derivative_labels_at_degeneracy(SYM2, 0.0), [-1, 1], atol=1e-12)
    np.testing.assert_allclose(derivative_labels_at_degeneracy(TRIPLE, 0.0), [-2, 1, 1], atol=1e-6)
    np.testing.assert_allclose(derivative_labels_at_degeneracy(curve(0 * T, -4 * T**2), 0.0), [-2, 2], atol=1e-12)
    with pytest.raises(OrderTooLow):
        derivative_labels_at_degeneracy(curve(0 * T, -(T**2 + 0.01)), 0.0)


# -- proof tracker ---------------------------------------------------------


def test_proof_examples():
    tr = proof_tracks(SYM2)
    assert rows_match(tr.values, [T, -T], 1e-12)
    assert np.abs(np.diff(tr.values, 2, axis=1)).max() / H**2 <= 1e-6
    tr = proof_tracks(TRIPLE)
    assert rows_match(tr.values, [T, T, -2 * T], 1e-9)
    d = np.sort((tr.values[:, I0 + 1] - tr.values[:, I0]) / H)
    np.testing.assert_allclose(d, [-2, 1, 1], atol=1e-3)
    tr = proof_tracks(curve(0 * T, 0 * T, 0 * T))
    assert np.all(tr.values == 0)


def test_proof_labels_at_isolated_collisions():
    # roots t*(1, 2, -3) + sin-shaped drift, collisions at t = 0 only
    roots = np.outer(T, [1.0, 2.0, -3.0]) + np.sin(T)[:, None]
    c = from_root_functions(T, roots)
    tr = proof_tracks(c)
    cc = center_curve(c)
    for e in tr.info["degeneracy"].E:
        if e in tr.info["degeneracy"].Eprime:
            continue
        labels = derivative_labels_at_degeneracy(cc, T[e])
        shift_d = (cc.centered_shift[e + 1] - cc.centered_shift[e]) / H
        right = np.sort((tr.values[:, e + 1] - tr.values[:, e]) / H - shift_d)
        left = np.sort((tr.values[:, e] - tr.values[:, e - 1]) / H - shift_d)
        np.testing.assert_allclose(right, labels, atol=10 * H)
        np.testing.assert_allclose(left, labels, atol=10 * H)


def test_proof_handles_quartic_tangency():
    tr = proof_tracks(curve(0 * T, -T**4))
    assert rows_match(tr.values, [T**2, -T**2], 1e-12)


def test_gluing_ambiguity_is_flagged():
    KL = np.array([[0.0, 1.0, np.nan], [0.0, 1.0, np.nan]])
    KR = np.array([[0.0, 1.0, np.nan], [0.0, 1.0, np.nan]])
    pi, amb = _lex_perm(KL, KR, [1e-12] * 3)
    assert list(pi) == [0, 1] and not amb  # identical rows: any choice is the same
    # equal-cost matches that send the rows to different right values
    KL2 = np.array([[0.0, np.nan], [0.0, np.nan]])
    KR2 = np.array([[-1.0, np.nan], [1.0, np.nan]])
    pi, amb = _lex_perm(KL2, KR2, [1e-12] * 2)
    assert amb and list(pi) == [0, 1]
    # the second level breaks the tie
    pi, amb = _lex_perm(np.array([[0.0, 2.0], [0.0, 1.0]]), np.array([[0.0, 1.0], [0.0, 2.0]]), [1e-12] * 2)
    assert list(pi) == [1, 0] and not amb


def test_gluing_ambiguous_warning_type():
    assert issubclass(GluingAmbiguous, UserWarning)


# -- properties -------------------------------------------------------------


def _random_root_curve(seed, M=1000):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 5))
    t = np.linspace(-1, 1, M + 1)
    B = rng.normal(size=(4, n))
    F = B[0] + np.outer(t, B[1]) + np.outer(t**2, B[2]) + np.outer(t**3, B[3])
    return t, F


@pytest.mark.parametrize("name,tracker", ALL_TRACKERS)
@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_multiset_consistency(name, tracker, seed):
    t, F = _random_root_curve(seed, 400)
    c = from_root_functions(t, F)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", GluingAmbiguous)
        tr = tracker(c)
    R = c.roots()
    np.testing.assert_allclose(np.sort(tr.values, axis=0).T, R, atol=1e-9)
    np.testing.assert_array_equal(np.sort(tr.perms, axis=1), np.tile(np.arange(c.degree), (t.size, 1)))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_proof_recovers_smooth_roots(seed):
    t, F = _random_root_curve(seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", GluingAmbiguous)
        tr = proof_tracks(from_root_functions(t, F))
    assert rows_match(tr.values, F.T, 1e-6)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.randoms(use_true_random=False))
def test_permutation_invariance(seed, rnd):
    t, F = _random_root_curve(seed)
    p = list(range(F.shape[1]))
    rnd.shuffle(p)
    for tracker in (proof_tracks, lambda c: assignment_tracks(c, 2)):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", GluingAmbiguous)
            a = tracker(from_root_functions(t, F)).values
            b = tracker(from_root_functions(t, F[:, p])).values
        key = lambda v: np.lexsort(v[:, ::-1].T)  # noqa: E731
        np.testing.assert_allclose(a[key(a)], b[key(b)], atol=1e-9)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_shift_equivariance(seed):
    t, F = _random_root_curve(seed)
    c = from_root_functions(t, F)
    cc = center_curve(c)
    for tracker in (proof_tracks, lambda c: assignment_tracks(c, 1)):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", GluingAmbiguous)
            direct = tracker(c).values
            back = tracker(cc).shifted(cc.centered_shift).values
        np.testing.assert_allclose(direct, back, atol=1e-9)
