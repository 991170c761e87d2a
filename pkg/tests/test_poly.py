import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from smoothroots import poly
from smoothroots.errors import NotCentered, NotHyperbolic, ZeroScale
from smoothroots.poly import MonicPoly


def test_evaluate():
    assert poly.evaluate(MonicPoly((0, -1)), 2.0) == 3.0
    assert poly.evaluate(MonicPoly((0, 0, 0)), 0.0) == 0.0
    assert poly.evaluate(MonicPoly((6, 11, 6)), 4.0) == 6.0
    # vectorized and via __call__
    p = MonicPoly((6, 11, 6))
    np.testing.assert_allclose(p(np.array([1.0, 2.0, 3.0])), 0.0)


def test_degree_at_least_one():
    with pytest.raises(ValueError):
        MonicPoly(())


def test_from_roots():
    assert poly.from_roots([-1, 1]).coeffs == (0.0, -1.0)
    assert poly.from_roots([-2, 1, 1]).coeffs == (0.0, -3.0, -2.0)
    c, n = 1.5, 5
    np.testing.assert_allclose(poly.from_roots([c] * n).a, [math.comb(n, k) * c**k for k in range(1, n + 1)])


def test_center():
    q, s = poly.center(poly.from_roots([1, 1]))
    assert s == 1.0 and np.allclose(q.a, 0)
    q, s = poly.center(poly.from_roots([1, 1, 1]))
    assert s == 1.0 and np.allclose(q.a, 0, atol=1e-15)
    q, s = poly.center(poly.from_roots([1, 2]))
    assert s == 1.5
    np.testing.assert_allclose(q.a, [0, -0.25])


def test_center_shifts_roots():
    p = poly.from_roots([0.3, -1.2, 2.5, 4.0])
    q, s = poly.center(p)
    np.testing.assert_allclose(poly.roots_hyperbolic(q) + s, poly.roots_hyperbolic(p), atol=1e-12)


def test_tilde_delta2():
    assert poly.tilde_delta2(MonicPoly((0, -1))) == 4.0
    assert poly.tilde_delta2(poly.from_roots([-2, 1, 1])) == 18.0
    assert poly.tilde_delta2(MonicPoly((0, 0, 0))) == 0.0
    with pytest.raises(NotCentered):
        poly.tilde_delta2(MonicPoly((1, 0)))


def test_is_hyperbolic_examples():
    assert not poly.is_hyperbolic(MonicPoly((0, 1)))
    assert poly.is_hyperbolic(MonicPoly((0, -1)))
    assert poly.is_hyperbolic(poly.from_roots([1, 1, -2]))
    assert poly.is_hyperbolic(MonicPoly((0, 0, 0, 0)))
    # (x^2 + 1)(x - 1): one real root only, not caught by the sign test alone
    assert not poly.is_hyperbolic(MonicPoly((1, 1, 1)))


def test_roots_examples():
    np.testing.assert_allclose(poly.roots_hyperbolic(MonicPoly((0, -1, 0))), [-1, 0, 1], atol=1e-14)
    np.testing.assert_allclose(poly.roots_hyperbolic(MonicPoly((0, -3, -2))), [-2, 1, 1], atol=1e-7)
    np.testing.assert_allclose(poly.roots_hyperbolic(MonicPoly((0, -2))), [-math.sqrt(2), math.sqrt(2)], rtol=1e-15)


def test_extreme_root_scales():
    # a3 = s^3 stays a normal double for these scales
    for s in (1e-100, 1e-60, 1e60, 1e100):
        r = np.array([-2.0, 0.5, 1.0]) * s
        p = poly.from_roots(r)
        assert poly.is_hyperbolic(p)
        np.testing.assert_allclose(poly.roots_hyperbolic(p), r, rtol=1e-12)
    p = poly.from_roots([0.0, 0.0, 1.1808122483341374e-155])
    np.testing.assert_allclose(poly.roots_hyperbolic(p), [0, 0, 1.1808122483341374e-155], atol=1e-170)
    with pytest.raises(ValueError):
        MonicPoly((0.0, float("nan")))


def test_roots_reject_complex():
    with pytest.raises(NotHyperbolic):
        poly.roots_hyperbolic(MonicPoly((0, 1)))


def test_scale_substitute():
    np.testing.assert_allclose(poly.scale_substitute(MonicPoly((0, -4)), 2).a, [0, -1])
    q = poly.scale_substitute(MonicPoly((0, -3, -2)), -1)
    np.testing.assert_allclose(q.a, [0, -3, 2])
    np.testing.assert_allclose(poly.roots_hyperbolic(q), [-1, -1, 2], atol=1e-7)
    p = MonicPoly((1.0, -2.0, 0.5))
    assert poly.scale_substitute(p, 1).coeffs == p.coeffs
    with pytest.raises(ZeroScale):
        poly.scale_substitute(p, 0.0)


def test_sturm_chain_counts():
    ch = poly.sturm_chain(poly.from_roots([-1, 0, 2]))
    assert ch.distinct_real_roots() == 3 and ch.gcd_degree == 0
    ch = poly.sturm_chain(poly.from_roots([1, 1, -2]))
    assert ch.distinct_real_roots() == 2 and ch.gcd_degree == 1
    ch = poly.sturm_chain(MonicPoly((0, 1)))
    assert ch.distinct_real_roots() == 0


def test_batched_hyperbolic_mask_matches_scalar():
    rng = np.random.default_rng(4)
    rows = []
    for _ in range(200):
        r = rng.standard_normal(4)
        rows.append(poly.from_roots(r).a)
        rows.append(poly.from_roots(r).a + rng.normal(0, 0.5, 4))
    A = np.array(rows)
    expect = [poly.is_hyperbolic(MonicPoly(a)) for a in A]
    assert list(poly.hyperbolic_mask(A)) == expect


# roots below 1e-30 are flushed to zero: products of such roots underflow in
# from_roots, and the rounded coefficients can then describe non-real roots
root_float = st.floats(min_value=-10, max_value=10, allow_nan=False).map(lambda x: 0.0 if abs(x) < 1e-30 else x)
roots_strategy = st.lists(root_float, min_size=1, max_size=8)


def _separated(r, rel=1e-3):
    r = np.sort(r)
    scale = max(1.0, np.max(np.abs(r)))
    return r.size < 2 or np.min(np.diff(r)) > rel * scale


@settings(max_examples=200, deadline=None)
@given(roots_strategy)
def test_round_trip(r):
    r = np.sort(np.array(r))
    if not _separated(r):
        return
    out = poly.roots_hyperbolic(poly.from_roots(r))
    scale = max(1.0, np.max(np.abs(r)))
    assert np.max(np.abs(out - r)) <= 1e-9 * scale


@settings(max_examples=100, deadline=None)
@given(roots_strategy)
def test_esym_consistency_and_sign_obstruction(r):
    p = poly.from_roots(r)
    scale = max(1.0, np.max(np.abs(r)))
    if _separated(r):
        out = poly.roots_hyperbolic(p)
        k = np.arange(1, p.degree + 1)
        bound = 1e-9 * scale**k * np.array([math.comb(p.degree, j) for j in k])
        assert np.all(np.abs(poly.from_roots(out).a - p.a) <= bound)
    assert poly.is_hyperbolic(p)
    q, _ = poly.center(p)
    assert q.degree < 2 or q.coeffs[1] <= 1e-9 * scale**2


@settings(max_examples=100, deadline=None)
@given(
    st.lists(root_float.filter(lambda x: abs(x) <= 3), min_size=1, max_size=3),
    st.lists(st.integers(1, 3), min_size=3, max_size=3),
)
def test_repeated_roots(values, mult):
    # an m-fold root is only determined to about eps**(1/m) in binary64
    if not _separated(values, 0.1):
        return
    r = np.sort(np.repeat(values, mult[: len(values)]))
    out = poly.roots_hyperbolic(poly.from_roots(r))
    scale = max(1.0, np.max(np.abs(r)))
    assert np.max(np.abs(out - r)) <= 1e-4 * scale


@settings(max_examples=100, deadline=None)
@given(st.lists(root_float.filter(lambda x: abs(x) <= 5), min_size=2, max_size=7))
def test_interlacing(r):
    r = np.sort(np.array(r))
    if not _separated(r):
        return
    p = poly.from_roots(r)
    d = poly.roots_hyperbolic(p.derivative())
    for lo, hi in zip(r[:-1], r[1:]):
        assert np.sum((d > lo) & (d < hi)) == 1


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.floats(-5, 5), min_size=1, max_size=6),
    st.floats(0.1, 10) | st.floats(-10, -0.1),
)
def test_scale_substitute_inverse(a, s):
    p = MonicPoly(a)
    back = poly.scale_substitute(poly.scale_substitute(p, s), 1 / s)
    np.testing.assert_allclose(back.a, p.a, rtol=1e-13, atol=1e-13)
