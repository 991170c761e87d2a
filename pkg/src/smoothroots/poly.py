"""Monic real polynomials with real roots only.

Coefficients are stored in the alternating-sign convention

    P(x) = x^n - a_1 x^(n-1) + a_2 x^(n-2) - ... + (-1)^n a_n,

so that ``a_k`` is the k-th elementary symmetric function of the roots.
The leading 1 is implicit.  Conversion to the plain descending power basis
happens internally.

Most heavy lifting is done by batched helpers working on ``(B, n)`` arrays
of coefficient rows, so that a whole sampled curve can be processed in one
vectorized pass.  The scalar API (``MonicPoly`` and friends) wraps them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NotCentered, NotHyperbolic, ZeroScale

EPS = np.finfo(float).eps

DEFAULT_TOL = 1e-9
# relative remainder norm below which a Sturm remainder is treated as zero
STURM_REL_TOL = 1e-12
MAX_BISECTIONS = 80


@dataclass(frozen=True)
class MonicPoly:
    """A monic real polynomial, ``coeffs = (a_1, ..., a_n)``."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(a) for a in self.coeffs))
        if len(self.coeffs) < 1:
            raise ValueError("degree must be at least 1")
        if not all(math.isfinite(a) for a in self.coeffs):
            raise ValueError("coefficients must be finite")

    @property
    def degree(self) -> int:
        return len(self.coeffs)

    @property
    def a(self) -> np.ndarray:
        return np.array(self.coeffs)

    def power_coeffs(self) -> np.ndarray:
        """Descending power-basis coefficients ``[1, -a_1, a_2, ...]``."""
        return _power_from_a(self.a[None, :])[0]

    def __call__(self, x):
        return evaluate(self, x)

    def derivative(self) -> "MonicPoly":
        """``P'/n``, again monic (degree n-1, so only valid for n >= 2)."""
        return MonicPoly(_derivative_a(self.a[None, :])[0])


def _signs(n: int) -> np.ndarray:
    return np.where(np.arange(1, n + 1) % 2 == 0, 1.0, -1.0)


def _power_from_a(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    B, n = A.shape
    out = np.empty((B, n + 1))
    out[:, 0] = 1.0
    out[:, 1:] = A * _signs(n)
    return out


def _a_from_power(C: np.ndarray) -> np.ndarray:
    C = np.asarray(C, dtype=float)
    n = C.shape[1] - 1
    return C[:, 1:] / C[:, :1] * _signs(n)


def _derivative_a(A: np.ndarray) -> np.ndarray:
    n = A.shape[1]
    k = np.arange(1, n)
    return A[:, : n - 1] * (n - k) / n


def _horner(C: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Evaluate rows of ``C`` (B, n+1) at points ``x`` (B, ...)."""
    x = np.asarray(x, dtype=float)
    extra = (1,) * (x.ndim - 1)
    out = np.broadcast_to(C[:, :1].reshape((-1,) + extra), x.shape).copy()
    for j in range(1, C.shape[1]):
        out = out * x + C[:, j].reshape((-1,) + extra)
    return out


def _taylor_shift(C: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Power coefficients of ``P(y + s)`` for every row (repeated synthetic division)."""
    C = np.array(C, dtype=float)
    s = np.asarray(s, dtype=float)
    n = C.shape[1] - 1
    for i in range(n):
        for j in range(1, n - i + 1):
            C[:, j] += s * C[:, j - 1]
    return C


def _center_batch(A: np.ndarray):
    """Centered coefficients, shifts, and a rounding-noise bound per coefficient."""
    A = np.asarray(A, dtype=float)
    n = A.shape[1]
    shift = A[:, 0] / n
    C = _taylor_shift(_power_from_a(A), shift)
    bound = _taylor_shift(np.abs(_power_from_a(A)), np.abs(shift))
    Ac = _a_from_power(C)
    Ac[:, 0] = 0.0
    noise = 8.0 * (n + 1) * EPS * bound[:, 1:]
    return Ac, shift, noise


def _esym_batch(R: np.ndarray) -> np.ndarray:
    """Elementary symmetric functions e_1..e_n of each row of ``R``."""
    R = np.asarray(R, dtype=float)
    B, n = R.shape
    E = np.zeros((B, n + 1))
    E[:, 0] = 1.0
    for j in range(n):
        r = R[:, j]
        for k in range(j + 1, 0, -1):
            E[:, k] += r * E[:, k - 1]
    return E[:, 1:]


def _prescale(A: np.ndarray):
    """Exact power-of-two rescaling to root scale about 1: ``(A / 2**(k e), e)``.

    Keeps tiny or huge root scales off the subnormal and overflow ranges.
    """
    k = np.arange(1, A.shape[1] + 1)
    with np.errstate(divide="ignore"):
        raw = np.max(np.abs(A) ** (1.0 / k), axis=1)
    e = np.where(raw > 0, np.frexp(np.where(raw > 0, raw, 1.0))[1], 0)
    return np.ldexp(A, -k[None, :] * e[:, None]), e


def _esym_error(z: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Per-row max of |e_k(z) - q_k| / C(n, k): how well roots z reproduce Q."""
    n = Q.shape[1]
    ref = np.array([math.comb(n, j) for j in range(1, n + 1)], dtype=float)
    with np.errstate(invalid="ignore", over="ignore"):
        err = np.max(np.abs(_esym_batch(z) - Q) / ref, axis=1)
    return np.where(np.isfinite(err), err, np.inf)


def _solve(A: np.ndarray, tol: float):
    """Roots of every row, with a failure flag and the certification error.

    The solve runs on the centered, normalized rows.  Centering costs
    relative accuracy for root clusters far from the mean, so rows that do
    not certify are solved again in the original (only rescaled) coordinates
    and the better certified answer is kept.
    """
    Q, scale, shift = _normalize(A)
    z, bad = _normalized_roots(Q, tol)
    roots = shift[:, None] + scale[:, None] * z
    err = np.where(bad, np.inf, _esym_error(z, Q))
    retry = np.flatnonzero(err > tol)
    if retry.size:
        P, e = _prescale(A[retry])
        z2, bad2 = _normalized_roots(P, tol)
        err2 = np.where(bad2, np.inf, _esym_error(z2, P))
        better = err2 < err[retry]
        rows = retry[better]
        roots[rows] = np.ldexp(z2[better], e[better][:, None])
        err[rows] = err2[better]
        bad[rows] = False
    return np.sort(roots, axis=1), bad, err


def _normalize(A: np.ndarray):
    """Center, drop rounding noise, and scale so that max_k |a_k|^(1/k) == 1.

    Returns ``(Q, scale, shift)`` with roots of row b equal to
    ``shift[b] + scale[b] * roots(Q[b])``.  Rows with ``scale == 0`` are total
    collisions (all roots equal to the shift) and are returned with Q = 0.
    """
    A = np.asarray(A, dtype=float)
    k = np.arange(1, A.shape[1] + 1)
    P, e = _prescale(A)
    Ac, shift, noise = _center_batch(P)
    Ac = np.where(np.abs(Ac) <= noise, 0.0, Ac)
    scale = np.max(np.abs(Ac) ** (1.0 / k), axis=1)
    safe = np.where(scale > 0, scale, 1.0)
    Q = Ac / safe[:, None] ** k
    return Q, np.ldexp(scale, e), np.ldexp(shift, e)


def _normalized_roots(Q: np.ndarray, tol: float):
    """Roots of centered/normalized rows by derivative interlacing.

    Returns ``(roots, bad)`` where ``bad`` flags rows for which no consistent
    set of real roots was found.
    """
    B, n = Q.shape
    if n == 1:
        return Q[:, :1].copy(), np.zeros(B, dtype=bool)
    D, bad = _normalized_roots(_derivative_a(Q), tol)
    D = np.sort(D, axis=1)
    C = _power_from_a(Q)
    R = 1.0 + np.max(np.abs(C[:, 1:]), axis=1)
    b = np.concatenate([-R[:, None], D, R[:, None]], axis=1)
    v = _horner(C, b)
    absC = np.abs(C)
    bnd = _horner(absC, np.abs(b))
    promoted = np.abs(v) <= 16.0 * (n + 1) * EPS * bnd
    promoted[:, 0] = promoted[:, -1] = False

    lo, hi = b[:, :-1], b[:, 1:]
    vlo, vhi = v[:, :-1], v[:, 1:]
    plo, phi = promoted[:, :-1], promoted[:, 1:]
    change = np.sign(vlo) * np.sign(vhi) < 0

    a, z = lo.copy(), hi.copy()
    slo = np.sign(vlo)
    for _ in range(MAX_BISECTIONS):
        mid = 0.5 * (a + z)
        vm = _horner(C, mid)
        left = np.sign(vm) == slo
        a = np.where(left, mid, a)
        z = np.where(left, z, mid)
        exact = vm == 0
        a = np.where(exact, mid, a)
        z = np.where(exact, mid, z)
    bisected = 0.5 * (a + z)

    tangent = np.where(np.abs(vlo) <= np.abs(vhi), lo, hi)
    resid = np.minimum(np.abs(vlo), np.abs(vhi))
    rbnd = np.where(np.abs(vlo) <= np.abs(vhi), bnd[:, :-1], bnd[:, 1:])
    roots = np.where(plo, lo, np.where(phi, hi, np.where(change, bisected, tangent)))
    fail = ~plo & ~phi & ~change & (resid > tol * np.maximum(rbnd, 1.0))
    return np.sort(roots, axis=1), bad | fail.any(axis=1)


def roots_batch(A: np.ndarray, tol: float = DEFAULT_TOL, *, raise_on_fail=True):
    """Ascending real roots of every coefficient row of ``A`` (shape (B, n)).

    With ``raise_on_fail=False`` returns ``(roots, bad)`` instead of raising.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    roots, bad, _ = _solve(A, tol)
    if not raise_on_fail:
        return roots, bad
    if bad.any():
        idx = int(np.flatnonzero(bad)[0])
        raise NotHyperbolic(f"row {idx} has no consistent set of real roots", index=idx)
    return roots


# -- scalar API --------------------------------------------------------------


def evaluate(p: MonicPoly, x):
    """P(x) by Horner's scheme."""
    x = np.asarray(x, dtype=float)
    c = p.power_coeffs()
    out = np.ones_like(x)
    for cj in c[1:]:
        out = out * x + cj
    return out if out.ndim else float(out)


def from_roots(r: Sequence[float]) -> MonicPoly:
    """Monic polynomial with the given roots; ``a_k = e_k(r)``."""
    r = np.asarray(r, dtype=float).ravel()
    return MonicPoly(_esym_batch(r[None, :])[0])


def center(p: MonicPoly):
    """Return ``(q, shift)`` with ``q(y) = p(y + shift)`` and ``shift = a_1/n``."""
    Ac, shift, _ = _center_batch(p.a[None, :])
    return MonicPoly(Ac[0]), float(shift[0])


def _coeff_scale(p: MonicPoly) -> float:
    k = np.arange(1, p.degree + 1)
    return float(max(1.0, np.max(np.abs(p.a) ** (1.0 / k))))


def tilde_delta2(p: MonicPoly, tol: float = DEFAULT_TOL) -> float:
    """``-2 n a_2`` of a centered polynomial (nonnegative iff a_2 <= 0)."""
    if abs(p.coeffs[0]) > tol * _coeff_scale(p):
        raise NotCentered(f"a_1 = {p.coeffs[0]!r} is not zero")
    if p.degree < 2:
        return 0.0
    return -2.0 * p.degree * p.coeffs[1]


def scale_substitute(p: MonicPoly, s: float, tol: float = 1e-300) -> MonicPoly:
    """``q(z) = s^-n P(s z)``: maps a_k to a_k / s^k and roots to roots / s."""
    if abs(s) < tol:
        raise ZeroScale(f"scale {s!r} is too small")
    k = np.arange(1, p.degree + 1)
    return MonicPoly(p.a / float(s) ** k)


@dataclass(frozen=True)
class SturmChain:
    """Sturm sequence of ``P`` (descending power coefficients, leading coeff kept)."""

    polys: tuple
    tol: float

    def variations_at_infinity(self, sign: int) -> int:
        signs = []
        for f in self.polys:
            lead = np.sign(f[0])
            if sign < 0 and (len(f) - 1) % 2 == 1:
                lead = -lead
            signs.append(lead)
        return int(sum(1 for s, t in zip(signs, signs[1:]) if s * t < 0))

    def distinct_real_roots(self) -> int:
        return self.variations_at_infinity(-1) - self.variations_at_infinity(+1)

    @property
    def gcd_degree(self) -> int:
        return len(self.polys[-1]) - 1


def _strip(f: np.ndarray, thr: float) -> np.ndarray:
    nz = np.flatnonzero(np.abs(f) > thr)
    return f[nz[0]:] if nz.size else f[:0]


def sturm_chain(p: MonicPoly, rel_tol: float = STURM_REL_TOL) -> SturmChain:
    """Sturm chain of ``p`` after centering and normalizing its root scale.

    Remainders whose norm is below ``rel_tol`` times the input norm are
    treated as zero; the last member of the chain is then the numerical
    gcd of P and P'.
    """
    Q, scale, _ = _normalize(p.a[None, :])
    if scale[0] == 0:
        f0 = np.zeros(p.degree + 1)
        f0[0] = 1.0
    else:
        f0 = _power_from_a(Q)[0]
    thr = rel_tol * np.max(np.abs(f0))
    chain = [f0, _strip(np.polyder(f0), thr)]
    while len(chain[-1]) > 1:
        _, r = np.polydiv(chain[-2], chain[-1])
        r = _strip(np.atleast_1d(r), thr)
        if r.size == 0:
            break
        chain.append(-r)
    return SturmChain(tuple(chain), float(thr))


def is_hyperbolic(p: MonicPoly, tol: float = DEFAULT_TOL) -> bool:
    """True iff all n roots of ``p`` are real (within tolerance)."""
    Q, scale, _ = _normalize(p.a[None, :])
    if scale[0] == 0 or p.degree == 1:
        return True
    # centered sign obstruction: -2 n a_2 must be nonnegative
    if Q[0, 1] > tol:
        return False
    chain = sturm_chain(p, rel_tol=tol)
    if chain.distinct_real_roots() == p.degree - chain.gcd_degree:
        return True
    # Floating-point Euclid loses track of tight clusters next to multiple
    # roots; certify with the interlacing solver before rejecting.
    return bool(_solve(p.a[None, :], tol)[2][0] <= tol)


def hyperbolic_mask(A: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """``is_hyperbolic`` for every coefficient row of ``A`` (shape (B, n)).

    Rows settled by the sign obstruction or by solver certification are
    decided in one batch; only the rest go through the scalar Sturm test.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B, n = A.shape
    if n == 1:
        return np.ones(B, dtype=bool)
    Q, scale, _ = _normalize(A)
    out = np.zeros(B, dtype=bool)
    out[scale == 0] = True
    live = (scale != 0) & ~(Q[:, 1] > tol)
    cert = live & (_solve(A, tol)[2] <= tol)
    out[cert] = True
    for m in np.flatnonzero(live & ~cert):
        out[m] = is_hyperbolic(MonicPoly(A[m]), tol)
    return out


def roots_hyperbolic(p: MonicPoly, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Ascending real roots of ``p`` with multiplicity."""
    roots, bad = roots_batch(p.a[None, :], tol, raise_on_fail=False)
    if bad[0]:
        raise NotHyperbolic(f"{p} has non-real roots")
    return roots[0]
