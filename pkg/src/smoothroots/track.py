"""Root parametrizations along a sampled curve.

Three trackers are provided:

``ordered_tracks``
    row i is the i-th smallest root.  Always continuous, kinks wherever
    two roots cross.
``assignment_tracks``
    a left-to-right sweep that extrapolates every track one step ahead and
    matches the predictions to the next roots with a min-cost assignment.
``proof_tracks``
    the constructive route: detect points of total root collision, split
    the curve into clusters of roots elsewhere and label each cluster
    recursively, label isolated collisions by the roots of the rescaled
    curve (the admissible one-sided derivatives), and glue neighbouring
    pieces with the permutation that best matches values, first and
    second divided differences.

All trackers work internally on integer permutations into the ascending
roots, so every output column is an exact permutation of the roots at
that grid point.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import poly
from .curve import (
    CurveSamples,
    cofactor_limit,
    cluster_roots,
    grid_spacing,
    rescale_curve,
    split_window,
)
from .errors import GluingAmbiguous, InsufficientWindow, NotHyperbolic

MAX_DEGREE = 64
MAX_ENUM_DEGREE = 7
DEFAULT_W = 3
DEFAULT_EPS_F = 1e-6
MAX_RESCALE_DEPTH = 8
# shorter split windows are bridged by order-2 carrying instead of recursion
MIN_SPLIT_WINDOW = 6
HISTORY = 3  # points of tracked history handed to a sub-cluster


@dataclass(frozen=True, eq=False)
class LabeledTracks:
    grid: np.ndarray
    values: np.ndarray  # (n, M+1)
    method: str
    perms: np.ndarray  # (M+1, n): values[i, m] == sorted roots[m][perms[m, i]]
    info: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def h(self) -> Optional[float]:
        return grid_spacing(self.grid)

    def shifted(self, shift) -> "LabeledTracks":
        """Tracks with ``shift`` (scalar or per grid point) added to every row."""
        shift = np.broadcast_to(np.asarray(shift, dtype=float), self.grid.shape)
        return LabeledTracks(self.grid, self.values + shift[None, :], self.method, self.perms, self.info)


@dataclass(frozen=True, eq=False)
class DegeneracySets:
    E: np.ndarray
    Eprime: np.ndarray
    F: np.ndarray
    Fprime: np.ndarray
    eps_E: np.ndarray  # per grid point threshold actually used
    eps_F: float
    w: int


def _check_degree(n: int):
    if n > MAX_DEGREE:
        raise ValueError(f"degree {n} exceeds the supported maximum {MAX_DEGREE}")


def _values(R: np.ndarray, P: np.ndarray) -> np.ndarray:
    """Track values (n, M+1) from ascending roots and row permutations."""
    return np.take_along_axis(R, P, axis=1).T


def _make_tracks(c: CurveSamples, R: np.ndarray, P: np.ndarray, method: str, **info) -> LabeledTracks:
    vals = _values(R, P)
    vals.setflags(write=False)
    P = np.array(P)
    P.setflags(write=False)
    return LabeledTracks(c.grid, vals, method, P, info)


# -- assignment --------------------------------------------------------------


def _assign(cost: np.ndarray, cand: np.ndarray, tol: float) -> np.ndarray:
    """Min-cost perfect matching rows -> candidate columns with deterministic ties.

    The identity wins whenever it is optimal within ``tol``; candidates of
    equal value are handed out in increasing column order.
    """
    n = cost.shape[0]
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(n, dtype=int)
    perm[rows] = cols
    if np.trace(cost) <= cost[rows, cols].sum() + tol:
        perm = np.arange(n)
    return _canonical(perm, cand, tol)


def _canonical(perm: np.ndarray, cand: np.ndarray, tol: float) -> np.ndarray:
    perm = perm.copy()
    groups, _ = cluster_roots(cand, tol) if tol > 0 else ([[i] for i in range(cand.size)], None)
    order = np.argsort(cand, kind="stable")
    for g in groups:
        if len(g) < 2:
            continue
        cols = np.sort(order[g])
        holders = np.sort(np.flatnonzero(np.isin(perm, cols)))
        perm[holders] = cols
    return perm


def _predict(hist: np.ndarray, order: int) -> np.ndarray:
    """Extrapolate one step from the last ``order + 1`` columns of ``hist`` (n, k)."""
    if order <= 0 or hist.shape[1] < 2:
        return hist[:, -1]
    if order == 1 or hist.shape[1] < 3:
        return 2 * hist[:, -1] - hist[:, -2]
    return 3 * hist[:, -1] - 3 * hist[:, -2] + hist[:, -3]


def _tie_tol(R: np.ndarray) -> float:
    return 1e-12 * max(1.0, float(np.max(np.abs(R)))) * R.shape[1]


def _carry(R: np.ndarray, P: np.ndarray, start: int, stop: int, order: int = 2, first: int = 0):
    """Fill ``P[start..stop]`` by predict-and-assign from rows already filled."""
    tol = _tie_tol(R)
    n = R.shape[1]
    for m in range(start, stop + 1):
        if m <= first:
            P[m] = np.arange(n)
            continue
        lo = max(first, m - 3)
        hist = _values(R[lo:m], P[lo:m])
        pred = _predict(hist, order)
        cost = np.abs(pred[:, None] - R[m][None, :])
        P[m] = _assign(cost, R[m], tol)


def ordered_tracks(c: CurveSamples, tol: float = poly.DEFAULT_TOL) -> LabeledTracks:
    """Label roots by rank: row i is the i-th smallest root."""
    R = c.roots(tol)
    P = np.tile(np.arange(c.degree), (len(c), 1))
    return _make_tracks(c, R, P, "ordered")


def assignment_tracks(c: CurveSamples, order: int = 1, tol: float = poly.DEFAULT_TOL) -> LabeledTracks:
    """Sweep left to right, matching extrapolated tracks to the next roots.

    ``order`` selects the predictor: 0 repeats the previous value, 1
    extrapolates linearly, 2 quadratically.  The match minimizes the total
    absolute prediction error (Hungarian algorithm).
    """
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    c.require_uniform()
    _check_degree(c.degree)
    R = c.roots(tol)
    P = np.zeros((len(c), c.degree), dtype=int)
    _carry(R, P, 0, len(c) - 1, order)
    return _make_tracks(c, R, P, f"assignment:{order}")


# -- degeneracy sets ---------------------------------------------------------


def _accumulation(idx: np.ndarray, w: int, size: int) -> np.ndarray:
    s = set(int(i) for i in idx)
    out = []
    for i in sorted(s):
        left = i > 0 and any(j in s for j in range(max(0, i - w), i))
        right = i < size - 1 and any(j in s for j in range(i + 1, min(size, i + w + 1)))
        if (left or i == 0) and (right or i == size - 1) and size > 1:
            out.append(i)
    return np.array(out, dtype=int)


def _default_eps_E(a2: np.ndarray, floor: float = 0.0) -> np.ndarray:
    """Quarter of the quadratic tangency scale: |second difference of a_2| / 8."""
    m = a2.size
    if m < 3:
        return np.full(m, floor)
    d2 = np.empty(m)
    d2[1:-1] = a2[2:] - 2 * a2[1:-1] + a2[:-2]
    d2[0], d2[-1] = d2[1], d2[-2]
    return np.maximum(np.abs(d2) / 8.0 * (1 + 1e-9), floor)


def _collision_point(t: np.ndarray, a2: np.ndarray, e: int) -> float:
    """Best estimate of the total-collision parameter near grid index ``e``."""
    if e == 0 or e == t.size - 1:
        return float(t[e])
    f = a2[e - 1:e + 2]
    if abs(f[1]) <= 1e-8 * max(abs(f[0]), abs(f[2])):
        return float(t[e])
    h = t[e + 1] - t[e]
    curv = f[0] - 2 * f[1] + f[2]
    if curv == 0:
        return float(t[e])
    off = -0.5 * h * (f[2] - f[0]) / curv
    return float(t[e] + np.clip(off, -0.5 * h, 0.5 * h))


def _label_levels(t: np.ndarray, A: np.ndarray, e: int, tol: float, depth: int = 2):
    """Derivative labels at a total collision, from the rescaled curve.

    Level 0 holds the roots of ``P^1(t0)`` (admissible first derivatives).
    When those all coincide the rescaling is applied again (up to
    ``depth`` times), giving the next Taylor coefficient of the roots.
    Returns a list of ascending label arrays, or an empty list when the
    rescaled polynomial cannot be formed near a grid boundary.
    """
    t0 = _collision_point(t, A[:, 1], e)
    lo, hi = max(0, e - 4), min(t.size, e + 5)
    tt, AA = t[lo:hi], A[lo:hi]
    levels = []
    for level in range(min(depth, MAX_RESCALE_DEPTH)):
        k = np.arange(1, A.shape[1] + 1)
        try:
            p1 = np.array([cofactor_limit(tt, AA[:, j - 1], t0, j * (level + 1))[0] if j > 1 else 0.0
                           for j in k])
            z = poly.roots_hyperbolic(poly.MonicPoly(p1), tol=1e-6)
        except (InsufficientWindow, NotHyperbolic, np.linalg.LinAlgError, ValueError):
            break
        levels.append(z)
        if np.ptp(z) > 1e-6 * max(1.0, float(np.max(np.abs(z)))):
            break
    return levels


def _group_runs(E: np.ndarray, w: int):
    """Split sorted E indices into groups whose consecutive members are <= w apart."""
    groups = []
    for i in E:
        if groups and i - groups[-1][-1] <= w:
            groups[-1].append(int(i))
        else:
            groups.append([int(i)])
    return groups


def _centered_coeffs(R: np.ndarray) -> np.ndarray:
    return poly._esym_batch(R - R.mean(axis=1, keepdims=True))


def _degeneracy(t, A, R, eps_E, eps_F, w, tol):
    a2 = A[:, 1] if A.shape[1] > 1 else np.zeros(t.size)
    floor = (1e-9 * max(1.0, float(np.max(np.abs(R))))) ** 2
    if eps_E is None:
        eps = _default_eps_E(a2, floor)
    else:
        eps = np.full(t.size, float(eps_E))
    E = np.flatnonzero(np.abs(a2) <= eps)
    Eprime = _accumulation(E, w, t.size)
    # Accumulation points of E are in F: their derivatives are difference
    # quotients between total collisions, identical for all roots.
    F = set(int(i) for i in Eprime)
    for e in E:
        if e in F:
            continue
        levels = _label_levels(t, A, int(e), tol, depth=1)
        if levels and np.ptp(levels[0]) <= eps_F:
            F.add(int(e))
    F = np.array(sorted(F), dtype=int)
    Fprime = _accumulation(F, w, t.size)
    return DegeneracySets(E, Eprime, F, Fprime, eps, float(eps_F), int(w))


def detect_degeneracy_sets(
    c: CurveSamples,
    eps_E: Optional[float] = None,
    eps_F: float = DEFAULT_EPS_F,
    w: int = DEFAULT_W,
    tol: float = poly.DEFAULT_TOL,
) -> DegeneracySets:
    """Grid-scale versions of the total-collision sets E, E', F, F'.

    ``E`` holds indices with ``|a_2| <= eps_E`` (after centering), ``E'``
    those with another E index within ``w`` steps on each side, ``F`` the
    E indices whose derivative labels (roots of the rescaled curve) agree
    within ``eps_F``, and ``F'`` the accumulation-like indices of F.  By
    default ``eps_E`` follows the local quadratic tangency of a_2.
    """
    c.require_uniform()
    Ac, shift, _ = poly._center_batch(c.coeffs)
    R = poly.roots_batch(c.coeffs, tol) - shift[:, None]
    return _degeneracy(c.grid, Ac, R, eps_E, eps_F, w, tol)


def derivative_labels_at_degeneracy(c: CurveSamples, t0: float) -> np.ndarray:
    """Roots of the rescaled curve at a total collision ``t0``.

    These are the only possible one-sided derivatives at t0 of a
    differentiable parametrization of the roots.
    """
    p1 = rescale_curve(c, t0)
    return poly.roots_hyperbolic(p1.poly_at(c.index_of(t0)), tol=1e-6)


# -- gluing ------------------------------------------------------------------


@lru_cache(maxsize=None)
def _perm_table(n: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(n))), dtype=int)


def _lex_perm(KL: np.ndarray, KR: np.ndarray, tols):
    """Permutation pi (left row i -> right row pi[i]) minimizing key mismatch lexicographically.

    ``KL``/``KR`` are (n, L) key tables; a level is skipped when any entry
    is NaN.  Ties (within ``tols``) fall through to the next level and are
    finally broken toward the smallest permutation word.  Returns
    ``(pi, ambiguous)``; ambiguous means surviving candidates send some row
    to right rows with different keys.
    """
    n, L = KL.shape
    levels = [l for l in range(L) if not (np.isnan(KL[:, l]).any() or np.isnan(KR[:, l]).any())]
    if n > MAX_ENUM_DEGREE:
        # weighted surrogate of the lexicographic order for large n
        cost = np.zeros((n, n))
        for wgt, l in zip((1.0, 1e-4, 1e-8), levels):
            cost += wgt * np.abs(KL[:, l][:, None] - KR[:, l][None, :])
        rows, cols = linear_sum_assignment(cost)
        pi = np.empty(n, dtype=int)
        pi[rows] = cols
        return pi, False
    perms = _perm_table(n)
    cand = np.arange(perms.shape[0])
    for l in levels:
        cost = np.abs(KL[:, l][None, :] - KR[perms[cand], l]).sum(axis=1)
        cand = cand[cost <= cost.min() + tols[l]]
        if cand.size == 1:
            break
    pi = perms[cand[0]]
    ambiguous = False
    if cand.size > 1 and levels:
        for other in perms[cand[1:]]:
            for l in levels:
                if np.any(np.abs(KR[pi, l] - KR[other, l]) > tols[l]):
                    ambiguous = True
    return pi, ambiguous


def _diff_keys(y: np.ndarray, h: float) -> np.ndarray:
    """(value, backward first, backward second divided difference) at the last column."""
    n, k = y.shape
    keys = np.full((n, 3), np.nan)
    keys[:, 0] = y[:, -1]
    if k >= 2:
        keys[:, 1] = (y[:, -1] - y[:, -2]) / h
    if k >= 3:
        keys[:, 2] = (y[:, -1] - 2 * y[:, -2] + y[:, -3]) / h ** 2
    return keys


def _key_tols(KL, KR, rel=1e-9):
    both = np.concatenate([KL, KR])
    n = KL.shape[0]
    return [rel * n * max(1.0, float(np.nanmax(np.abs(both[:, l])) if np.isfinite(both[:, l]).any() else 1.0))
            for l in range(KL.shape[1])]


def _fallback_perm(old_hist: np.ndarray, new_vals: np.ndarray, tol: float) -> np.ndarray:
    """Order-2 prediction of old tracks matched to the first new column."""
    pred = _predict(old_hist, 2)
    cost = np.abs(pred[:, None] - new_vals[None, :, 0])
    rows, cols = linear_sum_assignment(cost)
    pi = np.empty(old_hist.shape[0], dtype=int)
    pi[rows] = cols
    return pi


# -- recursive splitting tracker ------------------------------------------------


@dataclass
class _Opts:
    tol: float
    eps_E: Optional[float]
    eps_F: float
    w: int
    ambiguous: list
    gap: Optional[float] = None


def _proof_perm(t: np.ndarray, R: np.ndarray, opts: _Opts, depth: int = 0, A=None, prefix=None) -> np.ndarray:
    """Row permutations (M+1, n) labeling the ascending roots ``R`` smoothly.

    ``prefix`` optionally fixes the labeling of the first few grid points
    (handed down by the caller, which already tracked them).
    """
    size, n = R.shape
    if n == 1:
        return np.zeros((size, 1), dtype=int)
    if A is None:
        A = _centered_coeffs(R)
    Rc = R - R.mean(axis=1, keepdims=True)
    sets = _degeneracy(t, A, Rc, opts.eps_E if depth == 0 else None, opts.eps_F, opts.w, opts.tol)
    P = np.full((size, n), -1, dtype=int)
    h = float(t[1] - t[0]) if size > 1 else 1.0

    segments = []
    pos = 0
    for g in _group_runs(sets.E, opts.w):
        if g[0] > pos:
            segments.append(("free", pos, g[0] - 1))
        segments.append(("iso", g[0], g[0]) if len(g) == 1 else ("run", g[0], g[-1]))
        pos = g[-1] + 1
    if pos < size:
        segments.append(("free", pos, size - 1))

    filled = -1  # last filled index
    k0 = 0
    if prefix is not None and len(prefix):
        k0 = len(prefix)
        P[:k0] = prefix
        filled = k0 - 1
    pending_iso = None
    for kind, a, b in segments:
        if b < k0:
            continue
        if a < k0:
            # segment starts inside the given prefix
            if kind == "free":
                P[a:b + 1] = _track_free(t, R, a, b, opts, depth, prefix=P[a:k0])
            else:
                _carry(Rc, P, k0, b)
            filled = b
            continue
        if kind == "free":
            Pf = _track_free(t, R, a, b, opts, depth)
            if filled < 0:
                P[a:b + 1] = Pf
            elif pending_iso is not None and b - a >= 2 and pending_iso - 3 >= 0 and \
                    np.all(P[pending_iso - 3:pending_iso] >= 0):
                _join_isolated(t, Rc, A, P, pending_iso, Pf, a, b, h, opts)
            else:
                if pending_iso is not None:
                    _carry(Rc, P, pending_iso, pending_iso)
                _bridge(Rc, P, Pf, a, b, h, opts)
            pending_iso = None
            filled = b
        elif kind == "iso" and filled >= 2 and a + 3 < size:
            pending_iso = a
        else:
            if filled < 0:
                _carry(Rc, P, a, b, first=a)
            else:
                if pending_iso is not None:
                    _carry(Rc, P, pending_iso, pending_iso)
                    pending_iso = None
                _carry(Rc, P, a, b)
            filled = b
    if pending_iso is not None:
        _carry(Rc, P, pending_iso, size - 1)
    return P


def _bridge(Rc, P, Pf, a, b, h, opts):
    """Continue filled tracks into a freshly labeled block [a, b] that has no overlap."""
    stop = min(b, a + 2)
    _carry(Rc, P, a, stop)
    if stop == b:
        return
    old = _values(Rc[stop - 2:stop + 1], P[stop - 2:stop + 1])
    new = _values(Rc[stop - 2:stop + 1], Pf[stop - 2 - a:stop + 1 - a])
    KL, KR = _diff_keys(old, h), _diff_keys(new, h)
    pi, amb = _lex_perm(KL, KR, _key_tols(KL, KR))
    if amb:
        _report_ambiguous(opts, a)
        nxt = _values(Rc[stop + 1:stop + 2], Pf[stop + 1 - a:stop + 2 - a])
        pi = _fallback_perm(old, nxt, _tie_tol(Rc))
    P[stop + 1:b + 1] = Pf[stop + 1 - a:, pi]


def _report_ambiguous(opts, where):
    opts.ambiguous.append(int(where))
    warnings.warn(GluingAmbiguous(f"junction at grid index {where} is ambiguous"), stacklevel=3)


def _join_isolated(t, Rc, A, P, e, Pf, a, b, h, opts):
    """Join the tracks left of an isolated total collision ``e`` to the block right of it."""
    yl = _values(Rc[e - 3:e], P[e - 3:e])
    yr = _values(Rc[a:a + 3], Pf[:3])
    sL = (yl[:, 2] - yl[:, 1]) / h
    sR = (yr[:, 1] - yr[:, 0]) / h
    d2L = (yl[:, 2] - 2 * yl[:, 1] + yl[:, 0]) / h ** 2
    d2R = (yr[:, 2] - 2 * yr[:, 1] + yr[:, 0]) / h ** 2

    levels = _label_levels(t, A, e, opts.tol)
    KL = np.column_stack([sL, d2L])
    KR = np.column_stack([sR, d2R])
    if levels:
        z = levels[0]
        KL[:, 0] = _snap(sL, z)
        KR[:, 0] = _snap(sR, z)
        tol0 = 1e-3 * max(1.0, float(np.max(np.abs(z))))
        if len(levels) > 1:
            # all first-derivative labels coincide: second level labels 2*w
            w2 = 2.0 * levels[1]
            KL[:, 1] = _snap(d2L, w2)
            KR[:, 1] = _snap(d2R, w2)
    else:
        tol0 = 4 * h * (1.0 + float(np.max(np.abs(np.r_[d2L, d2R]))))
    tols = [tol0, 1e-9 * max(1.0, float(np.max(np.abs(np.r_[d2L, d2R]))))]
    pi, amb = _lex_perm(KL, KR, tols)
    if amb:
        _report_ambiguous(opts, e)
        pi = _fallback_perm(yl, yr, _tie_tol(Rc))
    right = yr[pi]
    # cubic through e-2, e-1, e+1, e+2 evaluated at e
    pred = (4 * (yl[:, 2] + right[:, 0]) - (yl[:, 1] + right[:, 1])) / 6
    P[e] = _assign(np.abs(pred[:, None] - Rc[e][None, :]), Rc[e], _tie_tol(Rc))
    P[a:b + 1] = Pf[:, pi]


def _snap(s: np.ndarray, z: np.ndarray) -> np.ndarray:
    cost = np.abs(s[:, None] - z[None, :])
    rows, cols = linear_sum_assignment(cost)
    out = np.empty_like(s)
    out[rows] = z[cols]
    return out


def _cluster_history(R, out, a, p0, wa, end, start, s):
    """Values and labels of one cluster on [p0, end], following the parent labels.

    The cluster is identified by the parent rows sitting at sorted positions
    [start, start + s) at ``wa``.  Before ``wa`` those rows may be interleaved
    with other roots, so their values are re-sorted point by point.  Returns
    (values, prefix) or (None, None) when the labels leave the cluster inside
    the window.
    """
    lab = out[p0 - a:end + 1 - a]
    rows = np.flatnonzero((lab[wa - p0] >= start) & (lab[wa - p0] < start + s))
    if rows.size != s:
        return None, None
    pos = lab[:, rows]
    inside = (pos[wa - p0:] >= start) & (pos[wa - p0:] < start + s)
    if not np.all(inside):
        return None, None
    vals = np.take_along_axis(R[p0:end + 1], pos, axis=1)
    order = np.argsort(vals, axis=1, kind="stable")
    prefix = np.argsort(order, axis=1)
    prefix[wa - p0:] = pos[wa - p0:] - start
    return np.take_along_axis(vals, order, axis=1), prefix


def _track_free(t, R, a, b, opts, depth, prefix=None) -> np.ndarray:
    """Label an interval free of total collisions by recursive cluster splitting."""
    n = R.shape[1]
    out = np.full((b - a + 1, n), -1, dtype=int)
    anchor = a
    end = a - 1  # last labeled index
    if prefix is not None and len(prefix):
        out[:len(prefix)] = prefix
        end = anchor = a + len(prefix) - 1
    h = float(t[1] - t[0]) if t.size > 1 else 1.0
    while end < b:
        r = R[anchor]
        gaps = np.diff(r)
        G = float(gaps.max())
        if G <= 0:
            # numerically a total collision the E threshold missed
            end += 1
            _carry(R[a:b + 1], out, end - a, end - a)
            anchor = end
            continue
        # user gap if it separates anything here, else split at the widest gap
        thr = opts.gap if opts.gap is not None and opts.gap < G else G * (1 - 1e-12)
        groups, _ = cluster_roots(r, thr)
        sizes = [len(g) for g in groups]
        # three overlap points suffice for gluing; do not re-track further back
        wa, wb = split_window(R, anchor, sizes, thr, lo=max(a, end - 2), hi=b)
        if wb - wa + 1 < MIN_SPLIT_WINDOW and end - a >= 2 and wb > end:
            # clusters reorganize faster than a sub-block can resolve: carry
            _carry(R[a:b + 1], out, end + 1 - a, wb - a)
            end = wb
            anchor = end
            continue
        if wa > end >= a + 2:
            # bridge the hole so the clusters inherit tracked history
            _carry(R[a:b + 1], out, end + 1 - a, wa - a)
            end = wa
        W = np.empty((wb - wa + 1, n), dtype=int)
        start = 0
        for s in sizes:
            p0, pre = wa, None
            sub = R[wa:wb + 1, start:start + s]
            if end >= wa:
                # hand up to HISTORY already tracked points down to the cluster
                p0 = max(a, min(wa, end - HISTORY + 1))
                hv, pre = _cluster_history(R, out, a, p0, wa, end, start, s)
                if pre is None:
                    p0 = wa
                else:
                    sub = np.vstack([hv[:wa - p0], sub])
            Ws = _proof_perm(t[p0:wb + 1], sub, opts, depth + 1, prefix=pre)
            W[:, start:start + s] = Ws[wa - p0:] + start
            start += s
        if end < a:
            out[wa - a:wb - a + 1] = W
        else:
            j = end  # junction: last index of the current labeling
            k = min(3, j - wa + 1, j - a + 1)
            if k >= 1:
                old = _values(R[j - k + 1:j + 1], out[j - k + 1 - a:j + 1 - a])
                new = _values(R[j - k + 1:j + 1], W[j - k + 1 - wa:j + 1 - wa])
                KL, KR = _diff_keys(old, h), _diff_keys(new, h)
            else:
                # no overlap: extrapolate the old tracks one step
                old = _values(R[max(a, j - 2):j + 1], out[max(a, j - 2) - a:j + 1 - a])
                new = _values(R[wa:min(wb, wa + 2) + 1], W[:min(wb, wa + 2) - wa + 1])
                KL = np.column_stack([_predict(old, 2), np.full(n, np.nan), np.full(n, np.nan)])
                KR = np.column_stack([new[:, 0], np.full(n, np.nan), np.full(n, np.nan)])
            pi, amb = _lex_perm(KL, KR, _key_tols(KL, KR))
            if amb:
                _report_ambiguous(opts, j)
                old = _values(R[max(a, j - 2):j + 1], out[max(a, j - 2) - a:j + 1 - a])
                new = _values(R[j + 1:j + 2], W[j + 1 - wa:j + 2 - wa])
                pi = _fallback_perm(old, new, _tie_tol(R))
            out[j + 1 - a:wb - a + 1] = W[j + 1 - wa:, pi]
        end = max(end, wb)
        anchor = end if end > anchor else anchor + 1
    return out


def proof_tracks(
    c: CurveSamples,
    tol: float = poly.DEFAULT_TOL,
    eps_E: Optional[float] = None,
    eps_F: float = DEFAULT_EPS_F,
    w: int = DEFAULT_W,
    gap: Optional[float] = None,
) -> LabeledTracks:
    """Labeling aimed at twice differentiable rows: collisions, cluster splits, gluing.

    The curve is centered internally; the returned tracks are roots of
    ``c`` itself.  Junctions where two gluing permutations tie at every
    level are reported as GluingAmbiguous warnings and listed in
    ``info["ambiguous"]``.  ``gap`` sets the cluster separation used when
    splitting; by default each split happens at the widest root gap.
    """
    c.require_uniform()
    _check_degree(c.degree)
    R = c.roots(tol)
    Ac, shift, _ = poly._center_batch(c.coeffs)
    if gap is not None and gap <= 0:
        raise ValueError("gap must be positive")
    opts = _Opts(tol, eps_E, eps_F, w, [], gap)
    P = _proof_perm(c.grid, R - shift[:, None], opts, A=Ac)
    sets = _degeneracy(c.grid, Ac, R - shift[:, None], eps_E, eps_F, w, tol)
    return _make_tracks(c, R, P, "proof", degeneracy=sets, ambiguous=list(opts.ambiguous))
