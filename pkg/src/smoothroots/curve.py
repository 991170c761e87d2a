"""Sampled one-parameter curves of hyperbolic polynomials.

A curve is stored as a parameter grid ``t_0 < ... < t_M`` plus one
coefficient row ``(a_1(t_m), ..., a_n(t_m))`` per grid point.  This module
provides pointwise centering, estimation of the order to which a
coefficient vanishes at a point, the rescaled curve ``P^1`` with
coefficients ``a_k(t) / (t - t0)^k``, and splitting a curve into factor
curves, one per cluster of roots.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import poly
from .errors import (
    ClustersCollide,
    InsufficientWindow,
    LemmaViolation,
    NonUniformGrid,
    NotCentered,
    OrderTooLow,
)

# |a_k| below ORDER_FLOOR * (root scale on the window)^k is excluded from order fits
ORDER_FLOOR = 1e-14
# points this far (natural log) below the fitted line are treated as dips
DIP_LOG = 1.0
MIN_FIT_POINTS = 4
DEFAULT_WINDOW = 8
CLEAN_ZERO_TOL = 1e-6
UNIFORM_RTOL = 1e-9


def grid_spacing(grid) -> Optional[float]:
    """Spacing of a uniform grid, or None if the grid is not uniform."""
    grid = np.asarray(grid, dtype=float)
    if grid.size < 2:
        return None
    h = (grid[-1] - grid[0]) / (grid.size - 1)
    if np.all(np.abs(np.diff(grid) - h) <= UNIFORM_RTOL * max(abs(h), np.max(np.abs(grid)))):
        return float(h)
    return None


def _readonly(x) -> np.ndarray:
    x = np.array(x, dtype=float)
    x.setflags(write=False)
    return x


@dataclass(frozen=True, eq=False)
class CurveSamples:
    grid: np.ndarray
    coeffs: np.ndarray
    centered_shift: Optional[np.ndarray] = None

    def __post_init__(self):
        grid = _readonly(np.ravel(self.grid))
        coeffs = np.array(self.coeffs, dtype=float)
        if coeffs.ndim == 1:
            coeffs = coeffs[:, None]
        if coeffs.shape[0] != grid.size:
            raise ValueError(f"{grid.size} grid points but {coeffs.shape[0]} coefficient rows")
        if coeffs.shape[1] < 1:
            raise ValueError("degree must be at least 1")
        if not np.all(np.isfinite(coeffs)) or not np.all(np.isfinite(grid)):
            raise ValueError("grid and coefficients must be finite")
        if grid.size > 1 and np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "coeffs", _readonly(coeffs))
        if self.centered_shift is not None:
            object.__setattr__(self, "centered_shift", _readonly(np.ravel(self.centered_shift)))

    @property
    def degree(self) -> int:
        return self.coeffs.shape[1]

    def __len__(self):
        return self.grid.size

    @property
    def h(self) -> Optional[float]:
        """Grid spacing if the grid is uniform, else None."""
        return grid_spacing(self.grid)

    def require_uniform(self) -> float:
        h = self.h
        if h is None:
            raise NonUniformGrid("a uniform grid is required")
        return h

    @property
    def is_centered(self) -> bool:
        return self.centered_shift is not None

    def a(self, k: int) -> np.ndarray:
        """Samples of the coefficient ``a_k`` (1-based)."""
        return self.coeffs[:, k - 1]

    def poly_at(self, m: int) -> poly.MonicPoly:
        return poly.MonicPoly(self.coeffs[m])

    def index_of(self, t0: float) -> int:
        """Grid index of ``t0``; raises ValueError when t0 is not a grid point."""
        m = int(np.argmin(np.abs(self.grid - t0)))
        span = max(1.0, float(np.max(np.abs(self.grid))))
        if abs(self.grid[m] - t0) > 1e-9 * span:
            raise ValueError(f"t0={t0!r} is not on the grid")
        return m

    def roots(self, tol: float = poly.DEFAULT_TOL) -> np.ndarray:
        """Ascending roots at every grid point, shape (M+1, n)."""
        return poly.roots_batch(self.coeffs, tol)

    def first_non_hyperbolic(self, tol: float = poly.DEFAULT_TOL) -> Optional[int]:
        bad = np.flatnonzero(~poly.hyperbolic_mask(self.coeffs, tol))
        return int(bad[0]) if bad.size else None


@dataclass(frozen=True, eq=False)
class VanishingOrder:
    t0: float
    k: int
    order: int
    slope: float
    cofactor: np.ndarray  # a_k / (t - t0)^order on window_grid (value at t0 extrapolated)
    window_grid: np.ndarray
    confidence: float  # RMS residual of the log-log fit
    clean: bool  # left/right extrapolations of the cofactor agree at t0


@dataclass(frozen=True, eq=False)
class ClusterSplit:
    t0: float
    clusters: list
    centers: np.ndarray
    factors: list
    window: tuple  # inclusive grid index range (lo, hi)
    gap: float


def from_root_functions(grid, roots) -> CurveSamples:
    """Curve whose roots at ``grid[m]`` are ``roots[m]`` (shape (M+1, n))."""
    roots = np.atleast_2d(np.asarray(roots, dtype=float))
    return CurveSamples(grid, poly._esym_batch(roots))


def center_curve(c: CurveSamples) -> CurveSamples:
    """Apply ``x -> x + a_1/n`` pointwise; the shift curve is recorded.

    Coefficients within the rounding noise of the shift are set to zero,
    so exactly degenerate inputs such as (x - t)^n stay exactly degenerate.
    """
    Ac, shift, noise = poly._center_batch(c.coeffs)
    Ac[np.abs(Ac) <= noise] = 0.0
    if c.centered_shift is not None:
        shift = shift + c.centered_shift
    return CurveSamples(c.grid, Ac, shift)


def _check_centered(c: CurveSamples, tol: float = 1e-9):
    scale = max(1.0, float(np.max(np.abs(c.coeffs)) ** (1.0 / max(1, c.degree))))
    if np.any(np.abs(c.coeffs[:, 0]) > tol * scale):
        raise NotCentered("curve is not centered (a_1 != 0)")


def _extrapolate_side(x: np.ndarray, y: np.ndarray, x0: float) -> float:
    deg = min(2, x.size - 1)
    return float(np.polyval(np.polyfit(x - x0, y, deg), 0.0))


def cofactor_limit(t: np.ndarray, vals: np.ndarray, t0: float, order: int, points: int = 3):
    """Value at ``t0`` of ``vals / (t - t0)^order`` by one-sided quadratic extrapolation.

    Uses the ``points`` nearest samples on each side of ``t0`` (skipping a
    sample sitting at t0 itself) and averages the available sides.  Returns
    ``(value, mismatch)``; mismatch is ``nan`` when only one side exists.
    """
    d = t - t0
    h = np.min(np.abs(np.diff(t))) if t.size > 1 else 1.0
    left = np.flatnonzero(d < -0.5 * h)[-points:]
    right = np.flatnonzero(d > 0.5 * h)[:points]
    ests = []
    for idx in (left, right):
        if idx.size:
            ests.append(_extrapolate_side(t[idx], vals[idx] / d[idx] ** order, t0))
    if not ests:
        raise InsufficientWindow("no samples near t0")
    mismatch = abs(ests[0] - ests[1]) if len(ests) == 2 else float("nan")
    return float(np.mean(ests)), mismatch


def _root_scale(A: np.ndarray) -> float:
    k = np.arange(1, A.shape[1] + 1)
    return float(np.max(np.abs(A) ** (1.0 / k))) if A.size else 0.0


def _fit_order(dt: np.ndarray, vals: np.ndarray, k: int, floor: float = ORDER_FLOOR):
    """Upper-envelope log-log fit of |vals| against |dt|.

    A zero of order j only bounds |vals| / |dt|^j from above, so samples
    well below the line (near a zero of the cofactor) are dropped and the
    fit repeated.
    """
    keep = np.abs(vals) > floor
    x, y = np.log(np.abs(dt[keep])), np.log(np.abs(vals[keep]))
    if x.size < 2 or np.ptp(x) == 0:
        # numerically zero on the whole window: infinite order, capped
        return float("inf"), k, 0.0
    while True:
        coef = np.polyfit(x, y, 1)
        r = y - np.polyval(coef, x)
        low = r < -DIP_LOG
        if not low.any() or np.count_nonzero(~low) < MIN_FIT_POINTS:
            break
        x, y = x[~low], y[~low]
    slope = float(coef[0])
    rms = float(np.sqrt(np.mean(r**2)))
    return slope, int(np.clip(np.rint(slope), 0, k)), rms


def estimate_vanishing_order(
    c: CurveSamples, k: int, t0: float, window: int = DEFAULT_WINDOW
) -> VanishingOrder:
    """Order (capped at k) to which ``a_k`` vanishes at the grid point ``t0``."""
    if window < 4:
        raise InsufficientWindow("window must be at least 4 points on each side")
    m = c.index_of(t0)
    if m - window < 0 or m + window >= len(c):
        raise InsufficientWindow(f"need {window} grid points on each side of t0={t0!r}")
    t0 = float(c.grid[m])
    idx = np.r_[m - window:m, m + 1:m + window + 1]
    dt = c.grid[idx] - t0
    vals = c.a(k)[idx]
    floor = ORDER_FLOOR * _root_scale(c.coeffs[m - window:m + window + 1]) ** k
    slope, order, rms = _fit_order(dt, vals, k, floor)
    wgrid = c.grid[m - window:m + window + 1]
    cof = np.empty(wgrid.size)
    cof[:window] = vals[:window] / dt[:window] ** order
    cof[window + 1:] = vals[window:] / dt[window:] ** order
    cof[window], mismatch = cofactor_limit(c.grid[idx], vals, t0, order)
    clean = bool(mismatch <= CLEAN_ZERO_TOL * max(1.0, abs(cof[window])))
    return VanishingOrder(t0, k, order, slope, cof, wgrid, rms, clean)


def multiplicity_test(c: CurveSamples, t0: float, window: int = DEFAULT_WINDOW) -> bool:
    """True iff a_2 vanishes to order >= 2 at ``t0``.

    When it does, every a_k must vanish to order >= k; a failure of that
    consequence raises LemmaViolation (the samples are not a smooth
    hyperbolic curve, or are too rough).
    """
    _check_centered(c)
    if c.degree < 2:
        return True
    if estimate_vanishing_order(c, 2, t0, window).order < 2:
        return False
    for k in range(3, c.degree + 1):
        est = estimate_vanishing_order(c, k, t0, window)
        if est.order < k:
            raise LemmaViolation(
                f"a_2 vanishes to second order at t0={t0!r} but a_{k} only to order {est.order}"
            )
    return True


def _rescaled_coeffs(t: np.ndarray, A: np.ndarray, t0: float) -> np.ndarray:
    n = A.shape[1]
    d = t - t0
    out = np.zeros_like(A)
    at = np.abs(d) <= 1e-12 * max(1.0, float(np.max(np.abs(t))))
    for k in range(2, n + 1):
        with np.errstate(divide="ignore", invalid="ignore"):
            out[:, k - 1] = A[:, k - 1] / d ** k
        if at.any():
            out[at, k - 1], _ = cofactor_limit(t, A[:, k - 1], t0, k)
    return out


def rescale_curve(c: CurveSamples, t0: float, window: int = DEFAULT_WINDOW) -> CurveSamples:
    """The curve ``P^1`` with coefficients ``a_k(t) / (t - t0)^k``.

    ``P(t)((t - t0) z) = (t - t0)^n P^1(t)(z)`` holds at every grid point
    other than t0; at t0 the cofactors are extrapolated from both sides.
    """
    if not multiplicity_test(c, t0, window):
        raise OrderTooLow(f"a_2 does not vanish to second order at t0={t0!r}")
    return CurveSamples(c.grid, _rescaled_coeffs(c.grid, c.coeffs, float(t0)), np.zeros(len(c)))


def cluster_roots(r, gap: float):
    """Group sorted roots whose successive differences are below ``gap``.

    Returns ``(groups, centers)``: lists of index lists into the ascending
    root vector, and the mean of each group.
    """
    if gap <= 0:
        raise ValueError("gap must be positive")
    r = np.sort(np.asarray(r, dtype=float))
    groups = [[0]]
    for i in range(1, r.size):
        if r[i] - r[i - 1] < gap:
            groups[-1].append(i)
        else:
            groups.append([i])
    centers = np.array([r[g].mean() for g in groups])
    return groups, centers


def default_gap(r, tol: float = 1e-9) -> float:
    """A quarter of the smallest distance between distinct root values."""
    r = np.sort(np.asarray(r, dtype=float))
    scale = max(1.0, float(np.max(np.abs(r))))
    _, centers = cluster_roots(r, tol * scale)
    if centers.size < 2:
        raise ClustersCollide("all roots coincide; there is nothing to split")
    return 0.25 * float(np.min(np.diff(centers)))


def split_window(roots: np.ndarray, m: int, sizes, gap: float, lo: int = 0, hi: Optional[int] = None):
    """Maximal index range around ``m`` where consecutive clusters stay > gap/2 apart."""
    hi = roots.shape[0] - 1 if hi is None else hi
    bounds = np.cumsum(sizes)[:-1]
    if bounds.size == 0:
        raise ClustersCollide("a single cluster cannot be split")
    sep = np.min(roots[:, bounds] - roots[:, bounds - 1], axis=1)
    ok = sep > 0.5 * gap
    if not ok[m]:
        raise ClustersCollide("clusters are not separated at the anchor")
    a = m
    while a > lo and ok[a - 1]:
        a -= 1
    b = m
    while b < hi and ok[b + 1]:
        b += 1
    return a, b


def split_curve(
    c: CurveSamples, t0: float, gap: Optional[float] = None, tol: float = poly.DEFAULT_TOL
) -> ClusterSplit:
    """Factor the curve near ``t0`` into one curve per cluster of roots at t0."""
    m = c.index_of(t0)
    roots = c.roots(tol)
    if gap is None:
        gap = default_gap(roots[m])
    groups, centers = cluster_roots(roots[m], gap)
    if len(groups) < 2:
        raise ClustersCollide(f"roots at t0={t0!r} form a single cluster under gap {gap!r}")
    sizes = [len(g) for g in groups]
    a, b = split_window(roots, m, sizes, gap)
    grid = c.grid[a:b + 1]
    factors = []
    for g in groups:
        block = roots[a:b + 1, g[0]:g[-1] + 1]
        factors.append(CurveSamples(grid, poly._esym_batch(block)))
    return ClusterSplit(float(c.grid[m]), groups, centers, factors, (a, b), float(gap))


def product_coeffs(factors) -> np.ndarray:
    """Coefficient rows of the pointwise product of factor curves on a shared grid."""
    power = None
    for f in factors:
        pc = poly._power_from_a(f.coeffs)
        if power is None:
            power = pc
        else:
            power = np.stack([np.convolve(x, y) for x, y in zip(power, pc)])
    return poly._a_from_power(power)
