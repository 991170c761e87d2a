"""Discrete regularity diagnostics and an eigenvalue oracle.

``divided_differences`` and ``regularity_report`` probe how smooth a set of
labeled tracks looks on its grid.  ``charpoly_curve`` and ``eig_oracle``
turn a curve of symmetric matrices into a polynomial curve and into
independently computed eigenvalue tracks, so the root solver can be
cross-checked against Jacobi rotations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .curve import CurveSamples, grid_spacing
from .errors import NoConvergence, NonUniformGrid
from .track import LabeledTracks

MAX_DIM = 64
JACOBI_MAX_SWEEPS = 100
REFINE_LEVELS = 4
DEFAULT_JUMP_THRESH = 0.1


def _uniform_h(grid) -> float:
    h = grid_spacing(grid)
    if h is None:
        raise NonUniformGrid("a uniform grid is required")
    return h


def divided_differences(tracks: LabeledTracks, k: int) -> np.ndarray:
    """Forward differences of order k divided by h**k, shape (n, M+1-k)."""
    if k not in (1, 2, 3):
        raise ValueError("k must be 1, 2 or 3")
    h = _uniform_h(tracks.grid)
    if tracks.grid.size <= k:
        raise ValueError(f"need more than {k} grid points")
    return np.diff(tracks.values, n=k, axis=1) / h**k


@dataclass
class Jump:
    t: float  # grid point where the first divided difference changes
    index: int
    magnitude: float
    rows: list

    def as_dict(self):
        return {"t": self.t, "index": self.index, "magnitude": self.magnitude, "rows": self.rows}


@dataclass
class RegularityReport:
    method: str
    h: float
    jump_thresh: float
    s: dict  # {k: global sup of |k-th divided difference|}
    s_rows: dict  # {k: per-row sups}
    jumps: list
    max_d1_gap: float
    slopes: Optional[dict] = None  # {k: fitted exponent of s_k vs h}
    levels: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "method": self.method,
            "h": self.h,
            "jump_thresh": self.jump_thresh,
            "s": {str(k): v for k, v in self.s.items()},
            "s_rows": {str(k): list(v) for k, v in self.s_rows.items()},
            "jumps": [j.as_dict() for j in self.jumps],
            "max_d1_gap": self.max_d1_gap,
            "slopes": None if self.slopes is None else {str(k): v for k, v in self.slopes.items()},
            "levels": self.levels,
        }


def _sups(tracks: LabeledTracks):
    s, rows = {}, {}
    for k in (1, 2, 3):
        if tracks.grid.size > k:
            d = np.abs(divided_differences(tracks, k))
            r = d.max(axis=1) if d.size else np.zeros(tracks.n)
        else:
            r = np.zeros(tracks.n)
        rows[k] = [float(x) for x in r]
        s[k] = float(r.max()) if r.size else 0.0
    return s, rows


def find_jumps(tracks: LabeledTracks, jump_thresh: float):
    """Grid points where adjacent first divided differences differ by more than the threshold.

    Returns the jumps (one per location, over all rows) and the largest
    adjacent gap seen anywhere.
    """
    d1 = divided_differences(tracks, 1)
    gaps = np.abs(np.diff(d1, axis=1))  # gap j sits at grid index j + 1
    max_gap = float(gaps.max()) if gaps.size else 0.0
    jumps = []
    for j in np.flatnonzero(np.any(gaps > jump_thresh, axis=0)):
        rows = np.flatnonzero(gaps[:, j] > jump_thresh)
        jumps.append(Jump(float(tracks.grid[j + 1]), int(j + 1), float(gaps[rows, j].max()), [int(r) for r in rows]))
    return jumps, max_gap


def _fit_slopes(hs, svals):
    out = {}
    lh = np.log(hs)
    for k in (1, 2, 3):
        s = np.array([v[k] for v in svals])
        if np.all(s > 0):
            out[k] = float(np.polyfit(lh, np.log(s), 1)[0])
        else:
            out[k] = None  # identically zero at some level: no meaningful exponent
    return out


def regularity_report(
    tracks: LabeledTracks,
    jump_thresh: float = DEFAULT_JUMP_THRESH,
    generator: Optional[Callable[[int], LabeledTracks]] = None,
    levels: int = REFINE_LEVELS,
) -> RegularityReport:
    """Sup norms, derivative jumps and (optionally) refinement slopes.

    ``generator(j)`` must return tracks of the same family on a grid with
    spacing h / 2**j; it is called for j = 0 .. levels-1 and the slopes are
    least-squares fits of log s_k against log h.
    """
    if jump_thresh <= 0:
        raise ValueError("jump_thresh must be positive")
    h = _uniform_h(tracks.grid)
    s, s_rows = _sups(tracks)
    jumps, max_gap = find_jumps(tracks, jump_thresh)
    slopes, level_info = None, []
    if generator is not None:
        if levels < 2:
            raise ValueError("need at least 2 refinement levels")
        hs, svals = [], []
        for j in range(levels):
            tj = generator(j)
            sj, _ = _sups(tj)
            _, gj = find_jumps(tj, jump_thresh)
            hs.append(_uniform_h(tj.grid))
            svals.append(sj)
            level_info.append({"h": hs[-1], "s": {str(k): v for k, v in sj.items()}, "max_d1_gap": gj})
        slopes = _fit_slopes(np.array(hs), svals)
    return RegularityReport(tracks.method, h, float(jump_thresh), s, s_rows, jumps, max_gap, slopes, level_info)


# -- symmetric matrix curves -------------------------------------------------


def _tril_index(d: int):
    """Lower-triangle (row, col) pairs in column-major order: m11, m21, ..., md1, m22, ..."""
    return [(i, j) for j in range(d) for i in range(j, d)]


@dataclass(frozen=True, eq=False)
class SymMatrixCurve:
    d: int
    grid: np.ndarray
    entries: np.ndarray  # (M+1, d(d+1)/2), lower triangle column-major

    def __post_init__(self):
        grid = np.array(np.ravel(self.grid), dtype=float)
        ent = np.atleast_2d(np.array(self.entries, dtype=float))
        if ent.shape != (grid.size, self.d * (self.d + 1) // 2):
            raise ValueError(f"entries must have shape ({grid.size}, {self.d * (self.d + 1) // 2})")
        if grid.size > 1 and np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        grid.setflags(write=False)
        ent.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "entries", ent)

    @classmethod
    def from_matrices(cls, grid, mats) -> "SymMatrixCurve":
        mats = np.asarray(mats, dtype=float)
        d = mats.shape[1]
        idx = _tril_index(d)
        return cls(d, grid, np.stack([mats[:, i, j] for i, j in idx], axis=1))

    def matrices(self) -> np.ndarray:
        """Full symmetric matrices, shape (M+1, d, d)."""
        A = np.zeros((self.grid.size, self.d, self.d))
        for c, (i, j) in enumerate(_tril_index(self.d)):
            A[:, i, j] = self.entries[:, c]
            A[:, j, i] = self.entries[:, c]
        return A

    def norms(self) -> np.ndarray:
        """Spectral norm of A(t_m) at each grid point."""
        return np.linalg.norm(self.matrices(), ord=2, axis=(1, 2))


def _check_dim(d: int):
    if d > MAX_DIM:
        raise ValueError(f"dimension {d} exceeds the supported maximum {MAX_DIM}")


def charpoly_curve(m: SymMatrixCurve) -> CurveSamples:
    """Characteristic polynomial curve by the Faddeev-LeVerrier trace recursion.

    With B_0 = I, p_k = -tr(A B_{k-1}) / k and B_k = A B_{k-1} + p_k I we get
    det(xI - A) = x^d + p_1 x^(d-1) + ... + p_d, so a_k = (-1)^k p_k.
    """
    _check_dim(m.d)
    A = m.matrices()
    d = m.d
    eye = np.eye(d)
    B = np.broadcast_to(eye, A.shape).copy()
    coeffs = np.empty((A.shape[0], d))
    for k in range(1, d + 1):
        AB = A @ B
        p = -np.trace(AB, axis1=1, axis2=2) / k
        coeffs[:, k - 1] = (-1) ** k * p
        B = AB + p[:, None, None] * eye
    return CurveSamples(m.grid, coeffs)


def _jacobi_eigvals(A: np.ndarray, max_sweeps: int = JACOBI_MAX_SWEEPS) -> np.ndarray:
    """Eigenvalues of a batch of symmetric matrices (K, d, d) by cyclic Jacobi rotations."""
    A = np.array(A, dtype=float)
    K, d, _ = A.shape
    if d == 1:
        return A[:, :, 0].copy()
    scale = np.maximum(np.sqrt(np.sum(A * A, axis=(1, 2))), np.finfo(float).tiny)
    off_mask = ~np.eye(d, dtype=bool)
    rows = np.arange(K)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.where(off_mask, A * A, 0.0), axis=(1, 2)))
        if np.all(off <= 4 * d * np.finfo(float).eps * scale):
            return np.sort(np.diagonal(A, axis1=1, axis2=2), axis=1)
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = A[:, p, q]
                act = np.abs(apq) > 1e-300
                app, aqq = A[:, p, p], A[:, q, q]
                theta = np.where(act, (aqq - app) / (2 * np.where(act, apq, 1.0)), 0.0)
                tt = np.sign(theta) / (np.abs(theta) + np.hypot(theta, 1.0))
                tt = np.where(theta == 0, 1.0, tt)
                tt = np.where(act, tt, 0.0)
                c = 1 / np.sqrt(tt * tt + 1)
                s = tt * c
                # A <- J^T A J with J the rotation in the (p, q) plane
                Ap, Aq = A[:, :, p].copy(), A[:, :, q].copy()
                A[:, :, p] = c[:, None] * Ap - s[:, None] * Aq
                A[:, :, q] = s[:, None] * Ap + c[:, None] * Aq
                Ap, Aq = A[:, p, :].copy(), A[:, q, :].copy()
                A[:, p, :] = c[:, None] * Ap - s[:, None] * Aq
                A[:, q, :] = s[:, None] * Ap + c[:, None] * Aq
                A[rows, p, q] = np.where(act, 0.0, A[rows, p, q])
                A[rows, q, p] = A[rows, p, q]
    raise NoConvergence(f"Jacobi iteration did not converge in {max_sweeps} sweeps")


def eig_oracle(m: SymMatrixCurve) -> LabeledTracks:
    """Ascending eigenvalues at every grid point, as ordered tracks."""
    _check_dim(m.d)
    ev = _jacobi_eigvals(m.matrices())
    vals = ev.T.copy()
    vals.setflags(write=False)
    perms = np.tile(np.arange(m.d), (m.grid.size, 1))
    perms.setflags(write=False)
    return LabeledTracks(m.grid, vals, "eig_oracle", perms, {})
