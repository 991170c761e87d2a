"""Builtin example curves, addressed by strings such as ``avoided:0.1``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .curve import CurveSamples
from .diag import SymMatrixCurve, charpoly_curve

RANDSYM_HARMONICS = 2


@dataclass(frozen=True)
class Family:
    name: str
    definition: str
    coeffs: Callable[[np.ndarray], np.ndarray]
    matrices: Optional[Callable[[np.ndarray], SymMatrixCurve]] = None
    hyperbolic: bool = True

    def curve(self, grid) -> CurveSamples:
        grid = np.asarray(grid, dtype=float)
        if self.matrices is not None:
            return charpoly_curve(self.matrices(grid))
        return CurveSamples(grid, self.coeffs(grid))


def _cols(*cols):
    return np.column_stack(cols)


def randsym_matrices(d: int, seed: int, grid) -> SymMatrixCurve:
    """A(t) = B_0 + sum_j cos(j*pi*t) B_j + sin(j*pi*t) C_j with Gaussian symmetric B_j, C_j."""
    grid = np.asarray(grid, dtype=float)
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((2 * RANDSYM_HARMONICS + 1, d, d))
    B = (B + B.transpose(0, 2, 1)) / 2
    A = np.broadcast_to(B[0], (grid.size, d, d)).copy()
    for j in range(1, RANDSYM_HARMONICS + 1):
        A += np.cos(j * np.pi * grid)[:, None, None] * B[2 * j - 1]
        A += np.sin(j * np.pi * grid)[:, None, None] * B[2 * j]
    return SymMatrixCurve.from_matrices(grid, A)


FAMILY_HELP = {
    "sym2": "x^2 - t^2, roots {-t, t}",
    "triple": "roots {t, t, -2t}, coefficients (0, -3t^2, -2t^3)",
    "avoided:EPS": "x^2 - (t^2 + EPS^2), roots +-sqrt(t^2 + EPS^2)",
    "randsym:D:SEED": "characteristic polynomial of a random D x D symmetric trigonometric matrix curve",
    "nonreal": "x^2 + 1, no real roots (rejection test)",
    "shifted": "sym2 moved by t: a1 = 2t, a2 = 0, roots {0, 2t}",
}


def _int(s: str, what: str) -> int:
    try:
        return int(s)
    except ValueError:
        raise ValueError(f"{what} must be an integer, got {s!r}") from None


def get_family(name_params: str) -> Family:
    """Resolve a family string (``name`` or ``name:param:...``)."""
    name, *params = name_params.split(":")
    if name in ("sym2", "triple", "nonreal", "shifted") and params:
        raise ValueError(f"family {name!r} takes no parameters")
    if name == "sym2":
        return Family(name_params, FAMILY_HELP["sym2"], lambda t: _cols(0 * t, -t**2))
    if name == "triple":
        return Family(name_params, FAMILY_HELP["triple"], lambda t: _cols(0 * t, -3 * t**2, -2 * t**3))
    if name == "nonreal":
        return Family(name_params, FAMILY_HELP["nonreal"], lambda t: _cols(0 * t, 1 + 0 * t), hyperbolic=False)
    if name == "shifted":
        return Family(name_params, FAMILY_HELP["shifted"], lambda t: _cols(2 * t, 0 * t))
    if name == "avoided":
        if len(params) != 1:
            raise ValueError("usage: avoided:EPS")
        eps = float(params[0])
        return Family(name_params, f"x^2 - (t^2 + {eps!r}^2)", lambda t: _cols(0 * t, -(t**2 + eps**2)))
    if name == "randsym":
        if len(params) != 2:
            raise ValueError("usage: randsym:D:SEED")
        d, seed = _int(params[0], "D"), _int(params[1], "SEED")
        if d < 1:
            raise ValueError("D must be at least 1")
        mats = lambda t: randsym_matrices(d, seed, t)  # noqa: E731
        return Family(name_params, FAMILY_HELP["randsym:D:SEED"], lambda t: charpoly_curve(mats(t)).coeffs, mats)
    raise ValueError(f"unknown family {name!r}; known: {', '.join(FAMILY_HELP)}")


def list_families() -> str:
    width = max(map(len, FAMILY_HELP))
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in FAMILY_HELP.items())
