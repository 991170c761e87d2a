"""Command-line front end.

Exit status: 0 success, 1 bad configuration, 2 non-hyperbolic input,
3 tracker failure.  Every option overrides one entry of ``DEFAULTS``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from . import track
from .curve import CurveSamples, center_curve
from .diag import DEFAULT_JUMP_THRESH, SymMatrixCurve, charpoly_curve, regularity_report
from .errors import GluingAmbiguous, NotHyperbolic, SmoothRootsError
from .families import get_family, list_families
from .poly import DEFAULT_TOL

EXIT_OK, EXIT_CONFIG, EXIT_NONHYPERBOLIC, EXIT_TRACKER = 0, 1, 2, 3
MIN_INTERVALS = 8

# Single table of defaults.  None means "derived from the data".
DEFAULTS = {
    "input": None,
    "family": None,
    "grid": (-1.0, 1.0, 2000),  # t_min, t_max, number of intervals M
    "method": "proof",
    "tol": DEFAULT_TOL,  # root solver / hyperbolicity tolerance
    "eps_e": None,  # total-collision threshold on |a_2|; None: local |second difference of a_2| / 8
    "eps_f": track.DEFAULT_EPS_F,  # derivative-label coincidence threshold
    "gap": None,  # cluster separation for splitting; None: widest root gap
    "jump_thresh": DEFAULT_JUMP_THRESH,  # derivative jump threshold for the report
    "out": None,  # tracks CSV; None: stdout
    "report": None,  # JSON report; None: no report
    "refine": 0,  # dyadic refinement levels for the report (0: none)
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    input: Optional[str] = DEFAULTS["input"]
    family: Optional[str] = DEFAULTS["family"]
    grid: tuple = DEFAULTS["grid"]
    method: str = DEFAULTS["method"]
    tol: float = DEFAULTS["tol"]
    eps_e: Optional[float] = DEFAULTS["eps_e"]
    eps_f: float = DEFAULTS["eps_f"]
    gap: Optional[float] = DEFAULTS["gap"]
    jump_thresh: float = DEFAULTS["jump_thresh"]
    out: Optional[str] = DEFAULTS["out"]
    report: Optional[str] = DEFAULTS["report"]
    refine: int = DEFAULTS["refine"]

    def validate(self):
        if (self.input is None) == (self.family is None):
            raise ConfigError("exactly one of --input and --family is required")
        tmin, tmax, M = self.grid
        if not tmin < tmax:
            raise ConfigError("grid needs t_min < t_max")
        if int(M) != M or M < MIN_INTERVALS:
            raise ConfigError(f"grid needs an integer M >= {MIN_INTERVALS}")
        for name in ("tol", "eps_e", "eps_f", "gap", "jump_thresh"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ConfigError(f"{name} must be positive")
        parse_method(self.method)
        if self.refine < 0 or self.refine == 1:
            raise ConfigError("--refine takes 0 (off) or at least 2 levels")
        if self.refine and self.input is not None:
            raise ConfigError("--refine needs a builtin family (the curve must be regenerated)")


def parse_method(method: str):
    """'ordered' | 'proof' | 'assignment:K' -> (name, order)."""
    if method in ("ordered", "proof"):
        return method, None
    name, _, k = method.partition(":")
    if name == "assignment" and k in ("0", "1", "2"):
        return name, int(k)
    raise ConfigError(f"unknown method {method!r}; use ordered, proof or assignment:0|1|2")


# -- file formats ----------------------------------------------------------------


def read_curve_csv(path) -> CurveSamples:
    """Coefficient curve (``t,a1,...,an``) or lower-triangle matrix curve (``t,m11,m21,...``)."""
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    if not rows:
        raise ConfigError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    try:
        data = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float)
    except ValueError as e:
        raise ConfigError(f"{path}: {e}") from None
    if data.ndim != 2 or data.shape[0] == 0 or data.shape[1] != len(header):
        raise ConfigError(f"{path}: rows do not match the header")
    if header[0] != "t" or len(header) < 2:
        raise ConfigError(f"{path}: header must start with t")
    grid, vals = data[:, 0], data[:, 1:]
    if all(h.startswith("a") for h in header[1:]):
        if header[1:] != [f"a{k}" for k in range(1, len(header))]:
            raise ConfigError(f"{path}: coefficient columns must be a1..an in order")
        return CurveSamples(grid, vals)
    if all(h.startswith("m") for h in header[1:]):
        q = len(header) - 1
        d = int(round((np.sqrt(8 * q + 1) - 1) / 2))
        if d * (d + 1) // 2 != q:
            raise ConfigError(f"{path}: {q} matrix columns is not a triangular number")
        return charpoly_curve(SymMatrixCurve(d, grid, vals))
    raise ConfigError(f"{path}: cannot tell coefficient columns (a*) from matrix columns (m*)")


def format_tracks_csv(grid, values) -> str:
    buf = io.StringIO()
    n = values.shape[0]
    buf.write(",".join(["t"] + [f"y{i}" for i in range(1, n + 1)]) + "\n")
    for m, t in enumerate(grid):
        buf.write(",".join("%.17g" % x for x in (t, *values[:, m])) + "\n")
    return buf.getvalue()


def read_tracks_csv(path):
    """Inverse of ``format_tracks_csv``: (grid, values (n, M+1))."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1:].T.copy()


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _write(path, text):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as f:
            f.write(text)


# -- pipeline -------------------------------------------------------------------


def _grid(cfg: RunConfig, level: int = 0) -> np.ndarray:
    tmin, tmax, M = cfg.grid
    return np.linspace(tmin, tmax, int(M) * 2**level + 1)


def load_curve(cfg: RunConfig, level: int = 0) -> CurveSamples:
    if cfg.input is not None:
        return read_curve_csv(cfg.input)
    fam = get_family(cfg.family)
    return fam.curve(_grid(cfg, level))


def run_tracker(c: CurveSamples, cfg: RunConfig) -> track.LabeledTracks:
    """Center, track, un-center."""
    cc = center_curve(c)
    name, order = parse_method(cfg.method)
    if name == "ordered":
        tr = track.ordered_tracks(cc, cfg.tol)
    elif name == "assignment":
        tr = track.assignment_tracks(cc, order, cfg.tol)
    else:
        tr = track.proof_tracks(cc, cfg.tol, cfg.eps_e, cfg.eps_f, gap=cfg.gap)
    return tr.shifted(cc.centered_shift)


def _degeneracy_summary(tr) -> Optional[dict]:
    sets = tr.info.get("degeneracy")
    if sets is None:
        return None
    t = tr.grid
    return {
        "E": [float(t[i]) for i in sets.E],
        "Eprime": [float(t[i]) for i in sets.Eprime],
        "F": [float(t[i]) for i in sets.F],
        "Fprime": [float(t[i]) for i in sets.Fprime],
        "w": sets.w,
        "eps_F": sets.eps_F,
    }


def run(cfg: RunConfig) -> int:
    """Execute one configuration; returns the exit status."""
    report = {"config": {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(cfg).items()}}

    def fail(code, kind, msg, **extra):
        print(f"error: {msg}", file=sys.stderr)
        report.update(status="error", exit_code=code, error=dict(type=kind, message=msg, **extra))
        if cfg.report is not None:
            _write(cfg.report, _dump_json(report))
        return code

    try:
        cfg.validate()
        c = load_curve(cfg)
        if cfg.family is not None:
            report["family"] = {"name": cfg.family, "definition": get_family(cfg.family).definition}
    except (ConfigError, ValueError) as e:
        return fail(EXIT_CONFIG, "ConfigError", str(e))

    bad = c.first_non_hyperbolic(cfg.tol)
    if bad is not None:
        t_bad = float(c.grid[bad])
        return fail(EXIT_NONHYPERBOLIC, "NotHyperbolic", f"non-real roots at t={t_bad!r} (index {bad})", t=t_bad, index=bad)

    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", GluingAmbiguous)
            tr = run_tracker(c, cfg)
            rep = regularity_report(
                tr,
                cfg.jump_thresh,
                generator=(lambda j: run_tracker(load_curve(cfg, j), cfg)) if cfg.refine else None,
                levels=max(cfg.refine, 2),
            )
    except NotHyperbolic as e:
        return fail(EXIT_NONHYPERBOLIC, "NotHyperbolic", str(e), index=e.index)
    except (SmoothRootsError, ValueError) as e:
        return fail(EXIT_TRACKER, type(e).__name__, str(e))

    _write(cfg.out, format_tracks_csv(tr.grid, tr.values))
    report.update(
        status="ok",
        exit_code=EXIT_OK,
        degree=tr.n,
        points=int(tr.grid.size),
        method=tr.method,
        regularity=rep.as_dict(),
        degeneracy=_degeneracy_summary(tr),
        ambiguous=[float(tr.grid[j]) for j in tr.info.get("ambiguous", [])],
        warnings=sorted({str(w.message) for w in caught if issubclass(w.category, GluingAmbiguous)}),
    )
    if cfg.report is not None:
        _write(cfg.report, _dump_json(report))
    return EXIT_OK


# -- argument parsing ------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage errors are configuration errors (exit 2 is reserved for non-hyperbolic input)
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="smoothroots", description="Track the roots of a curve of hyperbolic polynomials.")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--input", metavar="PATH", help="CSV with header t,a1,...,an or t,m11,m21,...")
    src.add_argument("--family", metavar="NAME[:PARAMS]", help="builtin family (see --list-families)")
    p.add_argument("--list-families", action="store_true", help="print the builtin families and exit")
    p.add_argument("--grid", nargs=3, metavar=("MIN", "MAX", "M"), help="family grid (default -1 1 2000)")
    p.add_argument("--method", default=DEFAULTS["method"], help="ordered | assignment:K | proof (default proof)")
    p.add_argument("--tol", type=float, default=DEFAULTS["tol"])
    p.add_argument("--eps-e", type=float, default=DEFAULTS["eps_e"], help="total-collision threshold on |a2|")
    p.add_argument("--eps-f", type=float, default=DEFAULTS["eps_f"], help="derivative-label coincidence threshold")
    p.add_argument("--gap", type=float, default=DEFAULTS["gap"], help="cluster separation for splitting")
    p.add_argument("--jump-thresh", type=float, default=DEFAULTS["jump_thresh"])
    p.add_argument("--out", metavar="PATH", help="tracks CSV (default stdout)")
    p.add_argument("--report", metavar="PATH", help="JSON report")
    p.add_argument("--refine", type=int, default=DEFAULTS["refine"], metavar="L", help="dyadic refinement levels")
    return p


def config_from_args(ns) -> RunConfig:
    grid = DEFAULTS["grid"]
    if ns.grid is not None:
        if ns.input is not None:
            raise ConfigError("--grid applies to --family only; file input carries its own grid")
        try:
            grid = (float(ns.grid[0]), float(ns.grid[1]), float(ns.grid[2]))
        except ValueError:
            raise ConfigError("--grid takes MIN MAX M") from None
    return RunConfig(
        input=ns.input,
        family=ns.family,
        grid=grid,
        method=ns.method,
        tol=ns.tol,
        eps_e=ns.eps_e,
        eps_f=ns.eps_f,
        gap=ns.gap,
        jump_thresh=ns.jump_thresh,
        out=ns.out,
        report=ns.report,
        refine=ns.refine,
    )


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    if ns.list_families:
        print(list_families())
        return EXIT_OK
    try:
        cfg = config_from_args(ns)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    if cfg.grid[2] == int(cfg.grid[2]):
        cfg.grid = (cfg.grid[0], cfg.grid[1], int(cfg.grid[2]))
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
