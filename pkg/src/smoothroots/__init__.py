"""Smooth root parametrizations for curves of hyperbolic polynomials."""

from .curve import (
    CurveSamples,
    center_curve,
    estimate_vanishing_order,
    from_root_functions,
    multiplicity_test,
    rescale_curve,
    split_curve,
)
from .diag import (
    SymMatrixCurve,
    charpoly_curve,
    divided_differences,
    eig_oracle,
    regularity_report,
)
from .errors import (
    ClustersCollide,
    GluingAmbiguous,
    InsufficientWindow,
    LemmaViolation,
    NoConvergence,
    NonUniformGrid,
    NotCentered,
    NotHyperbolic,
    OrderTooLow,
    SmoothRootsError,
    TrackingError,
    ZeroScale,
)
from .poly import MonicPoly, center, evaluate, from_roots, is_hyperbolic, roots_hyperbolic, sturm_chain
from .track import (
    DegeneracySets,
    LabeledTracks,
    assignment_tracks,
    derivative_labels_at_degeneracy,
    detect_degeneracy_sets,
    ordered_tracks,
    proof_tracks,
)

__version__ = "0.1.0"
