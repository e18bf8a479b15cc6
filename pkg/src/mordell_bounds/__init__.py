"""Explicit height bounds for rational points on curves in powers of an elliptic curve."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    InconsistentDataError,
    InvalidInputError,
    OutOfTheoremRangeError,
    RankDeficientError,
    ResourceLimitError,
    SingularCurveError,
)
from .elliptic import EllipticCurveQ, add_points, make_point, scalar_mul, torsion_subgroup  # noqa: E402
from .heights import canonical_height, h2_height, height_gap_check, weil_height  # noqa: E402
from .cm_lattice import CMOrder, KLattice, orthogonal_complement, successive_minima  # noqa: E402
from .bounds import (  # noqa: E402
    CurveDescriptor,
    bezout_C0,
    general_bound,
    poly_curve_bound,
    sharp_constants,
    sharpness_compare,
    transverse_bound,
)
from .search import MWInput, search_rational_points  # noqa: E402

__all__ = [
    "CMOrder", "CurveDescriptor", "EllipticCurveQ", "InconsistentDataError", "InvalidInputError",
    "KLattice", "MWInput", "OutOfTheoremRangeError", "RankDeficientError", "ResourceLimitError",
    "SingularCurveError", "add_points", "bezout_C0", "canonical_height", "general_bound",
    "h2_height", "height_gap_check", "make_point", "orthogonal_complement", "poly_curve_bound",
    "scalar_mul", "search_rational_points", "sharp_constants", "sharpness_compare",
    "successive_minima", "torsion_subgroup", "transverse_bound", "weil_height",
]
