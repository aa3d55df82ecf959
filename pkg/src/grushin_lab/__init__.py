"""Numerical geometry of the Grushin plane, its half-planes and their double."""

from .core import (
    Covector,
    GeodesicSpec,
    Point,
    SpaceKind,
    dilate,
    exp_jacobian,
    exp_map,
    geodesic_samples,
    hamiltonian,
    in_injectivity_domain,
    in_space,
    reflect_x,
    translate_y,
)
from .curvature import bakry_emery, fd_gauss_curvature, gauss_curvature, negativity_check, ricci
from .cutlocus import RaySpec, cut_locus, is_minimizing, meeting_point, minimality_time
from .distance import DistanceResult, GridOracleConfig, distance, graph_oracle_distance, invert_exp
from .errors import CutLocusPoint, DomainError, GrushinError, NotInImage, NumericalFailure
from .gluing import BorelSetSpec, Copy, GluedPoint, double_equivalence_residual, glued_distance, glued_measure
from .mcp import (
    ScanConfig,
    ScanReport,
    coeff_triple,
    pointwise_N,
    product_min_N,
    quadratic_form_check,
    scan_min_N,
    set_contraction_check,
    verify_mcp,
)
from .regions import Disk, Rectangle, parse_region

__version__ = "0.1.0"

__all__ = [
    "BorelSetSpec", "Copy", "Covector", "CutLocusPoint", "Disk", "DistanceResult", "DomainError",
    "GeodesicSpec", "GluedPoint", "GridOracleConfig", "GrushinError", "NotInImage", "NumericalFailure",
    "Point", "RaySpec", "Rectangle", "ScanConfig", "ScanReport", "SpaceKind", "bakry_emery",
    "coeff_triple", "cut_locus", "dilate", "distance", "double_equivalence_residual", "exp_jacobian",
    "exp_map", "fd_gauss_curvature", "gauss_curvature", "geodesic_samples", "glued_distance",
    "glued_measure", "graph_oracle_distance", "hamiltonian", "in_injectivity_domain", "in_space",
    "invert_exp", "is_minimizing", "meeting_point", "minimality_time", "negativity_check",
    "parse_region", "pointwise_N", "product_min_N", "quadratic_form_check", "reflect_x", "ricci",
    "scan_min_N", "set_contraction_check", "translate_y", "verify_mcp",
]
