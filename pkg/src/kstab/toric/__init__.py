"""Polarized toric varieties as lattice polytopes, toric test configurations as
PL convex functions, and the equivariant models they determine."""

from .functions import MaxAffine, NodeValues, function_from_json, second_differences, triangulation_from_json
from .integrate import crease_decomposition, integrate_boundary, integrate_pl, integrate_product
from .model import OracleFit, build_model, discrete_weight_oracle, lattice_weight_sums
from .polytope import (
    LatticePolytope,
    Triangulation,
    boundary_volume,
    facet_description,
    lattice_points,
    refined_triangulation,
    volume,
)

__all__ = [
    "LatticePolytope", "Triangulation", "MaxAffine", "NodeValues", "OracleFit",
    "boundary_volume", "build_model", "crease_decomposition", "discrete_weight_oracle",
    "facet_description", "function_from_json", "integrate_boundary", "integrate_pl",
    "integrate_product", "lattice_points", "lattice_weight_sums", "refined_triangulation",
    "second_differences", "triangulation_from_json", "volume",
]
