"""Orthogonality graphs, state-independent contextuality and the supersinglet game."""

__version__ = "0.1.0"

from .linalg import GaussianRational, KVector, OrthoBasis, Ray, RaySet, parse_rays, format_rays
from .graph import OrthoGraph, build_orthogonality_graph, chromatic_number, ks_colorable
from .quantum import supersinglet
from .bell import build_game, build_bell_expression, evaluate_bell

__all__ = [
    "GaussianRational", "KVector", "OrthoBasis", "Ray", "RaySet", "parse_rays", "format_rays",
    "OrthoGraph", "build_orthogonality_graph", "chromatic_number", "ks_colorable",
    "supersinglet", "build_game", "build_bell_expression", "evaluate_bell",
]
