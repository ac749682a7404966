"""
Core package: expressions, graded algebra, forms, superconnections, transport
along paths and simplices, and the cobar construction.

No I/O here; scenarios are read in src.scenario and reported by src.main.
"""

from .cobar import BarWord, FormalSum, Letter, bar_d, compose_words, dg_functor_residual
from .expr import Chart, ScalarExpr, parse
from .forms import CubeForm, EndForm, ext_d, pullback, split_t, wedge
from .graded import GradedDims, GradedEndo, compose, op_norm, super_commutator
from .quadrature import QuadSpec
from .simplex import Simplex, ainfty_residual, check_face_lemmas, psi_simplex, theta, twisting_residual
from .superconn import Superconnection, curvature, flatness_residuals, gauge_transform, is_flat
from .transport import PathFamily, SmoothMap, check_stokes, transport_phi, transport_psi

__all__ = [
    "Chart", "ScalarExpr", "parse",
    "GradedDims", "GradedEndo", "compose", "op_norm", "super_commutator",
    "EndForm", "CubeForm", "wedge", "ext_d", "pullback", "split_t",
    "QuadSpec",
    "Superconnection", "curvature", "flatness_residuals", "gauge_transform", "is_flat",
    "SmoothMap", "PathFamily", "transport_phi", "transport_psi", "check_stokes",
    "Simplex", "theta", "psi_simplex", "twisting_residual", "ainfty_residual", "check_face_lemmas",
    "Letter", "BarWord", "FormalSum", "bar_d", "compose_words", "dg_functor_residual",
]
