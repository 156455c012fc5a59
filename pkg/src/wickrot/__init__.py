"""Pseudo-Riemannian Lie algebras: Cartan involutions, Wick rotations, minimal vectors, solitons."""
from .algebra import (
    LieAlgebra,
    ad,
    bracket,
    check_jacobi,
    derivation_algebra,
    is_automorphism,
    killing_form,
    structural_classify,
)
from .cartan import (
    Involution,
    cartan_decomposition,
    conjugate_lie_cartan,
    conjugate_metric_cartan,
    double_wick,
    is_lie_cartan,
    is_metric_cartan,
    wick_rotate,
)
from .io import emit_algebra, parse_algebra
from .metric import Metric, curvature, isometric_derivations, levi_civita, signature
from .minvec import (
    BracketVector,
    find_lie_cartan,
    infinitesimal_action,
    is_minimal,
    minimal_vector_flow,
    moment,
    search_lie_cartan,
    theta_norm,
)
from .soliton import check_theta_commutes, equivariance_report, soliton_decompose, soliton_wick_invariance

__version__ = "0.1.0"
