"""Uniform polytope sampling by the geodesic walk on the log-barrier manifold.

The package splits into: polytope/log-barrier local geometry (`polytope`),
closed-form differential geometry (`geometry`), a Chebyshev collocation ODE
solver (`collocation`), the Metropolis-filtered walk and the Dikin baseline
(`walk`), verification oracles and sample diagnostics (`diagnostics`), the
Physarum LP dynamics demo (`physarum`) and a file-based CLI (`cli`).
"""

__version__ = "0.1.0"

from .collocation import (CollocationConfig, NonContractionError, PolyCurve,
                          chebyshev_nodes, collocation_first_order,
                          collocation_multistep, collocation_second_order,
                          lagrange_integral_matrix)
from .geometry import (CurvatureOperator, GeodesicSpec, auxiliary_V,
                       christoffel_action, frame_curvature_matrix, geodesic_rhs,
                       hilbert_distance, orthonormal_frame,
                       parallel_transport_rhs, ricci, riemann_inner)
from .physarum import (PhysarumProblem, load_physarum_problem, physarum_rhs,
                       physarum_solve)
from .polytope import (InteriorError, ManifoldPoint, Polytope, PolytopeError,
                       TangentVector, analytic_center, box, contains, drift,
                       hypercube, load_polytope, log_det_metric, make_point,
                       metric_inner, simplex)
from .walk import (ChainStats, WalkConfig, WalkStep, dikin_walk_step,
                   logdet_dexp, metropolis_step, propose, run_chain,
                   sample_gaussian_direction, transition_log_density)

__all__ = [
    "CollocationConfig", "NonContractionError", "PolyCurve", "chebyshev_nodes",
    "collocation_first_order", "collocation_multistep",
    "collocation_second_order", "lagrange_integral_matrix",
    "CurvatureOperator", "GeodesicSpec", "auxiliary_V", "christoffel_action",
    "frame_curvature_matrix", "geodesic_rhs", "hilbert_distance",
    "orthonormal_frame", "parallel_transport_rhs", "ricci", "riemann_inner",
    "PhysarumProblem", "load_physarum_problem", "physarum_rhs", "physarum_solve",
    "InteriorError", "ManifoldPoint", "Polytope", "PolytopeError",
    "TangentVector", "analytic_center", "box", "contains", "drift", "hypercube",
    "load_polytope", "log_det_metric", "make_point", "metric_inner", "simplex",
    "ChainStats", "WalkConfig", "WalkStep", "dikin_walk_step", "logdet_dexp",
    "metropolis_step", "propose", "run_chain", "sample_gaussian_direction",
    "transition_log_density",
]
