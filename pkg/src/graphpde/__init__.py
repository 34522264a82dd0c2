"""Linear and nonlinear Schrödinger and wave flows on finite graphs with Dirichlet boundary."""
from .evolution import Trajectory, solve_schrodinger, solve_wave
from .graph import (Domain, Graph, GraphError, GraphFunction, dirichlet_energy, gradient,
                    green_identity_residual, laplacian, laplacian_apply, mass_norm_sq, parse_graph)
from .nonlinear import (GroundStateProblem, NlsProblem, duhamel_picard, nehari_functional,
                        solve_ground_state, solve_nls)
from .spectral import assemble, eigendecompose, project, schrodinger_kernel

__all__ = [
    "Domain", "Graph", "GraphError", "GraphFunction", "GroundStateProblem", "NlsProblem",
    "Trajectory", "assemble", "dirichlet_energy", "duhamel_picard", "eigendecompose",
    "gradient", "green_identity_residual", "laplacian", "laplacian_apply", "mass_norm_sq",
    "nehari_functional", "parse_graph", "project", "schrodinger_kernel", "solve_ground_state",
    "solve_nls", "solve_schrodinger", "solve_wave",
]
