"""Axisymmetric Stokes flow with Taylor-Hood elements on graded meshes.

The modules follow the pipeline of a convergence study:

``domain``      meridian polygons and their corners
``mesh``        initial triangulations and kappa-graded refinement
``grading``     corner exponents and grading factors
``spaces``      Lagrange and Taylor-Hood spaces
``assembly``    the weighted bilinear forms and the saddle-point system
``solver``      direct and MINRES solvers
``norms``       weighted norms, prolongation and rate tables
``interp``      quasi-interpolation by local weighted projections
``experiment``  the level-by-level experiment driver (used by ``cli``)
"""
from .assembly import SaddleSystem, assemble_system, pressure_mass_matrix
from .domain import BUILTIN_NAMES, MeridianDomain, VertexKind, build_domain, builtin_domain, load_domain
from .errors import *  # noqa: F401,F403
from .experiment import ExperimentConfig, ExperimentReport, emit_report, run_experiment
from .grading import (auto_kappas, corner_exponent_2d, corner_roots, eta_for_vertex, kappa_from_eta,
                      vertex_exponents)
from .interp import interpolate_minus, interpolate_plus, project_nodewise
from .mesh import (GradingPlan, MeshHierarchy, TriMesh, build_hierarchy, grading_diagnostics,
                   initial_triangulation, kappa_refine, read_mesh, write_mesh)
from .norms import (NormKind, NormSpec, Poly2D, RateTable, dilation_scaling_check, level_errors,
                    prolong, prolong_solution, weighted_norm)
from .solver import FieldSolution, solve_saddle
from .spaces import DiscreteField, LagrangeSpace, TaylorHoodSpace, build_space

__version__ = "0.1.0"
