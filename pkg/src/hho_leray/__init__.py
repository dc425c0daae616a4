"""Hybrid high-order discretization of degenerate quasilinear diffusion.

Element and face polynomial unknowns of degree k on triangular meshes, a
gradient/potential reconstruction pair, and a damped Newton solver with
static condensation for fluxes of p-type growth, p in (1, 2].  The harness
reproduces convergence studies whose rates depend on whether the problem
degenerates on the computational domain.
"""

from .analysis import (ErrorRecord, RegimeReport, degeneracy_numbers,
                       energy_error, eoc)
from .assembly_solver import (NewtonError, NewtonOptions, NewtonReport,
                              apply_dirichlet, build_assembly, condense,
                              condense_and_solve, newton_solve, recover,
                              solve_condensed)
from .cases import CASE_NAMES, CaseSpec, case_catalog, get_case, \
    source_from_manufactured
from .flux import (FluxModel, StabModel, check_prolongement,
                   default_stab_model, framing_constants, sigma,
                   sigma_jacobian, stab_derivative, stab_value)
from .harness import (ACCEPTANCE_CRITERIA, CSV_COLUMNS, RunConfig,
                      acceptance, emit_table, render_csv, run_study,
                      write_csv)
from .local_ops import (HybridVector, LocalOperators, boundary_residual,
                        gather_local, gradient_reconstruction, interpolate,
                        potential_reconstruction, project_element,
                        project_face, seminorm_1ph, seminorm_w1q)
from .mesh import (Mesh, MeshError, build_structured_triangular, load_mesh,
                   mesh_stats, save_mesh)
from .polyquad import (ElementBasis, FaceBasis, QuadRule, element_quadrature,
                       eval_basis, eval_basis_grad, face_quadrature,
                       mass_condition, n_modes)

__version__ = "0.1.0"

__all__ = [
    "ACCEPTANCE_CRITERIA", "CASE_NAMES", "CSV_COLUMNS", "CaseSpec",
    "ElementBasis", "ErrorRecord", "FaceBasis", "FluxModel", "HybridVector",
    "LocalOperators", "Mesh", "MeshError", "NewtonError", "NewtonOptions",
    "NewtonReport", "QuadRule", "RegimeReport", "RunConfig", "StabModel",
    "acceptance", "apply_dirichlet", "boundary_residual", "build_assembly",
    "build_structured_triangular", "case_catalog", "check_prolongement",
    "condense", "condense_and_solve", "default_stab_model",
    "degeneracy_numbers", "element_quadrature", "emit_table", "energy_error",
    "eoc", "eval_basis", "eval_basis_grad", "face_quadrature",
    "framing_constants", "gather_local", "get_case",
    "gradient_reconstruction", "interpolate", "load_mesh", "mass_condition",
    "mesh_stats", "n_modes", "newton_solve", "potential_reconstruction",
    "project_element", "project_face", "recover", "render_csv", "run_study",
    "save_mesh", "seminorm_1ph", "seminorm_w1q", "sigma", "sigma_jacobian",
    "solve_condensed", "source_from_manufactured", "stab_derivative",
    "stab_value", "write_csv",
]
