"""Sparse polytope projections via component-averaged Dykstra iterations.

Core pieces: constraint systems and their independent components (model),
the Dykstra-family solvers (engine, backed by compiled or numpy kernels),
projection Jacobians (jacobian), sparse vector clipping (clipping),
brute-force oracles (oracle), seeded problem generators (generate),
projected-gradient descent (descent), and randomised property suites
(verify). The ``cadproj`` CLI ties them together.
"""

from . import kernels
from .clipping import ClipReport, clip, clip_chain, constraint_alpha
from .engine import (
    ProjectionResult,
    SolverConfig,
    cad_raw,
    cad_scaled,
    dykstra_simultaneous,
    dykstra_two_set,
    project,
    project_halfspace,
)
from .generate import (
    GeneratorConfig,
    ProblemInstance,
    gen_constraints,
    gen_initial_point,
    gen_instance,
    gen_lp,
    gen_quadratic,
    gen_transmit_power,
    load_instance,
    save_instance,
)
from .jacobian import (
    JacobianOperator,
    exact_jacobian,
    finite_difference_jacobian,
    surrogate_jacobian,
)
from .model import (
    BatchedSystem,
    ConstraintPartition,
    SparseConstraintSystem,
    ValidationReport,
    concat,
    partition,
    validate,
)
from .oracle import feasibility, hit_and_run, lp_vertex_optimum, project_bruteforce

__version__ = "0.1.0"

__all__ = [
    "BatchedSystem",
    "ClipReport",
    "ConstraintPartition",
    "GeneratorConfig",
    "JacobianOperator",
    "ProblemInstance",
    "ProjectionResult",
    "SolverConfig",
    "SparseConstraintSystem",
    "ValidationReport",
    "cad_raw",
    "cad_scaled",
    "clip",
    "clip_chain",
    "concat",
    "constraint_alpha",
    "dykstra_simultaneous",
    "dykstra_two_set",
    "exact_jacobian",
    "feasibility",
    "finite_difference_jacobian",
    "gen_constraints",
    "gen_initial_point",
    "gen_instance",
    "gen_lp",
    "gen_quadratic",
    "gen_transmit_power",
    "hit_and_run",
    "kernels",
    "load_instance",
    "lp_vertex_optimum",
    "partition",
    "project",
    "project_bruteforce",
    "project_halfspace",
    "save_instance",
    "surrogate_jacobian",
    "validate",
    "__version__",
]
