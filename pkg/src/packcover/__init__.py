"""packcover: feasibility solver for mixed packing-covering LPs.

Decides whether some x in [0, 1]^n satisfies Px <= 1 and Cx >= 1 for
nonnegative sparse P and C, returning either an eps-approximate solution or
dual multipliers certifying infeasibility.  Ships with a width-reduction
preprocessor, a densest-subgraph density search built on the same solver,
and a line-oriented file format plus CLI.
"""

from .densest import (DsgConfig, DsgResult, Graph, binary_search_density,
                      build_dual_instance, exact_density_bruteforce)
from .errors import DomainError, ParseError, ShapeError
from .instance import (ColumnMap, FeasibilityCheck, MpcInstance,
                       NormalizedInstance, check_epsilon_feasible,
                       lift_solution, normalize, validate, verify_certificate)
from .oracle import OracleInput, OracleResult, oso, project_simplex_plus, x_step, yz_step
from .regularizer import (SCALE, RegularizerParams, build_params, gadget,
                          gadget_hessian_det, phi)
from .solver import (SaddleState, SolveReport, SolverConfig, SolveStatus,
                     apply_J, gap_trace, primal_dual_gap, solve)
from .sparse import SparseMatrix

__version__ = "0.1.0"

__all__ = [
    "SparseMatrix", "MpcInstance", "FeasibilityCheck", "ColumnMap",
    "NormalizedInstance", "validate", "normalize", "lift_solution",
    "check_epsilon_feasible", "verify_certificate", "SCALE",
    "RegularizerParams", "build_params", "gadget", "gadget_hessian_det",
    "phi", "OracleInput", "OracleResult", "project_simplex_plus", "x_step",
    "yz_step", "oso", "SaddleState", "SolverConfig", "SolveStatus",
    "SolveReport", "apply_J", "primal_dual_gap", "solve", "gap_trace",
    "Graph", "DsgConfig", "DsgResult", "build_dual_instance",
    "binary_search_density", "exact_density_bruteforce", "DomainError",
    "ShapeError", "ParseError",
]
