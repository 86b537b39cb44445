"""QAOA for MaxCut with Trotterized-annealing initialization.

Statevector simulation with adjoint gradients, a BFGS optimizer, graph
ensembles and the experiment drivers behind the ``tqa-qaoa`` command.
"""
__version__ = "0.1.0"

from .estimators import QAOAMaxCut, TQATimeStep
from .exceptions import (
    CapacityError,
    DegenerateError,
    DegreeParityError,
    DimensionMismatch,
    InfeasibleError,
    NonFiniteError,
    NotDescentError,
    ParseError,
    TqaQaoaError,
)
from .graphs import (
    CostDiagonal,
    Ensemble,
    Graph,
    build_cost_diagonal,
    generate_erdos_renyi,
    generate_graph,
    generate_regular3,
    load_graph,
    save_graph,
    s_metric,
)
from .optimizer import BFGSResult, OptimizationRecord, OptimizerConfig, Status, minimize, optimize_qaoa
from .protocols import SymmetryDomain, TqaSchedule, angle_distance, canonicalize, random_angles, tqa_angles
from .simulator import (
    AngleSchedule,
    approximation_ratio,
    energy_and_gradient,
    expectation,
    prepare_qaoa_state,
    qaoa_energy,
)

__all__ = [
    "AngleSchedule", "BFGSResult", "CapacityError", "CostDiagonal", "DegenerateError",
    "DegreeParityError", "DimensionMismatch", "Ensemble", "Graph", "InfeasibleError",
    "NonFiniteError", "NotDescentError", "OptimizationRecord", "OptimizerConfig", "ParseError",
    "QAOAMaxCut", "Status", "SymmetryDomain", "TQATimeStep", "TqaQaoaError", "TqaSchedule",
    "angle_distance", "approximation_ratio", "build_cost_diagonal", "canonicalize",
    "energy_and_gradient", "expectation", "generate_erdos_renyi", "generate_graph",
    "generate_regular3", "load_graph", "minimize", "optimize_qaoa", "prepare_qaoa_state",
    "qaoa_energy", "random_angles", "s_metric", "save_graph", "tqa_angles",
]
