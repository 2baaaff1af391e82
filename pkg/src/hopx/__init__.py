"""Solvers for the pth-order proximal operator built on classical prox calls."""

from .core import (
    CapabilityError,
    HopProblem,
    SolveReport,
    SolverConfig,
    TraceRecord,
    dual_objective,
    hop_objective,
    ip_map,
    power_norm_conjugate,
    weak_duality_gap,
)
from .functions import (
    L1Norm,
    LinearFunction,
    PointIndicator,
    ProxFunction,
    QuadraticFunction,
    logsumexp_instance,
)
from .solver import check_contraction, kkt_residual, run_hoppa, solve_hop

__version__ = "0.1.0"
