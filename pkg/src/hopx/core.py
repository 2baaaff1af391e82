"""Shared types and primal/dual evaluations for the pth-order proximal operator.

The problem solved throughout the package is

    min_x  F(x) = f(x) + sigma / (p + 1) * ||x - c||^(p + 1)

with ``f`` closed proper convex, ``sigma > 0`` and ``p >= 1``.  All norms
are Euclidean.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Union

import numpy as np

__all__ = [
    "CapabilityError",
    "HopProblem",
    "SolverConfig",
    "SolveReport",
    "TraceRecord",
    "as_vector",
    "dual_objective",
    "hop_objective",
    "ip_map",
    "power_norm_conjugate",
    "weak_duality_gap",
]


class CapabilityError(TypeError):
    """Raised when a function lacks an optional capability (conjugate, gradient)."""


def as_vector(x, name="x"):
    """Return `x` as a finite 1-D float64 array, raising ValueError otherwise."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries")
    return v


def ip_map(x, p):
    """Map ``x -> x / ||x||^(1 - 1/p)``, with ``0 -> 0``.

    This is the gradient of ``||x||^(1 + 1/p) / (1 + 1/p)``; the output
    norm equals ``||x||^(1/p)``.
    """
    x = np.asarray(x, dtype=np.float64)
    nrm = np.linalg.norm(x)
    if nrm == 0.0:
        return np.zeros_like(x)
    return x * nrm ** (1.0 / p - 1.0)


@dataclass(frozen=True)
class HopProblem:
    """The tuple ``(f, sigma, p, c)``."""

    f: Any
    sigma: float
    p: float
    c: np.ndarray

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if not self.p >= 1:
            raise ValueError(f"p must be >= 1, got {self.p}")
        c = as_vector(self.c, "c")
        if c.size != self.f.dim:
            raise ValueError(f"dim(c) = {c.size} does not match dim(f) = {self.f.dim}")
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "c", c)

    @property
    def dim(self):
        return self.c.size


Lambda0 = Union[str, np.ndarray]


@dataclass(frozen=True)
class SolverConfig:
    """Stopping rule and dual initialization for :func:`hopx.solver.solve_hop`.

    Parameters
    ----------
    max_iters : int
        Iteration cap.
    tol : float
        The solver stops once ``||lam^{k+1} - lam^k|| <= tol * max(1, ||lam^k||)``
        and ``||x^{k+1} - x^k|| <= tol * max(1, ||x^{k+1}||)``.
    zero_tol : float
        ``lam`` is treated as exactly zero when ``||lam|| <= zero_tol``.
    lambda0 : {"auto", "zero"} or array
        Initial dual point.  ``"auto"`` uses ``c - prox_{1 f}(c)``.
    """

    max_iters: int = 500
    tol: float = 1e-10
    zero_tol: float = 0.0
    lambda0: Lambda0 = "auto"

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not self.zero_tol >= 0:
            raise ValueError("zero_tol must be nonnegative")
        if isinstance(self.lambda0, str):
            if self.lambda0 not in ("auto", "zero"):
                raise ValueError(f"unknown lambda0 strategy {self.lambda0!r}")
        else:
            object.__setattr__(self, "lambda0", as_vector(self.lambda0, "lambda0"))


@dataclass(frozen=True)
class TraceRecord:
    """State after iteration `k` (``k = 0`` is the initial state)."""

    k: int
    lambda_norm: float
    t_k: float
    sigma_k: float
    objective: float
    kkt_residual: float
    elapsed_ms: float
    lam: np.ndarray = field(repr=False)
    x: np.ndarray = field(repr=False)


@dataclass
class SolveReport:
    x_final: np.ndarray
    lambda_final: np.ndarray
    iterations: int
    converged: bool
    trace: list = field(default_factory=list)
    # bisection runs attach their bracket history here
    bisection: Any = None

    @property
    def lambda_norms(self):
        return np.array([r.lambda_norm for r in self.trace])


def hop_objective(problem, x):
    """Evaluate ``f(x) + sigma/(p+1) ||x - c||^(p+1)``; may return +inf."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != problem.c.shape:
        raise ValueError(f"x has shape {x.shape}, expected {problem.c.shape}")
    r = np.linalg.norm(x - problem.c)
    return float(problem.f(x)) + problem.sigma / (problem.p + 1.0) * r ** (problem.p + 1.0)


def power_norm_conjugate(lam, sigma, p, c):
    """Conjugate of ``y -> sigma/(p+1) ||y - c||^(p+1)`` evaluated at `lam`."""
    lam = np.asarray(lam, dtype=np.float64)
    q = 1.0 + 1.0 / p
    return float(lam @ np.asarray(c, dtype=np.float64)
                 + sigma ** (-1.0 / p) / q * np.linalg.norm(lam) ** q)


def _conjugate(f, lam):
    if not getattr(f, "has_conjugate_value", False):
        raise CapabilityError(f"{type(f).__name__} does not provide a conjugate value")
    return float(f.conjugate(lam))


def dual_objective(problem, lam):
    """Dual objective ``f*(lam) - lam.c + sigma^(-1/p)/(1+1/p) ||lam||^(1+1/p)``.

    The dual is a minimization; its optimal value is minus the primal optimum.
    """
    lam = np.asarray(lam, dtype=np.float64)
    fstar = _conjugate(problem.f, lam)
    return fstar + power_norm_conjugate(-lam, problem.sigma, problem.p, problem.c)


def weak_duality_gap(problem, x, lam):
    """``hop_objective(x) + dual_objective(lam)``; nonnegative for any pair."""
    return hop_objective(problem, x) + dual_objective(problem, lam)
