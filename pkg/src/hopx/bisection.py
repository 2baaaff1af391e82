"""Scalar-equation solver for the ``p = 2`` case.

With ``T(t) = t ||prox_{t f}(c) - c||`` (continuous, nondecreasing,
``T(0) = 0`` and unbounded), the minimizer of
``f(x) + sigma/3 ||x - c||^3`` is ``prox_{t f}(c)`` at the root of
``T(t) = 1/sigma``.  The root is bracketed by doubling and then bisected.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .core import HopProblem, SolveReport, TraceRecord, hop_objective
from .solver import kkt_residual

__all__ = [
    "BisectionState",
    "StationaryCenter",
    "T_eval",
    "T_sandwich_violations",
    "check_T_sandwich",
    "find_bracket",
    "solve_bisection_p2",
]

STATIONARY_TOL = 1e-14
MAX_DOUBLINGS = 10**6


class StationaryCenter(Exception):
    """``0`` is in the subdifferential of ``f`` at ``c``; the answer is ``x = c``."""


@dataclass
class BisectionState:
    tau0: float
    tau1: float
    initial_width: float
    t_mid: list = field(default_factory=list)
    T_mid: list = field(default_factory=list)
    # bracket endpoints after each step
    brackets: list = field(default_factory=list)

    @property
    def width(self):
        return self.tau1 - self.tau0


def T_eval(f, c, t):
    """``t * ||prox_{t f}(c) - c||``, with ``T(0) = 0``."""
    t = float(t)
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0.0:
        return 0.0
    c = np.asarray(c, dtype=np.float64)
    return t * float(np.linalg.norm(f.prox(t, c) - c))


def is_stationary(f, c):
    c = np.asarray(c, dtype=np.float64)
    return float(np.linalg.norm(c - f.prox(1.0, c))) <= STATIONARY_TOL


def find_bracket(f, c, sigma, tau_init=1.0):
    """Double `tau_init` until ``T(tau) >= 1/sigma`` and return that tau.

    Raises
    ------
    StationaryCenter
        When ``c - prox_f(c)`` vanishes, in which case no root exists.
    """
    if not tau_init > 0:
        raise ValueError("tau_init must be positive")
    if is_stationary(f, c):
        raise StationaryCenter("0 is a subgradient of f at c")
    target = 1.0 / sigma
    tau = float(tau_init)
    for _ in range(MAX_DOUBLINGS):
        if T_eval(f, c, tau) >= target:
            return tau
        tau *= 2.0
        if not np.isfinite(tau):
            break
    raise ArithmeticError("could not bracket T(t) = 1/sigma")


def solve_bisection_p2(f, c, sigma, tol_t=1e-13, max_iters=200, tau_init=1.0):
    """Minimize ``f(x) + sigma/3 ||x - c||^3`` by bisection on ``T``.

    The bracket ``[0, tau]`` from :func:`find_bracket` is halved until its
    width is at most ``tol_t * max(1, t_mid)`` or `max_iters` midpoints
    have been taken.  The result is ``prox_{t_K f}(c)`` at the last
    midpoint ``t_K``; both endpoints are kept in ``report.bisection``.

    The trace uses the prox parameter for ``t_k`` and ``sigma_k`` and the
    subgradient ``(c - x_k) / t_k`` for the dual column.
    """
    c = np.asarray(c, dtype=np.float64)
    problem = HopProblem(f, sigma, 2.0, c)
    target = 1.0 / sigma

    def record(k, t, x, elapsed):
        lam = (c - x) / t if t > 0 else np.zeros_like(c)
        trace.append(TraceRecord(
            k=k, lambda_norm=float(np.linalg.norm(lam)), t_k=t, sigma_k=t,
            objective=hop_objective(problem, x), kkt_residual=kkt_residual(problem, x),
            elapsed_ms=elapsed, lam=lam, x=x))

    trace = []
    t0 = time.perf_counter()
    try:
        tau = find_bracket(f, c, sigma, tau_init)
    except StationaryCenter:
        record(0, 0.0, c.copy(), 1e3 * (time.perf_counter() - t0))
        return SolveReport(c.copy(), np.zeros_like(c), 0, True, trace)

    state = BisectionState(tau0=0.0, tau1=tau, initial_width=tau)
    x = f.prox(tau, c)
    record(0, tau, x, 1e3 * (time.perf_counter() - t0))

    converged = False
    k = 0
    t_mid = tau
    while k < max_iters:
        t_start = time.perf_counter()
        t_mid = 0.5 * (state.tau0 + state.tau1)
        x = f.prox(t_mid, c)
        T_val = t_mid * float(np.linalg.norm(x - c))
        if T_val > target:
            state.tau1 = t_mid
        else:
            state.tau0 = t_mid
        k += 1
        state.t_mid.append(t_mid)
        state.T_mid.append(T_val)
        state.brackets.append((state.tau0, state.tau1))
        record(k, t_mid, x, 1e3 * (time.perf_counter() - t_start))
        if state.width <= tol_t * max(1.0, t_mid):
            converged = True
            break

    report = SolveReport(x, trace[-1].lam, k, converged, trace)
    report.bisection = state
    return report


def T_sandwich_violations(f, c, pairs, slack=1e-9):
    """Pairs ``(t1, t2)`` violating ``(t2/t1) T(t1) <= T(t2) <= (t2/t1)^2 T(t1)``."""
    bad = []
    for t1, t2 in pairs:
        if not 0 < t1 <= t2:
            raise ValueError(f"pairs must satisfy 0 < t1 <= t2, got {(t1, t2)}")
        T1, T2 = T_eval(f, c, t1), T_eval(f, c, t2)
        ratio = t2 / t1
        if ratio * T1 > T2 + slack:
            bad.append((t1, t2, "lower", ratio * T1, T2))
        if T2 > ratio**2 * T1 + slack * ratio**2:
            bad.append((t1, t2, "upper", T2, ratio**2 * T1))
    return bad


def check_T_sandwich(f, c, pairs, slack=1e-9):
    """True iff every pair satisfies the linear/quadratic growth sandwich."""
    return not T_sandwich_violations(f, c, pairs, slack)
