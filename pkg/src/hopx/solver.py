"""Dual fixed-point solver for the pth-order proximal operator.

Each iteration costs one classical prox of ``f``::

    t_k       = ||lam_k||^(1/p - 1)
    sigma_k   = sigma^(-1/p) * t_k
    lam_{k+1} = (c - prox_{sigma_k f}(c)) / sigma_k
    x_{k+1}   = c - sigma^(-1/p) * ip_map(lam_{k+1}, p)

The dual norms ``||lam_k||`` move monotonically toward ``||lam*||`` and
their log-distance contracts by ``1 - 1/p`` per step.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .core import HopProblem, SolveReport, SolverConfig, TraceRecord, hop_objective, ip_map

__all__ = [
    "ContractionCertificate",
    "NonFiniteIterateError",
    "VerificationError",
    "check_contraction",
    "kkt_residual",
    "run_hoppa",
    "solve_hop",
]

log = logging.getLogger(__name__)

# never divide by a prox parameter smaller than this
_MIN_STEP = 1e-300


class NonFiniteIterateError(FloatingPointError):
    def __init__(self, k, what="lambda"):
        super().__init__(f"non-finite {what} at iteration {k}")
        self.iteration = k


class VerificationError(AssertionError):
    """A contraction certificate could not be issued."""

    def __init__(self, violations):
        lines = "\n".join(f"  {v}" for v in violations[:20])
        super().__init__(f"{len(violations)} violation(s):\n{lines}")
        self.violations = violations


def kkt_residual(problem, x):
    """Optimality residual of `x`.

    For smooth ``f`` this is the gradient norm
    ``||grad f(x) + sigma ||x - c||^(p-1) (x - c)||``.  Otherwise it is the
    prox fixed-point residual
    ``||prox_f(x - sigma ||x - c||^(p-1) (x - c)) - x||``.
    """
    x = np.asarray(x, dtype=np.float64)
    d = x - problem.c
    r = np.linalg.norm(d)
    h = problem.sigma * r ** (problem.p - 1.0) * d if r > 0 else np.zeros_like(d)
    f = problem.f
    if f.smooth:
        return float(np.linalg.norm(f.grad(x) + h))
    return float(np.linalg.norm(f.prox(1.0, x - h) - x))


def _auto_lambda0(problem):
    return problem.c - problem.f.prox(1.0, problem.c)


def _initial_lambda(problem, config):
    if isinstance(config.lambda0, str):
        if config.lambda0 == "zero":
            return np.zeros(problem.dim)
        return _auto_lambda0(problem)
    lam = np.array(config.lambda0, dtype=np.float64)
    if lam.shape != problem.c.shape:
        raise ValueError(f"lambda0 has shape {lam.shape}, expected {problem.c.shape}")
    return lam


def _steps(problem, lam_norm):
    if lam_norm == 0.0:
        return 0.0, 0.0
    t = lam_norm ** (1.0 / problem.p - 1.0)
    return t, problem.sigma ** (-1.0 / problem.p) * t


def solve_hop(problem, config=None):
    """Compute the pth-order prox of ``problem.f`` at ``problem.c``.

    Parameters
    ----------
    problem : HopProblem
    config : SolverConfig, optional

    Returns
    -------
    SolveReport
        ``trace`` holds one record per iteration plus the initial state.

    Notes
    -----
    A zero dual iterate is intercepted before the division: if
    ``c - prox_f(c) == 0`` the minimizer is ``c`` itself and the solver
    stops; otherwise the dual point is restarted from ``c - prox_f(c)``.
    """
    config = config or SolverConfig()
    c, p, sigma = problem.c, problem.p, problem.sigma
    scale = sigma ** (-1.0 / p)

    def record(k, lam, x, t, s, elapsed):
        trace.append(TraceRecord(
            k=k, lambda_norm=float(np.linalg.norm(lam)), t_k=t, sigma_k=s,
            objective=hop_objective(problem, x), kkt_residual=kkt_residual(problem, x),
            elapsed_ms=elapsed, lam=lam, x=x))

    def stationary():
        # 0 in subdiff f(c) iff c is a fixed point of the prox
        return np.linalg.norm(_auto_lambda0(problem)) <= config.zero_tol

    trace = []
    t0 = time.perf_counter()
    lam = _initial_lambda(problem, config)
    if not np.all(np.isfinite(lam)):
        raise NonFiniteIterateError(0)
    x = c - scale * ip_map(lam, p)
    t, s = _steps(problem, np.linalg.norm(lam))
    record(0, lam, x, t, s, 1e3 * (time.perf_counter() - t0))

    if np.linalg.norm(lam) <= config.zero_tol:
        if stationary():
            return SolveReport(c.copy(), np.zeros_like(c), 0, True, trace)
        lam = _auto_lambda0(problem)

    converged = False
    k = 0
    while k < config.max_iters:
        t_start = time.perf_counter()
        lam_norm = np.linalg.norm(lam)
        t, s = _steps(problem, lam_norm)
        if s <= _MIN_STEP:
            raise NonFiniteIterateError(k, "prox parameter (underflow)")
        lam_new = (c - problem.f.prox(s, c)) / s
        if not np.all(np.isfinite(lam_new)):
            raise NonFiniteIterateError(k + 1)
        x = c - scale * ip_map(lam_new, p)
        k += 1
        new_norm = np.linalg.norm(lam_new)
        if new_norm <= config.zero_tol and stationary():
            lam_new = np.zeros_like(c)
            x = c.copy()
            record(k, lam_new, x, t, s, 1e3 * (time.perf_counter() - t_start))
            lam = lam_new
            converged = True
            break
        x_prev = trace[-1].x
        record(k, lam_new, x, t, s, 1e3 * (time.perf_counter() - t_start))
        step = np.linalg.norm(lam_new - lam)
        # x moves like ||lam||^(1/p) near lam = 0, so the primal step is
        # tested too
        x_step = np.linalg.norm(x - x_prev)
        lam = lam_new
        if (step <= config.tol * max(1.0, lam_norm)
                and x_step <= config.tol * max(1.0, np.linalg.norm(x))):
            converged = True
            break
        if new_norm <= config.zero_tol:
            log.debug("zero dual iterate at k=%d without stationarity; restarting", k)
            lam = _auto_lambda0(problem)

    if not converged:
        log.info("solve_hop hit max_iters=%d", config.max_iters)
    x_final = trace[-1].x
    return SolveReport(x_final, lam, k, converged, trace)


@dataclass
class ContractionCertificate:
    """Per-iteration log-distance ratios of a dual trace.

    ``ratios[k - 1]`` is ``ln(||lam_k||/||lam*||) / ln(||lam_{k-1}||/||lam*||)``
    or ``nan`` where the ratio is not numerically meaningful (the previous
    iterate already sits at ``||lam*||`` to within ``log_floor``).
    """

    ratios: list
    factor: float
    side: str
    checked_iterations: int = 0
    terminal_bounds: list = field(default_factory=list)


def check_contraction(trace, lambda_star, p, *, atol=1e-10, rtol=1e-8, log_floor=1e-6):
    """Verify the linear contraction of ``||lam_k||`` toward ``||lam*||``.

    Checked for each iteration:

    * the norm sandwich: ``||lam_k||`` monotone and on the same side of
      ``||lam*||`` as ``||lam_0||`` (slack `atol`);
    * the one-step bound ``||lam_{k+1}|| <= ||lam_k||^(1-1/p) ||lam*||^(1/p)``
      (reversed below ``||lam*||``);
    * the log-distance ratio lies in ``[0, 1 - 1/p]`` (slack `rtol`) and
      ``ln`` distances satisfy the cumulative ``(1 - 1/p)^k`` bound;
    * the terminal error bound on ``||lam_N - lam*||`` at every `N`.

    Parameters
    ----------
    trace : sequence of TraceRecord
        As produced by :func:`solve_hop`; ``trace[0]`` is the initial state.
    lambda_star : array
        Dual optimum from an independent reference.
    p : float
    atol : float
        Absolute slack on norm comparisons, scaled by ``max(1, ||lam*||)``.
    rtol : float
        Slack on the log-ratio test.
    log_floor : float
        Ratios whose denominator ``|ln(||lam_{k-1}||/||lam*||)|`` is below
        this are not formed; the iterate is numerically at ``||lam*||``.

    Raises
    ------
    VerificationError
        Listing every violated inequality.
    """
    lam_star = np.asarray(lambda_star, dtype=np.float64)
    ns = float(np.linalg.norm(lam_star))
    if ns == 0.0:
        raise ValueError("contraction certificates need lambda* != 0")
    q = 1.0 - 1.0 / p
    norms = [float(np.linalg.norm(r.lam)) for r in trace]
    if norms[0] == 0.0:
        raise ValueError("trace starts at lambda = 0")
    side = "above" if norms[0] >= ns else "below"
    slack = atol * max(1.0, ns)
    logs = [math.log(n / ns) if n > 0 else -math.inf for n in norms]
    sign = 1.0 if side == "above" else -1.0
    L0 = sign * logs[0]

    violations = []
    ratios = []
    bounds = []
    checked = 0
    for k in range(1, len(norms)):
        prev, cur = norms[k - 1], norms[k]
        # monotone toward ||lam*|| and never crossing it
        if side == "above":
            if cur > prev + slack:
                violations.append(f"k={k}: ||lam_k||={cur!r} > ||lam_(k-1)||={prev!r}")
            if cur < ns - slack:
                violations.append(f"k={k}: ||lam_k||={cur!r} < ||lam*||={ns!r}")
            one_step = prev ** q * ns ** (1.0 - q)
            if cur > one_step + slack:
                violations.append(f"k={k}: one-step bound {cur!r} > {one_step!r}")
        else:
            if cur < prev - slack:
                violations.append(f"k={k}: ||lam_k||={cur!r} < ||lam_(k-1)||={prev!r}")
            if cur > ns + slack:
                violations.append(f"k={k}: ||lam_k||={cur!r} > ||lam*||={ns!r}")
            one_step = prev ** q * ns ** (1.0 - q)
            if cur < one_step - slack:
                violations.append(f"k={k}: one-step bound {cur!r} < {one_step!r}")

        # log-distance contraction, in the variable that is positive on this side
        Lk, Lprev = sign * logs[k], sign * logs[k - 1]
        if Lprev > log_floor:
            r = Lk / Lprev
            ratios.append(r)
            checked += 1
            if r > q + rtol or r < -rtol:
                violations.append(f"k={k}: log ratio {r!r} outside [0, {q}]")
        else:
            ratios.append(math.nan)
        cumulative = q ** k * L0
        # an absolute slack on norms is slack / ||lam*|| in log space
        if Lk > cumulative + slack / ns:
            violations.append(f"k={k}: ln distance {Lk!r} > (1-1/p)^k ln0 = {cumulative!r}")

        # terminal error bound at N = k
        err = float(np.linalg.norm(trace[k].lam - lam_star))
        if side == "above":
            b1 = ns * math.expm1(q ** (k - 1) * L0)
            b2 = (norms[0] - ns) * q ** (k - 1)
        else:
            b1 = q * ns * math.expm1(q ** (k - 1) * L0)
            b2 = ns / norms[0] * (ns - norms[0]) * q ** k
        bounds.append((err, b1, b2))
        if err > b1 + slack:
            violations.append(f"N={k}: ||lam_N - lam*||={err!r} > first bound {b1!r}")
        if b1 > b2 + slack:
            violations.append(f"N={k}: first bound {b1!r} > second bound {b2!r}")

    if violations:
        raise VerificationError(violations)
    return ContractionCertificate(ratios=ratios, factor=q, side=side,
                                  checked_iterations=checked, terminal_bounds=bounds)


def run_hoppa(f, sigma, p, x0, outer_iters, inner_config=None):
    """High-order proximal point method ``x_{k+1} = prox^p_{f/sigma}(x_k)``.

    Returns the trajectory ``[x_0, x_1, ..., x_K]``.
    """
    x = np.asarray(x0, dtype=np.float64).copy()
    path = [x]
    for _ in range(outer_iters):
        report = solve_hop(HopProblem(f, sigma, p, x), inner_config)
        x = report.x_final
        path.append(x)
    return path
