"""Reference solvers for the pth-order proximal problem.

Neither solver touches the dual variable or ``ip_map``; they work on the
primal stationarity condition directly so agreement with
:func:`hopx.solver.solve_hop` is independent evidence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import hop_objective

__all__ = ["OracleResult", "oracle_prox_gradient", "oracle_quadratic_hop"]

_EPS = np.finfo(np.float64).eps


@dataclass(frozen=True)
class OracleResult:
    x_star: np.ndarray
    lambda_star: np.ndarray
    t_star: float
    residual: float


def _finish(x, sigma, p, c, residual):
    d = c - x
    r = float(np.linalg.norm(d))
    lam = sigma * r ** (p - 1.0) * d if r > 0 else np.zeros_like(c)
    return OracleResult(x_star=x, lambda_star=lam, t_star=r, residual=residual)


def oracle_quadratic_hop(q, sigma, p, c, tol=1e-10, max_bisections=2000):
    """Solve the problem for quadratic ``f`` by bisection on ``r = ||x - c||``.

    Stationarity gives ``(A + sigma r^(p-1) I)(x - c) = -(A c + b)``.  The
    map ``r -> ||x(r) - c|| - r`` is strictly decreasing, so its root is
    bracketed and bisected until the bracket can no longer shrink or its
    width drops below ``tol * 1e-6 * max(1, r)``.  Each evaluation uses a
    dense LU solve, not the eigendecomposition cached on `q`.
    """
    A = np.asarray(q.A, dtype=np.float64)
    b = np.asarray(q.b, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    n = c.size
    g = A @ c + b
    eye = np.eye(n)

    def residual(x):
        d = x - c
        return float(np.linalg.norm(A @ x + b + sigma * np.linalg.norm(d) ** (p - 1.0) * d))

    if not np.any(g):
        return _finish(c.copy(), sigma, p, c, residual(c))

    def disp(r):
        return np.linalg.solve(A + sigma * r ** (p - 1.0) * eye, -g)

    def phi(r):
        try:
            d = disp(r)
        except np.linalg.LinAlgError:
            return np.inf
        return float(np.linalg.norm(d)) - r

    if p == 1.0:
        # the shift does not depend on r: a single solve
        x = c + disp(1.0)
        return _finish(x, sigma, p, c, residual(x))

    lo, hi = 0.0, 1.0
    while phi(hi) >= 0:
        lo, hi = hi, 2.0 * hi
        if not np.isfinite(hi):
            raise ArithmeticError("could not bracket the radius")
    for _ in range(max_bisections):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= 1e-6 * tol * max(1.0, hi):
            break
        if phi(mid) >= 0:
            lo = mid
        else:
            hi = mid
    # pick whichever endpoint has the smaller stationarity residual
    cands = [c + disp(r) for r in (lo, hi) if r > 0]
    x = min(cands, key=residual)
    return _finish(x, sigma, p, c, residual(x))


def oracle_prox_gradient(problem, x0=None, steps=100_000, eta=1.0):
    """Forward-backward splitting on ``f + sigma/(p+1) ||x - c||^(p+1)``.

    The smooth part has gradient ``sigma ||x - c||^(p-1) (x - c)``.  A step
    that increases the objective is rejected and `eta` halved.  Iteration
    stops after `steps` accepted or rejected steps, or once an accepted
    step has gradient-mapping norm ``||x_new - x|| / eta`` below
    ``1e-13 * max(1, ||x||)``.  The best iterate by objective is
    returned with its prox fixed-point residual; ties at round-off level go
    to the last iterate.
    """
    f, sigma, p, c = problem.f, problem.sigma, problem.p, problem.c
    x = np.array(c if x0 is None else x0, dtype=np.float64)

    def grad_h(y):
        d = y - c
        return sigma * np.linalg.norm(d) ** (p - 1.0) * d

    fx = hop_objective(problem, x)
    best, f_best = x, fx
    for _ in range(steps):
        x_new = f.prox(eta, x - eta * grad_h(x))
        f_new = hop_objective(problem, x_new)
        # differences below round-off in F are not evidence of overshoot
        if f_new > fx + 4 * _EPS * max(1.0, abs(fx)):
            eta *= 0.5
            if eta < 1e-300:
                break
            continue
        moved = np.linalg.norm(x_new - x)
        x, fx = x_new, f_new
        if fx <= f_best:
            best, f_best = x, fx
        # gradient-mapping norm at round-off level
        if moved <= 1e-13 * eta * max(1.0, np.linalg.norm(x)):
            break

    # the objective cannot rank iterates closer than ~sqrt(eps) apart, so
    # the last iterate wins unless the best one is clearly lower
    if f_best < fx - 4 * _EPS * max(1.0, abs(fx)):
        x = best
    res = float(np.linalg.norm(f.prox(1.0, x - grad_h(x)) - x))
    return _finish(x, sigma, p, c, res)
