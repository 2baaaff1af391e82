"""Property suites run by ``hopx check``.

Each suite yields :class:`Outcome` records; a failing outcome carries a
JSON-serializable counterexample.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bisection import T_eval, T_sandwich_violations
from .core import HopProblem, SolverConfig, weak_duality_gap
from .functions import L1Norm, LinearFunction, PointIndicator, QuadraticFunction
from .instance import generate, serialize_instance
from .oracle import oracle_prox_gradient, oracle_quadratic_hop
from .solver import VerificationError, check_contraction, solve_hop

__all__ = ["Outcome", "PROPERTIES", "random_quadratic", "run_property"]


@dataclass
class Outcome:
    property: str
    case: str
    passed: bool
    detail: str = ""
    counterexample: dict = field(default_factory=dict)


def random_quadratic(rng, n, rank=None):
    """PSD quadratic ``M M^T / n`` with standard-normal `M` and `b`."""
    M = rng.standard_normal((n, n if rank is None else rank))
    return QuadraticFunction(M @ M.T / n, rng.standard_normal(n))


def _vec(v):
    return [float(x) for x in np.asarray(v).ravel()]


def _quad_cx(q, c, **extra):
    return {"A": [_vec(r) for r in q.A], "b": _vec(q.b), "c": _vec(c), **extra}


def check_contraction_suite(seed, n, count=5):
    rng = np.random.default_rng(seed)
    for i in range(count):
        q = random_quadratic(rng, n)
        c = rng.standard_normal(n)
        for p in (2.0, 3.0, 4.0):
            lam_star = oracle_quadratic_hop(q, 1.0, p, c).lambda_star
            direction = rng.standard_normal(n)
            direction /= np.linalg.norm(direction)
            for factor in (10.0, 0.1):
                lam0 = factor * np.linalg.norm(lam_star) * direction
                rep = solve_hop(HopProblem(q, 1.0, p, c), SolverConfig(tol=1e-12, lambda0=lam0))
                case = f"instance={i} p={p:g} lambda0_scale={factor:g}"
                try:
                    cert = check_contraction(rep.trace, lam_star, p)
                except VerificationError as exc:
                    yield Outcome("contraction", case, False, str(exc).splitlines()[0],
                                  _quad_cx(q, c, p=p, lambda0=_vec(lam0),
                                           violations=exc.violations))
                    continue
                worst = np.nanmax(cert.ratios) if cert.checked_iterations else 0.0
                yield Outcome("contraction", case, True,
                              f"side={cert.side} max_ratio={worst:.6g} factor={cert.factor:.6g}")


def check_lemma51_suite(seed, n, pairs=100):
    rng = np.random.default_rng(seed)
    fixtures = [
        ("quadratic", random_quadratic(rng, n), rng.standard_normal(n)),
        ("l1", L1Norm(n), 3.0 * rng.standard_normal(n)),
        ("linear", LinearFunction(rng.standard_normal(n)), rng.standard_normal(n)),
        ("point", PointIndicator(rng.standard_normal(n)), rng.standard_normal(n)),
    ]
    for name, f, c in fixtures:
        t = np.exp(rng.uniform(-5.0, 5.0, size=(pairs, 2)))
        t.sort(axis=1)
        bad = T_sandwich_violations(f, c, [tuple(r) for r in t])
        cx = {"kind": name, "c": _vec(c), "violations": [list(map(str, b)) for b in bad]}
        yield Outcome("lemma51", f"f={name} pairs={pairs}", not bad,
                      f"violations={len(bad)}", cx if bad else {})
    # the extreme fixtures attain the bounds
    a = rng.standard_normal(n)
    f, c = LinearFunction(a), rng.standard_normal(n)
    t1, t2 = 0.3, 2.7
    err = abs(T_eval(f, c, t2) - (t2 / t1) ** 2 * T_eval(f, c, t1))
    yield Outcome("lemma51", "linear attains upper bound", err <= 1e-10, f"err={err:.3g}")
    f = PointIndicator(rng.standard_normal(n))
    err = abs(T_eval(f, c, t2) - (t2 / t1) * T_eval(f, c, t1))
    yield Outcome("lemma51", "point attains lower bound", err <= 1e-10, f"err={err:.3g}")


def check_duality_suite(seed, n, count=200):
    rng = np.random.default_rng(seed)
    b, c = rng.standard_normal(n), rng.standard_normal(n)
    point = HopProblem(PointIndicator(b), 1.0, 2.0, c)
    # the point-indicator optimum is b with lambda = sigma ||b - c||^(p-1) (c - b)
    lam = np.linalg.norm(b - c) * (c - b)
    gap = weak_duality_gap(point, b, lam)
    yield Outcome("duality", "point optimum", abs(gap) <= 1e-10, f"gap={gap:.3g}",
                  {} if abs(gap) <= 1e-10 else {"b": _vec(b), "c": _vec(c), "gap": gap})

    q = random_quadratic(rng, n)
    for p in (2.0, 3.0):
        prob = HopProblem(q, 1.0, p, c)
        worst = np.inf
        for _ in range(count):
            g = weak_duality_gap(prob, rng.standard_normal(n) * 3, rng.standard_normal(n) * 3)
            worst = min(worst, g)
        yield Outcome("duality", f"quadratic random pairs p={p:g}", worst >= -1e-10,
                      f"min_gap={worst:.3g}", {} if worst >= -1e-10 else _quad_cx(q, c, p=p))
        o = oracle_quadratic_hop(q, 1.0, p, c)
        gap = weak_duality_gap(prob, o.x_star, o.lambda_star)
        ok = abs(gap) <= 1e-6
        yield Outcome("duality", f"quadratic oracle optimum p={p:g}", ok, f"gap={gap:.3g}",
                      {} if ok else _quad_cx(q, c, p=p, gap=gap))


def check_oracle_agreement_suite(seed, n, count=5):
    rng = np.random.default_rng(seed)
    m = min(n, 10)
    for i in range(count):
        for p in (2.0, 3.0):
            inst = generate("quadratic", m, int(rng.integers(2**31)), p=p)
            prob = inst.problem()
            x = solve_hop(prob, SolverConfig(tol=1e-10)).x_final
            xo = oracle_quadratic_hop(prob.f, 1.0, p, inst.c).x_star
            err = float(np.linalg.norm(x - xo))
            yield Outcome("oracle-agreement", f"quadratic instance={i} p={p:g}", err <= 1e-4,
                          f"err={err:.3g}", {} if err <= 1e-4 else {"instance": serialize_instance(inst)})
            inst = generate("l1", m, int(rng.integers(2**31)), p=p)
            prob = inst.problem()
            x = solve_hop(prob, SolverConfig(tol=1e-10)).x_final
            xo = oracle_prox_gradient(prob).x_star
            err = float(np.linalg.norm(x - xo))
            yield Outcome("oracle-agreement", f"l1 instance={i} p={p:g}", err <= 1e-4,
                          f"err={err:.3g}", {} if err <= 1e-4 else {"instance": serialize_instance(inst)})


PROPERTIES = {
    "contraction": check_contraction_suite,
    "lemma51": check_lemma51_suite,
    "duality": check_duality_suite,
    "oracle-agreement": check_oracle_agreement_suite,
}


def run_property(name, seed, n):
    return list(PROPERTIES[name](seed, n))
