"""Convex functions with closed-form classical proximal operators.

Every function object exposes ``dim``, ``__call__`` (may return ``inf``),
``prox(t, c)`` computing ``argmin_y f(y) + ||y - c||^2 / (2 t)``, and the
capability flags ``has_subgradient``, ``has_conjugate_value`` and
``smooth``.  Objects are immutable after construction.
"""

from __future__ import annotations

import numpy as np

from .core import as_vector

__all__ = [
    "L1Norm",
    "LinearFunction",
    "PointIndicator",
    "ProxFunction",
    "ProxSolveError",
    "QuadraticFunction",
    "logsumexp_instance",
    "prox_l1",
    "prox_linear",
    "prox_point",
    "prox_quadratic",
]


class ProxSolveError(ArithmeticError):
    """The linear solve behind a quadratic prox missed its residual target."""


def _check_t(t):
    t = float(t)
    if not t >= 0:
        raise ValueError(f"prox parameter must be >= 0, got {t}")
    return t


def prox_l1(t, c):
    """Soft thresholding ``sign(c) * max(|c| - t, 0)``."""
    t = _check_t(t)
    c = np.asarray(c, dtype=np.float64)
    return np.sign(c) * np.maximum(np.abs(c) - t, 0.0)


def prox_linear(a, t, c):
    t = _check_t(t)
    return np.asarray(c, dtype=np.float64) - t * np.asarray(a, dtype=np.float64)


def prox_point(b, t, c):
    """Projection onto ``{b}``.

    The prox of an indicator does not depend on `t`; at ``t = 0`` the
    problem is ill-posed and `b` is returned all the same.
    """
    _check_t(t)
    return np.array(b, dtype=np.float64)


def prox_quadratic(q, t, c):
    """Solve ``(I + t A) y = c - t b`` through the cached eigendecomposition.

    The solve is carried out for the displacement ``y - c``, which satisfies
    ``(I + t A)(y - c) = -t (A c + b)``, so a point with ``A c + b = 0``
    is returned bit-exactly.
    """
    t = _check_t(t)
    c = np.asarray(c, dtype=np.float64)
    if t == 0.0:
        return c.copy()
    g = q.A @ c + q.b
    if not np.any(g):
        return c.copy()
    rhs = -t * g
    d = q.Q @ ((q.Q.T @ rhs) / (1.0 + t * q.eigenvalues))
    y = c + d
    # residual of the displacement equation; scaled by the size of the
    # terms being cancelled so large t * ||A|| does not trip it
    res = np.linalg.norm(d + t * (q.A @ d) - rhs)
    scale = np.linalg.norm(rhs) + t * q.norm2 * np.linalg.norm(d)
    if not np.isfinite(res) or res > 1e-10 * max(scale, np.finfo(float).tiny):
        raise ProxSolveError(f"quadratic prox residual {res:.3e} exceeds 1e-10 * {scale:.3e}")
    return y


class ProxFunction:
    """Base class for the function catalog."""

    has_subgradient = False
    has_conjugate_value = False
    smooth = False

    def __init__(self, dim):
        if int(dim) < 1:
            raise ValueError("dim must be a positive integer")
        self.dim = int(dim)

    def __call__(self, x):
        raise NotImplementedError

    def prox(self, t, c):
        raise NotImplementedError

    def grad(self, x):
        raise NotImplementedError(f"{type(self).__name__} is not differentiable")

    def conjugate(self, y):
        raise NotImplementedError(f"{type(self).__name__} has no conjugate value")


class QuadraticFunction(ProxFunction):
    """``f(x) = x.A.x / 2 + b.x`` with symmetric positive-semidefinite `A`.

    The eigendecomposition ``A = Q diag(eigenvalues) Q^T`` is computed once;
    each prox then costs two matrix-vector products.  Negative eigenvalues
    down to ``-1e-10 * max(1, max|eig|)`` are treated as round-off and
    clamped to zero.
    """

    has_subgradient = True
    has_conjugate_value = True
    smooth = True

    def __init__(self, A, b):
        A = np.array(A, dtype=np.float64)
        b = as_vector(b, "b")
        if A.ndim != 2 or A.shape != (b.size, b.size):
            raise ValueError(f"A must be {b.size}x{b.size}, got shape {A.shape}")
        if not np.all(np.isfinite(A)):
            raise ValueError("A has non-finite entries")
        scale = max(1.0, np.max(np.abs(A)))
        if np.max(np.abs(A - A.T)) > 1e-10 * scale:
            raise ValueError("A is not symmetric")
        A = 0.5 * (A + A.T)
        w, Q = np.linalg.eigh(A)
        wscale = max(1.0, np.max(np.abs(w)))
        if w[0] < -1e-10 * wscale:
            raise ValueError(f"A is not positive semidefinite (min eigenvalue {w[0]:.3e})")
        super().__init__(b.size)
        self.A = A
        self.b = b
        self.Q = Q
        self.eigenvalues = np.maximum(w, 0.0)
        self.norm2 = float(self.eigenvalues[-1])
        for arr in (self.A, self.b, self.Q, self.eigenvalues):
            arr.setflags(write=False)

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        return float(0.5 * x @ (self.A @ x) + self.b @ x)

    def grad(self, x):
        return self.A @ np.asarray(x, dtype=np.float64) + self.b

    def prox(self, t, c):
        return prox_quadratic(self, t, c)

    def conjugate(self, y):
        # f*(y) = (y - b).A^+.(y - b) / 2 when y - b lies in range(A), else +inf
        r = np.asarray(y, dtype=np.float64) - self.b
        z = self.Q.T @ r
        rank_tol = self.dim * np.finfo(float).eps * max(self.norm2, 1.0)
        null = self.eigenvalues <= rank_tol
        if np.any(np.abs(z[null]) > 1e-9 * max(1.0, np.linalg.norm(r))):
            return np.inf
        return float(0.5 * np.sum(z[~null] ** 2 / self.eigenvalues[~null]))


class L1Norm(ProxFunction):
    """``f(x) = ||x||_1``."""

    has_subgradient = True
    has_conjugate_value = True

    def __call__(self, x):
        return float(np.sum(np.abs(x)))

    def grad(self, x):
        # a subgradient; zero is chosen on the kinks
        return np.sign(np.asarray(x, dtype=np.float64))

    def prox(self, t, c):
        return prox_l1(t, c)

    def conjugate(self, y):
        # indicator of the unit inf-norm ball; 1e-9 absorbs round-off in
        # dual iterates that sit on the boundary
        return 0.0 if np.max(np.abs(y)) <= 1.0 + 1e-9 else np.inf


class LinearFunction(ProxFunction):
    """``f(x) = a.x``."""

    has_subgradient = True
    has_conjugate_value = True
    smooth = True

    def __init__(self, a):
        a = as_vector(a, "a")
        super().__init__(a.size)
        self.a = a
        self.a.setflags(write=False)

    def __call__(self, x):
        return float(self.a @ np.asarray(x, dtype=np.float64))

    def grad(self, x):
        return self.a.copy()

    def prox(self, t, c):
        return prox_linear(self.a, t, c)

    def conjugate(self, y):
        y = np.asarray(y, dtype=np.float64)
        if np.linalg.norm(y - self.a) <= 1e-12 * max(1.0, np.linalg.norm(self.a)):
            return 0.0
        return np.inf


class PointIndicator(ProxFunction):
    """Indicator of the single point ``{b}``.

    Evaluation treats points within ``1e-12 * max(1, ||b||)`` of `b` as
    feasible, so iterates that reconstruct `b` through floating-point
    arithmetic are not reported as infeasible.
    """

    has_conjugate_value = True

    def __init__(self, b):
        b = as_vector(b, "b")
        super().__init__(b.size)
        self.b = b
        self.b.setflags(write=False)

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        if np.linalg.norm(x - self.b) <= 1e-12 * max(1.0, np.linalg.norm(self.b)):
            return 0.0
        return np.inf

    def prox(self, t, c):
        return prox_point(self.b, t, c)

    def conjugate(self, y):
        return float(self.b @ np.asarray(y, dtype=np.float64))


def logsumexp_instance(a_rows, b_shift, c):
    """Second-order model of ``g(x) = log(sum_i exp(a_i.x - b_i))`` at `c`.

    Returns the quadratic with ``A`` the Hessian and ``b`` the gradient of
    `g` at `c`.  The softmax weights are computed with max-subtraction.

    Parameters
    ----------
    a_rows : (m, n) array
        The vectors ``a_i`` stacked as rows.
    b_shift : (m,) array
    c : (n,) array
    """
    a_rows = np.asarray(a_rows, dtype=np.float64)
    b_shift = as_vector(b_shift, "b_shift")
    c = as_vector(c, "c")
    if a_rows.ndim != 2 or a_rows.shape != (b_shift.size, c.size):
        raise ValueError(
            f"a_rows must have shape ({b_shift.size}, {c.size}), got {a_rows.shape}")
    if not np.all(np.isfinite(a_rows)):
        raise ValueError("a_rows has non-finite entries")
    z = a_rows @ c - b_shift
    w = np.exp(z - z.max())
    w /= w.sum()
    mean = w @ a_rows
    A = (a_rows.T * w) @ a_rows - np.outer(mean, mean)
    A = 0.5 * (A + A.T)
    return QuadraticFunction(A, mean)
