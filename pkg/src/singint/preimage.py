"""Closest-point preimage of an evaluation point on the surface of a curved triangle.

Minimizes E(x) = |F(x) - x0|^2 over all of R^2 (not just the reference
triangle) with Newton's method, an eigenvalue shift for indefinite Hessians
and Armijo backtracking.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import CurvedTriangle

MAX_ITER = 50
SHIFT_BETA = 1e-3
ARMIJO_C = 1e-4
BACKTRACK = 0.5
MAX_BACKTRACKS = 60
POLISH_STEPS = 2
MAX_POLISH = 8


class NewtonConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class SingularityLocation:
    x0hat: np.ndarray
    h: float
    e_h: np.ndarray | None
    iterations: int
    final_gradient_norm: float
    converged: bool = True

    @classmethod
    def on_surface(cls, tri: CurvedTriangle, x0hat) -> "SingularityLocation":
        """Location for x0 = F(x0hat) exactly (h = 0), no search needed."""
        return cls(np.array(x0hat, dtype=float), 0.0, None, 0, 0.0)


def cost_grad_hessian(tri: CurvedTriangle, x0, x):
    """E, grad E and Hessian of E = |F(x) - x0|^2 at a single point x."""
    jt = tri.jet(np.asarray(x, dtype=float), 2)
    e = jt.F - np.asarray(x0, dtype=float)
    e1, e2 = jt.d1
    e11, e12, e22 = jt.d2
    E = _cost(e)
    grad = 2 * np.array([e @ e1, e @ e2])
    H = 2 * np.array(
        [
            [e @ e11 + e1 @ e1, e @ e12 + e1 @ e2],
            [e @ e12 + e1 @ e2, e @ e22 + e2 @ e2],
        ]
    )
    return E, grad, H


def _cost(e):
    # single formula for E so Armijo tests and reported values agree bitwise
    return float(e @ e)


def _cost_noise(tri, x0, E):
    # rounding in F(x) - x0 is ~eps (|x0| + diam) per component
    return 8 * np.finfo(float).eps * np.sqrt(E) * (np.linalg.norm(x0) + tri.diameter)


def _min_eigenvalue(H):
    tr = H[0, 0] + H[1, 1]
    diff = H[0, 0] - H[1, 1]
    return 0.5 * (tr - np.hypot(diff, 2 * H[0, 1]))


def _polish(tri, x0, x, E, g, H, steps=POLISH_STEPS):
    # extra full Newton steps, kept while |grad E| shrinks (E itself is flat to
    # roundoff here); drives the gradient from the stopping tolerance to roundoff
    for _ in range(steps):
        if _min_eigenvalue(H) <= 0:
            break
        x_new = x - np.linalg.solve(H, g)
        E_new, g_new, H_new = cost_grad_hessian(tri, x0, x_new)
        if not np.linalg.norm(g_new) < np.linalg.norm(g):
            break
        x, E, g, H = x_new, E_new, g_new, H_new
    return x


def _newton(tri, x0, start, tol, trace=None):
    x = np.array(start, dtype=float)
    E, g, H = cost_grad_hessian(tri, x0, x)
    if trace is not None:
        trace.append(E)
    best = (E, x.copy(), np.linalg.norm(g))
    for it in range(1, MAX_ITER + 1):
        if np.linalg.norm(g) <= tol:
            return _polish(tri, x0, x, E, g, H), it - 1, np.linalg.norm(g), True
        lam = _min_eigenvalue(H)
        if lam <= 0:
            H = H + max(0.0, SHIFT_BETA - lam) * np.eye(2)
        p = -np.linalg.solve(H, g)
        slope = g @ p
        if lam > 0 and -slope <= _cost_noise(tri, x0, E):
            # Armijo cannot resolve the decrease; finish on |grad E| instead
            x = _polish(tri, x0, x, E, g, H, MAX_POLISH)
            gn = np.linalg.norm(cost_grad_hessian(tri, x0, x)[1])
            if gn <= tol:
                return x, it, gn, True
            return best[1], it, best[2], False
        alpha = 1.0
        for _ in range(MAX_BACKTRACKS):
            x_new = x + alpha * p
            E_new = _cost(tri.jet(x_new, 0).F - x0)
            if E_new <= E + ARMIJO_C * alpha * slope:
                break
            alpha *= BACKTRACK
        else:
            # no descent possible at working precision
            break
        x = x_new
        E, g, H = cost_grad_hessian(tri, x0, x)
        if trace is not None:
            trace.append(E)
        if E < best[0]:
            best = (E, x.copy(), np.linalg.norm(g))
    gn = np.linalg.norm(g)
    if gn <= tol:
        return x, MAX_ITER, gn, True
    return best[1], MAX_ITER, best[2], False


def _outside(x):
    # infinity-norm violation of the reference triangle's constraints
    return max(0.0, -x[0], -x[1], x[0] + x[1] - 1)


def _new_list(parent):
    parent.append([])
    return parent[-1]


def newton_locate(tri: CurvedTriangle, x0, trace: list | None = None) -> SingularityLocation:
    """Preimage x0hat of the point of the surface closest to ``x0``.

    Starts at (0, 0); on failure retries once from the centroid and, if that
    also fails, returns the better iterate with ``converged=False``.
    ``trace``, if given, collects E after every accepted step (one list per start).
    """
    x0 = np.asarray(x0, dtype=float)
    rho = tri.diameter
    tol = 1e-12 * rho**2
    attempts = []
    for start in ((0.0, 0.0), (1 / 3, 1 / 3)):
        x, it, gn, ok = _newton(tri, x0, start, tol, None if trace is None else _new_list(trace))
        E = _cost(tri(x) - x0)
        attempts.append((x, it, gn, ok, E))
        # a converged point outside T^ may be a second preimage of a folded
        # extension of the map; the centroid start is tried as well
        if ok and _outside(x) == 0:
            break
    converged = [a for a in attempts if a[3]]
    if converged:
        noise = min(_cost_noise(tri, x0, a[4]) for a in converged)
        E_min = min(a[4] for a in converged)
        ties = [a for a in converged if a[4] <= E_min + noise]
        x, _, gn, ok, _ = min(ties, key=lambda a: _outside(a[0]))
    else:
        x, _, gn, ok, _ = min(attempts, key=lambda a: a[2])
    it = sum(a[1] for a in attempts)
    diff = tri(x) - x0
    h = float(np.linalg.norm(diff))
    if h <= 1e-14 * rho:
        h, e_h = 0.0, None
    else:
        e_h = diff / h
    return SingularityLocation(x, h, e_h, it, float(gn), bool(ok))
