"""Independent reference integrators for tests and reference values.

Nothing here uses the production quadrature or the subtraction pipeline:
rules come from ``numpy.polynomial.legendre.leggauss`` and the singularity is
removed by changes of variables (Duffy split for 2D, relative coordinates
for the identical-triangle 4D integral).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from .geometry import CurvedTriangle, DensityPolynomial, metric_density

_VERTICES = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


@dataclass(frozen=True)
class OracleResult:
    value: float | complex
    estimated_error: float
    subdivision_count: int


@lru_cache(maxsize=None)
def _gauss01(q):
    t, w = leggauss(q)
    return (t + 1) / 2, w / 2


def _graded_breaks(lo, hi, focus, scale):
    """Breakpoints on [lo, hi] refining geometrically toward ``focus``."""
    pts = {lo, hi}
    if scale > 0 and lo <= focus <= hi:
        pts.add(focus)
        step = scale
        while step < hi - lo:
            for p in (focus - step, focus + step):
                if lo < p < hi:
                    pts.add(p)
            step *= 2
    return np.array(sorted(pts))


def _composite(breaks, q):
    t, w = _gauss01(q)
    lo, hi = breaks[:-1, None], breaks[1:, None]
    return (lo + (hi - lo) * t).ravel(), ((hi - lo) * w).ravel()


def duffy_integrate(func, x0hat, order=32, radial_scale=0.0):
    """Integrate ``func`` over the reference triangle, singular at ``x0hat``.

    The triangle is written as the signed sum of the three triangles
    (x0hat, P, Q) over its edges PQ; each is parametrized by
    x = x0hat + s((P - x0hat) + t(Q - P)) whose Jacobian (linear in s)
    cancels a 1/|x - x0hat| singularity. ``t`` is graded toward the foot of
    the perpendicular from x0hat, ``s`` toward 0 when ``radial_scale > 0``.
    Returns ``(value, number of tensor panels)``.
    """
    x0hat = np.asarray(x0hat, dtype=float)
    total = 0.0
    panels = 0
    for k in range(3):
        P, Q = _VERTICES[k], _VERTICES[(k + 1) % 3]
        u, v = P - x0hat, Q - P
        det = u[0] * v[1] - u[1] * v[0]
        if det == 0:
            continue
        L = np.linalg.norm(v)
        foot = float(np.clip(-(u @ v) / (L * L), 0.0, 1.0))
        dist = abs(det) / L
        t_nodes, t_w = _composite(_graded_breaks(0.0, 1.0, foot, 0.5 * dist / L), order)
        s_nodes, s_w = _composite(_graded_breaks(0.0, 1.0, 0.0, radial_scale), order)
        panels += (len(t_nodes) // order) * (len(s_nodes) // order)
        S, Tt = np.meshgrid(s_nodes, t_nodes, indexing="ij")
        x = x0hat + S[..., None] * (u + Tt[..., None] * v)
        vals = func(x) * S * det
        total = total + np.einsum("i,j,ij->", s_w, t_w, vals)
    return total, panels


def _single_integrand(tri, phi, x0, kernel):
    x0 = np.asarray(x0, dtype=float)

    def f(x):
        psi = metric_density(tri, phi, x, order=0)[0]
        R = np.linalg.norm(tri(x) - x0, axis=-1)
        return psi * kernel(R)

    return f


def duffy_single(tri: CurvedTriangle, phi: DensityPolynomial, x0, x0hat, refinement=1, kernel=None, h=None):
    """Reference value of int_T phi(F^{-1}(x)) k(|x - x0|) dS(x), k = 1/R by default.

    ``x0hat`` is the preimage of the closest surface point; ``h`` (distance to
    the surface) sets the radial grading and defaults to |F(x0hat) - x0|.
    Uses orders 16 * 2^refinement and 16 * 2^(refinement+1).
    """
    if kernel is None:
        kernel = np.reciprocal
    if h is None:
        h = float(np.linalg.norm(tri(np.asarray(x0hat, dtype=float)) - np.asarray(x0, dtype=float)))
    f = _single_integrand(tri, phi, x0, kernel)
    scale = 0.5 * h / tri.diameter if h > 0 else 0.0
    q = 16 * 2**refinement
    coarse, _ = duffy_integrate(f, x0hat, q, scale)
    fine, panels = duffy_integrate(f, x0hat, 2 * q, scale)
    return OracleResult(fine, float(abs(fine - coarse)), panels)


# identical-triangle relative coordinates on {0 <= x2 <= x1 <= 1}:
# region -> (x(xi, eta), y(xi, eta)), all scaled by xi; x - y = xi*eta1*eta2*z
def _ss_regions(e1, e2, e3):
    one = np.ones_like(e1)
    a = (np.stack([one, 1 - e1 + e1 * e2], -1), np.stack([1 - e1 * e2 * e3, 1 - e1], -1), np.stack([e3, one], -1))
    b = (np.stack([one, e1 * (1 - e2 + e2 * e3)], -1), np.stack([1 - e1 * e2, e1 * (1 - e2)], -1), np.stack([one, e3], -1))
    c = (np.stack([1 - e1 * e2 * e3, e1 * (1 - e2 * e3)], -1), np.stack([one, e1 * (1 - e2)], -1), np.stack([-e3, 1 - e3], -1))
    for x, y, z in (a, b, c):
        yield x, y, z
        yield y, x, -z


_SS_TO_REF = np.array([[1.0, -1.0], [0.0, 1.0]])  # (x1, x2) -> (x1 - x2, x2)


def identical_panel_integrate(kernel_fn, order):
    """int_{T^} int_{T^} kernel_fn(u, v, w) dv du over the reference triangle.

    ``kernel_fn(u, v, z, scale)`` receives points u, v, the scaled
    difference z = (u - v)/scale (free of cancellation) and
    scale = xi eta1 eta2; it must return ``k(u, v) * scale``, which is
    regular for kernels like 1/|u - v|.
    """
    t, w = _gauss01(order)
    XI, E1, E2, E3 = np.meshgrid(t, t, t, t, indexing="ij")
    W = np.einsum("i,j,k,l->ijkl", w, w, w, w)
    jac = XI**2 * E1  # xi^3 eta1^2 eta2 divided by the scale xi*eta1*eta2
    total = 0.0
    for x, y, z in _ss_regions(E1, E2, E3):
        u = XI[..., None] * x @ _SS_TO_REF.T
        v = XI[..., None] * y @ _SS_TO_REF.T
        diff = z @ _SS_TO_REF.T
        total = total + np.sum(W * jac * kernel_fn(u, v, diff, XI * E1 * E2))
    return total


def _jet_increment(tri, v, z, scale):
    """(F(v + scale z) - F(v)) / scale, exact for maps of degree <= 3."""
    jt = tri.jet(v, 3)
    z1, z2 = z[..., :1], z[..., 1:]
    sz1, sz2 = scale[..., None] * z1, scale[..., None] * z2
    F1, F2 = jt.d1
    F11, F12, F22 = jt.d2
    F111, F112, F122, F222 = jt.d3
    first = F1 * z1 + F2 * z2
    second = 0.5 * (F11 * z1 * sz1 + 2 * F12 * z1 * sz2 + F22 * z2 * sz2)
    third = (F111 * z1 * sz1 * sz1 + 3 * F112 * z1 * sz1 * sz2 + 3 * F122 * z1 * sz2 * sz2 + F222 * z2 * sz2 * sz2) / 6
    return first + second + third


def relative_coordinate_double(tri: CurvedTriangle, refinement=0, phi_x=None, phi_y=None):
    """Reference value of int_T int_T phi(x) phi(y) / |x - y| dS(y) dS(x).

    Tensor Gauss of order 8 * 2^refinement and twice that per coordinate.
    """
    if tri.degree > 3:
        raise ValueError("relative-coordinate oracle needs map degree <= 3")
    phi_x = phi_x or DensityPolynomial.constant(1.0)
    phi_y = phi_y or DensityPolynomial.constant(1.0)

    def kernel(u, v, z, scale):
        psi_u = metric_density(tri, phi_x, u, order=0)[0]
        psi_v = metric_density(tri, phi_y, v, order=0)[0]
        dist = np.linalg.norm(_jet_increment(tri, v, z, scale), axis=-1)
        return psi_u * psi_v / dist

    q = 8 * 2**refinement
    coarse = identical_panel_integrate(kernel, q)
    fine = identical_panel_integrate(kernel, 2 * q)
    return OracleResult(float(fine), float(abs(fine - coarse)), 6)
