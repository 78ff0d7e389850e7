"""Taylor-like asymptotic terms T_{-1}, T_0, T_1 of psi / |F(x) - x0| at the preimage.

With d = x - x0hat, J0 = J(x0hat) and Q = |J0 d|^2 + h^2, every term has the
form ``coef(d) * h**k / Q**(p/2)`` where ``coef`` is a homogeneous polynomial
of degree m in d. :data:`TERMS` lists (level, name, m, k, p) for each of them
and :func:`term_polynomial` returns the matching ``coef`` values; the
continuation module integrates the very same list along the triangle edges.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import CurvedTriangle, DensityPolynomial, metric_density
from .preimage import SingularityLocation


class SingularEvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class TaylorData:
    x0hat: np.ndarray
    h: float
    e_h: np.ndarray | None
    J0: np.ndarray  # (3, 2)
    psi0: float
    dpsi: np.ndarray  # (psi_1, psi_2)
    d2psi: np.ndarray  # (psi_11, psi_12, psi_22)
    a: np.ndarray  # 3: h * |d|^2 terms of R^2
    b: np.ndarray  # 4: h * |d|^3
    c: np.ndarray  # 4: |d|^3
    d: np.ndarray  # 5: |d|^4
    e: np.ndarray  # 4
    f: np.ndarray  # 5
    g: np.ndarray  # 5
    hc: np.ndarray  # 7, the "h_i" set
    ac: np.ndarray  # 6, h * (sum a)(sum c) cross term, see psi_r_coeffs


def _dot(u, v):
    return float(np.dot(u, v))


def r2_coeffs(jet, e_h):
    """Coefficients a, b, c, d of the expansion of |F(x) - x0|^2 at x0hat.

    ``jet`` holds the map derivatives at x0hat up to third order.
    """
    F1, F2 = jet.d1
    F11, F12, F22 = jet.d2
    F111, F112, F122, F222 = jet.d3
    if e_h is None:
        a = np.zeros(3)
        b = np.zeros(4)
    else:
        a = np.array([_dot(e_h, F11), 2 * _dot(e_h, F12), _dot(e_h, F22)])
        b = np.array(
            [_dot(e_h, F111) / 3, _dot(e_h, F112), _dot(e_h, F122), _dot(e_h, F222) / 3]
        )
    c = np.array(
        [
            _dot(F1, F11),
            2 * _dot(F1, F12) + _dot(F2, F11),
            2 * _dot(F2, F12) + _dot(F1, F22),
            _dot(F2, F22),
        ]
    )
    d = np.array(
        [
            _dot(F1, F111) / 3 + _dot(F11, F11) / 4,
            _dot(F2, F111) / 3 + _dot(F1, F112) + _dot(F11, F12),
            _dot(F11, F22) / 2 + _dot(F1, F122) + _dot(F2, F112) + _dot(F12, F12),
            _dot(F1, F222) / 3 + _dot(F2, F122) + _dot(F22, F12),
            _dot(F2, F222) / 3 + _dot(F22, F22) / 4,
        ]
    )
    return a, b, c, d


def _poly_product(p, q):
    # coefficient lists of homogeneous polynomials, ordered by power of d2
    return np.convolve(p, q)


def psi_r_coeffs(a, b, c, d, psi0, dpsi):
    """Coefficient sets e, f, g, h and the h*a*c cross set of psi R^{-1}.

    Besides the four published sets, the O(d) part of the expansion carries
    ``(3/4) psi0 h (sum a)(sum c) / Q^{5/2}``; it vanishes for h = 0.
    """
    p1, p2 = dpsi
    e = -0.5 * np.array(
        [
            a[0] * p1 + b[0] * psi0,
            a[1] * p1 + a[0] * p2 + b[1] * psi0,
            a[2] * p1 + a[1] * p2 + b[2] * psi0,
            a[2] * p2 + b[3] * psi0,
        ]
    )
    g = -0.5 * np.array(
        [
            c[0] * p1 + d[0] * psi0,
            c[1] * p1 + c[0] * p2 + d[1] * psi0,
            c[2] * p1 + c[1] * p2 + d[2] * psi0,
            c[3] * p1 + c[2] * p2 + d[3] * psi0,
            c[3] * p2 + d[4] * psi0,
        ]
    )
    f = 0.375 * psi0 * _poly_product(a, a)
    hc = 0.375 * psi0 * _poly_product(c, c)
    ac = 0.75 * psi0 * _poly_product(a, c)
    return e, f, g, hc, ac


def taylor_data(tri: CurvedTriangle, phi: DensityPolynomial, loc: SingularityLocation) -> TaylorData:
    x0hat = np.asarray(loc.x0hat, dtype=float)
    jet = tri.jet(x0hat, 3)
    psi0, dpsi, d2psi = metric_density(tri, phi, x0hat, order=2)
    e_h = loc.e_h if loc.h > 0 else None
    a, b, c, d = r2_coeffs(jet, e_h)
    e, f, g, hc, ac = psi_r_coeffs(a, b, c, d, float(psi0), dpsi)
    return TaylorData(
        x0hat=x0hat,
        h=float(loc.h) if e_h is not None else 0.0,
        e_h=e_h,
        J0=np.stack(jet.d1, axis=-1),
        psi0=float(psi0),
        dpsi=np.asarray(dpsi, dtype=float),
        d2psi=np.asarray(d2psi, dtype=float),
        a=a, b=b, c=c, d=d, e=e, f=f, g=g, hc=hc, ac=ac,
    )


# (level, name, m, k, p): term = coef_m(d) * h^k / Q^(p/2)
TERMS = (
    (-1, "psi0", 0, 0, 1),
    (0, "dpsi", 1, 0, 1),
    (0, "a", 2, 1, 3),
    (0, "c", 3, 0, 3),
    (1, "d2psi", 2, 0, 1),
    (1, "e", 3, 1, 3),
    (1, "f", 4, 2, 5),
    (1, "g", 4, 0, 3),
    (1, "hc", 6, 0, 5),
    (1, "ac", 5, 1, 5),
)


def homogeneous(coefs, d):
    """sum_i coefs[i] d1^(m - i) d2^i with m = len(coefs) - 1."""
    m = len(coefs) - 1
    d1, d2 = d[..., 0], d[..., 1]
    out = np.zeros(d1.shape)
    for i, ci in enumerate(coefs):
        if ci != 0:
            out = out + ci * d1 ** (m - i) * d2**i
    return out


def term_polynomial(td: TaylorData, name: str, d):
    """The polynomial factor (including constant prefactors) of a term."""
    if name == "psi0":
        return np.full(d.shape[:-1], td.psi0)
    if name == "dpsi":
        return d @ td.dpsi
    if name == "d2psi":
        p11, p12, p22 = td.d2psi
        return 0.5 * p11 * d[..., 0] ** 2 + p12 * d[..., 0] * d[..., 1] + 0.5 * p22 * d[..., 1] ** 2
    if name == "a":
        return -0.5 * td.psi0 * homogeneous(td.a, d)
    if name == "c":
        return -0.5 * td.psi0 * homogeneous(td.c, d)
    return homogeneous(getattr(td, name), d)


def eval_T(level: int, td: TaylorData, x):
    """T_level at reference points ``x`` (shape (..., 2))."""
    if level not in (-1, 0, 1):
        raise ValueError(f"level must be -1, 0 or 1, got {level}")
    d = np.asarray(x, dtype=float) - td.x0hat
    Jd = d @ td.J0.T
    Q = np.sum(Jd * Jd, axis=-1) + td.h**2
    if td.h == 0 and np.any(Q == 0):
        raise SingularEvaluationError("T evaluated at the singular point")
    out = np.zeros(Q.shape)
    for lev, name, m, k, p in TERMS:
        if lev != level:
            continue
        out = out + term_polynomial(td, name, d) * td.h**k * Q ** (-p / 2)
    return out


def regularized_residual(tri, phi, x0, td: TaylorData, level: int, x):
    """psi(x)/|F(x) - x0| minus T_{-1} .. T_level at reference points ``x``."""
    x = np.asarray(x, dtype=float)
    psi = metric_density(tri, phi, x, order=0)[0]
    R = np.linalg.norm(tri(x) - np.asarray(x0, dtype=float), axis=-1)
    out = psi / R
    for lev in range(-1, level + 1):
        out = out - eval_T(lev, td, x)
    return out
