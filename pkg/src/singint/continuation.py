"""Integrals of T_{-1}, T_0, T_1 over the reference triangle as edge integrals.

A term f(d, h) = coef_m(d) h^k / Q^{p/2} is homogeneous of degree
r = m + k - p in (d, h), so its integral over the shifted triangle is

    sum_j s_j int_{edge j} coef_m(d) W(|J0 d|, h) ds,
    W = h^{r+2} int_h^inf u^{k-r-3} (|J0 d|^2 + u^2)^{-p/2} du,

with s_j the signed distance from x0hat to edge j. W has a closed form for
every term we use; when |J0 d| << h those forms cancel catastrophically and
a power series in (|J0 d|/h)^2 is used instead.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quadrature import ConformalMapParams, Rule1D, gauss_legendre, transplanted_rule
from .taylor import TERMS, TaylorData, term_polynomial

SQRT2 = np.sqrt(2.0)
NEAR_EDGE = 0.1
SERIES_CUTOFF = 0.6
SERIES_TERMS = 60
NU_FLOOR = 1e-300

_EDGE_START = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
_EDGE_DIR = np.array([[1.0, 0.0], [-1.0, 1.0], [0.0, -1.0]])
_EDGE_NORMAL = np.array([[0.0, -1.0], [1 / SQRT2, 1 / SQRT2], [-1.0, 0.0]])


class ContinuationError(ArithmeticError):
    pass


@dataclass(frozen=True)
class EdgeGeometry:
    """Edges of the reference triangle shifted by -x0hat.

    Edge j is r_j(t) = start_j - x0hat + (t + 1)/2 * dir_j for t in [-1, 1].
    """

    x0hat: np.ndarray
    s: np.ndarray  # signed distances
    speed: np.ndarray  # |r_j'(t)|
    normals: np.ndarray

    def r(self, j: int, t):
        """Points r_j(t), j = 0, 1, 2."""
        tau = (np.asarray(t, dtype=float) + 1) / 2
        return _EDGE_START[j] - self.x0hat + tau[..., None] * _EDGE_DIR[j]


def edge_geometry(x0hat) -> EdgeGeometry:
    x, y = (float(v) for v in x0hat)
    s = np.array([y, (1 - x - y) / SQRT2, x])
    speed = np.array([0.5, SQRT2 / 2, 0.5])
    return EdgeGeometry(np.array([x, y]), s, speed, _EDGE_NORMAL)


def edge_map_params(geo: EdgeGeometry, j: int) -> ConformalMapParams:
    """Transplant parameters that put the sinh map's focus near x0hat's foot on edge j."""
    x, y = geo.x0hat
    mu = (-1 + 2 * x, -1 + 2 * y, -1 + 2 * (1 - y))[j]
    return ConformalMapParams(mu, max(2 * abs(geo.s[j]), NU_FLOOR))


def edge_rules(geo: EdgeGeometry, n: int, policy: str = "transplanted"):
    """One 1D rule per edge; ``None`` marks an edge that is skipped (s_j = 0)."""
    if policy not in ("transplanted", "plain-gauss"):
        raise ValueError(f"unknown 1D rule policy {policy!r}")
    base = gauss_legendre(n)
    rules = []
    for j in range(3):
        if geo.s[j] == 0:
            rules.append(None)
        elif policy == "transplanted" and abs(geo.s[j]) < NEAR_EDGE:
            rules.append(transplanted_rule(base, edge_map_params(geo, j)))
        else:
            rules.append(base)
    return rules


def _series_coeffs(m, p):
    # W * h^(p-k) = sum_n binom(-p/2, n) x^(2n) / (m + 2 + 2n),  x = rho/h
    c = np.empty(SERIES_TERMS)
    binom = 1.0
    for n in range(SERIES_TERMS):
        c[n] = binom / (m + 2 + 2 * n)
        binom *= (-p / 2 - n) / (n + 1)
    return c[::-1]  # for np.polyval


_SERIES = {(m, p): _series_coeffs(m, p) for _, _, m, _, p in TERMS}


def _closed_form(m, k, p, rho, h):
    S = np.sqrt(rho * rho + h * h)
    h2 = h * h
    if (m, k, p) == (0, 0, 1):
        return (S - h) / rho**2
    # asinh(rho/h) written as log((rho + S)/h) stays accurate for huge rho/h
    ash = np.log((rho + S) / h)
    if (m, k, p) == (1, 0, 1):
        return (rho * S - h2 * ash) / (2 * rho**3)
    if (m, k, p) == (2, 1, 3):
        return h * (rho**2 + 2 * h * (h - S)) / (rho**4 * S)
    if (m, k, p) == (3, 0, 3):
        return ((3 * h2 * rho + rho**3) / S - 3 * h2 * ash) / (2 * rho**5)
    if (m, k, p) == (2, 0, 1):
        return (2 * h**3 - 2 * h2 * S + rho**2 * S) / (3 * rho**4)
    if (m, k, p) == (3, 1, 3):
        return h * ((3 * h2 * rho + rho**3) / S - 3 * h2 * ash) / (2 * rho**5)
    if (m, k, p) == (4, 2, 5):
        return h2 * (8 * h2**2 + 12 * h2 * rho**2 + 3 * rho**4 - 8 * h * S**3) / (3 * rho**6 * S**3)
    if (m, k, p) == (4, 0, 3):
        return (-8 * h2**2 - 4 * h2 * rho**2 + rho**4 + 8 * h**3 * S) / (3 * rho**6 * S)
    if (m, k, p) == (6, 0, 5):
        num = (
            -16 * h2**3 - 24 * h2**2 * rho**2 - 6 * h2 * rho**4 + rho**6
            + 16 * h**5 * S + 16 * h**3 * rho**2 * S
        )
        return num / (3 * rho**8 * S**3)
    if (m, k, p) == (5, 1, 5):
        return h * ((15 * h2**2 * rho + 20 * h2 * rho**3 + 3 * rho**5) / S**3 - 15 * h2 * ash) / (6 * rho**7)
    raise KeyError((m, k, p))


def edge_kernel(m: int, k: int, p: int, rho, h: float):
    """W(rho, h) for the term coef_m(d) h^k / Q^{p/2}; ``h == 0`` uses the limit."""
    rho = np.asarray(rho, dtype=float)
    if h == 0:
        if k > 0:
            return np.zeros(rho.shape)
        return rho ** (-p) / (m - p + 2)
    x = rho / h
    small = x < SERIES_CUTOFF
    out = np.empty(rho.shape)
    if np.any(small):
        out[small] = h ** (k - p) * np.polyval(_SERIES[m, p], x[small] ** 2)
    if np.any(~small):
        out[~small] = _closed_form(m, k, p, rho[~small], h)
    return out


def continuation_integrals(td: TaylorData, geo: EdgeGeometry, rules, levels=(-1, 0, 1)):
    """Return {level: integral of T_level over the reference triangle}."""
    out = {lev: 0.0 for lev in levels}
    for j in range(3):
        rule = rules[j]
        if rule is None:
            continue
        d = geo.r(j, rule.nodes)
        rho = np.linalg.norm(d @ td.J0.T, axis=-1)
        if np.any(rho == 0):
            raise ContinuationError(f"edge {j + 1} passes through the singularity but is not skipped")
        scale = geo.s[j] * geo.speed[j]
        for lev, name, m, k, p in TERMS:
            if lev not in out:
                continue
            vals = term_polynomial(td, name, d) * edge_kernel(m, k, p, rho, td.h)
            out[lev] += scale * float(rule.weights @ vals)
    return out


def I_minus1(td, geo, rules):
    return continuation_integrals(td, geo, rules, (-1,))[-1]


def I_zero(td, geo, rules):
    return continuation_integrals(td, geo, rules, (0,))[0]


def I_one(td, geo, rules):
    return continuation_integrals(td, geo, rules, (1,))[1]
