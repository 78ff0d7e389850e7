"""Gauss-Legendre rules, the collapsed triangle rule and sinh-transplanted rules.

Convergence-rate predictions for Gauss and transplanted Gauss quadrature on
functions with a complex square-root singularity are also provided.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class Rule1D:
    """Weighted 1D rule on [-1, 1]: ``sum(weights * f(nodes))``."""

    nodes: np.ndarray
    weights: np.ndarray

    @property
    def n(self) -> int:
        return len(self.nodes)

    def integrate(self, f):
        return np.sum(self.weights * f(self.nodes), axis=-1)


@dataclass(frozen=True)
class TriangleRule:
    """Rule on the reference triangle {x1 >= 0, x2 >= 0, x1 + x2 <= 1}."""

    nodes: np.ndarray  # (N, 2)
    weights: np.ndarray  # (N,)

    @property
    def n(self) -> int:
        return len(self.weights)


def _freeze(*arrays):
    for a in arrays:
        a.setflags(write=False)


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> Rule1D:
    """n-point Gauss-Legendre rule.

    Nodes come from Newton's method on the three-term recurrence, started
    from Tricomi's asymptotic approximation of the Legendre roots.
    """
    if n < 1:
        raise ValueError("Gauss-Legendre rule needs n >= 1")
    if n == 1:
        nodes, weights = np.zeros(1), np.full(1, 2.0)
        _freeze(nodes, weights)
        return Rule1D(nodes, weights)

    k = np.arange(1, n + 1)
    theta = np.pi * (4 * k - 1) / (4 * n + 2)
    x = (1 - (n - 1) / (8.0 * n**3)) * np.cos(theta)

    for _ in range(100):
        p, dp = _legendre_and_derivative(n, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-16:
            break
    p, dp = _legendre_and_derivative(n, x)
    w = 2.0 / ((1 - x**2) * dp**2)

    # ascending order, exact symmetry
    x = x[::-1].copy()
    w = w[::-1].copy()
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    if n % 2:
        x[n // 2] = 0.0
    _freeze(x, w)
    return Rule1D(x, w)


def _legendre_and_derivative(n, x):
    p0 = np.ones_like(x)
    p1 = x.copy()
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    dp = n * (x * p1 - p0) / (x**2 - 1)
    return p1, dp


@lru_cache(maxsize=None)
def triangle_rule(n: int) -> TriangleRule:
    """Collapsed-square (Duffy/Stroud) rule with n**2 nodes.

    Nodes are ((1 - t_i)/2, (1 + t_i)(1 - t_j)/4) with weights
    w_i (1 + t_i) w_j / 8; the vertex (1, 0) is the collapsed one.
    """
    g = gauss_legendre(n)
    t, w = g.nodes, g.weights
    x1 = 0.5 * np.outer(1 - t, np.ones(n))
    x2 = 0.25 * np.outer(1 + t, 1 - t)
    W = 0.125 * np.outer(w * (1 + t), w)
    nodes = np.stack([x1.ravel(), x2.ravel()], axis=-1)
    weights = W.ravel()
    _freeze(nodes, weights)
    return TriangleRule(nodes, weights)


@dataclass(frozen=True)
class ConformalMapParams:
    """Parameters of g(z) = mu + nu sinh((a + b)(z - 1)/2 + a)."""

    mu: float
    nu: float

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError(f"conformal map needs nu > 0, got {self.nu}")

    @property
    def a(self) -> float:
        return float(np.arcsinh((1 - self.mu) / self.nu))

    @property
    def b(self) -> float:
        return float(np.arcsinh((1 + self.mu) / self.nu))


def conformal_map(params: ConformalMapParams, z):
    """Return g(z) and g'(z) for the sinh map sending [-1, 1] onto itself."""
    a, b = params.a, params.b
    arg = (a + b) * (np.asarray(z) - 1) / 2 + a
    g = params.mu + params.nu * np.sinh(arg)
    dg = params.nu * (a + b) / 2 * np.cosh(arg)
    return g, dg


def transplanted_rule(base: Rule1D, params: ConformalMapParams) -> Rule1D:
    g, dg = conformal_map(params, base.nodes)
    return Rule1D(g, base.weights * dg)


def f_munu(t, mu, nu):
    """1 / sqrt((t - mu)^2 + nu^2)."""
    return 1.0 / np.hypot(np.asarray(t) - mu, nu)


def exact_f_munu_integral(mu, nu):
    return np.arcsinh((1 - mu) / nu) + np.arcsinh((1 + mu) / nu)


def rho0(x):
    return x + np.sqrt(1 + x * x)


def rho1(x):
    r = rho0(x)
    return r + np.sqrt(2 * x * r)


def c_nu(nu):
    return (np.pi / 2) / np.arcsinh(2 / nu)


def predicted_rho(case, mu, nu, delta_mu=None, delta_nu=None):
    """Bernstein-ellipse parameter for quadrature of f_{mu,nu}-type integrands.

    ``case`` is ``"matched"`` (transplanted with g_{mu,nu}), ``"gauss"``
    (plain Gauss) or ``"mismatched"`` (transplanted with g_{mu,nu} applied
    to f_{mu', nu'} with mu' = mu + delta_mu nu, nu' = delta_nu nu).

    For interior 0 < |mu| < 1 the matched and gauss cases return the
    bracket ``(lower, upper)``; the mismatched case always returns a lower
    bound.
    """
    if not (-1 <= mu <= 1 and 0 < nu < 1):
        raise ValueError(f"need |mu| <= 1 and 0 < nu < 1, got mu={mu}, nu={nu}")
    at_end = abs(abs(mu) - 1) < 1e-15
    if case == "matched":
        lo, hi = rho0(c_nu(2 * nu)), rho1(c_nu(nu))
    elif case == "gauss":
        lo, hi = rho0(nu), rho1(nu / 2)
    elif case == "mismatched":
        if delta_mu is None or delta_nu is None or delta_nu <= 0:
            raise ValueError("mismatched case needs delta_mu and delta_nu > 0")
        frac = np.arcsinh(complex(delta_mu, delta_nu)).imag / (np.pi / 2)
        if at_end:
            return float(rho0(2 * frac * c_nu(nu)))
        return float(rho0(frac * c_nu(2 * nu)))
    else:
        raise ValueError(f"unknown case {case!r}")
    if mu == 0:
        return float(lo)
    if at_end:
        return float(hi)
    return float(lo), float(hi)
