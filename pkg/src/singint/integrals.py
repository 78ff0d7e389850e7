"""Singular and near-singular integrals over curved triangles, and convergence studies."""
from __future__ import annotations

import enum
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .continuation import continuation_integrals, edge_geometry, edge_rules
from .geometry import CurvedTriangle, DensityPolynomial, metric_density
from .preimage import NewtonConvergenceError, SingularityLocation, newton_locate
from .quadrature import triangle_rule
from .taylor import eval_T, taylor_data

FAR_FIELD = 0.5


class RegularizationLevel(enum.IntEnum):
    Tm1 = -1
    T0 = 0
    T1 = 1

    @classmethod
    def parse(cls, value) -> "RegularizationLevel":
        if isinstance(value, str):
            key = value.strip().lower()
            names = {"tm1": cls.Tm1, "t-1": cls.Tm1, "t0": cls.T0, "t1": cls.T1}
            if key not in names:
                raise ValueError(f"unknown regularization level {value!r}")
            return names[key]
        return cls(int(value))

    @property
    def label(self) -> str:
        return {-1: "tm1", 0: "t0", 1: "t1"}[int(self)]


def _reference_distance(x0hat):
    """Euclidean distance from x0hat to the reference triangle (0 inside)."""
    x, y = x0hat
    if x >= 0 and y >= 0 and x + y <= 1:
        return 0.0
    best = np.inf
    for p, q in (((0, 0), (1, 0)), ((1, 0), (0, 1)), ((0, 1), (0, 0))):
        p, q = np.array(p, float), np.array(q, float)
        t = np.clip((x0hat - p) @ (q - p) / ((q - p) @ (q - p)), 0, 1)
        best = min(best, np.linalg.norm(x0hat - p - t * (q - p)))
    return float(best)


class SingleIntegrator:
    """Reusable integrator for I(x0) = int_T phi(F^{-1}(x)) / |x - x0| dS(x).

    Precomputes the n^2-point triangle rule together with psi and F at its
    nodes; each call then costs one preimage search, the Taylor data and
    3 x (10 n)-point edge integrals.
    """

    def __init__(self, tri: CurvedTriangle, phi: DensityPolynomial | None = None, n: int = 10,
                 level=RegularizationLevel.T1, rule: str = "transplanted", n1d: int | None = None):
        if n < 2:
            raise ValueError("need n >= 2")
        self.tri = tri
        self.phi = phi or DensityPolynomial.constant(1.0)
        self.n = n
        self.n1d = 10 * n if n1d is None else n1d
        self.level = RegularizationLevel.parse(level)
        self.rule = rule
        tr = triangle_rule(n)
        self.nodes, self.weights = tr.nodes, tr.weights
        self.psi = metric_density(tri, self.phi, self.nodes, order=0)[0]
        self.F = tri(self.nodes)

    def locate(self, x0) -> SingularityLocation:
        loc = newton_locate(self.tri, x0)
        if not loc.converged:
            raise NewtonConvergenceError(
                f"preimage search did not converge (|grad E| = {loc.final_gradient_norm:.3e})"
            )
        return loc

    def is_far(self, loc: SingularityLocation) -> bool:
        return loc.h > FAR_FIELD * self.tri.diameter or _reference_distance(loc.x0hat) > FAR_FIELD

    def __call__(self, x0, location: SingularityLocation | None = None) -> float:
        x0 = np.asarray(x0, dtype=float)
        loc = self.locate(x0) if location is None else location
        R = np.linalg.norm(self.F - x0, axis=-1)
        if self.is_far(loc):
            return float(self.weights @ (self.psi / R))

        td = taylor_data(self.tri, self.phi, loc)
        geo = edge_geometry(loc.x0hat)
        levels = tuple(range(-1, int(self.level) + 1))
        analytic = continuation_integrals(td, geo, edge_rules(geo, self.n1d, self.rule), levels)
        # a node exactly at x0hat (outer = inner rule in 4D) has a bounded
        # residual; it is dropped, which costs O(weight) at worst
        keep = R > 0 if td.h == 0 else np.ones(R.shape, dtype=bool)
        resid = self.psi[keep] / R[keep]
        for lev in levels:
            resid = resid - eval_T(lev, td, self.nodes[keep])
        return float(self.weights[keep] @ resid + sum(analytic.values()))


def integrate_single(tri, phi, x0, level=RegularizationLevel.T1, n=10, rule="transplanted",
                     n1d=None, location=None) -> float:
    """Weakly singular / near-singular integral of phi / |x - x0| over the curved triangle.

    Subtracts T_{-1} .. T_level, integrates them through edge integrals with
    ``n1d`` (default 10 n) points per edge, and the bounded remainder with
    the n^2-point triangle rule.
    """
    return SingleIntegrator(tri, phi, n, level, rule, n1d)(x0, location)


def _smooth_helmholtz(kR):
    # (e^{ikR} - 1)/(ikR) without cancellation
    out = np.ones(np.shape(kR), dtype=complex)
    nz = kR != 0
    z = kR[nz]
    out[nz] = (np.sin(z) + 2j * np.sin(z / 2) ** 2) / z
    return out


def integrate_single_helmholtz(tri, phi, x0, k: float, level=RegularizationLevel.T1, n=10,
                               rule="transplanted", location=None) -> complex:
    """int_T e^{ik|x - x0|} / |x - x0| phi dS, split as (e^{ikR} - 1)/R + 1/R.

    ``phi`` may be a DensityPolynomial or a basis index 1..6.
    """
    if k < 0:
        raise ValueError("wavenumber must be >= 0")
    if isinstance(phi, (int, np.integer)):
        phi = DensityPolynomial.basis(int(phi))
    integ = SingleIntegrator(tri, phi, n, level, rule)
    singular = integ(x0, location)
    if k == 0:
        return complex(singular)
    R = np.linalg.norm(integ.F - np.asarray(x0, dtype=float), axis=-1)
    smooth = integ.weights @ (integ.psi * 1j * k * _smooth_helmholtz(k * R))
    return complex(smooth + singular)


@dataclass
class DoubleResult:
    value: float
    n: int
    M: int


def _inner_values(args):
    tri, phi_x, n, level, rule, points = args
    integ = SingleIntegrator(tri, phi_x, n, level, rule)
    F = tri(points)
    return np.array([integ(F[m], SingularityLocation.on_surface(tri, points[m])) for m in range(len(points))])


def integrate_double_identical(tri: CurvedTriangle, n: int, level=RegularizationLevel.T1,
                               phi_x=None, phi_y=None, rule="transplanted", workers: int = 1) -> DoubleResult:
    """int_T int_T phi_x phi_y / |x - y| dS(y) dS(x) for identical triangles.

    The outer integral uses the n^2-point triangle rule; at each outer node
    y_m the inner integral is singular at the known preimage y_m (h = 0).
    ``M = N^2`` counts the 2D x 2D points. Inner integrals are independent
    and are spread over ``workers`` processes when ``workers > 1``.
    """
    phi_x = phi_x or DensityPolynomial.constant(1.0)
    phi_y = phi_y or DensityPolynomial.constant(1.0)
    level = RegularizationLevel.parse(level)
    tr = triangle_rule(n)
    psi_y = metric_density(tri, phi_y, tr.nodes, order=0)[0]
    if workers > 1:
        chunks = np.array_split(tr.nodes, workers)
        with ProcessPoolExecutor(workers) as ex:
            parts = ex.map(_inner_values, [(tri, phi_x, n, level, rule, c) for c in chunks])
            inner = np.concatenate(list(parts))
    else:
        inner = _inner_values((tri, phi_x, n, level, rule, tr.nodes))
    N = len(tr.weights)
    return DoubleResult(float(tr.weights @ (psi_y * inner)), n, N * N)


@dataclass
class ConvergenceRecord:
    label: str
    reference: float
    rows: list = field(default_factory=list)  # (n, N, value, rel_error)

    def add(self, n, N, value):
        err = abs(value - self.reference) / abs(self.reference)
        self.rows.append((n, N, value, err))

    @property
    def slope(self):
        return fit_slope([r[1] for r in self.rows], [r[3] for r in self.rows])


def fit_slope(counts, errors, floor=1e-13):
    """Least-squares slope of log(error) vs log(count) over the final two thirds.

    Rows with error <= ``floor`` are ignored; returns ``None`` when fewer than
    two rows remain.
    """
    counts = np.asarray(counts, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if len(counts) > 1 and np.any(np.diff(counts) <= 0):
        raise ValueError("point counts must be strictly increasing")
    start = len(counts) // 3
    c, e = counts[start:], errors[start:]
    keep = e > floor
    if keep.sum() < 2:
        return None
    return float(np.polyfit(np.log(c[keep]), np.log(e[keep]), 1)[0])


def convergence_study(compute, ns, reference, count=lambda n: n * n, label=""):
    """Evaluate ``compute(n)`` over ``ns`` and record relative errors against ``reference``."""
    rec = ConvergenceRecord(label, reference)
    for n in ns:
        rec.add(n, count(n), compute(n))
    return rec


def single_study(tri, phi, x0, levels, ns, reference, rule="transplanted"):
    """One ConvergenceRecord per level for integrate_single over ``ns``."""
    loc = newton_locate(tri, x0)
    if not loc.converged:
        raise NewtonConvergenceError("preimage search did not converge")
    out = {}
    for lev in levels:
        lev = RegularizationLevel.parse(lev)
        out[lev] = convergence_study(
            lambda n: SingleIntegrator(tri, phi, n, lev, rule)(x0, loc), ns, reference, label=lev.label
        )
    return out


def double_study(tri, levels, ns, reference, workers=1):
    out = {}
    for lev in levels:
        lev = RegularizationLevel.parse(lev)
        out[lev] = convergence_study(
            lambda n: integrate_double_identical(tri, n, lev, workers=workers).value,
            ns, reference, count=lambda n: n**4, label=lev.label,
        )
    return out
