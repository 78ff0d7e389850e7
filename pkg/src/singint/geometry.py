"""Reference triangle, quadratic basis, curved-triangle maps and metric density.

Points are arrays of shape (..., 2); images and derivatives of the map are
arrays of shape (..., 3). Derivatives come packed in a :class:`MapJet`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from math import factorial

import numpy as np

# vertices, then midpoints of edges 1-2, 2-3, 1-3
REFERENCE_NODES = np.array(
    [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.5, 0.0], [0.5, 0.5], [0.0, 0.5]]
)
REFERENCE_NODES.setflags(write=False)


class DegenerateElementError(ValueError):
    pass


def _split(x):
    x = np.asarray(x, dtype=float)
    return x[..., 0], x[..., 1]


def _barycentric(x):
    x1, x2 = _split(x)
    return 1.0 - x1 - x2, x1, x2


# gradients of the barycentric coordinates
_DLAMBDA = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])


def basis_eval(j: int, x):
    """Value and gradient of the quadratic Lagrange basis function ``j`` (1..6)."""
    if not 1 <= j <= 6:
        raise IndexError(f"basis index must be in 1..6, got {j}")
    lam = _barycentric(x)
    if j <= 3:
        l = lam[j - 1]
        val = l * (2 * l - 1)
        dl = _DLAMBDA[j - 1]
        grad = (4 * l - 1)[..., None] * dl
    else:
        p, q = {4: (0, 1), 5: (1, 2), 6: (0, 2)}[j]
        val = 4 * lam[p] * lam[q]
        grad = 4 * (lam[q][..., None] * _DLAMBDA[p] + lam[p][..., None] * _DLAMBDA[q])
    return val, grad


def basis_hessian(j: int) -> np.ndarray:
    """Constant 2x2 Hessian of basis function ``j``."""
    if not 1 <= j <= 6:
        raise IndexError(f"basis index must be in 1..6, got {j}")
    if j <= 3:
        d = _DLAMBDA[j - 1]
        return 4 * np.outer(d, d)
    p, q = {4: (0, 1), 5: (1, 2), 6: (0, 2)}[j]
    dp, dq = _DLAMBDA[p], _DLAMBDA[q]
    return 4 * (np.outer(dp, dq) + np.outer(dq, dp))


@dataclass
class MapJet:
    """Map value and partial derivatives at a batch of reference points.

    ``d1[k]`` is the derivative in direction k; ``d2`` holds (11, 12, 22)
    and ``d3`` holds (111, 112, 122, 222). Missing orders are ``None``.
    """

    F: np.ndarray
    d1: tuple | None = None
    d2: tuple | None = None
    d3: tuple | None = None

    @property
    def J1(self):
        return self.d1[0]

    @property
    def J2(self):
        return self.d1[1]


class CurvedTriangle:
    """Polynomial map F from the reference triangle into R^3.

    Subclasses implement :meth:`jet`; everything downstream works only
    through that derivative evaluator.
    """

    degree: int

    def jet(self, x, order: int = 0) -> MapJet:
        raise NotImplementedError

    def __call__(self, x):
        return self.jet(x, 0).F

    @cached_property
    def diameter(self) -> float:
        """Size estimate: max pairwise distance of sample points, plus 10%."""
        pts = self.sample_points()
        d = max(np.linalg.norm(p - q) for p, q in combinations(pts, 2))
        return 1.1 * float(d)

    def sample_points(self) -> np.ndarray:
        return self(REFERENCE_NODES)

    def normal(self, x):
        """Unit normal J1 x J2 / |J1 x J2|."""
        jt = self.jet(x, 1)
        n = np.cross(jt.J1, jt.J2)
        return n / np.linalg.norm(n, axis=-1, keepdims=True)


class QuadraticTriangle(CurvedTriangle):
    """Six-node quadratic triangle, F(x) = sum_j phi_j(x) a_j."""

    degree = 2

    def __init__(self, nodes):
        nodes = np.array(nodes, dtype=float)
        if nodes.shape != (6, 3):
            raise ValueError(f"expected 6 control points in R^3, got shape {nodes.shape}")
        if not np.all(np.isfinite(nodes)):
            raise ValueError("control points must be finite")
        nodes.setflags(write=False)
        self.nodes = nodes
        hess = np.array([basis_hessian(j) for j in range(1, 7)])  # (6, 2, 2)
        self._d2 = (
            hess[:, 0, 0] @ nodes,
            hess[:, 0, 1] @ nodes,
            hess[:, 1, 1] @ nodes,
        )

    def jet(self, x, order=0):
        x = np.asarray(x, dtype=float)
        vals, grads = zip(*(basis_eval(j, x) for j in range(1, 7)))
        F = sum(v[..., None] * a for v, a in zip(vals, self.nodes))
        out = MapJet(F)
        if order >= 1:
            out.d1 = tuple(
                sum(g[..., k, None] * a for g, a in zip(grads, self.nodes)) for k in range(2)
            )
        if order >= 2:
            shape = F.shape
            out.d2 = tuple(np.broadcast_to(v, shape) for v in self._d2)
        if order >= 3:
            z = np.zeros(F.shape)
            out.d3 = (z, z, z, z)
        return out

    def sample_points(self):
        return self.nodes


class PolynomialTriangle(CurvedTriangle):
    """Map given by monomial coefficients: F(x) = sum C[i, j] x1^i x2^j.

    ``coeffs`` has shape (q + 1, q + 1, 3); entries with i + j > q must be 0.
    """

    def __init__(self, coeffs):
        coeffs = np.array(coeffs, dtype=float)
        if coeffs.ndim != 3 or coeffs.shape[0] != coeffs.shape[1] or coeffs.shape[2] != 3:
            raise ValueError("coeffs must have shape (q+1, q+1, 3)")
        q = coeffs.shape[0] - 1
        i, j = np.indices(coeffs.shape[:2])
        if np.any(coeffs[i + j > q]):
            raise ValueError("monomials of total degree > q are not allowed")
        coeffs.setflags(write=False)
        self.coeffs = coeffs
        self.degree = max(q, 1)

    @classmethod
    def from_quadratic(cls, tri: QuadraticTriangle) -> "PolynomialTriangle":
        j = tri.jet(np.zeros(2), 2)
        C = np.zeros((3, 3, 3))
        C[0, 0] = j.F
        C[1, 0], C[0, 1] = j.d1
        C[2, 0] = j.d2[0] / 2
        C[1, 1] = j.d2[1]
        C[0, 2] = j.d2[2] / 2
        return cls(C)

    def _partial(self, x1, x2, a, b):
        """d^{a+b} F / dx1^a dx2^b at the points."""
        q = self.coeffs.shape[0] - 1
        out = np.zeros(np.shape(x1) + (3,))
        for i in range(a, q + 1):
            for j in range(b, q + 1 - i):
                c = self.coeffs[i, j]
                if not c.any():
                    continue
                f = factorial(i) // factorial(i - a) * factorial(j) // factorial(j - b)
                out = out + (f * x1 ** (i - a) * x2 ** (j - b))[..., None] * c
        return out

    def jet(self, x, order=0):
        x1, x2 = _split(x)
        out = MapJet(self._partial(x1, x2, 0, 0))
        if order >= 1:
            out.d1 = (self._partial(x1, x2, 1, 0), self._partial(x1, x2, 0, 1))
        if order >= 2:
            out.d2 = tuple(self._partial(x1, x2, 2 - k, k) for k in range(3))
        if order >= 3:
            out.d3 = tuple(self._partial(x1, x2, 3 - k, k) for k in range(4))
        return out

    def sample_points(self):
        # the 6 nodes miss interior bulges for q > 2; add a modest lattice
        q = self.coeffs.shape[0] - 1
        m = max(2 * q, 2)
        pts = [(i / m, j / m) for i in range(m + 1) for j in range(m + 1 - i)]
        return self(np.array(pts))


def explicit_triangle(a: float, b: float, c: float) -> QuadraticTriangle:
    """Quadratic triangle with straight-edge nodes except a_5 = (a, b, c)."""
    nodes = np.zeros((6, 3))
    nodes[:, :2] = REFERENCE_NODES
    nodes[4] = (a, b, c)
    return QuadraticTriangle(nodes)


def flat_triangle() -> QuadraticTriangle:
    """The reference triangle itself embedded in the plane z = 0."""
    return explicit_triangle(0.5, 0.5, 0.0)


def read_element_file(path) -> QuadraticTriangle:
    """Parse lines ``j x y z`` (j = 1..6, any order, '#' comments allowed)."""
    nodes = np.full((6, 3), np.nan)
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ValueError(f"{path}:{lineno}: expected 'j x y z'")
            j = int(parts[0])
            if not 1 <= j <= 6:
                raise ValueError(f"{path}:{lineno}: node index {j} outside 1..6")
            nodes[j - 1] = [float(v) for v in parts[1:]]
    if np.isnan(nodes).any():
        raise ValueError(f"{path}: need all six control points")
    return QuadraticTriangle(nodes)


def write_element_file(tri: QuadraticTriangle, path):
    with open(path, "w") as fh:
        for j, p in enumerate(tri.nodes, 1):
            fh.write(f"{j} {p[0]:.17g} {p[1]:.17g} {p[2]:.17g}\n")


@dataclass(frozen=True)
class DensityPolynomial:
    """Polynomial density phi(x) = sum coeffs[i, j] x1^i x2^j."""

    coeffs: np.ndarray = field(default_factory=lambda: np.ones((1, 1)))

    @classmethod
    def constant(cls, value: float = 1.0) -> "DensityPolynomial":
        return cls(np.full((1, 1), float(value)))

    @classmethod
    def basis(cls, j: int) -> "DensityPolynomial":
        """The quadratic Lagrange basis function phi_j in monomial form."""
        if not 1 <= j <= 6:
            raise IndexError(f"basis index must be in 1..6, got {j}")
        v0, g0 = basis_eval(j, np.zeros(2))
        H = basis_hessian(j)
        C = np.zeros((3, 3))
        C[0, 0] = v0
        C[1, 0], C[0, 1] = g0
        C[2, 0], C[1, 1], C[0, 2] = H[0, 0] / 2, H[0, 1], H[1, 1] / 2
        return cls(C)

    @property
    def degree(self) -> int:
        i, j = np.nonzero(self.coeffs)
        return int(max(i + j)) if len(i) else 0

    def _partial(self, x, a, b):
        x1, x2 = _split(x)
        out = np.zeros(np.shape(x1))
        m, n = self.coeffs.shape
        for i in range(a, m):
            for j in range(b, n):
                c = self.coeffs[i, j]
                if c == 0:
                    continue
                f = factorial(i) // factorial(i - a) * factorial(j) // factorial(j - b)
                out = out + f * c * x1 ** (i - a) * x2 ** (j - b)
        return out

    def __call__(self, x):
        return self._partial(x, 0, 0)

    def gradient(self, x):
        return np.stack([self._partial(x, 1, 0), self._partial(x, 0, 1)], axis=-1)

    def hessian(self, x):
        """Second partials packed as (11, 12, 22)."""
        return np.stack([self._partial(x, 2, 0), self._partial(x, 1, 1), self._partial(x, 0, 2)], axis=-1)


def _dot(u, v):
    return np.sum(u * v, axis=-1)


def area_element(tri: CurvedTriangle, x):
    """|J1 x J2| at the points."""
    jt = tri.jet(x, 1)
    return np.linalg.norm(np.cross(jt.J1, jt.J2), axis=-1)


def metric_density(tri: CurvedTriangle, phi: DensityPolynomial, x, order: int = 2):
    """psi = phi |J1 x J2| with analytic gradient and Hessian (11, 12, 22).

    Returns ``(psi, grad, hess)``; entries beyond ``order`` are ``None``.
    """
    jt = tri.jet(x, max(order + 1, 1))
    n = np.cross(jt.J1, jt.J2)
    s = np.linalg.norm(n, axis=-1)
    scale = tri.diameter**2
    if np.any(s < 1e-12 * scale):
        raise DegenerateElementError("|J1 x J2| vanishes: degenerate element")
    ph = phi(x)
    psi = ph * s
    if order < 1:
        return psi, None, None

    F11, F12, F22 = jt.d2
    J = jt.d1
    # dJ_a/dx_k = F_{ak}
    D = {(0, 0): F11, (0, 1): F12, (1, 0): F12, (1, 1): F22}
    dn = [np.cross(D[0, k], J[1]) + np.cross(J[0], D[1, k]) for k in range(2)]
    ds = [_dot(n, dn[k]) / s for k in range(2)]
    dph = phi.gradient(x)
    grad = np.stack([dph[..., k] * s + ph * ds[k] for k in range(2)], axis=-1)
    if order < 2:
        return psi, grad, None

    F111, F112, F122, F222 = jt.d3
    T = {
        (0, 0, 0): F111, (0, 0, 1): F112, (0, 1, 0): F112, (1, 0, 0): F112,
        (0, 1, 1): F122, (1, 0, 1): F122, (1, 1, 0): F122, (1, 1, 1): F222,
    }
    hph = phi.hessian(x)
    hess = []
    for k, l, idx in ((0, 0, 0), (0, 1, 1), (1, 1, 2)):
        dnn = (
            np.cross(T[0, k, l], J[1])
            + np.cross(D[0, k], D[1, l])
            + np.cross(D[0, l], D[1, k])
            + np.cross(J[0], T[1, k, l])
        )
        dss = (_dot(dn[k], dn[l]) + _dot(n, dnn)) / s - ds[k] * ds[l] / s
        hess.append(hph[..., idx] * s + dph[..., k] * ds[l] + dph[..., l] * ds[k] + ph * dss)
    return psi, grad, np.stack(hess, axis=-1)
