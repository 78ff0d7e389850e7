import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import interior_points
from singint.continuation import (
    SERIES_CUTOFF, ContinuationError, EdgeGeometry, continuation_integrals, edge_geometry, edge_kernel,
    edge_rules, I_minus1, I_one, I_zero,
)
from singint.geometry import DensityPolynomial
from singint.oracle import duffy_integrate
from singint.preimage import SingularityLocation, newton_locate
from singint.taylor import TERMS, eval_T, taylor_data

ONE = DensityPolynomial.constant()
LEVELS = (-1, 0, 1)


def duffy_T(td, level, order=48):
    """2D Duffy-split quadrature of T_level over the reference triangle."""
    return duffy_integrate(lambda x: eval_T(level, td, x), td.x0hat, order, 0.1 * td.h)[0]


def test_edge_geometry_examples():
    geo = edge_geometry([0.2, 0.4])
    np.testing.assert_allclose(geo.s, [0.4, np.sqrt(2) / 2 * 0.4, 0.2], rtol=1e-15)
    c = edge_geometry([1 / 3, 1 / 3])
    assert c.s[0] == c.s[2] == pytest.approx(1 / 3) and c.s[1] == pytest.approx(np.sqrt(2) / 6)
    assert edge_geometry([0.5, 0.0]).s[0] == 0.0
    np.testing.assert_allclose(geo.speed, [0.5, np.sqrt(2) / 2, 0.5])


@given(st.tuples(st.floats(-0.5, 1.5), st.floats(-0.5, 1.5)), st.floats(-1, 1))
def test_edge_constancy_and_sign(x, t):
    geo = edge_geometry(x)
    for j in range(3):
        assert geo.r(j, t) @ geo.normals[j] == pytest.approx(geo.s[j], abs=1e-14)
    inside = x[0] >= 0 and x[1] >= 0 and x[0] + x[1] <= 1
    assert inside == bool(np.all(geo.s >= 0))


def test_flat_vertex_closed_form(flat):
    td = taylor_data(flat, ONE, SingularityLocation.on_surface(flat, [0.0, 0.0]))
    geo = edge_geometry([0.0, 0.0])
    rules = edge_rules(geo, 40)
    assert rules[0] is None and rules[2] is None
    assert I_minus1(td, geo, rules) == pytest.approx(np.sqrt(2) * np.log(1 + np.sqrt(2)), rel=1e-12)
    assert I_zero(td, geo, rules) == 0 and I_one(td, geo, rules) == 0


def test_flat_near_edge_matches_asinh(flat):
    eps = 1e-4
    td = taylor_data(flat, ONE, SingularityLocation.on_surface(flat, [0.0, eps]))
    geo = edge_geometry([0.0, eps])
    rules = edge_rules(geo, 20)
    edge1 = geo.s[0] * geo.speed[0] * float(rules[0].weights @ edge_kernel(0, 0, 1, np.linalg.norm(
        geo.r(0, rules[0].nodes), axis=-1), 0.0))
    assert edge1 == pytest.approx(eps * np.arcsinh(1 / eps), rel=1e-13)


@pytest.mark.parametrize("phi", [ONE, DensityPolynomial.basis(2), DensityPolynomial.basis(4)])
def test_against_duffy_oracle_interior_h0(exp_tri, phi):
    td = taylor_data(exp_tri, phi, SingularityLocation.on_surface(exp_tri, [0.2, 0.4]))
    geo = edge_geometry(td.x0hat)
    got = continuation_integrals(td, geo, edge_rules(geo, 60))
    for lev in LEVELS:
        want = duffy_T(td, lev)
        assert got[lev] == pytest.approx(want, rel=1e-8, abs=1e-12), lev


@pytest.mark.parametrize("offset", [1e-3, 0.05])
def test_against_duffy_oracle_h_positive(exp_tri, offset):
    xh = np.array([0.3, 0.25])
    loc = newton_locate(exp_tri, exp_tri(xh) + offset * exp_tri.normal(xh))
    td = taylor_data(exp_tri, DensityPolynomial.basis(5), loc)
    geo = edge_geometry(td.x0hat)
    got = continuation_integrals(td, geo, edge_rules(geo, 60))
    for lev in LEVELS:
        assert got[lev] == pytest.approx(duffy_T(td, lev), rel=1e-8, abs=1e-12), lev


def test_near_edge_transplanted(exp_tri):
    td = taylor_data(exp_tri, ONE, SingularityLocation.on_surface(exp_tri, [0.5, 1e-4]))
    geo = edge_geometry(td.x0hat)
    trans = continuation_integrals(td, geo, edge_rules(geo, 60))
    plain = continuation_integrals(td, geo, edge_rules(geo, 60, "plain-gauss"))
    for lev in LEVELS:
        want = duffy_T(td, lev, order=64)
        assert trans[lev] == pytest.approx(want, rel=1e-8, abs=1e-12), lev
    assert abs(plain[-1] - trans[-1]) > 1e-6


def test_outside_point_signed(exp_tri):
    # x0hat outside: T_l is smooth on the triangle, plain tensor Gauss is an oracle
    td = taylor_data(exp_tri, ONE, SingularityLocation.on_surface(exp_tri, [0.7, 0.6]))
    geo = edge_geometry(td.x0hat)
    assert geo.s[1] < 0
    got = continuation_integrals(td, geo, edge_rules(geo, 60))
    for lev in LEVELS:
        assert got[lev] == pytest.approx(duffy_T(td, lev), rel=1e-8, abs=1e-12), lev


@given(interior_points)
def test_h_continuity(x):
    from singint.geometry import explicit_triangle

    tri = explicit_triangle(0.6, 0.7, 0.5)
    x = np.array(x)
    td0 = taylor_data(tri, DensityPolynomial.basis(3), SingularityLocation.on_surface(tri, x))
    loc = newton_locate(tri, tri(x) + 1e-9 * tri.normal(x))
    tdh = taylor_data(tri, DensityPolynomial.basis(3), loc)
    g0, gh = edge_geometry(td0.x0hat), edge_geometry(tdh.x0hat)
    a = continuation_integrals(td0, g0, edge_rules(g0, 30))
    b = continuation_integrals(tdh, gh, edge_rules(gh, 30))
    for lev in LEVELS:
        assert abs(a[lev] - b[lev]) <= 1e-6 * max(abs(a[lev]), 1e-3 * abs(a[-1])) + 1e-14


def test_edge_skip_equals_tiny_distance(exp_tri):
    td = taylor_data(exp_tri, ONE, SingularityLocation.on_surface(exp_tri, [0.0, 0.4]))
    geo = edge_geometry(td.x0hat)
    rules = edge_rules(geo, 40)
    assert rules[2] is None
    skipped = continuation_integrals(td, geo, rules)
    tiny = EdgeGeometry(geo.x0hat, np.array([geo.s[0], geo.s[1], 1e-300]), geo.speed, geo.normals)
    rules_tiny = list(rules)
    rules_tiny[2] = rules[0]
    included = continuation_integrals(td, tiny, rules_tiny)
    for lev in LEVELS:
        assert np.isfinite(included[lev]) and included[lev] == pytest.approx(skipped[lev], rel=1e-14)


def test_unskipped_edge_through_singularity_raises(exp_tri):
    td = taylor_data(exp_tri, ONE, SingularityLocation.on_surface(exp_tri, [0.5, 0.0]))
    geo = edge_geometry(td.x0hat)
    rules = edge_rules(geo, 5)  # odd n puts a node at t = 0, i.e. at x0hat
    rules[0] = rules[1]
    with pytest.raises(ContinuationError):
        continuation_integrals(td, geo, rules)


@pytest.mark.parametrize("term", TERMS, ids=[t[1] for t in TERMS])
@pytest.mark.parametrize("rho,h", [(0.3, 0.7), (2.0, 0.1), (0.05, 0.2), (1e-3, 1.0), (5.0, 1e-6)])
def test_kernel_against_mpmath(term, rho, h):
    _, _, m, k, p = term
    r = m + k - p
    mpmath.mp.dps = 40
    exact = h ** (r + 2) * mpmath.quad(lambda u: u ** (k - r - 3) * (rho**2 + u**2) ** (-p / 2), [h, 10 * h, mpmath.inf])
    assert edge_kernel(m, k, p, np.array([rho]), h)[0] == pytest.approx(float(exact), rel=1e-12)


@pytest.mark.parametrize("term", TERMS, ids=[t[1] for t in TERMS])
def test_kernel_series_closed_form_seam(term):
    _, _, m, k, p = term
    h = 0.37
    lo, hi = edge_kernel(m, k, p, np.array([SERIES_CUTOFF * h * (1 - 1e-12), SERIES_CUTOFF * h * (1 + 1e-12)]), h)
    assert lo == pytest.approx(hi, rel=1e-10)


@pytest.mark.parametrize("term", TERMS, ids=[t[1] for t in TERMS])
def test_kernel_h0_limit(term):
    # k = 0 kernels approach the h = 0 form to O(h); k > 0 kernels vanish like h^k
    _, _, m, k, p = term
    rho = np.array([0.3, 1.7])
    w0 = edge_kernel(m, k, p, rho, 0.0)
    gaps = [np.max(abs(edge_kernel(m, k, p, rho, h) - w0) / rho ** (-p)) for h in (1e-8, 1e-10)]
    assert gaps[1] <= 1e-7
    assert gaps[1] <= 0.02 * gaps[0] or gaps[1] <= 1e-14


@given(st.floats(1e-3, 10), st.floats(1e-3, 10))
def test_h_consistency_identity(y, h):
    mpmath.mp.dps = 30
    lhs = h * mpmath.quad(lambda u: 1 / (u**2 * mpmath.sqrt(y**2 + u**2)), [h, mpmath.inf])
    Y, H = mpmath.mpf(y), mpmath.mpf(h)
    rhs = float((mpmath.sqrt(Y**2 + H**2) - H) / Y**2)
    assert float(lhs) == pytest.approx(rhs, rel=1e-12)
    assert edge_kernel(0, 0, 1, np.array([y]), h)[0] == pytest.approx(rhs, rel=1e-12)
