"""Acceptance criteria, one test each; a PASS/FAIL line per criterion is
printed in the terminal summary (see conftest.ACCEPTANCE)."""
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE
from singint.geometry import DensityPolynomial, QuadraticTriangle, basis_eval, explicit_triangle, metric_density
from singint.integrals import RegularizationLevel, double_study, fit_slope, integrate_single, single_study
from singint.oracle import duffy_integrate, duffy_single, relative_coordinate_double
from singint.preimage import SingularityLocation, newton_locate
from singint.quadrature import (
    ConformalMapParams, conformal_map, exact_f_munu_integral, f_munu, gauss_legendre, predicted_rho,
    transplanted_rule,
)

ONE = DensityPolynomial.constant()
LEVELS = list(RegularizationLevel)
NS_2D = list(range(2, 129))
WINDOWS = {RegularizationLevel.Tm1: (-1.2, -0.85), RegularizationLevel.T0: (-2.0, -1.2),
           RegularizationLevel.T1: (-2.3, -1.8)}
EPS = 1e-4


def record(key, ok, detail):
    ACCEPTANCE[key] = (bool(ok), detail)
    assert ok, detail


def slopes_in_windows(recs):
    slopes = {lev: rec.slope for lev, rec in recs.items()}
    ok = all(s is not None and WINDOWS[lev][0] <= s <= WINDOWS[lev][1] for lev, s in slopes.items())
    text = ", ".join(f"{lev.label} {s:.3f} in [{WINDOWS[lev][0]}, {WINDOWS[lev][1]}]" for lev, s in slopes.items())
    return ok, text


def exp_tri():
    return explicit_triangle(0.6, 0.7, 0.5)


def run_2d(x0, xhat_hint=None, rule="transplanted"):
    tri = exp_tri()
    loc = newton_locate(tri, x0)
    ref = duffy_single(tri, ONE, x0, loc.x0hat, refinement=1, h=loc.h)
    recs = single_study(tri, ONE, x0, LEVELS, NS_2D, ref.value, rule)
    return ref, recs


def test_c1_center_singular():
    tri = exp_tri()
    t = time.perf_counter()
    ref, recs = run_2d(tri(np.array([0.2, 0.4])))
    elapsed = time.perf_counter() - t
    ok, text = slopes_in_windows(recs)
    ok_ref = ref.estimated_error <= 1e-10 * abs(ref.value)
    record("criterion 1", ok and ok_ref and elapsed <= 120,
           f"{text}; oracle self-consistency {ref.estimated_error:.1e}; {elapsed:.0f} s")


def test_c2_near_singular():
    tri = exp_tri()
    xh = np.array([0.2, 0.4])
    ref, recs = run_2d(tri(xh) + 1e-4 * tri.normal(xh))
    ok, text = slopes_in_windows(recs)
    record("criterion 2", ok and ref.estimated_error <= 1e-10 * abs(ref.value), text)


@pytest.fixture(scope="module")
def near_edge():
    tri = exp_tri()
    x0 = tri(np.array([0.5, EPS]))
    return tri, x0, duffy_single(tri, ONE, x0, np.array([0.5, EPS]), refinement=1).value


def test_c3a_near_edge_transplanted(near_edge):
    tri, x0, ref = near_edge
    recs = single_study(tri, ONE, x0, LEVELS, NS_2D, ref)
    ok, text = slopes_in_windows(recs)
    record("criterion 3a", ok, text)


def test_c3b_near_edge_plain_gauss_plateau(near_edge):
    tri, x0, ref = near_edge
    recs = single_study(tri, ONE, x0, LEVELS, NS_2D, ref, rule="plain-gauss")
    parts, ok = [], True
    for k, (lev, rec) in enumerate(recs.items(), start=1):
        errs = np.array([r[3] for r in rec.rows])
        tail = errs[-len(errs) // 3:]
        plateau = float(np.median(tail))
        flat = abs(fit_slope([r[1] for r in rec.rows][-len(errs) // 3:], tail) or 0.0) < 0.3
        target = EPS**k * np.log(2 / EPS)
        good = flat and target / 10 <= plateau <= 10 * target
        ok &= good
        parts.append(f"{lev.label} plateau {plateau:.2e} vs {target:.2e}{'' if flat else ' (not flat)'}")
    record("criterion 3b", ok, "; ".join(parts))


def test_c4_one_dimensional_rules():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(10):
        mu, nu = rng.uniform(-1, 1), 10 ** rng.uniform(-3, 0)
        r = transplanted_rule(gauss_legendre(1), ConformalMapParams(mu, nu))
        exact = exact_f_munu_integral(mu, nu)
        worst = max(worst, abs(r.weights @ f_munu(r.nodes, mu, nu) - exact) / exact)
    ok_a = worst <= 1e-13

    ratios = []
    for eps in (1e-2, 1e-3):
        exact = exact_f_munu_integral(-1, 2 * eps)
        ns = np.arange(2, 600, 3)
        errs = np.array([abs(gauss_legendre(int(n)).integrate(lambda t: f_munu(t, -1, 2 * eps)) - exact) for n in ns])
        keep = errs > 1e-13 * exact
        rate = np.polyfit(ns[keep], np.log(errs[keep]), 1)[0]
        ratios.append(rate / (-2 * np.log(1 + np.sqrt(2 * eps))))
    ok_b = all(abs(q - 1) <= 0.2 for q in ratios)

    observed, bounds = [], []
    for eps in (1e-2, 1e-3, 1e-4):
        params = ConformalMapParams(0.0, 2 * eps)
        exact = exact_f_munu_integral(0.0, 5 * eps)
        ns = np.arange(1, 60)
        errs = []
        for n in ns:
            r = transplanted_rule(gauss_legendre(int(n)), params)
            errs.append(abs(r.weights @ f_munu(r.nodes, 0.0, 5 * eps) - exact) / exact)
        errs = np.array(errs)
        keep = errs > 1e-13
        observed.append(float(np.exp(-np.polyfit(ns[keep], np.log(errs[keep]), 1)[0] / 2)))
        bounds.append(predicted_rho("mismatched", 0.0, 2 * eps, 0.0, 2.5))
    ok_c = all(o >= b for o, b in zip(observed, bounds))
    record("criterion 4", ok_a and ok_b and ok_c,
           f"(a) worst n=1 error {worst:.1e}; (b) rate ratios {', '.join(f'{q:.3f}' for q in ratios)}; "
           f"(c) rho {', '.join(f'{o:.4f}>={b:.4f}' for o, b in zip(observed, bounds))}")


def test_c5_identical_triangles():
    tri = explicit_triangle(0.5, 0.5, 1.0)
    t = time.perf_counter()
    oracle = relative_coordinate_double(tri, refinement=1)
    ns = [8, 11, 16, 22, 32, 45, 64, 90]
    recs = double_study(tri, LEVELS, ns, oracle.value)
    elapsed = time.perf_counter() - t
    targets = {RegularizationLevel.Tm1: -0.5, RegularizationLevel.T0: -0.75, RegularizationLevel.T1: -1.0}
    slopes = {lev: rec.slope for lev, rec in recs.items()}
    ok_slopes = all(s is not None and abs(s - targets[lev]) <= 0.15 for lev, s in slopes.items())
    final = recs[RegularizationLevel.T1].rows[-1][3]
    # Richardson extrapolation of the T1 sequence under its O(1/M) rate
    (_, M1, v1, _), (_, M2, v2, _) = recs[RegularizationLevel.T1].rows[-2:]
    rich = (M2 * v2 - M1 * v1) / (M2 - M1)
    rich_gap = abs(rich - oracle.value) / abs(oracle.value)
    ok = ok_slopes and final <= 1e-6 and rich_gap <= 1e-7 and elapsed <= 600
    record("criterion 5", ok,
           ", ".join(f"{lev.label} {s:.3f} vs {targets[lev]}" for lev, s in slopes.items())
           + f"; T1 error at n={ns[-1]} {final:.1e}; Richardson vs oracle {rich_gap:.1e}; {elapsed:.0f} s")


def test_c6_properties():
    checks = {}
    x = np.random.default_rng(7).dirichlet(np.ones(3), size=50)[:, 1:]
    checks["partition of unity"] = np.max(abs(sum(basis_eval(j, x)[0] for j in range(1, 7)) - 1)) < 1e-14
    tri = exp_tri()
    from singint.geometry import REFERENCE_NODES

    checks["interpolation"] = np.max(abs(tri(REFERENCE_NODES) - tri.nodes)) == 0
    xp, step = np.array([0.27, 0.31]), 1e-6
    psi, g, _ = metric_density(tri, DensityPolynomial.basis(2), xp)
    fd = [(metric_density(tri, DensityPolynomial.basis(2), xp + e, order=0)[0]
           - metric_density(tri, DensityPolynomial.basis(2), xp - e, order=0)[0]) / (2 * step)
          for e in (np.array([step, 0]), np.array([0, step]))]
    checks["derivatives vs FD"] = np.all(abs(g - fd) <= 1e-6 * abs(psi))
    ends = [conformal_map(ConformalMapParams(m, v), np.array([-1.0, 1.0]))[0] for m, v in ((-1, 1e-3), (0.4, 0.2))]
    checks["g endpoints"] = all(abs(e[0] + 1) <= 1e-14 and abs(e[1] - 1) <= 1e-14 for e in ends)

    from singint.continuation import continuation_integrals, edge_geometry, edge_rules
    from singint.taylor import eval_T, taylor_data

    td = taylor_data(tri, ONE, SingularityLocation.on_surface(tri, [0.2, 0.4]))
    geo = edge_geometry(td.x0hat)
    got = continuation_integrals(td, geo, edge_rules(geo, 60))
    want = {lev: duffy_integrate(lambda y: eval_T(lev, td, y), td.x0hat, 48)[0] for lev in (-1, 0, 1)}
    checks["continuation vs oracle"] = all(abs(got[l] - want[l]) <= 1e-8 * abs(want[l]) for l in want)
    loc = newton_locate(tri, tri(np.array([0.2, 0.4])) + 1e-9 * tri.normal(np.array([0.2, 0.4])))
    tdh = taylor_data(tri, ONE, loc)
    geh = edge_geometry(tdh.x0hat)
    goth = continuation_integrals(tdh, geh, edge_rules(geh, 60))
    checks["h -> 0 continuity"] = all(abs(goth[l] - got[l]) <= 1e-6 * abs(got[l]) for l in got)

    x0 = tri(np.array([0.3, 0.3])) + 0.01 * tri.normal(np.array([0.3, 0.3]))
    base = integrate_single(tri, ONE, x0, "t1", n=8)
    s = 7.5
    scaled = integrate_single(QuadraticTriangle(s * tri.nodes), ONE, s * x0, "t1", n=8)
    c, sn = np.cos(0.7), np.sin(0.7)
    Q = np.array([[c, -sn, 0], [sn, c, 0], [0, 0, 1]])
    shift = np.array([1.5, -2.0, 0.25])
    moved = integrate_single(QuadraticTriangle(tri.nodes @ Q.T + shift), ONE, Q @ x0 + shift, "t1", n=8)
    checks["scaling covariance"] = abs(scaled - s * base) <= 1e-12 * abs(s * base)
    checks["rigid motion"] = abs(moved - base) <= 1e-12 * abs(base)
    from singint.geometry import flat_triangle

    vertex = integrate_single(flat_triangle(), ONE, np.zeros(3), "t1", n=4)
    checks["flat vertex"] = abs(vertex - np.sqrt(2) * np.log(1 + np.sqrt(2))) <= 1e-10 * vertex
    failed = [k for k, v in checks.items() if not v]
    record("criterion 6", not failed,
           f"{len(checks) - len(failed)}/{len(checks)} checks" + (f"; failed: {', '.join(failed)}" if failed else "")
           + "; full property suites in test_geometry/quadrature/continuation/integrals")


def test_c7_out_of_scope_stated():
    readme = (Path(__file__).resolve().parents[1] / "README.md").read_text()
    needed = ("half-sphere", "far-field", "gap")
    missing = [w for w in needed if w not in readme.lower()]
    record("criterion 7", not missing,
           "README states scattering, far-field and gap studies as not reproduced"
           if not missing else f"README lacks: {missing}")
