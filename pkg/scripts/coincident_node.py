"""4D T_-1 rate with the coincident inner node dropped vs kept at a one-sided limit.

The outer and inner triangle rules share nodes, so each inner integral has a
node exactly at the singularity. The library drops it. Keeping it with the
residual's limit along one fixed direction (what an inexact preimage does in
effect) restores the slower M^-0.5 rate.
"""
import argparse

import numpy as np

from singint.geometry import DensityPolynomial, explicit_triangle, metric_density
from singint.integrals import SingleIntegrator, fit_slope
from singint.oracle import relative_coordinate_double
from singint.preimage import SingularityLocation
from singint.quadrature import triangle_rule
from singint.taylor import regularized_residual, taylor_data

ONE = DensityPolynomial.constant()


def tm1_double(tri, n, keep_limit):
    tr = triangle_rule(n)
    integ = SingleIntegrator(tri, ONE, n, "tm1")
    psi = metric_density(tri, ONE, tr.nodes, order=0)[0]
    total = 0.0
    for m, y in enumerate(tr.nodes):
        loc = SingularityLocation.on_surface(tri, y)
        v = integ(tri(y), loc)
        if keep_limit:
            td = taylor_data(tri, ONE, loc)
            v += tr.weights[m] * regularized_residual(tri, ONE, tri(y), td, -1, y + 1e-7 * np.array([0.6, 0.8]))
        total += tr.weights[m] * psi[m] * v
    return total


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ns", default="8,11,16,22,32")
    a = ap.parse_args()
    ns = [int(v) for v in a.ns.split(",")]
    tri = explicit_triangle(0.5, 0.5, 1.0)
    ref = relative_coordinate_double(tri, refinement=1).value
    print("mode,n,M,rel_error")
    for keep in (False, True):
        errs = []
        for n in ns:
            errs.append(abs(tm1_double(tri, n, keep) - ref) / abs(ref))
            print(f"{'limit' if keep else 'drop'},{n},{n**4},{errs[-1]:.6e}")
        print(f"# slope ({'limit' if keep else 'drop'}): {fit_slope([n**4 for n in ns], errs):.3f}")
