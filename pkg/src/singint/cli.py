"""Command-line driver: convergence tables as CSV.

    singint single --experiment center-singular --levels tm1,t0,t1 --nmax 64 --out single.csv
    singint double --nmin 4 --nmax 24 --oracle
    singint quad-demo --mu -1 --nu 2e-4
"""
from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, field

import numpy as np

from .geometry import explicit_triangle, read_element_file, DensityPolynomial
from .integrals import RegularizationLevel, SingleIntegrator, fit_slope, integrate_double_identical
from .oracle import duffy_single, relative_coordinate_double
from .preimage import NewtonConvergenceError, newton_locate
from .quadrature import (
    ConformalMapParams, exact_f_munu_integral, f_munu, gauss_legendre, predicted_rho, transplanted_rule,
)

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2

EXPERIMENTS = {
    # name: (abc, preimage, offset along the unit normal)
    "center-singular": ((0.6, 0.7, 0.5), (0.2, 0.4), 0.0),
    "near-singular": ((0.6, 0.7, 0.5), (0.2, 0.4), 1e-4),
    "near-edge": ((0.6, 0.7, 0.5), (0.5, 1e-4), 0.0),
}
DOUBLE_ABC = (0.5, 0.5, 1.0)


class UsageError(ValueError):
    pass


@dataclass
class StudyConfig:
    experiment: str
    abc: tuple | None = None
    element: str | None = None
    preimage: tuple | None = None
    offset: float | None = None
    point: tuple | None = None
    levels: tuple = (RegularizationLevel.Tm1, RegularizationLevel.T0, RegularizationLevel.T1)
    ns: list = field(default_factory=list)
    rule: str = "transplanted"
    out: str | None = None
    oracle: bool = False
    reference: float | None = None

    def __post_init__(self):
        if not self.ns:
            raise UsageError("empty n-range")
        if any(b <= a for a, b in zip(self.ns, self.ns[1:])):
            raise UsageError("n-range must be increasing")
        if self.ns[0] < 2:
            raise UsageError("n must be >= 2")

    def triangle(self, default_abc):
        if self.element:
            return read_element_file(self.element)
        return explicit_triangle(*(self.abc or default_abc))


def fmt(x) -> str:
    return f"{x:.16e}"


def _floats(text, count=None, name="value"):
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad {name} {text!r}") from None
    if count is not None and len(vals) != count:
        raise argparse.ArgumentTypeError(f"{name} needs {count} comma-separated numbers")
    return vals


def _levels(text):
    try:
        return tuple(RegularizationLevel.parse(v) for v in text.split(","))
    except ValueError as err:
        raise argparse.ArgumentTypeError(str(err)) from None


def _write_csv(path, header, rows):
    fh = open(path, "w", newline="") if path else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if isinstance(v, float) else v for v in row])
    finally:
        if path:
            fh.close()


def _table(records, ns, count):
    """Wide rows: n, N, then value/rel_error per level."""
    header = ["n", count]
    for lev in records:
        header += [f"value_{lev.label}", f"rel_error_{lev.label}"]
    rows = []
    for i, n in enumerate(ns):
        row = [n, records[next(iter(records))][i][0]]
        for vals in records.values():
            row += [vals[i][1], vals[i][2]]
        rows.append(row)
    return header, rows


def _report(records, log):
    for lev, vals in records.items():
        slope = fit_slope([v[0] for v in vals], [v[2] for v in vals])
        text = "undefined" if slope is None else f"{slope:.3f}"
        print(f"{lev.label}: slope {text}", file=log)


def cmd_single(cfg: StudyConfig, log=None) -> int:
    log = log or sys.stderr
    abc, xhat, offset = EXPERIMENTS[cfg.experiment]
    tri = cfg.triangle(abc)
    phi = DensityPolynomial.constant(1.0)
    if cfg.point is not None:
        x0 = np.array(cfg.point)
    else:
        xhat = np.array(cfg.preimage or xhat)
        off = offset if cfg.offset is None else cfg.offset
        x0 = tri(xhat) + off * tri.normal(xhat)
    loc = newton_locate(tri, x0)
    if not loc.converged:
        print(f"error: preimage search did not converge for x0 = {x0}", file=log)
        return EXIT_NUMERICAL
    if cfg.reference is not None and not cfg.oracle:
        ref = cfg.reference
    else:
        res = duffy_single(tri, phi, x0, loc.x0hat, refinement=1, h=loc.h)
        ref = float(res.value)
        print(f"reference {fmt(ref)} (oracle estimated error {res.estimated_error:.2e})", file=log)
    records = {}
    for lev in cfg.levels:
        vals = []
        for n in cfg.ns:
            v = SingleIntegrator(tri, phi, n, lev, cfg.rule)(x0, loc)
            vals.append((n * n, v, abs(v - ref) / abs(ref)))
        records[lev] = vals
    _write_csv(cfg.out, *_table(records, cfg.ns, "N"))
    _report(records, log)
    return EXIT_OK


def cmd_double(cfg: StudyConfig, workers=1, log=None) -> int:
    log = log or sys.stderr
    tri = cfg.triangle(DOUBLE_ABC)
    if cfg.reference is not None and not cfg.oracle:
        ref = cfg.reference
    else:
        res = relative_coordinate_double(tri, refinement=1)
        ref = res.value
        print(f"reference {fmt(ref)} (oracle estimated error {res.estimated_error:.2e})", file=log)
    records = {}
    for lev in cfg.levels:
        vals = []
        for n in cfg.ns:
            r = integrate_double_identical(tri, n, lev, rule=cfg.rule, workers=workers)
            vals.append((r.M, r.value, abs(r.value - ref) / abs(ref)))
        records[lev] = vals
    _write_csv(cfg.out, *_table(records, cfg.ns, "M"))
    _report(records, log)
    return EXIT_OK


def cmd_quad_demo(mu, nu, target_mu, target_nu, ns, out=None, log=None) -> int:
    """Errors of Gauss and g_{mu,nu}-transplanted Gauss on f_{target_mu, target_nu}."""
    log = log or sys.stderr
    for m, v in ((mu, nu), (target_mu, target_nu)):
        if not (-1 <= m <= 1 and v > 0):
            raise UsageError(f"need |mu| <= 1 and nu > 0, got mu={m}, nu={v}")
    params = ConformalMapParams(mu, nu)
    exact = exact_f_munu_integral(target_mu, target_nu)
    rows = []
    for n in ns:
        base = gauss_legendre(n)
        rule = transplanted_rule(base, params)
        eg = abs(base.weights @ f_munu(base.nodes, target_mu, target_nu) - exact) / exact
        et = abs(rule.weights @ f_munu(rule.nodes, target_mu, target_nu) - exact) / exact
        rows.append([n, float(eg), float(et)])
    _write_csv(out, ["n", "rel_error_gauss", "rel_error_transplanted"], rows)
    if (mu, nu) == (target_mu, target_nu):
        trans = ("matched", mu, nu)
    else:
        trans = ("mismatched", mu, nu, (target_mu - mu) / nu, target_nu / nu)
    for label, args in (("transplanted", trans), ("gauss", ("gauss", target_mu, target_nu))):
        try:
            pred = predicted_rho(*args)
        except ValueError:
            pred = "n/a (outside the 0 < nu < 1 range of the bounds)"
        print(f"predicted rho ({label}): {pred}", file=log)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="singint", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, nmin, nmax):
        sp.add_argument("--abc", type=lambda s: _floats(s, 3, "--abc"))
        sp.add_argument("--element", help="control-point file, lines 'j x y z'")
        sp.add_argument("--levels", type=_levels, default=_levels("tm1,t0,t1"))
        sp.add_argument("--nmin", type=int, default=nmin)
        sp.add_argument("--nmax", type=int, default=nmax)
        sp.add_argument("--ns", type=lambda s: [int(v) for v in s.split(",")], help="explicit n list")
        sp.add_argument("--rule", choices=("transplanted", "plain-gauss"), default="transplanted")
        sp.add_argument("--out", help="CSV path (default stdout)")
        sp.add_argument("--oracle", action="store_true", help="recompute and print the reference value")
        sp.add_argument("--reference", type=float, help="skip the oracle and use this value")

    s = sub.add_parser("single", help="2D singular / near-singular study")
    s.add_argument("--experiment", choices=sorted(EXPERIMENTS), default="center-singular")
    s.add_argument("--preimage", type=lambda v: _floats(v, 2, "--preimage"))
    s.add_argument("--offset", type=float, help="distance along the unit normal")
    s.add_argument("--point", type=lambda v: _floats(v, 3, "--point"), help="explicit x0")
    common(s, 2, 64)

    d = sub.add_parser("double", help="4D identical-triangle study")
    d.add_argument("--workers", type=int, default=1)
    common(d, 4, 24)

    q = sub.add_parser("quad-demo", help="1D Gauss vs transplanted Gauss")
    q.add_argument("--mu", type=float, default=-1.0)
    q.add_argument("--nu", type=float, default=2e-4)
    q.add_argument("--target-mu", type=float)
    q.add_argument("--target-nu", type=float)
    q.add_argument("--nmin", type=int, default=1)
    q.add_argument("--nmax", type=int, default=40)
    q.add_argument("--out")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        if args.command == "quad-demo":
            ns = list(range(args.nmin, args.nmax + 1))
            if not ns or args.nmin < 1:
                raise UsageError("bad n-range")
            tmu = args.mu if args.target_mu is None else args.target_mu
            tnu = args.nu if args.target_nu is None else args.target_nu
            return cmd_quad_demo(args.mu, args.nu, tmu, tnu, ns, args.out)
        ns = args.ns or list(range(args.nmin, args.nmax + 1))
        cfg = StudyConfig(
            experiment=getattr(args, "experiment", "double"),
            abc=args.abc, element=args.element, preimage=getattr(args, "preimage", None),
            offset=getattr(args, "offset", None), point=getattr(args, "point", None),
            levels=args.levels, ns=ns, rule=args.rule, out=args.out, oracle=args.oracle,
            reference=args.reference,
        )
        if args.command == "single":
            return cmd_single(cfg)
        return cmd_double(cfg, workers=args.workers)
    except (UsageError, OSError) as err:
        print(f"usage error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as err:
        # invalid numeric parameters (e.g. nu <= 0, mu outside [-1, 1])
        print(f"usage error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except NewtonConvergenceError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
