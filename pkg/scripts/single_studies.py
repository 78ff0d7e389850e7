"""2D convergence studies over the explicit quadratic triangle.

One CSV per case: center singular, near singular (offset 1e-4 along the
normal), near edge with transplanted 1D rules and near edge with plain 1D
Gauss. Slopes are printed to stderr.
"""
import argparse
import sys
from pathlib import Path

from singint.cli import main

CASES = {
    "single_center.csv": ["--experiment", "center-singular"],
    "single_near.csv": ["--experiment", "near-singular"],
    "single_edge_transplanted.csv": ["--experiment", "near-edge"],
    "single_edge_plain.csv": ["--experiment", "near-edge", "--rule", "plain-gauss"],
}

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--nmax", type=int, default=128)
    a = ap.parse_args()
    a.out.mkdir(parents=True, exist_ok=True)
    for name, flags in CASES.items():
        print(f"== {name}", file=sys.stderr)
        code = main(["single", *flags, "--nmin", "2", "--nmax", str(a.nmax), "--out", str(a.out / name)])
        if code:
            sys.exit(code)
