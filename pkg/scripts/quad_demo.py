"""1D Gauss vs transplanted Gauss on f_{mu,nu}: matched and mismatched maps.

Writes quad_matched.csv (g_{-1,2eps} on f_{-1,2eps}) and quad_mismatched.csv
(g_{0,2eps} on f_{0,5eps}) into the output directory.
"""
import argparse
from pathlib import Path

from singint.cli import main


def run(out: Path, eps: float = 1e-4, nmax: int = 60):
    out.mkdir(parents=True, exist_ok=True)
    main(["quad-demo", "--mu", "-1", "--nu", str(2 * eps), "--nmax", str(nmax), "--out", str(out / "quad_matched.csv")])
    main(["quad-demo", "--mu", "0", "--nu", str(2 * eps), "--target-mu", "0", "--target-nu", str(5 * eps),
          "--nmax", str(nmax), "--out", str(out / "quad_mismatched.csv")])


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--eps", type=float, default=1e-4)
    ap.add_argument("--nmax", type=int, default=60)
    a = ap.parse_args()
    run(a.out, a.eps, a.nmax)
