"""4D identical-triangle study (a = b = 0.5, c = 1) for all three levels."""
import argparse
import sys
from pathlib import Path

from singint.cli import main

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--ns", default="8,11,16,22,32,45,64,90")
    ap.add_argument("--workers", type=int, default=1)
    a = ap.parse_args()
    a.out.mkdir(parents=True, exist_ok=True)
    sys.exit(main(["double", "--ns", a.ns, "--workers", str(a.workers), "--out", str(a.out / "double.csv")]))
