"""Regenerate the packaged short-distance rho table (src/roughcasimir/data/rho_short.csv).

    python scripts/tabulate_rho_short.py [--tol 1e-6]

Takes a few minutes on one core. The CLI's `correct` and `sweep` commands
read this table unless `--curve compute` is given.
"""

import argparse
import time
from pathlib import Path

from roughcasimir import __version__
from roughcasimir.curve import curve_to_csv
from roughcasimir.quadrature import QuadratureSpec
from roughcasimir.short import default_grid, rho_short

OUT = Path(__file__).resolve().parents[1] / "src" / "roughcasimir" / "data" / "rho_short.csv"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--tol", type=float, default=1e-6)
    ap.add_argument("--out", type=Path, default=OUT)
    args = ap.parse_args()
    t0 = time.time()
    curve = rho_short(default_grid(), spec=QuadratureSpec(rel_tol=args.tol))
    if not curve.converged:
        raise SystemExit("quadrature did not converge; table not written")
    prov = [f"roughcasimir {__version__}", f"quadrature rel_tol={args.tol:g}",
            "generated by scripts/tabulate_rho_short.py"]
    args.out.write_text(curve_to_csv(curve, prov))
    print(f"wrote {len(curve.x)} rows to {args.out} in {time.time() - t0:.0f} s; "
          f"beta={curve.asymptote_beta:.5f}")


if __name__ == "__main__":
    main()
