"""Tabulate both sensitivity curves on one grid and optionally plot them.

    python scripts/figure1.py [--kl-max 20] [--points 41] [--out figure1.csv] [--png figure1.png]

The CSV matches ``roughcasimir figure1``. The short curve is read from the
packaged table so the script runs in seconds; plotting needs matplotlib,
which is not a package dependency.
"""

import argparse
from pathlib import Path

import numpy as np

from roughcasimir.curve import _fmt
from roughcasimir.long import compare_regimes, rho_long
from roughcasimir.short import packaged_rho_short


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--kl-max", type=float, default=20.0)
    ap.add_argument("--points", type=int, default=41)
    ap.add_argument("--out", type=Path, default=Path("figure1.csv"))
    ap.add_argument("--png", type=Path)
    args = ap.parse_args()

    xs = np.linspace(0.0, args.kl_max, args.points)
    table = compare_regimes(xs, short_curve=packaged_rho_short(), long_curve=rho_long(xs))
    lines = [f"# long fallback={str(table.fallback).lower()}", "kL,rho_long,rho_short"]
    lines += [f"{_fmt(x)},{_fmt(lo)},{_fmt(sh)}" for x, lo, sh in table.rows()]
    args.out.write_text("\n".join(lines) + "\n")
    print(f"wrote {args.out}")

    if args.png:
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(4.5, 3.5))
        ax.plot(table.x, table.rho_long, "-", label="long distances"
                + (" (fallback)" if table.fallback else ""))
        ax.plot(table.x, table.rho_short, "--", label="short distances")
        ax.set_xlabel("|k| L")
        ax.set_ylabel("rho")
        ax.legend()
        fig.tight_layout()
        fig.savefig(args.png, dpi=150)
        print(f"wrote {args.png}")


if __name__ == "__main__":
    main()
