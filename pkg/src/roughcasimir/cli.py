"""Command-line interface: ``roughcasimir <command> [flags]``.

stdout carries data (CSV or JSON), stderr carries logs and warnings.
Exit codes: 0 success (guards may warn), 2 usage, 3 numerical, 4 input data.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .curve import SensitivityCurve, _fmt, curve_to_csv
from .geometry import PlaneSphereSetup, full_correction, ideal_plane_sphere_force
from .long import compare_regimes, rho_long
from .quadrature import NonConvergence, QuadratureSpec
from .short import PlasmaModel, default_grid, packaged_rho_short, rho_short
from .spectrum import (
    InputDataError,
    format_height_map,
    gaussian_spectrum,
    ingest_height_map,
    periodogram,
    read_spectrum_csv,
    synthetic_gaussian_map,
)

log = logging.getLogger("roughcasimir")

EXIT_USAGE, EXIT_NUMERICAL, EXIT_INPUT = 2, 3, 4


class UsageError(Exception):
    pass


# nested integrals tighten inner tolerances by up to 100x; below this the
# innermost level would ask for less than double-precision roundoff
MIN_TOL = 1e-10


def _quad(args) -> QuadratureSpec:
    return QuadratureSpec(rel_tol=args.tol, max_subdivisions=args.max_subdivisions)


def _provenance(args, extra=()) -> list[str]:
    q = _quad(args)
    lines = [f"roughcasimir {__version__}",
             f"quadrature rel_tol={q.rel_tol:g} abs_tol={q.abs_tol:g} "
             f"max_subdivisions={q.max_subdivisions}"]
    return lines + list(extra)


def _model(args) -> PlasmaModel | None:
    if getattr(args, "omega_p_rad_s", None) is not None:
        return PlasmaModel(args.omega_p_rad_s)
    if getattr(args, "lambda_p_nm", None) is not None:
        return PlasmaModel.from_wavelength(args.lambda_p_nm)
    return None


def _require_converged(ok: bool, what: str):
    if not ok:
        raise NonConvergence(f"{what}: quadrature did not reach rel_tol")


def _grid(lo: float, hi: float, points: int) -> np.ndarray:
    if lo < 0 or not hi > lo or points < 2:
        raise UsageError("need 0 <= kl-min < kl-max and points >= 2")
    return np.linspace(lo, hi, points)


def _long_curve() -> SensitivityCurve:
    return rho_long(np.linspace(0.0, 100.0, 401))


def _spectrum(args):
    """Spectrum from exactly one of --gaussian / --spectrum-csv / --height-map."""
    q = _quad(args)
    if args.gaussian is not None:
        a, lc = args.gaussian
        return gaussian_spectrum(a, lc), None
    if args.spectrum_csv is not None:
        return read_spectrum_csv(Path(args.spectrum_csv).read_bytes(), q=q), None
    hmap = ingest_height_map(Path(args.height_map).read_bytes())
    return periodogram(hmap, args.window, q=q), hmap


def _sensitivity(args) -> SensitivityCurve:
    if args.regime == "long":
        return _long_curve()
    if args.curve == "table":
        return packaged_rho_short()
    curve = rho_short(default_grid(), _model(args), _quad(args))
    _require_converged(curve.converged, "rho_short")
    return curve


def _curve_note(curve: SensitivityCurve) -> str:
    return (f"curve regime={curve.regime} source={curve.meta.get('source', 'computed')} "
            f"fallback={str(curve.fallback).lower()}")


# ---------------------------------------------------------------------------
# commands

def cmd_rho(args) -> str:
    xs = _grid(args.kl_min, args.kl_max, args.points)
    if args.regime == "short":
        curve = rho_short(xs, _model(args), _quad(args))
        _require_converged(curve.converged, "rho_short")
    else:
        curve = rho_long(xs)
    extra = []
    if _model(args) is not None:
        extra.append(f"omega_p_rad_s={_fmt(_model(args).omega_p)}")
    return curve_to_csv(curve, _provenance(args, extra))


def cmd_figure1(args) -> str:
    xs = _grid(0.0, args.kl_max, args.points)
    short = rho_short(xs, None, _quad(args))
    _require_converged(short.converged, "rho_short")
    table = compare_regimes(xs, short_curve=short, long_curve=rho_long(xs))
    lines = [f"# {p}" for p in _provenance(args)]
    lines.append(f"# long fallback={str(table.fallback).lower()}, "
                 f"beta_short={_fmt(short.asymptote_beta)}")
    lines.append("kL,rho_long,rho_short")
    lines += [f"{_fmt(x)},{_fmt(lo)},{_fmt(sh)}" for x, lo, sh in table.rows()]
    return "\n".join(lines) + "\n"


def _report_dict(setup, spectrum, curve, args) -> dict:
    report = full_correction(setup, spectrum, curve, _quad(args))
    _require_converged(report.converged, "rho_bar")
    out = {
        "prefactor": report.prefactor,
        "a_nm": math.sqrt(spectrum.amplitude_sq),
        "lc_nm": spectrum.corr_length,
        "rho_bar": report.rho_bar,
        "relative_correction": report.relative_correction,
        "pfa_relative_correction": report.pfa_relative_correction,
        "guards": report.guards,
        "fallback_used": report.fallback_used,
        "warnings": report.warnings,
        "provenance": _provenance(args, [_curve_note(curve)]),
    }
    if args.absolute:
        f0 = ideal_plane_sphere_force(setup.L, setup.R)
        out["ideal_smooth_force_N"] = f0
        out["ideal_rough_force_N"] = f0 * (1.0 + report.relative_correction)
    return out


def cmd_correct(args) -> str:
    spectrum, hmap = _spectrum(args)
    if not spectrum.amplitude_sq > 0:
        raise InputDataError("spectrum has zero variance; nothing to correct")
    area = args.area_nm2 if args.area_nm2 is not None else (hmap.area if hmap is not None else None)
    setup = PlaneSphereSetup(args.L_nm, args.R_nm, args.regime, spectrum.corr_length, area)
    out = _report_dict(setup, spectrum, _sensitivity(args), args)
    return json.dumps(out, indent=2, sort_keys=True) + "\n"


def cmd_spectrum(args) -> str:
    spectrum, hmap = _spectrum(args)
    if spectrum.kind == "gaussian":
        k, sigma = spectrum.table(np.linspace(0.0, spectrum.k_max, args.points))
    else:
        k, sigma = spectrum.table()
    a2 = spectrum.amplitude_sq
    lc = spectrum.corr_length
    norm = sigma / a2 if a2 > 0 else np.full_like(sigma, np.nan)
    lines = [f"# {p}" for p in _provenance(args)]
    lines.append(f"# a2_nm2={_fmt(a2)}, lc_nm={_fmt(lc) if lc else 'invalid'}")
    if hmap is not None:
        lines.append(f"# grid_variance_nm2={_fmt(hmap.variance)}, "
                     f"anisotropy={_fmt(spectrum.meta['anisotropy'])}, window={args.window}")
    lines.append("k_inv_nm,sigma_nm4,sigma_normalized")
    lines += [f"{_fmt(a)},{_fmt(b)},{_fmt(c)}" for a, b, c in zip(k, sigma, norm)]
    return "\n".join(lines) + "\n"


def cmd_sweep(args) -> str:
    if not (0 < args.L_min_nm < args.L_max_nm) or args.points < 2:
        raise UsageError("need 0 < L-min-nm < L-max-nm and points >= 2")
    spectrum, _ = _spectrum(args)
    if not spectrum.amplitude_sq > 0:
        raise InputDataError("spectrum has zero variance")
    curve = _sensitivity(args)
    q = _quad(args)
    lines = [f"# {p}" for p in _provenance(args, [_curve_note(curve)])]
    lines.append(f"# regime={args.regime}, a2_nm2={_fmt(spectrum.amplitude_sq)}, "
                 f"lc_nm={_fmt(spectrum.corr_length) if spectrum.corr_length else 'invalid'}")
    lines.append("L_nm,relative_correction,pfa_relative_correction,rho_bar")
    with warnings.catch_warnings():
        # per-point guard warnings would drown the log; the sweep reports data only
        warnings.simplefilter("ignore")
        for L in np.geomspace(args.L_min_nm, args.L_max_nm, args.points):
            setup = PlaneSphereSetup(float(L), args.R_nm, args.regime,
                                     spectrum.corr_length)
            rep = full_correction(setup, spectrum, curve, q)
            _require_converged(rep.converged, f"rho_bar at L={L:g}")
            lines.append(f"{_fmt(L)},{_fmt(rep.relative_correction)},"
                         f"{_fmt(rep.pfa_relative_correction)},{_fmt(rep.rho_bar)}")
    return "\n".join(lines) + "\n"


def cmd_synth(args) -> str:
    if args.n < 8 or not (args.pitch_nm > 0 and args.a_nm > 0 and args.lc_nm > 0):
        raise UsageError("need n >= 8 and positive pitch, amplitude and correlation length")
    hmap = synthetic_gaussian_map(args.n, args.pitch_nm, args.a_nm, args.lc_nm, args.seed)
    return (f"# synthetic gaussian surface a_nm={args.a_nm:g} lc_nm={args.lc_nm:g} "
            f"seed={args.seed}\n" + format_height_map(hmap))


# ---------------------------------------------------------------------------
# parser

def _add_source(p: argparse.ArgumentParser, required: bool = True):
    src = p.add_mutually_exclusive_group(required=required)
    src.add_argument("--gaussian", nargs=2, type=float, metavar=("A_NM", "LC_NM"),
                     help="analytic Gaussian spectrum: rms amplitude and correlation length (nm)")
    src.add_argument("--spectrum-csv", metavar="PATH", help="tabulated k_inv_nm,sigma_nm4 CSV")
    src.add_argument("--height-map", metavar="PATH", help="ASCII height map (nm)")
    p.add_argument("--window", choices=("none", "hann"), default="none",
                   help="periodogram window for --height-map")


def _add_tol(p, default=1e-6):
    p.add_argument("--tol", type=float, default=default,
                   help=f"quadrature relative tolerance (>= {MIN_TOL:g})")
    p.add_argument("--max-subdivisions", type=int, default=2000,
                   help="panel budget per adaptive integral")


def _add_plasma(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--omega-p-rad-s", type=float, help="plasma frequency (recorded; rho is independent of it)")
    g.add_argument("--lambda-p-nm", type=float, help="plasma wavelength")


def _add_curve(p):
    p.add_argument("--curve", choices=("table", "compute"), default="table",
                   help="short regime: packaged rho table or fresh quadrature")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="roughcasimir", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rho", help="sensitivity curve rho(|k|L) as CSV")
    p.add_argument("--regime", choices=("short", "long"), required=True)
    p.add_argument("--kl-min", type=float, default=0.0)
    p.add_argument("--kl-max", type=float, default=20.0)
    p.add_argument("--points", type=int, default=81)
    _add_tol(p)
    _add_plasma(p)
    p.set_defaults(func=cmd_rho)

    p = sub.add_parser("figure1", help="both regimes on one grid (kL,rho_long,rho_short)")
    p.add_argument("--kl-max", type=float, default=20.0)
    p.add_argument("--points", type=int, default=41)
    _add_tol(p)
    p.set_defaults(func=cmd_figure1)

    p = sub.add_parser("correct", help="relative plane-sphere force correction as JSON")
    p.add_argument("--L-nm", type=float, required=True, help="closest-approach distance")
    p.add_argument("--R-nm", type=float, required=True, help="best-fit sphere radius")
    p.add_argument("--regime", choices=("short", "long"), required=True)
    p.add_argument("--area-nm2", type=float, help="plate area for the averaging guard")
    p.add_argument("--absolute", action="store_true",
                   help="also report ideal-mirror absolute forces (idealization)")
    _add_source(p)
    _add_tol(p)
    _add_plasma(p)
    _add_curve(p)
    p.set_defaults(func=cmd_correct)

    p = sub.add_parser("spectrum", help="tabulated roughness spectrum as CSV")
    _add_source(p)
    p.add_argument("--points", type=int, default=257, help="rows for the Gaussian source")
    _add_tol(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("sweep", help="correction versus L on a log grid")
    p.add_argument("--L-min-nm", type=float, required=True)
    p.add_argument("--L-max-nm", type=float, required=True)
    p.add_argument("--points", type=int, default=25)
    p.add_argument("--R-nm", type=float, default=1e5, help="sphere radius (guards only)")
    p.add_argument("--regime", choices=("short", "long"), required=True)
    _add_source(p)
    _add_tol(p)
    _add_plasma(p)
    _add_curve(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("synth", help="write a seeded synthetic Gaussian height map")
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--pitch-nm", type=float, default=5.0)
    p.add_argument("--a-nm", type=float, default=2.0)
    p.add_argument("--lc-nm", type=float, default=40.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth, tol=1e-6, max_subdivisions=2000)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        if not args.tol >= MIN_TOL:
            raise UsageError(f"--tol must be >= {MIN_TOL:g}")
        if args.max_subdivisions < 1:
            raise UsageError("--max-subdivisions must be >= 1")
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            out = args.func(args)
        for w in caught:
            log.warning("%s", w.message)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        log.error("%s", exc)
        return EXIT_USAGE
    except NonConvergence as exc:
        log.error("%s", exc)
        return EXIT_NUMERICAL
    except (InputDataError, OSError) as exc:
        log.error("input data: %s", exc)
        return EXIT_INPUT
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    sys.stdout.write(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
