"""Acceptance criteria 1-10, one PASS/FAIL line each in the terminal summary.

The full short-distance curve is recomputed once at the default tolerance
(a few minutes on one core) and shared by criteria 2, 4 and 6.
"""

import math
import time
import warnings

import numpy as np
import pytest

from conftest import record
from roughcasimir import cli
from roughcasimir.curve import SensitivityCurve, fit_slope
from roughcasimir.geometry import power_law_prefactor, regime_prefactor
from roughcasimir.long import rho_long
from roughcasimir.quadrature import QuadratureSpec
from roughcasimir.short import (
    G_short,
    PlasmaModel,
    asymptotic_beta,
    default_grid,
    energy_second_derivative,
    plasmon_smooth_energy,
    rho_short,
)
from roughcasimir.spectrum import (
    HeightMap,
    RoughnessWarning,
    format_height_map,
    gaussian_spectrum,
    periodogram,
    rho_bar,
    synthetic_gaussian_map,
    variance_of,
)

GOLD = PlasmaModel.from_wavelength(136.0)
DEFAULT = QuadratureSpec()

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def full_short():
    start = time.perf_counter()
    curve = rho_short(default_grid(), GOLD, DEFAULT)
    return curve, time.perf_counter() - start


@pytest.fixture(scope="module")
def long_curve():
    return rho_long(np.linspace(0.0, 100.0, 401))


def test_criterion_1_pfa_limit():
    xs = np.linspace(0.0, 0.3, 7)
    start = time.perf_counter()
    curve = rho_short(xs, GOLD, DEFAULT)
    elapsed = time.perf_counter() - start
    lo, hi = float(curve.rho.min()), float(curve.rho.max())
    ok = (curve.converged and curve.rho[0] == 1.0 and lo >= 0.98 and hi <= 1.06
          and elapsed < 60.0)
    record(1, ok, f"rho_short on [0, 0.3] spans [{lo:.5f}, {hi:.5f}], rho(0)={float(curve.rho[0])!r}, "
                  f"{elapsed:.1f} s at rel_tol 1e-6")
    assert ok


def test_criterion_2_short_asymptote(full_short):
    curve, elapsed = full_short
    slope = fit_slope(curve.x, curve.rho, 20.0, 60.0)
    ok = curve.converged and 0.43 <= slope <= 0.47 and elapsed < 1800.0
    record(2, ok, f"slope over [20, 60] = {slope:.5f} (asymptotic beta "
                  f"{asymptotic_beta().value:.5f}); full {curve.x.size}-point curve in {elapsed:.0f} s")
    assert ok


def test_criterion_3_long_asymptote(long_curve):
    slope = fit_slope(long_curve.x, long_curve.rho, 30.0, 100.0)
    ok = 0.32 <= slope <= 0.35 and long_curve.rho[0] == 1.0
    label = "fallback curve, flagged" if long_curve.fallback else "transcribed curve"
    record(3, ok, f"slope over [30, 100] = {slope:.5f} ({label})")
    assert ok


def test_criterion_4_regime_ordering(full_short, long_curve):
    curve, _ = full_short
    xs = curve.x[curve.x >= 2.0]
    margin = curve(xs) - long_curve(xs)
    ok = bool(np.all(margin > 0))
    label = "smoke test against fallback long curve" if long_curve.fallback else "transcribed"
    record(4, ok, f"rho_short - rho_long >= {margin.min():.4f} on {xs.size} samples x >= 2 ({label})")
    assert ok


def test_criterion_5_prefactors():
    exact = regime_prefactor("long") == 6.0 and regime_prefactor("short") == 3.0
    oracle = power_law_prefactor(3) == 6.0 and power_law_prefactor(2) == 3.0
    L = GOLD.lambda_p / 100.0
    ratio = L * L * energy_second_derivative(L, GOLD, DEFAULT) / (
        2.0 * plasmon_smooth_energy(L, GOLD, DEFAULT).value)
    ok = exact and oracle and abs(ratio - 3.0) <= 0.03
    record(5, ok, f"prefactors 6/3 exact={exact}, n(n+1)/2 oracle={oracle}, "
                  f"L^2 E''/2E = {ratio:.6f} at L = lambda_P/100")
    assert ok


def test_criterion_6_gaussian_closed_form(full_short):
    beta = asymptotic_beta().value
    linear = SensitivityCurve("short", [0.0, 1e6], [0.0, beta * 1e6], 0.0, beta,
                              extrapolate=False)
    lc = 10.0
    errs = []
    for ratio in (5.0, 20.0, 50.0):
        got = rho_bar(gaussian_spectrum(1.0, lc), linear, ratio * lc).value
        errs.append(abs(got / (beta * math.sqrt(math.pi) * ratio) - 1.0))
    curve, _ = full_short
    true = rho_bar(gaussian_spectrum(1.0, lc), curve, 20.0 * lc).value
    predicted = curve.asymptote_beta * math.sqrt(math.pi) * 20.0
    dev = abs(true / predicted - 1.0)
    ok = max(errs) <= 0.01 and dev <= 0.10
    record(6, ok, f"linear-rho closed form max rel err {max(errs):.2e}; true curve at L/lc=20: "
                  f"rho_bar={true:.4f} vs {predicted:.4f} ({dev:.2%})")
    assert ok


def _sweep_slope(capsys, lo, hi):
    code = cli.main(["sweep", "--L-min-nm", str(lo), "--L-max-nm", str(hi), "--points", "9",
                     "--regime", "short", "--gaussian", "1", "100"])
    out = capsys.readouterr().out
    assert code == 0
    rows = [r for r in out.splitlines() if r and not r.startswith(("#", "L_nm"))]
    v = np.array([[float(c) for c in r.split(",")] for r in rows])
    return float(np.polyfit(np.log(v[:, 0]), np.log(v[:, 1]), 1)[0])


def test_criterion_7_scaling_crossover(capsys):
    small = _sweep_slope(capsys, 1.0, 10.0)  # lc = 100 nm
    large = _sweep_slope(capsys, 1000.0, 10000.0)
    ok = abs(small + 2.0) <= 0.1 and abs(large + 1.0) <= 0.1
    record(7, ok, f"log-log sweep slopes {small:.4f} (L <= lc/10), {large:.4f} (L >= 10 lc)")
    assert ok


def test_criterion_8_oracle_equivalence():
    devs = []
    for L in (1.36, 4.3, 13.6):
        g0 = G_short(0.0, L, GOLD, DEFAULT).value
        fd = energy_second_derivative(L, GOLD, DEFAULT)
        devs.append(abs(2.0 * g0 / fd - 1.0))
    ok = max(devs) <= 0.01
    record(8, ok, f"2 G(0) vs finite-difference E'' at L = 1.36, 4.3, 13.6 nm: "
                  f"max rel dev {max(devs):.2e}")
    assert ok


def test_criterion_9_spectral_machinery():
    rng = np.random.default_rng(11)
    white = HeightMap(rng.standard_normal((128, 128)), 2.0, 2.0)
    n = 128
    x = np.arange(n) * 2.0
    cosine = HeightMap(np.tile(np.cos(2 * math.pi * 9 * x / (n * 2.0)), (n, 1)), 2.0, 2.0)
    devs = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RoughnessWarning)
        for hmap in (white, cosine):
            devs.append(abs(variance_of(periodogram(hmap)) / hmap.variance - 1.0))
    a = 1.7
    norm = abs(variance_of(gaussian_spectrum(a, 30.0)) / a**2 - 1.0)
    ok = max(devs) <= 0.02 and norm <= 0.005
    record(9, ok, f"Parseval rel dev white {devs[0]:.2e}, cosine {devs[1]:.2e}; "
                  f"gaussian normalization {norm:.2e}")
    assert ok


def test_criterion_10_determinism(capsys, tmp_path):
    hmap = synthetic_gaussian_map(64, 5.0, 2.0, 20.0, seed=7)
    map_path = tmp_path / "map.txt"
    map_path.write_text(format_height_map(hmap))
    csv_path = tmp_path / "spec.csv"
    assert cli.main(["spectrum", "--gaussian", "2", "20", "--points", "65"]) == 0
    csv_path.write_text(capsys.readouterr().out)
    commands = [
        ["rho", "--regime", "short", "--kl-max", "3", "--points", "4", "--tol", "1e-5"],
        ["rho", "--regime", "long"],
        ["figure1", "--kl-max", "3", "--points", "4", "--tol", "1e-5"],
        ["correct", "--L-nm", "40", "--R-nm", "1e5", "--regime", "short", "--gaussian", "2", "20"],
        ["correct", "--L-nm", "40", "--R-nm", "1e5", "--regime", "long",
         "--height-map", str(map_path), "--absolute"],
        ["spectrum", "--height-map", str(map_path), "--window", "hann"],
        ["spectrum", "--spectrum-csv", str(csv_path)],
        ["sweep", "--L-min-nm", "5", "--L-max-nm", "500", "--regime", "short",
         "--spectrum-csv", str(csv_path)],
        ["synth", "--n", "32", "--seed", "4"],
    ]
    differing = []
    for argv in commands:
        outs = []
        for _ in range(2):
            assert cli.main(argv) == 0
            outs.append(capsys.readouterr().out.encode())
        if outs[0] != outs[1]:
            differing.append(argv[0])
    ok = not differing
    record(10, ok, f"{len(commands)} CLI invocations repeated byte-identically"
                   + (f"; differing: {differing}" if differing else ""))
    assert ok
