import json
import math

import numpy as np
import pytest

from roughcasimir import cli
from roughcasimir.spectrum import format_height_map, synthetic_gaussian_map


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def data_rows(text):
    return [line for line in text.splitlines() if line and not line.startswith("#")]


def parse_csv(text):
    rows = data_rows(text)
    header = rows[0].split(",")
    values = np.array([[float(v) for v in r.split(",")] for r in rows[1:]])
    return header, values


@pytest.fixture
def map_file(tmp_path):
    hmap = synthetic_gaussian_map(128, 5.0, 2.0, 30.0, seed=3)
    path = tmp_path / "map.txt"
    path.write_text(format_height_map(hmap))
    return path, hmap


def test_rho_short_small_grid(capsys):
    code, out, _ = run(capsys, "rho", "--regime", "short", "--kl-max", "1", "--points", "3",
                       "--tol", "1e-4")
    assert code == 0
    assert "# regime=short, fallback=false" in out
    header, v = parse_csv(out)
    assert header == ["kL", "rho"]
    assert v[0, 1] == 1.0
    assert np.all(v[1:, 1] > 1.0)


def test_rho_long_flags_fallback(capsys):
    code, out, _ = run(capsys, "rho", "--regime", "long", "--kl-max", "60", "--points", "7")
    assert code == 0
    assert "fallback=true" in out
    _, v = parse_csv(out)
    assert v[0, 1] == 1.0
    assert v[-1, 1] / v[-1, 0] == pytest.approx(1 / 3, rel=0.02)


def test_rho_records_plasma_frequency(capsys):
    code, out, _ = run(capsys, "rho", "--regime", "long", "--points", "3",
                       "--lambda-p-nm", "136")
    assert code == 0 and "omega_p_rad_s=" in out


def test_figure1_columns(capsys):
    code, out, _ = run(capsys, "figure1", "--kl-max", "4", "--points", "5", "--tol", "1e-4")
    assert code == 0
    assert "long fallback=true" in out
    header, v = parse_csv(out)
    assert header == ["kL", "rho_long", "rho_short"]
    assert v[0, 1] == v[0, 2] == 1.0
    assert np.all(v[v[:, 0] >= 2, 2] > v[v[:, 0] >= 2, 1])


def test_spectrum_gaussian_echo(capsys):
    code, out, _ = run(capsys, "spectrum", "--gaussian", "2", "40", "--points", "33")
    assert code == 0
    _, v = parse_csv(out)
    k, sigma, norm = v.T
    expected = math.pi * 4.0 * 1600.0 * np.exp(-(k * 40.0) ** 2 / 4)
    np.testing.assert_allclose(sigma, expected, rtol=1e-12, atol=0)
    np.testing.assert_allclose(norm, expected / 4.0, rtol=1e-12)


def test_spectrum_height_map_variance(capsys, map_file):
    path, hmap = map_file
    code, out, _ = run(capsys, "spectrum", "--height-map", str(path))
    assert code == 0
    a2 = float(out.split("a2_nm2=")[1].split(",")[0])
    assert a2 == pytest.approx(hmap.variance, rel=0.02)
    assert "grid_variance_nm2=" in out


def test_spectrum_zero_map(capsys, tmp_path):
    path = tmp_path / "flat.txt"
    path.write_text("16 16 1 1\n" + "\n".join(" ".join(["3.5"] * 16) for _ in range(16)) + "\n")
    code, out, _ = run(capsys, "spectrum", "--height-map", str(path))
    assert code == 0
    assert "a2_nm2=0, lc_nm=invalid" in out
    _, v = parse_csv(out)
    assert np.all(v[:, 1] == 0.0)
    assert np.all(np.isnan(v[:, 2]))


def test_correct_json(capsys):
    code, out, _ = run(capsys, "correct", "--L-nm", "100", "--R-nm", "1e5", "--regime", "short",
                       "--gaussian", "2", "10")
    assert code == 0
    rep = json.loads(out)
    assert rep["prefactor"] == 3.0
    assert rep["relative_correction"] == pytest.approx(
        rep["prefactor"] * (2.0 / 100.0) ** 2 * rep["rho_bar"], rel=1e-14)
    assert rep["pfa_relative_correction"] == pytest.approx(3 * 4e-4, rel=1e-14)
    assert rep["rho_bar"] > 1.0
    assert rep["fallback_used"] is False
    assert set(rep["guards"]) == {"pfa_geometry_ok", "averaging_ok", "ergodic_ok"}


@pytest.mark.parametrize("lc, expected", [(1000.0, 1.0), (10.0, 0.45 * math.sqrt(math.pi) * 10)])
def test_correct_pfa_and_asymptotic_regimes(capsys, lc, expected):
    code, out, _ = run(capsys, "correct", "--L-nm", "100", "--R-nm", "1e5", "--regime", "short",
                       "--gaussian", "5", str(lc))
    rep = json.loads(out)
    ratio = rep["relative_correction"] / rep["pfa_relative_correction"]
    assert ratio == pytest.approx(expected, rel=0.02 if lc > 100 else 0.10)


def test_correct_long_regime_flags_fallback(capsys, map_file):
    path, _ = map_file
    code, out, _ = run(capsys, "correct", "--L-nm", "100", "--R-nm", "1e5", "--regime", "long",
                       "--height-map", str(path))
    assert code == 0
    rep = json.loads(out)
    assert rep["prefactor"] == 6.0 and rep["fallback_used"] is True
    assert any("fallback=true" in line for line in rep["provenance"])


def test_correct_guard_failure_still_succeeds(capsys, caplog):
    code, out, _ = run(capsys, "correct", "--L-nm", "100", "--R-nm", "5000", "--regime",
                       "short", "--gaussian", "1", "20")
    assert code == 0
    rep = json.loads(out)
    assert rep["guards"]["pfa_geometry_ok"] is False
    assert any("pfa_geometry_ok" in w for w in rep["warnings"])
    assert "pfa_geometry_ok" in caplog.text


def test_correct_absolute_forces(capsys):
    code, out, _ = run(capsys, "correct", "--L-nm", "100", "--R-nm", "1e5", "--regime", "long",
                       "--gaussian", "1", "20", "--absolute")
    rep = json.loads(out)
    assert rep["ideal_smooth_force_N"] < 0
    assert rep["ideal_rough_force_N"] == pytest.approx(
        rep["ideal_smooth_force_N"] * (1 + rep["relative_correction"]), rel=1e-14)


def test_sweep_scaling(capsys):
    code, out, _ = run(capsys, "sweep", "--L-min-nm", "1", "--L-max-nm", "10000",
                       "--points", "9", "--regime", "short", "--gaussian", "1", "100")
    assert code == 0
    header, v = parse_csv(out)
    assert header == ["L_nm", "relative_correction", "pfa_relative_correction", "rho_bar"]
    slopes = np.diff(np.log(v[:, 1])) / np.diff(np.log(v[:, 0]))
    assert slopes[0] == pytest.approx(-2, abs=0.1)
    assert slopes[-1] == pytest.approx(-1, abs=0.1)
    pfa = np.diff(np.log(v[:, 2])) / np.diff(np.log(v[:, 0]))
    np.testing.assert_allclose(pfa, -2.0, rtol=1e-12)


def test_synth_round_trip(capsys, tmp_path):
    code, out, _ = run(capsys, "synth", "--n", "32", "--seed", "5")
    assert code == 0
    again = run(capsys, "synth", "--n", "32", "--seed", "5")[1]
    assert out == again
    assert out != run(capsys, "synth", "--n", "32", "--seed", "6")[1]


@pytest.mark.parametrize("argv", [
    ("rho", "--regime", "short", "--points", "1"),
    ("rho", "--regime", "short", "--tol", "1e-14"),
    ("rho", "--regime", "short", "--max-subdivisions", "0"),
    ("sweep", "--L-min-nm", "10", "--L-max-nm", "1", "--regime", "short", "--gaussian", "1", "1"),
    ("correct", "--L-nm", "-1", "--R-nm", "1", "--regime", "short", "--gaussian", "1", "1"),
    ("spectrum", "--gaussian", "-1", "1"),
])
def test_usage_errors_exit_2(capsys, argv):
    code, out, _ = run(capsys, *argv)
    assert code == 2 and out == ""


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["correct", "--L-nm", "1"])
    assert exc.value.code == 2


def test_non_convergence_exit_3(capsys, caplog):
    code, out, _ = run(capsys, "rho", "--regime", "short", "--kl-max", "1", "--points", "2",
                       "--max-subdivisions", "3")
    assert code == 3 and out == ""
    assert "rel_tol" in caplog.text


@pytest.mark.parametrize("content", [
    "4 4 10 10\n1 2 3 4\n",
    "2 2 1 1\n1 nan\n2 3\n",
    "not a header\n",
])
def test_bad_height_map_exit_4(capsys, tmp_path, content):
    path = tmp_path / "bad.txt"
    path.write_text(content)
    code, out, _ = run(capsys, "spectrum", "--height-map", str(path))
    assert code == 4 and out == ""


def test_missing_file_exit_4(capsys, tmp_path):
    code, _, _ = run(capsys, "spectrum", "--spectrum-csv", str(tmp_path / "missing.csv"))
    assert code == 4


def test_repeat_runs_byte_identical(capsys):
    argv = ("correct", "--L-nm", "50", "--R-nm", "1e5", "--regime", "short",
            "--gaussian", "1.5", "25")
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]
