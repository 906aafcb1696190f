"""Tabulated roughness-sensitivity curves rho(|k|L)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

Regime = Literal["short", "long"]


class SensitivityRangeExceeded(ValueError):
    """A curve was evaluated beyond its samples with extrapolation disabled."""


@dataclass(frozen=True)
class SensitivityCurve:
    """rho as a function of the dimensionless product x = |k|L.

    Inside the sampled range the curve is linearly interpolated; beyond the
    last sample it continues as ``asymptote_beta * x`` (when ``extrapolate``
    is set). ``fallback`` marks curves that are not a physical computation
    and must be flagged in every downstream result.
    """

    regime: Regime
    x: np.ndarray
    rho: np.ndarray
    tolerance: float
    asymptote_beta: float
    fallback: bool = False
    converged: bool = True
    extrapolate: bool = True
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        rho = np.asarray(self.rho, dtype=float)
        if x.ndim != 1 or x.shape != rho.shape or x.size == 0:
            raise ValueError("x and rho must be equal-length 1-D arrays")
        if np.any(np.diff(x) <= 0):
            raise ValueError("curve samples must be strictly increasing in x")
        if x[0] < 0:
            raise ValueError("x = |k|L must be >= 0")
        x.flags.writeable = False
        rho.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "rho", rho)

    @property
    def x_max(self) -> float:
        return float(self.x[-1])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        inside = np.interp(x, self.x, self.rho)
        beyond = x > self.x[-1]
        if np.any(beyond):
            if not self.extrapolate:
                raise SensitivityRangeExceeded(
                    f"x={float(np.max(x)):.4g} beyond last sample {self.x_max:.4g}"
                )
            inside = np.where(beyond, self.asymptote_beta * x, inside)
        return inside if inside.ndim else float(inside)

    def rows(self):
        return list(zip(self.x.tolist(), self.rho.tolist()))


def fit_slope(x, y, lo: float, hi: float) -> float:
    """Least-squares slope of y(x) restricted to lo <= x <= hi."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    sel = (x >= lo) & (x <= hi)
    if sel.sum() < 2:
        raise ValueError(f"need at least two samples in [{lo}, {hi}] to fit a slope")
    return float(np.polyfit(x[sel], y[sel], 1)[0])


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def curve_to_csv(curve: SensitivityCurve, provenance: list[str] = ()) -> str:
    """``kL,rho`` CSV with ``#`` metadata lines (round-trips through curve_from_csv)."""
    lines = [f"# {p}" for p in provenance]
    lines.append(f"# regime={curve.regime}, fallback={str(curve.fallback).lower()}")
    lines.append(f"# beta={_fmt(curve.asymptote_beta)}, tolerance={_fmt(curve.tolerance)}, "
                 f"converged={str(curve.converged).lower()}")
    lines.append("kL,rho")
    lines += [f"{_fmt(x)},{_fmt(r)}" for x, r in curve.rows()]
    return "\n".join(lines) + "\n"


def curve_from_csv(text: str) -> SensitivityCurve:
    meta, xs, rhos = {}, [], []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            for item in line[1:].split(","):
                if "=" in item:
                    key, val = item.split("=", 1)
                    meta[key.strip()] = val.strip()
            continue
        if line.startswith("kL"):
            continue
        x, r = line.split(",")
        xs.append(float(x))
        rhos.append(float(r))
    return SensitivityCurve(
        regime=meta.get("regime", "short"),
        x=np.array(xs),
        rho=np.array(rhos),
        tolerance=float(meta.get("tolerance", "nan")),
        asymptote_beta=float(meta["beta"]),
        fallback=meta.get("fallback") == "true",
        converged=meta.get("converged", "true") == "true",
        meta={"source": "csv"},
    )
