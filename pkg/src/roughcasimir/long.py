"""Long-distance (perfect reflector) roughness sensitivity.

rho is the ratio (G_TM(s) + G_TE(s)) / (G_TM(0) + G_TE(0)) with
s = |k|L / 2pi, where G_TM and G_TE are the perfect-mirror corrugation
response functions. Their closed forms come from the perfect-reflector
path-integral literature and are not shipped here; pass them in as a
:class:`PerfectReflectorTerms`. Without them the curve falls back to

    rho_fb(x) = sqrt(1 + (x/3)^2)

which is exact in both known limits (rho -> 1 as x -> 0, rho -> x/3 as
x -> inf) but carries no physics in between. Fallback curves are flagged
and the flag travels with every result built from them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .curve import SensitivityCurve, fit_slope

BETA_LONG = 1.0 / 3.0
BETA_FIT_RANGE = (30.0, 100.0)


class TranscriptionUnavailable(RuntimeError):
    """No G_TM/G_TE functions were supplied and the fallback is disallowed."""


@dataclass(frozen=True)
class PerfectReflectorTerms:
    """TM and TE response functions of s = |k|L/2pi (vectorized callables)."""

    g_tm: Callable[[np.ndarray], np.ndarray]
    g_te: Callable[[np.ndarray], np.ndarray]
    source: str = "user-supplied"

    def rho(self, x):
        s = np.asarray(x, dtype=float) / (2.0 * math.pi)
        zero = np.zeros(1)
        norm = float(np.asarray(self.g_tm(zero))[0] + np.asarray(self.g_te(zero))[0])
        return (np.asarray(self.g_tm(s)) + np.asarray(self.g_te(s))) / norm


def fallback_rho(x):
    """sqrt(1 + (x/3)^2)."""
    x = np.asarray(x, dtype=float)
    out = np.sqrt(1.0 + (x * BETA_LONG) ** 2)
    return float(out) if out.ndim == 0 else out


def rho_long(xs, terms: PerfectReflectorTerms | None = None, *,
             allow_fallback: bool = True) -> SensitivityCurve:
    """Long-distance rho on the grid ``xs`` of |k|L values."""
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 1 or xs.size == 0:
        raise ValueError("xs must be a non-empty 1-D sequence")
    if np.any(xs < 0) or np.any(np.diff(xs) <= 0):
        raise ValueError("xs must be >= 0 and strictly increasing")
    if terms is None:
        if not allow_fallback:
            raise TranscriptionUnavailable(
                "perfect-reflector G_TM/G_TE not supplied; pass PerfectReflectorTerms"
            )
        rho, fallback, source = fallback_rho(xs), True, "fallback sqrt(1+(x/3)^2)"
    else:
        rho, fallback, source = np.asarray(terms.rho(xs), dtype=float), False, terms.source
    try:
        beta = fit_slope(xs, rho, *BETA_FIT_RANGE)
    except ValueError:
        beta = BETA_LONG
    return SensitivityCurve("long", xs, rho, tolerance=1e-12 if fallback else 1e-6,
                            asymptote_beta=beta, fallback=fallback,
                            meta={"source": source})


@dataclass(frozen=True)
class RegimeTable:
    x: np.ndarray
    rho_long: np.ndarray
    rho_short: np.ndarray
    fallback: bool
    converged: bool

    def rows(self):
        return list(zip(self.x.tolist(), self.rho_long.tolist(), self.rho_short.tolist()))


def compare_regimes(xs, short_curve: SensitivityCurve | None = None,
                    long_curve: SensitivityCurve | None = None, spec=None) -> RegimeTable:
    """Both regimes side by side on one grid (missing curves are computed)."""
    from .short import rho_short

    xs = np.asarray(xs, dtype=float)
    short_curve = short_curve if short_curve is not None else rho_short(xs, spec=spec)
    long_curve = long_curve if long_curve is not None else rho_long(xs)
    return RegimeTable(xs, np.asarray(long_curve(xs)), np.asarray(short_curve(xs)),
                       fallback=long_curve.fallback,
                       converged=short_curve.converged and long_curve.converged)
