"""Plane-sphere geometry, PFA baselines and the assembled roughness correction."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Literal

from .quadrature import QuadratureSpec
from .spectrum import RoughnessSpectrum, rho_bar

Regime = Literal["short", "long"]

HBAR_C_J_NM = 1.054571817e-34 * 2.99792458e8 * 1e9  # J nm

GUARD_THRESHOLD = 100.0
AMPLITUDE_LIMIT = 0.3


class AmplitudeTooLarge(UserWarning):
    """a/L is large enough that the second-order expansion is doubtful."""


class GuardWarning(UserWarning):
    pass


def pfa_force_plane_sphere(energy_per_area: float, R: float) -> float:
    """F_PS = 2 pi R E_PP / A."""
    if not R > 0:
        raise ValueError("R must be > 0")
    return 2.0 * math.pi * R * energy_per_area


def regime_prefactor(regime: Regime) -> float:
    """L^2 E''/(2E): 6 for E ~ 1/L^3 (long distances), 3 for E ~ 1/L^2 (short)."""
    if regime == "long":
        return 6.0
    if regime == "short":
        return 3.0
    raise ValueError(f"unknown regime {regime!r}")


def power_law_prefactor(n: float) -> float:
    """L^2 E''/(2E) for E proportional to L^-n."""
    return n * (n + 1) / 2.0


def pfa_correction(a: float, L: float, regime: Regime) -> float:
    """PFA relative force correction prefactor * a^2 / L^2."""
    if a < 0 or not L > 0:
        raise ValueError("need a >= 0 and L > 0")
    if a / L > AMPLITUDE_LIMIT:
        warnings.warn(f"a/L = {a / L:.3g} > {AMPLITUDE_LIMIT}: second-order expansion is doubtful",
                      AmplitudeTooLarge, stacklevel=2)
    return regime_prefactor(regime) * (a / L) ** 2


def ideal_plane_sphere_force(L: float, R: float) -> float:
    """Smooth perfect-mirror plane-sphere force in newtons (L, R in nm).

    Uses E_PP/A = -pi^2 hbar c / (720 L^3) through the PFA; an idealization
    for orders of magnitude only.
    """
    energy_per_area = -math.pi**2 * HBAR_C_J_NM / (720.0 * L**3)  # J/nm^2
    return pfa_force_plane_sphere(energy_per_area, R) * 1e9  # J/nm -> N


@dataclass(frozen=True)
class PlaneSphereSetup:
    """Closest approach L, best-fit radius R, plate area A (nm units)."""

    L: float
    R: float
    regime: Regime
    lc: float | None = None
    area: float | None = None

    def __post_init__(self):
        if not (self.L > 0 and self.R > 0):
            raise ValueError("L and R must be > 0")
        regime_prefactor(self.regime)

    def guards(self) -> dict:
        """The three validity conditions, each True/False (None when lc is unknown)."""
        lc = self.lc
        area = self.area if self.area is not None else 2.0 * math.pi * self.R * self.L
        return {
            "pfa_geometry_ok": self.R / self.L >= GUARD_THRESHOLD,
            "averaging_ok": None if not lc else self.R * self.L / lc**2 >= GUARD_THRESHOLD,
            "ergodic_ok": None if not lc else area / (math.pi * lc**2) >= GUARD_THRESHOLD,
        }


@dataclass(frozen=True)
class CorrectionReport:
    prefactor: float
    a_over_L_sq: float
    rho_bar: float
    relative_correction: float
    pfa_relative_correction: float
    guards: dict
    fallback_used: bool
    converged: bool = True
    warnings: list = field(default_factory=list)


def full_correction(setup: PlaneSphereSetup, spectrum: RoughnessSpectrum, curve: Callable,
                    q: QuadratureSpec | None = None) -> CorrectionReport:
    """Relative plane-sphere force correction (L^2 E''/2E) (a^2/L^2) rho_bar.

    Guard failures are reported (and warned), never raised.
    """
    prefactor = regime_prefactor(setup.regime)
    a2 = spectrum.amplitude_sq
    a_over_L_sq = a2 / setup.L**2
    notes = []
    if math.sqrt(a_over_L_sq) > AMPLITUDE_LIMIT:
        notes.append(f"a/L = {math.sqrt(a_over_L_sq):.3g} exceeds {AMPLITUDE_LIMIT}")
    rb = rho_bar(spectrum, curve, setup.L, q)
    guards = setup.guards()
    for name, ok in guards.items():
        if ok is False:
            notes.append(f"guard {name} failed")
        elif ok is None:
            notes.append(f"guard {name} undetermined (no correlation length)")
    for msg in notes:
        warnings.warn(msg, GuardWarning, stacklevel=2)
    pfa = prefactor * a_over_L_sq
    return CorrectionReport(
        prefactor=prefactor,
        a_over_L_sq=a_over_L_sq,
        rho_bar=rb.value,
        relative_correction=pfa * rb.value,
        pfa_relative_correction=pfa,
        guards=guards,
        fallback_used=bool(getattr(curve, "fallback", False)),
        converged=rb.converged and getattr(curve, "converged", True),
        warnings=notes,
    )
