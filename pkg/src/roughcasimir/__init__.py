"""Wavevector-resolved roughness corrections to the Casimir force between metal plates."""

__version__ = "0.1.0"

from .curve import SensitivityCurve, SensitivityRangeExceeded
from .geometry import (
    CorrectionReport,
    PlaneSphereSetup,
    full_correction,
    pfa_correction,
    pfa_force_plane_sphere,
    regime_prefactor,
)
from .long import PerfectReflectorTerms, compare_regimes, rho_long
from .quadrature import QuadratureResult, QuadratureSpec
from .short import G_short, PlasmaModel, kernel_T, plasma_reflection, plasmon_smooth_energy, rho_short
from .spectrum import (
    HeightMap,
    RoughnessSpectrum,
    estimate_corr_length,
    gaussian_spectrum,
    ingest_height_map,
    periodogram,
    rho_bar,
    variance_of,
)
