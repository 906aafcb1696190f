"""Roughness spectra: Gaussian model, measured height maps, spectral averages.

Conventions: sigma[k] is the 2D Fourier transform of the height
autocorrelation, so that int d^2k/(4 pi^2) sigma[k] is the height variance
a^2. Lengths in nm, wavevectors in 1/nm, sigma in nm^4. Spectra are
isotropic: measured maps are radially averaged.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from .quadrature import QuadratureResult, QuadratureSpec, integrate_1d

# k*lc beyond which the Gaussian spectrum is below exp(-49) of its peak
_GAUSS_CUTOFF = 14.0
# fraction of spectral weight that may sit beyond a curve's range
RANGE_WEIGHT_LIMIT = 1e-3
MIN_MAP_SIZE = 8


class InputDataError(ValueError):
    """Base class for malformed user data (maps and tabulated spectra)."""


class ParseError(InputDataError):
    pass


class DimensionMismatch(InputDataError):
    pass


class NonFiniteHeight(InputDataError):
    pass


class MapTooSmall(InputDataError):
    pass


class NonPositiveParameter(ValueError):
    pass


class ZeroVariance(ValueError):
    pass


class ZeroAtOrigin(ValueError):
    """sigma[0] vanishes, so the Gaussian-equivalent correlation length is 0."""


class RoughnessWarning(UserWarning):
    pass


@dataclass(frozen=True)
class RoughnessSpectrum:
    """Isotropic spectral density sigma(|k|).

    ``kind='gaussian'`` evaluates a^2 pi lc^2 exp(-k^2 lc^2/4). ``kind='tabulated'``
    interpolates ``(k, sigma)`` linearly, holds the first value down to k=0
    and is zero past the last point.
    """

    kind: Literal["gaussian", "tabulated"]
    amplitude_sq: float
    corr_length: float | None = None
    k: np.ndarray | None = None
    sigma: np.ndarray | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __call__(self, k):
        k = np.asarray(k, dtype=float)
        if self.kind == "gaussian":
            lc = self.corr_length
            out = self.amplitude_sq * math.pi * lc * lc * np.exp(-k * k * lc * lc / 4.0)
        else:
            out = np.interp(k, self.k, self.sigma, right=0.0)
        return float(out) if out.ndim == 0 else out

    @property
    def k_max(self) -> float:
        """Wavevector beyond which the spectrum is (numerically) zero."""
        if self.kind == "gaussian":
            return _GAUSS_CUTOFF / self.corr_length
        return float(self.k[-1])

    def breakpoints(self) -> np.ndarray:
        return np.empty(0) if self.kind == "gaussian" else self.k

    def scaled(self, factor: float) -> RoughnessSpectrum:
        """Spectrum multiplied by ``factor`` (the variance scales likewise)."""
        if not factor > 0:
            raise NonPositiveParameter("scale factor must be > 0")
        if self.kind == "gaussian":
            return gaussian_spectrum(math.sqrt(self.amplitude_sq * factor), self.corr_length)
        return RoughnessSpectrum("tabulated", self.amplitude_sq * factor, self.corr_length,
                                 self.k, self.sigma * factor, dict(self.meta))

    def table(self, k=None) -> tuple[np.ndarray, np.ndarray]:
        if k is None:
            if self.kind == "tabulated":
                return self.k, self.sigma
            k = np.linspace(0.0, self.k_max, 257)
        k = np.asarray(k, dtype=float)
        return k, np.asarray(self(k))


def gaussian_spectrum(a: float, lc: float) -> RoughnessSpectrum:
    """sigma[k] = a^2 pi lc^2 exp(-k^2 lc^2 / 4); variance a^2, correlation length lc."""
    if not (a > 0 and lc > 0):
        raise NonPositiveParameter(f"need a > 0 and lc > 0, got a={a}, lc={lc}")
    return RoughnessSpectrum("gaussian", a * a, lc)


def tabulated_spectrum(k, sigma, q: QuadratureSpec | None = None, meta=None) -> RoughnessSpectrum:
    """Spectrum from a radial table; a^2 is its integral, lc the Gaussian-equivalent value."""
    k = np.asarray(k, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if k.ndim != 1 or k.shape != sigma.shape or k.size < 2:
        raise DimensionMismatch("k and sigma must be equal-length 1-D tables with >= 2 rows")
    if not (np.all(np.isfinite(k)) and np.all(np.isfinite(sigma))):
        raise NonFiniteHeight("spectrum table contains non-finite values")
    if k[0] < 0 or np.any(np.diff(k) <= 0):
        raise ParseError("k must be >= 0 and strictly increasing")
    if np.any(sigma < 0):
        raise ParseError("sigma must be >= 0")
    k.flags.writeable = False
    sigma.flags.writeable = False
    draft = RoughnessSpectrum("tabulated", 0.0, None, k, sigma, dict(meta or {}))
    a2 = spectral_integral(draft, q=q).value
    spec = RoughnessSpectrum("tabulated", a2, None, k, sigma, dict(meta or {}))
    try:
        lc = estimate_corr_length(spec)
    except (ZeroVariance, ZeroAtOrigin):
        lc = None
    return RoughnessSpectrum("tabulated", a2, lc, k, sigma, dict(meta or {}))


def spectral_integral(spec: RoughnessSpectrum, weight: Callable | None = None,
                      q: QuadratureSpec | None = None, k_max: float | None = None,
                      points=()) -> QuadratureResult:
    """int d^2k/(4 pi^2) weight(|k|) sigma(|k|) by radial quadrature."""
    q = q or QuadratureSpec()
    k_max = spec.k_max if k_max is None else k_max
    if weight is None:
        def f(k):
            return k * spec(k)
    else:
        def f(k):
            return k * spec(k) * weight(k)
    pts = np.concatenate([spec.breakpoints(), np.asarray(points, dtype=float)])
    pts = pts[(pts > 0) & (pts < k_max)]
    res = integrate_1d(f, 0.0, k_max, q, points=pts, vectorized=True)
    scale = 1.0 / (2.0 * math.pi)
    return QuadratureResult(res.value * scale, res.error_estimate * scale, res.evaluations,
                            res.converged)


def variance_of(spec: RoughnessSpectrum, q: QuadratureSpec | None = None) -> float:
    """Height variance a^2: closed form for Gaussian, radial quadrature for tables."""
    if spec.kind == "gaussian":
        return spec.amplitude_sq
    return spectral_integral(spec, q=q).check().value


def estimate_corr_length(spec: RoughnessSpectrum) -> float:
    """Gaussian-equivalent correlation length sqrt(sigma[0] / (pi a^2))."""
    a2 = spec.amplitude_sq
    if not a2 > 0:
        raise ZeroVariance("spectrum has zero variance; correlation length undefined")
    s0 = spec(0.0)
    if not math.isfinite(s0):
        raise ValueError("sigma[0] is not finite")
    if s0 <= 0:
        raise ZeroAtOrigin("sigma[0] = 0: no Gaussian-equivalent correlation length")
    return math.sqrt(s0 / (math.pi * a2))


def rho_bar(spec: RoughnessSpectrum, rho: Callable, L: float,
            q: QuadratureSpec | None = None) -> QuadratureResult:
    """Mean of rho(|k|L) under the normalized spectrum sigma/a^2.

    ``rho`` is any vectorized callable of x = |k|L; a :class:`SensitivityCurve`
    contributes its sample points as quadrature breakpoints and its range
    check (weight >= 0.1% beyond the samples with extrapolation disabled
    raises :class:`SensitivityRangeExceeded`).
    """
    from .curve import SensitivityRangeExceeded

    if not L > 0:
        raise NonPositiveParameter("L must be > 0")
    a2 = variance_of(spec, q)
    if not a2 > 0:
        raise ZeroVariance("spectrum has zero variance")
    k_max = spec.k_max
    points = ()
    x_samples = getattr(rho, "x", None)
    if x_samples is not None:
        points = np.asarray(x_samples) / L
        k_curve = rho.x_max / L
        if not rho.extrapolate and k_curve < k_max:
            tail = spectral_integral(spec, q=q).value - spectral_integral(spec, q=q, k_max=k_curve).value
            if tail / a2 >= RANGE_WEIGHT_LIMIT:
                raise SensitivityRangeExceeded(
                    f"{100 * tail / a2:.2f}% of the spectral weight lies beyond |k|L = {rho.x_max:g}"
                )
            k_max = k_curve
    res = spectral_integral(spec, weight=lambda k: rho(k * L), q=q, k_max=k_max, points=points)
    return QuadratureResult(res.value / a2, res.error_estimate / a2, res.evaluations, res.converged)


# ---------------------------------------------------------------------------
# height maps

@dataclass(frozen=True)
class HeightMap:
    """Heights h[iy, ix] in nm on a grid with pitch dx, dy (nm); zero mean."""

    heights: np.ndarray
    dx: float
    dy: float

    def __post_init__(self):
        h = np.array(self.heights, dtype=float)
        if h.ndim != 2:
            raise DimensionMismatch("height map must be 2-D")
        if not (self.dx > 0 and self.dy > 0):
            raise NonPositiveParameter("pixel pitch must be > 0")
        if not np.all(np.isfinite(h)):
            raise NonFiniteHeight("height map contains non-finite values")
        h -= h.mean()
        h.flags.writeable = False
        object.__setattr__(self, "heights", h)

    @property
    def ny(self) -> int:
        return self.heights.shape[0]

    @property
    def nx(self) -> int:
        return self.heights.shape[1]

    @property
    def extent(self) -> tuple[float, float]:
        return self.nx * self.dx, self.ny * self.dy

    @property
    def area(self) -> float:
        return self.extent[0] * self.extent[1]

    @property
    def variance(self) -> float:
        return float(np.mean(self.heights ** 2))

    @property
    def rms(self) -> float:
        return math.sqrt(self.variance)


def ingest_height_map(data: bytes | str) -> HeightMap:
    """Parse the ASCII height-map format.

    Line 1: ``nx ny dx_nm dy_nm``; then ny rows of nx heights in nm. Blank
    lines and ``#`` comments are ignored.
    """
    text = data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ParseError("empty height-map file")
    head = lines[0].split()
    if len(head) != 4:
        raise ParseError(f"header must be 'nx ny dx_nm dy_nm', got {lines[0]!r}")
    try:
        nx, ny = int(head[0]), int(head[1])
        dx, dy = float(head[2]), float(head[3])
    except ValueError as exc:
        raise ParseError(f"bad header {lines[0]!r}: {exc}") from None
    if nx < 1 or ny < 1 or not (dx > 0 and dy > 0):
        raise ParseError("header values must be positive")
    rows = lines[1:]
    if len(rows) != ny:
        raise ParseError(f"expected {ny} rows of heights, found {len(rows)}")
    grid = np.empty((ny, nx))
    for i, row in enumerate(rows):
        fields = row.split()
        if len(fields) != nx:
            raise DimensionMismatch(f"row {i + 1} has {len(fields)} values, expected {nx}")
        try:
            grid[i] = [float(v) for v in fields]
        except ValueError as exc:
            raise ParseError(f"row {i + 1}: {exc}") from None
    if not np.all(np.isfinite(grid)):
        raise NonFiniteHeight("height map contains NaN or inf")
    return HeightMap(grid, dx, dy)


def format_height_map(hmap: HeightMap) -> str:
    out = io.StringIO()
    out.write(f"{hmap.nx} {hmap.ny} {hmap.dx!r} {hmap.dy!r}\n")
    for row in hmap.heights:
        out.write(" ".join(f"{v:.12g}" for v in row) + "\n")
    return out.getvalue()


def _wavevectors(hmap: HeightMap):
    kx = 2.0 * math.pi * np.fft.fftfreq(hmap.nx, hmap.dx)
    ky = 2.0 * math.pi * np.fft.fftfreq(hmap.ny, hmap.dy)
    return kx[None, :], ky[:, None]


def _raw_periodogram(hmap: HeightMap, window: str):
    h = hmap.heights
    if window == "hann":
        w = np.outer(np.hanning(hmap.ny + 1)[:-1], np.hanning(hmap.nx + 1)[:-1])
        h = h * w
        power_gain = float(np.mean(w * w))
    elif window == "none":
        power_gain = 1.0
    else:
        raise ValueError(f"unknown window {window!r}")
    H = np.fft.fft2(h) * hmap.dx * hmap.dy
    lx, ly = hmap.extent
    return np.abs(H) ** 2 / (lx * ly) / power_gain


def periodogram(hmap: HeightMap, window: Literal["none", "hann"] = "none",
                q: QuadratureSpec | None = None) -> RoughnessSpectrum:
    """Radially binned periodogram |H[k]|^2 / area of a height map.

    Bins are annuli of width dk = 2 pi / max(extent) centred on multiples of
    dk; each bin value is its total spectral weight divided by the annulus
    area, so the table integrates back to the grid variance. The k = 0 point
    (the removed mean) takes the value of the first ring. A trailing zero
    node closes the table.
    """
    if hmap.nx < MIN_MAP_SIZE or hmap.ny < MIN_MAP_SIZE:
        raise MapTooSmall(f"map is {hmap.nx}x{hmap.ny}; need at least {MIN_MAP_SIZE} per side")
    s2d = _raw_periodogram(hmap, window)
    kx, ky = _wavevectors(hmap)
    kmag = np.sqrt(kx * kx + ky * ky)
    lx, ly = hmap.extent
    dk = 2.0 * math.pi / max(lx, ly)
    cell = (2.0 * math.pi / lx) * (2.0 * math.pi / ly)
    idx = np.rint(kmag / dk).astype(int).ravel()
    nbins = idx.max() + 1
    weight = np.bincount(idx, weights=s2d.ravel() * cell, minlength=nbins)
    rings = np.arange(nbins)
    area = 2.0 * math.pi * rings * dk * dk
    sigma = np.zeros(nbins + 1)
    sigma[1:nbins] = weight[1:] / area[1:]
    sigma[0] = sigma[1] if nbins > 1 else 0.0
    k = np.arange(nbins + 1) * dk

    total = float(np.sum(s2d) * cell)
    kx2 = float(np.sum(s2d * kx * kx))
    ky2 = float(np.sum(s2d * ky * ky))
    meta = {
        "source": "height-map",
        "window": window,
        "grid_variance_nm2": hmap.variance,
        "periodogram_variance_nm2": total / (4.0 * math.pi**2),
        "anisotropy": (kx2 - ky2) / (kx2 + ky2) if kx2 + ky2 > 0 else 0.0,
    }
    spec = tabulated_spectrum(k, sigma, q=q, meta=meta)
    if spec.corr_length is not None and min(lx, ly) < 10.0 * spec.corr_length:
        warnings.warn(
            f"map extent {min(lx, ly):g} nm is below 10 correlation lengths "
            f"({spec.corr_length:g} nm); plate area may not average over enough patches",
            RoughnessWarning, stacklevel=2,
        )
    return spec


def autocorrelation_length(hmap: HeightMap) -> float:
    """Radius where the radially averaged autocorrelation first drops below 1/e.

    Secondary diagnostic; for a Gaussian spectrum it coincides with lc.
    Returns nan for a flat map.
    """
    if hmap.variance == 0:
        return math.nan
    H = np.fft.fft2(hmap.heights)
    acf = np.real(np.fft.ifft2(np.abs(H) ** 2)) / H.size
    acf /= acf[0, 0]
    x = np.fft.fftfreq(hmap.nx, 1.0 / hmap.nx) * hmap.dx
    y = np.fft.fftfreq(hmap.ny, 1.0 / hmap.ny) * hmap.dy
    rr = np.sqrt(x[None, :] ** 2 + y[:, None] ** 2)
    step = min(hmap.dx, hmap.dy)
    idx = np.rint(rr / step).astype(int).ravel()
    counts = np.bincount(idx)
    radial = np.bincount(idx, weights=acf.ravel()) / np.maximum(counts, 1)
    r = np.arange(radial.size) * step
    below = np.nonzero((radial < math.exp(-1.0)) & (counts > 0))[0]
    if below.size == 0:
        return math.nan
    j = below[0]
    r0, r1, a0, a1 = r[j - 1], r[j], radial[j - 1], radial[j]
    return float(r0 + (a0 - math.exp(-1.0)) * (r1 - r0) / (a0 - a1))


def synthetic_gaussian_map(n: int, pitch: float, a: float, lc: float, seed: int) -> HeightMap:
    """Random periodic surface with a Gaussian spectrum of variance a^2 and length lc."""
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((n, n))
    kx = 2.0 * math.pi * np.fft.fftfreq(n, pitch)
    k2 = kx[None, :] ** 2 + kx[:, None] ** 2
    filt = np.sqrt(np.exp(-k2 * lc * lc / 4.0))
    h = np.real(np.fft.ifft2(np.fft.fft2(noise) * filt))
    h -= h.mean()
    h *= a / h.std()
    return HeightMap(h, pitch, pitch)


# ---------------------------------------------------------------------------
# tabulated-spectrum CSV

SPECTRUM_HEADER = ("k_inv_nm", "sigma_nm4")


def read_spectrum_csv(data: bytes | str, q: QuadratureSpec | None = None) -> RoughnessSpectrum:
    """Parse ``k_inv_nm,sigma_nm4`` CSV (``#`` comment lines allowed)."""
    text = data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data
    rows = [r for r in csv.reader(ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#"))]
    if not rows or tuple(c.strip() for c in rows[0][:2]) != SPECTRUM_HEADER:
        raise ParseError("spectrum CSV must start with header 'k_inv_nm,sigma_nm4'")
    try:
        k = [float(r[0]) for r in rows[1:]]
        s = [float(r[1]) for r in rows[1:]]
    except (ValueError, IndexError) as exc:
        raise ParseError(f"bad spectrum row: {exc}") from None
    return tabulated_spectrum(k, s, q=q, meta={"source": "spectrum-csv"})
