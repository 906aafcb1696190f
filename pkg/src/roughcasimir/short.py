"""Short-distance (surface plasmon) roughness sensitivity.

For L much smaller than the plasma wavelength only TM surface plasmons matter
and the second-order roughness response of the energy is a convolution of a
closed-form kernel over transverse wavevectors and imaginary frequencies.
All integrals are done in reduced variables Q = |q|L and u = xi/omega_P,
which makes rho a function of |k|L alone.

Sign and normalization: ``G_short`` is returned as the coefficient G in
``E_rough = E + int d^2k/4pi^2 G[k] sigma[k]`` per unit hbar*A. With the
kernel as printed, ``-int int T`` evaluates to ``2 E''``; the factor 1/4
applied here makes ``G[0] = E''/2`` (negative, like E'') so the PFA limit is
reproduced exactly. rho = G[k]/G[0] is unaffected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curve import SensitivityCurve, fit_slope
from .quadrature import (
    QuadratureResult,
    QuadratureSpec,
    integrate_1d,
    integrate_polar_2d,
    integrate_semi_infinite,
)

SPEED_OF_LIGHT_NM_S = 2.99792458e17

# reduced-frequency substitution scale: r^2 halves at u = 1/sqrt(2)
_XI_SCALE = 1.0 / math.sqrt(2.0)
# exp(-60) ~ 1e-26 beyond the radial cutoff
_Q_TAIL = 30.0
# below this reduced |p| the integrand point is dropped (measure zero)
_P_EPS = 1e-12

BETA_FIT_RANGE = (20.0, 60.0)


@dataclass(frozen=True)
class PlasmaModel:
    """Plasma-model metal, stored by its plasma frequency in rad/s."""

    omega_p: float

    def __post_init__(self):
        if not self.omega_p > 0:
            raise ValueError(f"plasma frequency must be > 0, got {self.omega_p}")

    @classmethod
    def from_wavelength(cls, lambda_p_nm: float) -> PlasmaModel:
        if not lambda_p_nm > 0:
            raise ValueError(f"plasma wavelength must be > 0, got {lambda_p_nm}")
        return cls(2.0 * math.pi * SPEED_OF_LIGHT_NM_S / lambda_p_nm)

    @property
    def lambda_p(self) -> float:
        """Plasma wavelength in nm."""
        return 2.0 * math.pi * SPEED_OF_LIGHT_NM_S / self.omega_p


def _reflection(u):
    return -1.0 / (1.0 + 2.0 * u * u)


def plasma_reflection(xi, model: PlasmaModel):
    """TM reflection amplitude at imaginary frequency xi (rad/s): -wp^2/(wp^2 + 2 xi^2)."""
    u = np.asarray(xi, dtype=float) / model.omega_p
    out = _reflection(u)
    return float(out) if out.ndim == 0 else out


def _kernel(q, p, c, r):
    """Kernel with L = 1; all arguments broadcast."""
    r2 = r * r
    eq = np.exp(-2.0 * q)
    ep = np.exp(-2.0 * p)
    omc = 1.0 - c
    pref = q / (1.0 - r2 * eq) * p / (1.0 - r2 * ep)
    brace = (2.0 * (1.0 - r2) * omc * omc * r2 * r2 * eq * ep
             + (2.0 * r2 * omc * omc - 2.0 * r * (1.0 - c * c) + 4.0 * c) * r2 * (eq + ep))
    return pref * brace


def kernel_T(q, p, c, L: float, xi, model: PlasmaModel):
    """Second-order plasmon kernel T[q, p, i xi].

    ``q`` and ``p`` are the wavevector moduli (1/nm), ``c`` the cosine of the
    angle between them, ``L`` the separation (nm) and ``xi`` the imaginary
    frequency (rad/s). Result in 1/nm^2.
    """
    if not L > 0:
        raise ValueError("L must be > 0")
    r = plasma_reflection(xi, model)
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    out = _kernel(q * L, p * L, np.asarray(c, dtype=float), r) / (L * L)
    return float(out) if np.ndim(out) == 0 else out


def _geometry(Q, theta, x):
    """|p| and cos(q, p) for p = q - k, with k along theta = 0."""
    cos_t = np.cos(theta)
    P = np.sqrt(np.maximum(Q * Q + x * x - 2.0 * Q * x * cos_t, 0.0))
    safe = np.where(P > _P_EPS, P, 1.0)
    c = np.clip((Q - x * cos_t) / safe, -1.0, 1.0)
    return P, c


def reduced_G(x: float, spec: QuadratureSpec | None = None) -> QuadratureResult:
    """Dimensionless integral int d^2Q int_0^inf du T(Q, Q - K, iu) with |K| = x.

    Integration order: u innermost, then angle, then |Q|. Only the half-plane
    0 <= theta <= pi is integrated (the integrand is even in theta).
    """
    spec = spec or QuadratureSpec()
    if x < 0:
        raise ValueError("|k|L must be >= 0")
    xi_spec = QuadratureSpec(
        rel_tol=spec.rel_tol / 100.0,
        abs_tol=spec.abs_tol / 100.0,
        max_subdivisions=spec.max_subdivisions,
        semi_infinite_scale=_XI_SCALE,
    )
    inner_ok = [True]

    def g(Q, theta):
        Q, theta = np.broadcast_arrays(Q, theta)
        P, c = _geometry(Q, theta, x)
        live = P > _P_EPS

        def over_u(u):
            r = _reflection(u).reshape((-1,) + (1,) * Q.ndim)
            return np.where(live, _kernel(Q, P, c, r), 0.0)

        res = integrate_semi_infinite(over_u, xi_spec, vectorized=True)
        inner_ok[0] &= res.converged
        return res.value

    r_points = [x] if x > 0 else []
    res = integrate_polar_2d(g, _Q_TAIL + 2.0 * x, spec, theta_range=(0.0, math.pi),
                             r_points=r_points)
    return QuadratureResult(2.0 * res.value, 2.0 * res.error_estimate, res.evaluations,
                            res.converged and inner_ok[0])


def _G_scale(L: float, model: PlasmaModel) -> float:
    # -(1/4) * omega_P / L^4 / (8 pi^3): reduced -> physical, per hbar*A
    return -0.25 * model.omega_p / L**4 / (8.0 * math.pi**3)


def G_short(k: float, L: float, model: PlasmaModel, spec: QuadratureSpec | None = None) -> QuadratureResult:
    """Roughness response G[k] per unit hbar*A, in rad s^-1 nm^-4.

    Negative by convention (see module docstring), with G[0] = E''/2.
    """
    if not L > 0:
        raise ValueError("L must be > 0")
    if k < 0:
        raise ValueError("|k| must be >= 0")
    res = reduced_G(k * L, spec)
    scale = _G_scale(L, model)
    return QuadratureResult(scale * res.value, abs(scale) * res.error_estimate,
                            res.evaluations, res.converged)


def asymptotic_beta(spec: QuadratureSpec | None = None) -> QuadratureResult:
    """Large-|k|L slope of rho from the k -> infinity limit of the convolution.

    When |k|L >> 1 one of |q|, |p| stays of order 1/L while the other is
    close to |k|; averaging the brace over the relative angle leaves
    (3r^2 - r) r^2 e^{-2Q}, and rho/x tends to

        2 int du int dQ Q^2 (3r^2 - r) r^2 e^{-2Q} / (1 - r^2 e^{-2Q})
        ---------------------------------------------------------------
          int du int dQ 8 Q^3 r^2 e^{-2Q} / (1 - r^2 e^{-2Q})^2
    """
    spec = spec or QuadratureSpec()
    xi_spec = QuadratureSpec(rel_tol=spec.rel_tol / 10.0, max_subdivisions=spec.max_subdivisions,
                             semi_infinite_scale=_XI_SCALE)

    def radial(weight):
        def f(Q):
            def over_u(u):
                r = _reflection(u)[:, None]
                e = np.exp(-2.0 * Q)[None, :]
                return weight(Q[None, :], r, e)
            return integrate_semi_infinite(over_u, xi_spec, vectorized=True).value
        return integrate_1d(f, 0.0, 2.0 * _Q_TAIL, spec, vectorized=True)

    num = radial(lambda Q, r, e: 2.0 * Q * Q * (3.0 * r * r - r) * r * r * e / (1.0 - r * r * e))
    den = radial(lambda Q, r, e: 8.0 * Q**3 * r * r * e / (1.0 - r * r * e) ** 2)
    value = num.value / den.value
    err = abs(value) * (num.error_estimate / abs(num.value) + den.error_estimate / abs(den.value))
    return QuadratureResult(value, err, num.evaluations + den.evaluations,
                            num.converged and den.converged)


def rho_short(xs, model: PlasmaModel | None = None, spec: QuadratureSpec | None = None) -> SensitivityCurve:
    """rho(x) = G[x/L]/G[0] on the grid ``xs`` of |k|L values.

    rho depends on |k|L only, so ``model`` merely fixes the units; it is
    accepted for interface symmetry and recorded in the curve metadata.
    ``asymptote_beta`` is the least-squares slope over 20 <= x <= 60 when
    the grid covers that window, otherwise the analytic large-x limit.
    """
    spec = spec or QuadratureSpec()
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 1 or xs.size == 0:
        raise ValueError("xs must be a non-empty 1-D sequence")
    if np.any(xs < 0) or np.any(np.diff(xs) <= 0):
        raise ValueError("xs must be >= 0 and strictly increasing")
    g0 = reduced_G(0.0, spec)
    values, ok, rel_err = [], g0.converged, []
    for x in xs:
        res = g0 if x == 0 else reduced_G(float(x), spec)
        values.append(res.value / g0.value)
        ok &= res.converged
        rel_err.append(res.error_estimate / abs(res.value) + g0.error_estimate / abs(g0.value))
    rho = np.array(values)
    try:
        beta = fit_slope(xs, rho, *BETA_FIT_RANGE)
        beta_source = "fit"
    except ValueError:
        beta = asymptotic_beta(spec).value
        beta_source = "asymptotic"
    meta = {"omega_p_rad_s": model.omega_p if model else None, "beta_source": beta_source}
    return SensitivityCurve("short", xs, rho, tolerance=max(spec.rel_tol, max(rel_err)),
                            asymptote_beta=beta, converged=ok, meta=meta)


def plasmon_smooth_energy(L: float, model: PlasmaModel, spec: QuadratureSpec | None = None) -> QuadratureResult:
    """Smooth-plate TM plasmon energy per unit hbar*A (rad s^-1 nm^-2).

    E/(hbar A) = int d^2k/4pi^2 int_0^inf dxi/2pi ln(1 - r^2 e^{-2|k|L}).
    Used as an independent check of G_short(0).
    """
    if not L > 0:
        raise ValueError("L must be > 0")
    spec = spec or QuadratureSpec()
    xi_spec = QuadratureSpec(rel_tol=spec.rel_tol / 10.0, max_subdivisions=spec.max_subdivisions,
                             semi_infinite_scale=_XI_SCALE)
    ok = [True]

    def f(Q):
        def over_u(u):
            r = _reflection(u)[:, None]
            return np.log1p(-(r * r) * np.exp(-2.0 * Q)[None, :])
        res = integrate_semi_infinite(over_u, xi_spec, vectorized=True)
        ok[0] &= res.converged
        return res.value * Q

    res = integrate_1d(f, 0.0, 2.0 * _Q_TAIL, spec, vectorized=True)
    scale = model.omega_p / L**2 / (4.0 * math.pi**2)  # 2 pi / (8 pi^3)
    return QuadratureResult(scale * res.value, scale * res.error_estimate, res.evaluations,
                            res.converged and ok[0])


def energy_second_derivative(L: float, model: PlasmaModel, spec: QuadratureSpec | None = None,
                             step_fraction: float = 1.0 / 50.0) -> float:
    """E''(L) from a 5-point central difference of plasmon_smooth_energy, step L/50."""
    h = L * step_fraction
    e = [plasmon_smooth_energy(L + j * h, model, spec).check().value for j in (-2, -1, 0, 1, 2)]
    return (-e[0] + 16.0 * e[1] - 30.0 * e[2] + 16.0 * e[3] - e[4]) / (12.0 * h * h)


def default_grid() -> np.ndarray:
    """|k|L grid of the packaged table: dense near the PFA sector, sparse in the tail."""
    return np.unique(np.round(np.concatenate([
        np.arange(0.0, 2.0, 0.1),
        np.arange(2.0, 10.0, 0.25),
        np.arange(10.0, 30.0, 1.0),
        np.arange(30.0, 100.0 + 1e-9, 2.5),
    ]), 10))


def packaged_rho_short() -> SensitivityCurve:
    """The precomputed rho_short table shipped with the package (see scripts/)."""
    from importlib.resources import files

    from .curve import curve_from_csv

    text = files("roughcasimir").joinpath("data/rho_short.csv").read_text()
    curve = curve_from_csv(text)
    curve.meta["source"] = "packaged table"
    return curve
