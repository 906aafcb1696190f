"""Adaptive Gauss-Kronrod quadrature with array-valued integrands.

Every integral in the package goes through this module. Integrands may be
*vectorized*: they receive a 1-D array of nodes and return an array whose
leading axis matches the nodes. Trailing axes are treated as independent
components that share one subdivision tree, which is what lets the nested
(radius, angle, frequency) integrals run as a handful of large numpy calls
instead of millions of scalar ones.

The algorithm is the classic globally adaptive scheme: keep a heap of panels,
bisect the one with the largest error until the summed error meets the
tolerance or the panel budget runs out.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "QuadratureSpec",
    "QuadratureResult",
    "NonFiniteIntegrand",
    "NonConvergence",
    "integrate_1d",
    "integrate_semi_infinite",
    "integrate_polar_2d",
]

# 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
_XGK = np.array([
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077600525478370,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_WG = np.array([
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])

# full symmetric node set on [-1, 1]
NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(21)
GAUSS_WEIGHTS[1:10:2] = _WG
GAUSS_WEIGHTS[11:20:2] = _WG[::-1]

_EPS = np.finfo(float).eps


class NonFiniteIntegrand(ValueError):
    """The integrand returned NaN or inf at a quadrature node."""


class NonConvergence(RuntimeError):
    """Raised by :meth:`QuadratureResult.check` when the tolerance was not met."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and transform parameters shared by all integrals.

    ``semi_infinite_scale`` is the ``s`` in ``x = s*t/(1-t)``; pick it near
    the decay scale of the integrand.
    """

    rel_tol: float = 1e-6
    abs_tol: float = 0.0
    max_subdivisions: int = 2000
    semi_infinite_scale: float = 1.0

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be > 0, got {self.rel_tol}")
        if not self.abs_tol >= 0:
            raise ValueError(f"abs_tol must be >= 0, got {self.abs_tol}")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if not self.semi_infinite_scale > 0:
            raise ValueError("semi_infinite_scale must be > 0")

    def tightened(self, factor: float) -> QuadratureSpec:
        """Spec for an inner integral: tolerances divided by ``factor``."""
        return replace(self, rel_tol=self.rel_tol / factor, abs_tol=self.abs_tol / factor)


@dataclass(frozen=True)
class QuadratureResult:
    value: float | np.ndarray
    error_estimate: float
    evaluations: int
    converged: bool

    def check(self) -> QuadratureResult:
        if not self.converged:
            raise NonConvergence(
                f"quadrature did not converge: value={self.value!r}, "
                f"error estimate={self.error_estimate:.3e}"
            )
        return self


def _panel_estimates(fvals: np.ndarray, half: np.ndarray):
    """Kronrod value and error estimate for a stack of panels.

    ``fvals`` has shape (npanels, 21, *components); ``half`` the half-widths.
    Returns (values, errors) with values shaped (npanels, *components) and
    errors reduced to one max-norm scalar per panel.
    """
    extra = (1,) * (fvals.ndim - 2)
    hw = half.reshape((-1,) + extra)
    kron = np.einsum("pn...,n->p...", fvals, KRONROD_WEIGHTS)
    gauss = np.einsum("pn...,n->p...", fvals, GAUSS_WEIGHTS)
    resk = kron * hw
    resabs = np.einsum("pn...,n->p...", np.abs(fvals), KRONROD_WEIGHTS) * np.abs(hw)
    mean = kron / 2.0
    resasc = np.einsum("pn...,n->p...", np.abs(fvals - mean[:, None]), KRONROD_WEIGHTS) * np.abs(hw)
    diff = np.abs((kron - gauss) * hw)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = np.where(resasc > 0, resasc * np.minimum(1.0, (200.0 * diff / resasc) ** 1.5), diff)
    floor = 50.0 * _EPS * resabs
    err = np.maximum(scaled, floor)
    if err.ndim > 1:
        err = err.reshape(err.shape[0], -1).max(axis=1)
    return resk, err


def _evaluate(f, lefts, rights, vectorized: bool):
    lefts = np.asarray(lefts, dtype=float)
    rights = np.asarray(rights, dtype=float)
    centre = 0.5 * (lefts + rights)
    half = 0.5 * (rights - lefts)
    x = (centre[:, None] + half[:, None] * NODES[None, :]).ravel()
    if vectorized:
        y = np.asarray(f(x), dtype=float)
        if y.shape[:1] != x.shape:
            raise ValueError(f"vectorized integrand returned shape {y.shape} for {x.shape[0]} nodes")
    else:
        y = np.array([f(xi) for xi in x], dtype=float)
    if not np.all(np.isfinite(y)):
        bad = x[np.nonzero(~np.isfinite(y.reshape(x.shape[0], -1)).any(axis=1))[0][0]]
        raise NonFiniteIntegrand(f"integrand is not finite at x={bad!r}")
    y = y.reshape((lefts.shape[0], 21) + y.shape[1:])
    val, err = _panel_estimates(y, half)
    return val, err, x.shape[0]


def _norm(v) -> float:
    return float(np.max(np.abs(v))) if np.ndim(v) else abs(float(v))


def integrate_1d(
    f: Callable,
    a: float,
    b: float,
    spec: QuadratureSpec | None = None,
    *,
    points: Sequence[float] = (),
    vectorized: bool = False,
) -> QuadratureResult:
    """Adaptive integral of ``f`` over ``[a, b]``.

    ``points`` are interior breakpoints (kinks, discontinuities) that seed
    the initial panels. With ``vectorized=True`` the integrand receives an
    array of nodes and may return extra trailing axes; the result value then
    has those trailing axes and the error estimate is a max-norm.

    A non-converged result is returned with ``converged=False`` rather than
    raised; call ``.check()`` to turn it into :class:`NonConvergence`.
    """
    spec = spec or QuadratureSpec()
    if not a < b:
        raise ValueError(f"need a < b, got [{a}, {b}]")
    edges = np.unique(np.concatenate([[a, b], [p for p in points if a < p < b]]))
    lefts, rights = edges[:-1], edges[1:]
    vals, errs, nev = _evaluate(f, lefts, rights, vectorized)

    # heap entries: (-err, insertion counter, left, right); the counter makes
    # tie-breaking (and hence the whole run) deterministic
    panel_val = {}
    heap = []
    for i in range(len(lefts)):
        panel_val[i] = vals[i]
        heap.append((-float(errs[i]), i, float(lefts[i]), float(rights[i])))
    heapq.heapify(heap)
    counter = len(lefts)
    total = np.sum(vals, axis=0)
    total_err = float(np.sum(errs))

    def tolerance():
        return max(spec.abs_tol, spec.rel_tol * _norm(total))

    while total_err > tolerance() and len(heap) < spec.max_subdivisions:
        neg_err, key, lo, hi = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not (lo < mid < hi):
            # panel cannot be split further in floating point
            heapq.heappush(heap, (neg_err, key, lo, hi))
            break
        v2, e2, n2 = _evaluate(f, [lo, mid], [mid, hi], vectorized)
        nev += n2
        total = total - panel_val.pop(key) + v2[0] + v2[1]
        total_err += float(e2[0] + e2[1]) + neg_err
        for j, (l, r) in enumerate(((lo, mid), (mid, hi))):
            panel_val[counter] = v2[j]
            heapq.heappush(heap, (-float(e2[j]), counter, l, r))
            counter += 1

    # re-sum from scratch: the running total accumulates rounding drift
    keys = sorted(panel_val)
    total = np.sum([panel_val[k] for k in keys], axis=0)
    total_err = float(sum(-h[0] for h in heap))
    converged = total_err <= tolerance()
    value = float(total) if np.ndim(total) == 0 else total
    return QuadratureResult(value, total_err, nev, converged)


def integrate_semi_infinite(
    f: Callable,
    spec: QuadratureSpec | None = None,
    *,
    vectorized: bool = False,
) -> QuadratureResult:
    """Integral of ``f`` over ``[0, inf)`` via ``x = s*t/(1-t)``, ``t`` in ``[0, 1)``."""
    spec = spec or QuadratureSpec()
    s = spec.semi_infinite_scale

    if vectorized:
        def g(t):
            u = 1.0 - t
            y = np.asarray(f(s * t / u))
            jac = (s / (u * u)).reshape((-1,) + (1,) * (y.ndim - 1))
            return y * jac
    else:
        def g(t):
            u = 1.0 - t
            return f(s * t / u) * s / (u * u)

    return integrate_1d(g, 0.0, 1.0, spec, vectorized=vectorized)


def integrate_polar_2d(
    g: Callable,
    r_max: float,
    spec: QuadratureSpec | None = None,
    *,
    theta_range: tuple[float, float] = (0.0, 2.0 * math.pi),
    r_points: Sequence[float] = (),
    vectorized: bool = True,
) -> QuadratureResult:
    """Integral of ``g(r, theta) * r`` over the disk (or sector) of radius ``r_max``.

    ``g`` must broadcast over numpy arrays: it is called with ``r`` shaped
    ``(1, n_r)`` and ``theta`` shaped ``(n_theta, 1)`` and must return an
    array of shape ``(n_theta, n_r)``. Set ``vectorized=False`` for a plain
    scalar function. The angular integral is done inside the radial one with
    a tolerance ten times tighter.
    """
    spec = spec or QuadratureSpec()
    if not r_max > 0:
        raise ValueError("r_max must be > 0")
    gv = g if vectorized else np.vectorize(g, otypes=[float])
    inner = spec.tightened(10.0)
    inner_ok = [True]
    inner_evals = [0]

    def radial(r):
        def angular(theta):
            return np.broadcast_to(gv(r[None, :], theta[:, None]), (theta.shape[0], r.shape[0]))

        res = integrate_1d(angular, theta_range[0], theta_range[1], inner, vectorized=True)
        inner_ok[0] &= res.converged
        inner_evals[0] += res.evaluations * r.shape[0]
        return res.value * r

    outer = integrate_1d(radial, 0.0, r_max, spec, points=r_points, vectorized=True)
    err = outer.error_estimate + inner.rel_tol * abs(outer.value)
    return QuadratureResult(outer.value, err, inner_evals[0], outer.converged and inner_ok[0])
