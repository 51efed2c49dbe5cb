"""KN and zGKN metrics, finite-difference curvature, conical defect, causality surface.

Component ordering of every :class:`MetricValue` is ``t``, the chart's two
meridional coordinates, then ``phi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, optimize

from .charts import (
    RING_TOL,
    ChartError,
    RingCoord,
    SpacetimeParams,
    SpheroidalPoint,
    TildePoint,
    WeylSheetPoint,
    to_weyl,
)

# ring-exclusion collar for scans and sampling, in units of a^2
RING_COLLAR = 1e-3


class SingularMetricError(ValueError):
    """Metric evaluated on (or too close to) the ring singularity."""


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class AuxQuantities:
    delta: float
    sigma: float
    p_sq: float
    rho0: float
    mho: float


def aux_quantities(r, theta, params: SpacetimeParams) -> AuxQuantities:
    km = params.kappa * params.m
    delta = r * r - 2.0 * km * r + params.kappa * params.q**2 + params.a**2
    sig = r * r + params.a**2 * math.cos(theta) ** 2
    if sig > RING_TOL * params.a**2:
        _, v, w = orbit_metric(r, theta, params)
        mho = w / v
    else:
        mho = math.nan
    return AuxQuantities(delta, sig, params.p_sq, params.rho0, mho)


def orbit_metric(r, theta, params: SpacetimeParams):
    """Coefficients ``(X, V, W)`` of the group-orbit metric.

    Written as ``V = 1 - beta/Sigma``, ``W = a sin^2 beta/Sigma`` and
    ``X = sin^2 (r^2 + a^2 + a^2 sin^2 beta/Sigma)`` with
    ``beta = 2 kappa m r - kappa q^2``; algebraically identical to the
    textbook quotient-by-Sigma form but without its cancellation.
    Works elementwise on arrays.
    """
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    a = params.a
    s2 = np.sin(theta) ** 2
    sig = r * r + a * a * np.cos(theta) ** 2
    beta = params.kappa * (2.0 * params.m * r - params.q**2)
    on_ring = sig <= RING_TOL * a * a
    # with beta = 0 (zero gravity) X, V, W stay regular on the ring
    if np.any(on_ring & (beta != 0)):
        raise SingularMetricError("orbit metric evaluated on the ring (Sigma = 0)")
    ratio = np.where(on_ring, 0.0, beta / np.where(on_ring, 1.0, sig))
    v = 1.0 - ratio
    w = a * s2 * ratio
    x = s2 * (r * r + a * a + a * a * s2 * ratio)
    if r.ndim == 0 and theta.ndim == 0:
        return float(x), float(v), float(w)
    return x, v, w


@dataclass(frozen=True)
class MetricValue:
    chart: str
    components: np.ndarray
    point: object
    axis_degenerate: bool = False

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.components)

    def negative_count(self) -> int:
        return int(np.sum(self.eigenvalues() < 0))

    def orbit_determinant(self) -> float:
        """Determinant of the (t, phi) block, equal to -rho^2."""
        g = self.components
        return float(g[0, 0] * g[3, 3] - g[0, 3] ** 2)


def _spheroidal_components(r, theta, params: SpacetimeParams) -> np.ndarray:
    x, v, w = orbit_metric(r, theta, params)
    delta = r * r - 2.0 * params.kappa * params.m * r + params.kappa * params.q**2 + params.a**2
    if delta <= 0:
        raise SingularMetricError("Delta <= 0")
    sig = r * r + params.a**2 * math.cos(theta) ** 2
    g = np.zeros((4, 4))
    g[0, 0] = -v
    g[0, 3] = g[3, 0] = w
    g[3, 3] = x
    g[1, 1] = sig / delta
    g[2, 2] = sig
    return g


def kn_metric(p: SpheroidalPoint, params: SpacetimeParams) -> MetricValue:
    g = _spheroidal_components(p.r, p.theta, params)
    return MetricValue("spheroidal", g, p, axis_degenerate=math.sin(p.theta) == 0.0)


def _ring_check(sig: float, params: SpacetimeParams):
    if sig <= RING_TOL * params.a**2:
        raise SingularMetricError("zero-gravity metric evaluated on the ring")


def zero_g_components(chart: str, u1, u2, params: SpacetimeParams) -> np.ndarray:
    """Component matrix of the zGKN metric at meridional coordinates ``(u1, u2)``."""
    a = params.a
    a_sq = a * a
    g = np.zeros((4, 4))
    g[0, 0] = -1.0
    if chart == "spheroidal":
        r, theta = u1, u2
        sig = r * r + a_sq * math.cos(theta) ** 2
        _ring_check(sig, params)
        g[1, 1] = sig / (r * r + a_sq)
        g[2, 2] = sig
        g[3, 3] = (r * r + a_sq) * math.sin(theta) ** 2
    elif chart == "weyl":
        rho, z = u1, u2
        if rho == abs(a) and z == 0.0:
            raise SingularMetricError("zero-gravity metric evaluated on the ring")
        g[1, 1] = 1.0
        g[2, 2] = 1.0
        g[3, 3] = rho * rho
    elif chart == "tilde":
        rt, theta = u1, u2
        if rt <= 0:
            raise ChartError("r_tilde must be positive")
        c = math.cos(theta)
        conf = ((rt * rt - a_sq) ** 2 + 4.0 * a_sq * rt * rt * c * c) / (4.0 * rt**4)
        _ring_check(conf, params)
        g[1, 1] = conf
        g[2, 2] = conf * rt * rt
        g[3, 3] = (rt * rt + a_sq) ** 2 * math.sin(theta) ** 2 / (4.0 * rt * rt)
    elif chart == "ring":
        x, y = u1, u2
        cap_r2 = x * x + y * y
        _ring_check(cap_r2, params)
        if abs(y) >= 1:
            raise SingularMetricError("ring-centred chart is singular on the axis |y| = 1")
        g[1, 1] = a_sq * cap_r2 / (1.0 + x * x)
        g[2, 2] = a_sq * cap_r2 / (1.0 - y * y)
        g[3, 3] = a_sq * (1.0 + x * x) * (1.0 - y * y)
    else:
        raise ValueError(f"unknown chart {chart!r}")
    return g


def zero_g_metric(p, params: SpacetimeParams) -> MetricValue:
    if not params.is_zero_g:
        raise ChartError("zero_g_metric requires kappa = 0")
    if isinstance(p, SpheroidalPoint):
        chart, u1, u2 = "spheroidal", p.r, p.theta
        degenerate = math.sin(p.theta) == 0.0
    elif isinstance(p, WeylSheetPoint):
        chart, u1, u2 = "weyl", p.rho, p.z_cyl
        degenerate = p.rho == 0.0
    elif isinstance(p, TildePoint):
        chart, u1, u2 = "tilde", p.r_tilde, p.theta
        degenerate = math.sin(p.theta) == 0.0
    elif isinstance(p, RingCoord):
        chart, u1, u2 = "ring", p.x, p.y
        degenerate = False
    else:
        raise TypeError(f"not a chart point: {p!r}")
    return MetricValue(chart, zero_g_components(chart, u1, u2, params), p, degenerate)


# -- finite-difference curvature -------------------------------------------


@dataclass(frozen=True)
class ChartMetric:
    """Metric components as a function of the two meridional coordinates.

    ``ring_distance`` is the coordinate-space distance of a sample from the
    ring, used to enforce the scan's exclusion collar.
    """

    name: str
    components: Callable[[float, float], np.ndarray]
    ring_distance: Callable[[float, float], float]


def chart_metric(chart: str, params: SpacetimeParams) -> ChartMetric:
    a = abs(params.a)
    if chart == "kn":
        return ChartMetric(
            "kn",
            lambda r, th: _spheroidal_components(r, th, params),
            lambda r, th: math.hypot(r, th - math.pi / 2),
        )
    if not params.is_zero_g:
        raise ChartError(f"chart {chart!r} carries the zero-gravity metric; kappa must be 0")
    ring_at = {
        "spheroidal": lambda u, v: math.hypot(u, v - math.pi / 2),
        "weyl": lambda u, v: math.hypot(u - a, v),
        "tilde": lambda u, v: math.hypot(u - a, v - math.pi / 2),
        "ring": lambda u, v: math.hypot(u, v),
    }
    return ChartMetric(
        chart,
        lambda u, v: zero_g_components(chart, u, v, params),
        ring_at[chart],
    )


def _metric_jets(metric: Callable, u1: float, u2: float, h: float):
    """Values, first and second derivatives of g by central differences."""
    g = metric(u1, u2)
    gp1, gm1 = metric(u1 + h, u2), metric(u1 - h, u2)
    gp2, gm2 = metric(u1, u2 + h), metric(u1, u2 - h)
    gpp, gpm = metric(u1 + h, u2 + h), metric(u1 + h, u2 - h)
    gmp, gmm = metric(u1 - h, u2 + h), metric(u1 - h, u2 - h)

    dg = np.zeros((4, 4, 4))  # dg[c, a, b] = d_c g_ab
    dg[1] = (gp1 - gm1) / (2 * h)
    dg[2] = (gp2 - gm2) / (2 * h)
    ddg = np.zeros((4, 4, 4, 4))  # ddg[c, d, a, b] = d_c d_d g_ab
    ddg[1, 1] = (gp1 - 2 * g + gm1) / (h * h)
    ddg[2, 2] = (gp2 - 2 * g + gm2) / (h * h)
    ddg[1, 2] = ddg[2, 1] = (gpp - gpm - gmp + gmm) / (4 * h * h)
    return g, dg, ddg


def riemann_mixed(metric: Callable, u1: float, u2: float, h: float) -> np.ndarray:
    """``R^a_{bcd}`` at one point from second-order central differences."""
    g, dg, ddg = _metric_jets(metric, u1, u2, h)
    ginv = np.linalg.inv(g)
    # Gamma_{e,bc} = 1/2 (d_b g_ec + d_c g_eb - d_e g_bc)
    gam_low = 0.5 * (
        np.einsum("bec->ebc", dg) + np.einsum("ceb->ebc", dg) - dg
    )
    gam = np.einsum("ae,ebc->abc", ginv, gam_low)
    # R_abcd = 1/2 (g_ad,bc + g_bc,ad - g_ac,bd - g_bd,ac)
    #          + g_ef (Gam^e_bc Gam^f_ad - Gam^e_bd Gam^f_ac)
    second = 0.5 * (
        np.einsum("bcad->abcd", ddg)
        + np.einsum("adbc->abcd", ddg)
        - np.einsum("bdac->abcd", ddg)
        - np.einsum("acbd->abcd", ddg)
    )
    quad = np.einsum("ef,ebc,fad->abcd", g, gam, gam) - np.einsum(
        "ef,ebd,fac->abcd", g, gam, gam
    )
    return np.einsum("ae,ebcd->abcd", ginv, second + quad)


def curvature_scan(
    metric: ChartMetric,
    region,
    step_h: float,
    n_samples=(12, 12),
    richardson: bool = True,
) -> float:
    """Max ``|R^a_{bcd}|`` over a tensor grid of samples in ``region``.

    ``region`` is ``((u1_min, u1_max), (u2_min, u2_max))``.  With
    ``richardson`` the second-order estimates at ``h`` and ``h/2`` are
    combined as ``(4 R(h/2) - R(h)) / 3``.
    """
    (a1, b1), (a2, b2) = region
    u1s = np.linspace(a1, b1, n_samples[0])
    u2s = np.linspace(a2, b2, n_samples[1])
    worst = 0.0
    for u1 in u1s:
        for u2 in u2s:
            if metric.ring_distance(u1, u2) < 10 * step_h:
                raise SingularMetricError(
                    f"scan sample ({u1:.4g}, {u2:.4g}) lies inside the ring collar"
                )
            riem = riemann_mixed(metric.components, u1, u2, step_h)
            if richardson:
                half = riemann_mixed(metric.components, u1, u2, step_h / 2)
                riem = (4.0 * half - riem) / 3.0
            worst = max(worst, float(np.max(np.abs(riem))))
    return worst


# -- conical defect ----------------------------------------------------------


def _quad(f, lo, hi):
    val, _, info, *rest = integrate.quad(
        f, lo, hi, epsabs=0.0, epsrel=1e-10, limit=400, full_output=1
    )
    if rest:
        raise QuadratureError(f"quadrature did not converge: {rest[0]}")
    return val


def conical_ratio(epsilon: float, params: SpacetimeParams, center: SpheroidalPoint | None = None) -> float:
    """Circumference over mean Euclidean (rho, z) radius of a small meridional loop.

    Without ``center`` the loop is the coordinate circle
    ``r = eps a cos(alpha), theta = pi/2 + eps sin(alpha)`` around a point of
    the ring, whose ratio tends to 4 pi.  With an off-ring ``center`` the loop
    is the metric-normalised coordinate circle around it and the ratio tends
    to 2 pi.
    """
    if not params.is_zero_g:
        raise ChartError("conical_ratio is defined for the zero-gravity metric")
    if not 0 < epsilon < 0.5:
        raise ValueError("epsilon must lie in (0, 0.5)")
    a = params.a
    a_sq = a * a
    if center is None:
        r_c, th_c = 0.0, math.pi / 2
        amp_r, amp_th = epsilon * a, epsilon
        rho_c, z_c = abs(a), 0.0
    else:
        r_c, th_c = center.r, center.theta
        sig_c = r_c**2 + a_sq * math.cos(th_c) ** 2
        if sig_c <= RING_COLLAR * a_sq:
            raise SingularMetricError("control loop centre lies on the ring")
        amp_r = epsilon / math.sqrt(sig_c / (r_c**2 + a_sq))
        amp_th = epsilon / math.sqrt(sig_c)
        w = to_weyl(center, params)
        rho_c, z_c = w.rho, w.z_cyl

    def speed(alpha):
        r = r_c + amp_r * math.cos(alpha)
        th = th_c + amp_th * math.sin(alpha)
        dr = -amp_r * math.sin(alpha)
        dth = amp_th * math.cos(alpha)
        sig = r * r + a_sq * math.cos(th) ** 2
        return math.sqrt(sig * (dr * dr / (r * r + a_sq) + dth * dth))

    def distance(alpha):
        r = r_c + amp_r * math.cos(alpha)
        th = th_c + amp_th * math.sin(alpha)
        if center is None:
            # rho - |a| without cancellation: both terms are O(eps^2)
            root = math.sqrt(r * r + a_sq)
            dth = th - math.pi / 2
            d_rho = r * r / (root + abs(a)) * math.cos(dth) - 2.0 * abs(a) * math.sin(dth / 2) ** 2
            return math.hypot(d_rho, r * math.sin(dth))
        rho = math.sqrt(r * r + a_sq) * math.sin(th)
        z = r * math.cos(th)
        return math.hypot(rho - rho_c, z - z_c)

    circumference = _quad(speed, 0.0, 2 * math.pi)
    mean_radius = _quad(distance, 0.0, 2 * math.pi) / (2 * math.pi)
    return circumference / mean_radius


# -- causality limit surface -------------------------------------------------


def _x_times_sigma_over_s2(r, theta, params: SpacetimeParams):
    # X Sigma / sin^2 = (r^2 + a^2) Sigma + a^2 sin^2 beta, a quartic in r
    a_sq = params.a**2
    s2 = math.sin(theta) ** 2
    sig = r * r + a_sq * math.cos(theta) ** 2
    beta = params.kappa * (2.0 * params.m * r - params.q**2)
    return (r * r + a_sq) * sig + a_sq * s2 * beta


def causality_surface(params: SpacetimeParams, theta: float, n_bracket: int = 4001) -> list[float]:
    """Radii ``r`` where the axial Killing field is null, ``X(r, theta) = 0``."""
    if params.kappa == 0 or math.sin(theta) == 0.0:
        return []
    span = 2.0 * (1.0 + abs(params.a) + 2.0 * params.kappa * abs(params.m) + params.kappa * params.q**2)
    grid = np.linspace(-span, span, n_bracket)
    f = lambda r: _x_times_sigma_over_s2(r, theta, params)
    vals = np.array([f(r) for r in grid])
    roots = []
    for i in range(len(grid) - 1):
        lo, hi = grid[i], grid[i + 1]
        if vals[i] == 0.0:
            roots.append(float(lo))
        elif vals[i] * vals[i + 1] < 0:
            roots.append(optimize.brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps))
    if vals[-1] == 0.0:
        roots.append(float(grid[-1]))
    return roots
