"""Electromagnetic potentials and fields of the zero-gravity KN ring.

Potentials are ``phi = q r / Sigma`` and ``psi = i pi a^2 cos(theta) / Sigma``
for source strengths ``(q, i)``; the KN pair has ``i = q / (pi a)``.  Fields
are ``E = -grad phi`` and ``B = -grad psi`` in the cylindrical orthonormal
frame ``(e_rho, e_phi, e_z)`` of the sheet containing the point, so the
far-field magnetic dipole moment is ``+pi a^2 i`` along ``+z``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .charts import (
    RING_TOL,
    ChartError,
    RingCoord,
    SpacetimeParams,
    SpheroidalPoint,
    TildePoint,
    WeylSheetPoint,
    _signed_radius,
    from_ring_coords,
    from_tilde,
    from_weyl,
    to_weyl,
)
from .metric import SingularMetricError

FIELD_KINDS = ("electric", "magnetic")


class CriticalPointError(ValueError):
    """The requested field vanishes at the point, so it has no direction."""


class DegenerateFitError(RuntimeError):
    pass


@dataclass(frozen=True)
class SourceStrengths:
    q_charge: float
    i_current: float

    @classmethod
    def canonical(cls, params: SpacetimeParams) -> "SourceStrengths":
        """Strengths of the KN ring: magnetic dipole moment ``q a``."""
        return cls(params.q, params.q / (math.pi * params.a))

    def magnetic_strength(self, a: float) -> float:
        """Coefficient ``k`` in ``psi = k cos(theta) / Sigma``."""
        return self.i_current * math.pi * a * a


@dataclass(frozen=True)
class PotentialPair:
    phi_e: float
    psi_m: float


@dataclass(frozen=True)
class FieldSample:
    point: SpheroidalPoint
    e_field: tuple[float, float, float]
    b_field: tuple[float, float, float]


def _as_spheroidal(p, params: SpacetimeParams) -> SpheroidalPoint:
    if isinstance(p, SpheroidalPoint):
        return p
    if isinstance(p, WeylSheetPoint):
        return from_weyl(p, params)
    if isinstance(p, TildePoint):
        return from_tilde(p, params)
    if isinstance(p, RingCoord):
        return from_ring_coords(p, params)
    raise TypeError(f"not a chart point: {p!r}")


def _require_zero_g(params: SpacetimeParams):
    if not params.is_zero_g:
        raise ChartError("the electromagnetic potentials live on the zero-gravity background")


def potentials_ry(r, y, src: SourceStrengths, a: float):
    """``(phi, psi)`` at signed radius ``r`` and ``y = cos(theta)``; elementwise.

    In these variables the sheet swap is ``(r, y) -> (-r, -y)`` and the
    equatorial reflection is ``y -> -y``, both exact in floating point.
    """
    r = np.asarray(r, dtype=float)
    y = np.asarray(y, dtype=float)
    sig = r * r + a * a * (y * y)
    if np.any(sig <= RING_TOL * a * a):
        raise SingularMetricError("potentials evaluated on the ring")
    return src.q_charge * r / sig, src.magnetic_strength(a) * y / sig


def potentials_xy(x, y, src: SourceStrengths, a: float):
    """``(phi, psi)`` in ring-centred coordinates ``x = r/a, y = cos(theta)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    cap_r2 = x * x + y * y
    if np.any(cap_r2 <= RING_TOL):
        raise SingularMetricError("potentials evaluated on the ring")
    return (src.q_charge / a) * x / cap_r2, (src.magnetic_strength(a) / (a * a)) * y / cap_r2


def potentials(p, src: SourceStrengths, params: SpacetimeParams) -> PotentialPair:
    _require_zero_g(params)
    sp = _as_spheroidal(p, params)
    phi, psi = potentials_ry(sp.r, math.cos(sp.theta), src, params.a)
    return PotentialPair(float(phi), float(psi))


def potential_gradients_rtheta(r, theta, src: SourceStrengths, a: float):
    """Analytic ``(d_r phi, d_theta phi, d_r psi, d_theta psi)``."""
    c, s = math.cos(theta), math.sin(theta)
    sig = r * r + a * a * c * c
    if sig <= RING_TOL * a * a:
        raise SingularMetricError("field evaluated on the ring")
    q, k = src.q_charge, src.magnetic_strength(a)
    sig2 = sig * sig
    diff = a * a * c * c - r * r
    return (
        q * diff / sig2,
        2.0 * q * a * a * r * c * s / sig2,
        -2.0 * k * c * r / sig2,
        k * s * diff / sig2,
    )


def cylindrical_gradient(r, theta, f_r, f_theta, a: float):
    """Map ``(d_r f, d_theta f)`` to ``(d_rho f, d_z f)`` on the point's sheet."""
    c, s = math.cos(theta), math.sin(theta)
    root_sq = r * r + a * a
    sig = r * r + a * a * c * c
    root = math.sqrt(root_sq)
    f_rho = root * (r * s * f_r + c * f_theta) / sig
    f_z = (root_sq * c * f_r - r * s * f_theta) / sig
    return f_rho, f_z


def field_vectors(p, src: SourceStrengths, params: SpacetimeParams) -> FieldSample:
    _require_zero_g(params)
    sp = _as_spheroidal(p, params)
    a = params.a
    phi_r, phi_t, psi_r, psi_t = potential_gradients_rtheta(sp.r, sp.theta, src, a)
    e_rho, e_z = cylindrical_gradient(sp.r, sp.theta, phi_r, phi_t, a)
    b_rho, b_z = cylindrical_gradient(sp.r, sp.theta, psi_r, psi_t, a)
    return FieldSample(sp, (-e_rho, 0.0, -e_z), (-b_rho, 0.0, -b_z))


def _field_scale(src: SourceStrengths, a: float) -> float:
    return (abs(src.q_charge) + abs(src.magnetic_strength(a))) / (a * a)


def unit_tangent_field(p, field_kind: str, src: SourceStrengths, params: SpacetimeParams):
    """Unit meridional direction ``(t_rho, t_z)`` of the chosen field at ``p``."""
    if field_kind not in FIELD_KINDS:
        raise ValueError(f"field_kind must be one of {FIELD_KINDS}")
    sample = field_vectors(p, src, params)
    vec = sample.e_field if field_kind == "electric" else sample.b_field
    f_rho, f_z = vec[0], vec[2]
    norm = math.hypot(f_rho, f_z)
    if norm <= 1e-14 * _field_scale(src, params.a):
        raise CriticalPointError(f"{field_kind} field vanishes at {sample.point}")
    return f_rho / norm, f_z / norm


# -- field-line tracing --------------------------------------------------------


@dataclass(frozen=True)
class StepConfig:
    """Tracer controls.

    Steps are ``min(max_step, ring_fraction * d)`` with ``d`` the Euclidean
    distance to the ring, halved whenever the tangent turns by more than
    90 degrees across a step; a step shorter than ``min_step`` means the
    line has run into a zero of the field.
    """

    max_step: float = 0.02
    ring_fraction: float = 0.1
    min_step: float = 1e-9
    max_steps: int = 20000
    boundary_radius: float = 8.0
    ring_stop: float = 1e-6
    direction: int = 1


@dataclass(frozen=True)
class FieldLine:
    samples: tuple[WeylSheetPoint, ...]
    arclength: tuple[float, ...]
    termination: str
    crossings: tuple[tuple[float, float], ...] = field(default=())

    TAGS = ("boundary", "ring-proximity", "step-limit", "critical-point")


def _advance(rho, z, sheet, d_rho, d_z, rho0):
    """Displace a Weyl-sheet state, handling the branch disk and the axis.

    ``z = 0`` counts as the ``z > 0`` side of its sheet; crossing the plane
    inside ``rho < rho0`` moves to the other sheet.
    """
    rho_new, z_new = rho + d_rho, z + d_z
    crossing = None
    if (z >= 0) != (z_new >= 0):
        t = z / (z - z_new) if z != z_new else 0.0
        rho_cross = abs(rho + t * d_rho)
        if rho_cross < rho0:
            sheet = -sheet
            crossing = (rho_cross, 0.0)
    return abs(rho_new), z_new, sheet, crossing


def _ring_distance(rho, z, rho0):
    return math.hypot(rho - rho0, z)


def _ring_coordinate_radius(rho, z, sheet, params: SpacetimeParams) -> float:
    sp = from_weyl(WeylSheetPoint(rho, z, sheet), params)
    return math.sqrt(sp.r**2 + params.a**2 * math.cos(sp.theta) ** 2) / abs(params.a)


def trace_field_line(
    start,
    field_kind: str,
    src: SourceStrengths,
    params: SpacetimeParams,
    step_cfg: StepConfig = StepConfig(),
) -> FieldLine:
    """RK4 integration of the unit tangent field in ``(rho, z, sheet)``."""
    _require_zero_g(params)
    w0 = start if isinstance(start, WeylSheetPoint) else to_weyl(_as_spheroidal(start, params), params)
    rho0 = params.rho0
    sign = 1.0 if step_cfg.direction >= 0 else -1.0

    def tangent(rho, z, sheet):
        t_rho, t_z = unit_tangent_field(WeylSheetPoint(rho, z, sheet), field_kind, src, params)
        return sign * t_rho, sign * t_z

    rho, z, sheet = w0.rho, w0.z_cyl, w0.sheet
    tangent(rho, z, sheet)  # raises at a critical point
    samples = [WeylSheetPoint(rho, z, sheet)]
    arclength = [0.0]
    crossings = []
    termination = "step-limit"
    h_cap = step_cfg.max_step

    for _ in range(step_cfg.max_steps):
        if _ring_coordinate_radius(rho, z, sheet, params) < step_cfg.ring_stop:
            termination = "ring-proximity"
            break
        if math.hypot(rho, z) >= step_cfg.boundary_radius:
            termination = "boundary"
            break
        h = min(h_cap, step_cfg.ring_fraction * _ring_distance(rho, z, rho0))
        if h < step_cfg.min_step:
            termination = "critical-point" if h_cap < step_cfg.min_step else "ring-proximity"
            break
        try:
            k1 = tangent(rho, z, sheet)
            s2 = _advance(rho, z, sheet, 0.5 * h * k1[0], 0.5 * h * k1[1], rho0)
            k2 = tangent(*s2[:3])
            s3 = _advance(rho, z, sheet, 0.5 * h * k2[0], 0.5 * h * k2[1], rho0)
            k3 = tangent(*s3[:3])
            s4 = _advance(rho, z, sheet, h * k3[0], h * k3[1], rho0)
            k4 = tangent(*s4[:3])
            d_rho = h * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]) / 6
            d_z = h * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]) / 6
            new = _advance(rho, z, sheet, d_rho, d_z, rho0)
            k_end = tangent(*new[:3])
        except CriticalPointError:
            termination = "critical-point"
            break
        except SingularMetricError:
            termination = "ring-proximity"
            break
        if k1[0] * k_end[0] + k1[1] * k_end[1] < 0:
            # overshot a zero of the field
            h_cap = 0.5 * h
            if h_cap < step_cfg.min_step:
                termination = "critical-point"
                break
            continue
        rho, z, sheet, crossing = new
        if crossing is not None:
            crossings.append(crossing)
        samples.append(WeylSheetPoint(rho, z, sheet))
        arclength.append(arclength[-1] + math.hypot(d_rho, d_z))
        h_cap = min(step_cfg.max_step, 2.0 * h_cap)

    return FieldLine(tuple(samples), tuple(arclength), termination, tuple(crossings))


# -- critical points -----------------------------------------------------------


@dataclass(frozen=True)
class CriticalPoint:
    location: SpheroidalPoint
    kind: str
    hessian_evals: tuple[float, float]


def _grad_rho_z(rho, z, sheet, src, params):
    """Gradient of phi in ``(rho, z)``, extended evenly across the axis."""
    sp = from_weyl(WeylSheetPoint(abs(rho), z, sheet), params)
    phi_r, phi_t, _, _ = potential_gradients_rtheta(sp.r, sp.theta, src, params.a)
    g_rho, g_z = cylindrical_gradient(sp.r, sp.theta, phi_r, phi_t, params.a)
    return np.array([math.copysign(1.0, rho) * g_rho if rho != 0 else 0.0, g_z])


def _fd_hessian(rho, z, sheet, src, params, h):
    cols = []
    for e in ((h, 0.0), (0.0, h)):
        gp = _grad_rho_z(rho + e[0], z + e[1], sheet, src, params)
        gm = _grad_rho_z(rho - e[0], z - e[1], sheet, src, params)
        cols.append((gp - gm) / (2 * h))
    hess = np.column_stack(cols)
    return 0.5 * (hess + hess.T)


def _classify(evals, scale):
    lo, hi = min(evals), max(evals)
    if abs(lo) <= 1e-8 * scale or abs(hi) <= 1e-8 * scale:
        return "degenerate"
    return "saddle" if lo < 0 < hi else "extremum"


def find_axis_critical_points(
    src: SourceStrengths,
    params: SpacetimeParams,
    search_interval: tuple[float, float] | None = None,
    n_bracket: int = 2001,
) -> list[CriticalPoint]:
    """Zeros of the electric field on both half-axes, in signed ``r``."""
    _require_zero_g(params)
    a = params.a
    if src.q_charge == 0:
        return []
    lo, hi = search_interval if search_interval is not None else (-10 * abs(a), 10 * abs(a))
    h = 1e-5 * abs(a)
    scale = abs(src.q_charge) / abs(a) ** 3
    found = []
    for theta in (0.0, math.pi):
        d_phi = lambda r: potential_gradients_rtheta(r, theta, src, a)[0]
        grid = np.linspace(lo, hi, n_bracket)
        vals = [d_phi(r) for r in grid]
        roots = []
        for i in range(len(grid) - 1):
            if vals[i] == 0.0:
                roots.append(grid[i])
            elif vals[i] * vals[i + 1] < 0:
                roots.append(optimize.brentq(d_phi, grid[i], grid[i + 1], xtol=1e-15, rtol=1e-15))
        for r in roots:
            w = to_weyl(SpheroidalPoint(r, theta), params)
            x = np.array([0.0, w.z_cyl])
            for _ in range(3):
                g = _grad_rho_z(x[0], x[1], w.sheet, src, params)
                hess = _fd_hessian(x[0], x[1], w.sheet, src, params, h)
                x = x - np.linalg.solve(hess, g)
            hess = _fd_hessian(x[0], x[1], w.sheet, src, params, h)
            evals = tuple(float(v) for v in np.linalg.eigvalsh(hess))
            loc = from_weyl(WeylSheetPoint(abs(x[0]), x[1], w.sheet), params)
            found.append(CriticalPoint(SpheroidalPoint(loc.r, theta), _classify(evals, scale), evals))
    return found


# -- asymptotics ---------------------------------------------------------------


def fit_power_law(distance, values):
    """Least-squares ``log|values| = slope log(distance) + c``; returns (slope, c, R^2)."""
    lx = np.log(np.asarray(distance, dtype=float))
    ly = np.log(np.abs(np.asarray(values, dtype=float)))
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 0.0
    return float(slope), float(intercept), float(r2)


def _log_distances(lo_exp, hi_exp, per_decade=8):
    n = int(round((hi_exp - lo_exp) * per_decade)) + 1
    return np.logspace(lo_exp, hi_exp, n)


BLOWUP_APPROACHES = ("in_plane_weyl", "generic_ring_coord", "far_field")


def blowup_exponent(
    src: SourceStrengths,
    params: SpacetimeParams,
    approach: str,
    potential: str = "phi",
    direction: float = 0.0,
    min_r2: float = 0.999,
) -> float:
    """Fitted power-law exponent of a potential along a singular approach.

    * ``in_plane_weyl``: equatorial plane, ``rho = |a| + d`` with ``d`` from
      ``1e-6 |a|`` to ``1e-3 |a|``;
    * ``generic_ring_coord``: the ray ``(x, y) = R (cos t, sin t)``, ``t = direction``,
      ``R`` from ``1e-6`` to ``1e-3``;
    * ``far_field``: ``theta = pi/3 + direction``, ``r`` from ``1e3 |a|`` to ``1e6 |a|``.
    """
    _require_zero_g(params)
    a = abs(params.a)
    index = 0 if potential == "phi" else 1
    if approach == "in_plane_weyl":
        d = a * _log_distances(-6, -3)
        # equatorial plane outside the ring is theta = pi/2, r = sqrt(rho^2 - a^2)
        r = np.sqrt(d * (2 * a + d))
        vals = potentials_ry(r, np.zeros_like(r), src, params.a)[index]
        if potential == "psi":
            raise ValueError("psi vanishes identically in the equatorial plane")
    elif approach == "generic_ring_coord":
        d = _log_distances(-6, -3)
        vals = potentials_xy(d * math.cos(direction), d * math.sin(direction), src, params.a)[index]
    elif approach == "far_field":
        d = a * _log_distances(3, 6)
        y = math.cos(math.pi / 3 + direction)
        vals = potentials_ry(d, np.full_like(d, y), src, params.a)[index]
    else:
        raise ValueError(f"approach must be one of {BLOWUP_APPROACHES}")
    slope, _, r2 = fit_power_law(d, vals)
    if not r2 >= min_r2:
        raise DegenerateFitError(f"power-law fit R^2 = {r2:.6f} below {min_r2}")
    return slope


def dipole_moment_estimate(src: SourceStrengths, params: SpacetimeParams, theta: float = math.pi / 3) -> float:
    """Far-field limit of ``psi r^2 / cos(theta)``, extrapolated in ``1/r^2``."""
    _require_zero_g(params)
    a = abs(params.a)
    r = a * _log_distances(2, 4)
    y = math.cos(theta)
    psi = potentials_ry(r, np.full_like(r, y), src, params.a)[1]
    coeffs = np.polyfit(1.0 / r**2, psi * r**2 / y, 1)
    return float(coeffs[1])


# -- harmonicity and the Schroedinger form --------------------------------------


def potentials_weyl(rho, z, src: SourceStrengths, params: SpacetimeParams, sheet: int = 1):
    """``(phi, psi)`` as functions of Weyl coordinates on one sheet; elementwise."""
    rho = np.asarray(rho, dtype=float)
    z = np.asarray(z, dtype=float)
    s = np.asarray(_signed_radius(rho, z, params.a**2, sheet))
    with np.errstate(invalid="ignore", divide="ignore"):
        y = np.where(s != 0, z / np.where(s != 0, s, 1.0), 0.0)
    return potentials_ry(s, np.clip(y, -1.0, 1.0), src, params.a)


def axisym_laplacian(f, rho, z, h):
    """Flat Laplacian of an axisymmetric ``f(rho, z)`` by central differences."""
    f0 = f(rho, z)
    fp, fm = f(rho + h, z), f(rho - h, z)
    return (fp - 2 * f0 + fm) / h**2 + (fp - fm) / (2 * h * rho) + (f(rho, z + h) - 2 * f0 + f(rho, z - h)) / h**2


def harmonicity_residual(
    src: SourceStrengths,
    params: SpacetimeParams,
    grid_region=((1.5, 3.0), (-1.0, 1.0)),
    h: float = 1e-3,
    n: int = 9,
) -> float:
    """Max over a sample grid of the flat Laplacian of ``phi`` and ``psi`` (outer sheet)."""
    _require_zero_g(params)
    (r0, r1), (z0, z1) = grid_region
    rho, z = np.meshgrid(np.linspace(r0, r1, n), np.linspace(z0, z1, n))
    worst = 0.0
    for index in (0, 1):
        f = lambda rr, zz: potentials_weyl(rr, zz, src, params)[index]
        worst = max(worst, float(np.max(np.abs(axisym_laplacian(f, rho, z, h)))))
    return worst


@dataclass(frozen=True)
class SchrodingerData:
    lambda_val: float
    p_potential: float
    w: float


def conformal_exponent(r_tilde, a: float):
    """``lambda`` with ``exp(2 lambda) = (r~^2 + a^2) / (2 r~^2)``."""
    r_tilde = np.asarray(r_tilde, dtype=float)
    return 0.5 * np.log((r_tilde**2 + a * a) / (2.0 * r_tilde**2))


def schrodinger_potential(r_tilde, a: float):
    r_tilde = np.asarray(r_tilde, dtype=float)
    return a * a / (r_tilde**2 + a * a) ** 2


def transformed_potential(r_tilde, theta, src: SourceStrengths, a: float):
    """``w = exp(lambda) phi`` with ``phi`` pulled back to the tilde chart."""
    r_tilde = np.asarray(r_tilde, dtype=float)
    r = 0.5 * (r_tilde - a * a / r_tilde)
    phi = potentials_ry(r, np.cos(theta), src, a)[0]
    return np.exp(conformal_exponent(r_tilde, a)) * phi


def schrodinger_transform(p_tilde: TildePoint, src: SourceStrengths, params: SpacetimeParams) -> SchrodingerData:
    _require_zero_g(params)
    a = params.a
    rt = p_tilde.r_tilde
    return SchrodingerData(
        float(conformal_exponent(rt, a)),
        float(schrodinger_potential(rt, a)),
        float(transformed_potential(rt, p_tilde.theta, src, a)),
    )


def spherical_laplacian(f, r, theta, h):
    """Flat axisymmetric Laplacian in spherical ``(r, theta)`` by central differences."""
    f0 = f(r, theta)
    frp, frm = f(r + h, theta), f(r - h, theta)
    ftp, ftm = f(r, theta + h), f(r, theta - h)
    f_rr = (frp - 2 * f0 + frm) / h**2
    f_r = (frp - frm) / (2 * h)
    f_tt = (ftp - 2 * f0 + ftm) / h**2
    f_t = (ftp - ftm) / (2 * h)
    return f_rr + 2 * f_r / r + (f_tt + np.cos(theta) / np.sin(theta) * f_t) / r**2


def schrodinger_residual(
    src: SourceStrengths,
    params: SpacetimeParams,
    region=((1.5, 3.0), (0.3, 1.2)),
    h: float = 1e-3,
    n: int = 9,
) -> float:
    """Max of ``|-Laplacian(w) + p w|`` over a grid in the tilde chart."""
    _require_zero_g(params)
    a = params.a
    (r0, r1), (t0, t1) = region
    rt, th = np.meshgrid(np.linspace(r0, r1, n), np.linspace(t0, t1, n))
    w = lambda rr, tt: transformed_potential(rr, tt, src, a)
    res = -spherical_laplacian(w, rt, th, h) + schrodinger_potential(rt, a) * w(rt, th)
    return float(np.max(np.abs(res)))


def schrodinger_potential_fd(r_tilde, a: float, h: float = 1e-4):
    """``Laplacian(lambda) + |grad lambda|^2`` for the radial ``lambda``, by differences."""
    lam = lambda r: conformal_exponent(r, a)
    l0, lp, lm = lam(r_tilde), lam(r_tilde + h), lam(r_tilde - h)
    l_rr = (lp - 2 * l0 + lm) / h**2
    l_r = (lp - lm) / (2 * h)
    return l_rr + 2 * l_r / r_tilde + l_r**2
