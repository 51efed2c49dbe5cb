"""Coordinate charts of the two-sheeted KN / zGKN manifold.

Four charts are used throughout the package:

* spheroidal (Boyer-Lindquist) ``(r, theta, phi)`` with signed ``r``; the two
  sheets are ``r > kappa*m`` and ``r < kappa*m``;
* Weyl ``(rho, z, phi)`` together with an explicit sheet tag, since the
  projection to ``(rho, z)`` is 2-to-1;
* tilde ``(r_tilde, theta, phi)``, a single copy of R^3 covering both sheets
  of the zero-gravity limit (inside / outside the sphere ``r_tilde = |a|``);
* ring-centred ``x = r/a, y = cos(theta)`` on the strip ``|Im z| <= 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi
# Sigma / a^2 below this is the ring to double precision: the float nearest
# pi/2 leaves cos^2 ~ 4e-33
RING_TOL = 1e-28


class ChartError(ValueError):
    """A point or map was requested outside the domain of a chart."""


@dataclass(frozen=True)
class SpacetimeParams:
    """KN parameters in geometric units; ``kappa = 2G``."""

    q: float = 1.0
    m: float = 1.0
    a: float = 1.0
    kappa: float = 0.0

    def __post_init__(self):
        if self.a == 0:
            raise ChartError("spin parameter a must be nonzero")
        if self.kappa < 0:
            raise ChartError("coupling kappa must be nonnegative")
        if self.kappa > 0 and self.p_sq <= 0:
            raise ChartError(
                f"parameters are not hyperextremal: p^2 = {self.p_sq:.6g} <= 0"
            )

    @property
    def p_sq(self) -> float:
        return self.a**2 + self.kappa * self.q**2 - self.kappa**2 * self.m**2

    @property
    def p(self) -> float:
        return math.sqrt(self.p_sq)

    @property
    def rho0(self) -> float:
        """Euclidean radius of the ring singularity."""
        return math.sqrt(self.a**2 + self.kappa * self.q**2)

    @property
    def is_zero_g(self) -> bool:
        return self.kappa == 0

    def zero_g(self) -> "SpacetimeParams":
        return SpacetimeParams(q=self.q, m=self.m, a=self.a, kappa=0.0)


def _normalize_angles(theta: float, phi_az: float) -> tuple[float, float]:
    theta = min(max(float(theta), 0.0), math.pi)
    phi_az = float(phi_az) % TWO_PI
    return theta, phi_az


@dataclass(frozen=True)
class SpheroidalPoint:
    r: float
    theta: float
    phi_az: float = 0.0

    def __post_init__(self):
        theta, phi_az = _normalize_angles(self.theta, self.phi_az)
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi_az", phi_az)


@dataclass(frozen=True)
class WeylSheetPoint:
    """Point of the quotient in Weyl coordinates; ``sheet`` is +1 or -1."""

    rho: float
    z_cyl: float
    sheet: int = 1
    phi_az: float = 0.0

    def __post_init__(self):
        if self.rho < 0:
            raise ChartError("rho must be nonnegative")
        if self.sheet not in (1, -1):
            raise ChartError("sheet tag must be +1 or -1")
        object.__setattr__(self, "rho", float(self.rho))
        object.__setattr__(self, "z_cyl", float(self.z_cyl))
        object.__setattr__(self, "phi_az", float(self.phi_az) % TWO_PI)


@dataclass(frozen=True)
class TildePoint:
    r_tilde: float
    theta: float
    phi_az: float = 0.0

    def __post_init__(self):
        if not self.r_tilde > 0:
            raise ChartError("r_tilde must be positive")
        theta, phi_az = _normalize_angles(self.theta, self.phi_az)
        object.__setattr__(self, "r_tilde", float(self.r_tilde))
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi_az", phi_az)


@dataclass(frozen=True)
class RingCoord:
    x: float
    y: float
    z_c: complex = field(init=False)
    cap_r: float = field(init=False)

    def __post_init__(self):
        if abs(self.y) > 1:
            raise ChartError("ring coordinate y = cos(theta) must lie in [-1, 1]")
        object.__setattr__(self, "z_c", complex(self.x, self.y))
        object.__setattr__(self, "cap_r", math.hypot(self.x, self.y))


ChartPoint = SpheroidalPoint | WeylSheetPoint | TildePoint | RingCoord


def _require_zero_g(params: SpacetimeParams, what: str):
    if not params.is_zero_g:
        raise ChartError(f"{what} is only defined in the zero-gravity limit (kappa = 0)")


def sheet_of(r: float, params: SpacetimeParams) -> int:
    return 1 if r - params.kappa * params.m >= 0 else -1


def to_weyl(p: SpheroidalPoint, params: SpacetimeParams) -> WeylSheetPoint:
    s = p.r - params.kappa * params.m
    rho = math.sqrt(s * s + params.p_sq) * math.sin(p.theta)
    z = s * math.cos(p.theta)
    return WeylSheetPoint(abs(rho), z, 1 if s >= 0 else -1, p.phi_az)


def from_weyl(w: WeylSheetPoint, params: SpacetimeParams) -> SpheroidalPoint:
    """Inverse of :func:`to_weyl` on the sheet named by ``w.sheet``.

    On the branch disk (``z = 0``, ``rho < rho0``) the sheet tag selects the
    face: sheet +1 is the upper face (``theta < pi/2``).
    """
    rho, z = w.rho, w.z_cyl
    s = _signed_radius(rho, z, params.p_sq, w.sheet)
    r = s + params.kappa * params.m
    if s != 0.0:
        # atan2 stays well conditioned near the axis where acos does not
        theta = math.atan2(rho / math.sqrt(s * s + params.p_sq), z / s)
    else:
        sin_t = min(rho / params.p, 1.0)
        theta = math.asin(sin_t)
        if w.sheet < 0:
            theta = math.pi - theta
    return SpheroidalPoint(r, theta, w.phi_az)


def _signed_radius(rho, z, p_sq, sheet):
    """Signed ``s = r - kappa*m`` solving rho^2/(s^2+p^2) + z^2/s^2 = 1."""
    rho = np.asarray(rho, dtype=float)
    z = np.asarray(z, dtype=float)
    big_a = rho * rho + z * z - p_sq
    root = np.sqrt(big_a * big_a + 4.0 * p_sq * z * z)
    with np.errstate(divide="ignore", invalid="ignore"):
        s_sq = np.where(
            big_a >= 0,
            0.5 * (big_a + root),
            np.where(root - big_a > 0, 2.0 * p_sq * z * z / (root - big_a), 0.0),
        )
    s = np.sqrt(s_sq) * np.where(np.asarray(sheet) >= 0, 1.0, -1.0)
    return float(s) if s.ndim == 0 else s


def to_tilde(p: SpheroidalPoint, params: SpacetimeParams) -> TildePoint:
    _require_zero_g(params, "the tilde chart")
    r, a_sq = p.r, params.a**2
    root = math.sqrt(r * r + a_sq)
    # r + sqrt(r^2+a^2) cancels for r << 0
    r_tilde = r + root if r >= 0 else a_sq / (root - r)
    return TildePoint(r_tilde, p.theta, p.phi_az)


def from_tilde(p: TildePoint, params: SpacetimeParams) -> SpheroidalPoint:
    if not p.r_tilde > 0:
        raise ChartError("r_tilde must be positive")
    rt = p.r_tilde
    r = 0.5 * (rt - params.a**2 / rt)
    return SpheroidalPoint(r, p.theta, p.phi_az)


def bar_pi(p: TildePoint, params: SpacetimeParams) -> WeylSheetPoint:
    _require_zero_g(params, "the tilde projection")
    rt, a_sq = p.r_tilde, params.a**2
    rho = (rt * rt + a_sq) / (2.0 * rt) * math.sin(p.theta)
    z = (rt * rt - a_sq) / (2.0 * rt) * math.cos(p.theta)
    sheet = 1 if rt >= abs(params.a) else -1
    return WeylSheetPoint(abs(rho), z, sheet, p.phi_az)


def involution_tau(p: SpheroidalPoint, params: SpacetimeParams) -> SpheroidalPoint:
    return SpheroidalPoint(2.0 * params.kappa * params.m - p.r, math.pi - p.theta, p.phi_az)


def involution_tau1(p: TildePoint, params: SpacetimeParams) -> TildePoint:
    return TildePoint(params.a**2 / p.r_tilde, math.pi - p.theta, p.phi_az)


def ring_coords(p: SpheroidalPoint, params: SpacetimeParams) -> RingCoord:
    return RingCoord(p.r / params.a, math.cos(p.theta))


def from_ring_coords(c: RingCoord, params: SpacetimeParams, phi_az: float = 0.0) -> SpheroidalPoint:
    return SpheroidalPoint(params.a * c.x, math.acos(c.y), phi_az)


def sigma(r, theta, params: SpacetimeParams):
    return r * r + params.a**2 * np.cos(theta) ** 2


def on_ring(p: SpheroidalPoint, params: SpacetimeParams, collar: float = RING_TOL) -> bool:
    """True when Sigma <= collar * a^2."""
    return sigma(p.r, p.theta, params) <= collar * params.a**2
