"""Finite-difference solvers for the two singular strip Dirichlet problems.

Both problems share the degenerate-elliptic operator

    L u = d_x((1 + x^2) u_x) + d_y((1 - y^2) u_y)

discretised by the conservative five-point stencil with coefficients taken
at half nodes; minus the assembled operator is symmetric positive definite.

* electric: ``(0, x_max) x (-1, 1)``, reference ``u0 = x / R^2``;
* magnetic: ``(-x_max, x_max) x (0, 1)``, reference ``v0 = y / R^2``;
* full: the electric data on ``(-x_max, x_max) x (-1, 1)``, used to check
  that the half-strip solution extends anti-symmetrically.

Nodes with ``x^2 + y^2 < eps_in^2`` are excised and carry Dirichlet data.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

DOMAINS = ("electric", "magnetic", "full")
# above this many unknowns the direct path switches from LU to AMG-preconditioned CG
DIRECT_LU_LIMIT = 200_000


class SolverError(RuntimeError):
    pass


class InsufficientGridsError(ValueError):
    pass


@dataclass(frozen=True)
class StripGrid:
    domain: str
    x_max: float
    eps_in: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.domain not in DOMAINS:
            raise ValueError(f"domain must be one of {DOMAINS}")
        if not 0 < self.eps_in < 0.5 < self.x_max:
            raise ValueError("need 0 < eps_in < 1/2 < x_max")
        if self.nx < 1 or self.ny < 1:
            raise ValueError("need at least one interior node in each direction")
        if self.eps_in <= max(self.hx, self.hy):
            raise ValueError(
                f"eps_in = {self.eps_in:g} must exceed the mesh width {max(self.hx, self.hy):g} "
                "so that the excision swallows the stencil around the origin"
            )

    @classmethod
    def from_spacing(cls, domain: str, x_max: float, eps_in: float, h: float) -> "StripGrid":
        """Grid with (as nearly as the edges allow) square cells of side ``h``."""
        x_len, y_len = cls._extent(domain, x_max)
        nx = max(int(round(x_len / h)) - 1, 1)
        ny = max(int(round(y_len / h)) - 1, 1)
        return cls(domain, x_max, eps_in, nx, ny)

    @staticmethod
    def _extent(domain, x_max):
        if domain == "electric":
            return x_max, 2.0
        if domain == "magnetic":
            return 2.0 * x_max, 1.0
        return 2.0 * x_max, 2.0

    @property
    def x_range(self) -> tuple[float, float]:
        return (0.0, self.x_max) if self.domain == "electric" else (-self.x_max, self.x_max)

    @property
    def y_range(self) -> tuple[float, float]:
        return (0.0, 1.0) if self.domain == "magnetic" else (-1.0, 1.0)

    @property
    def hx(self) -> float:
        lo, hi = self.x_range
        return (hi - lo) / (self.nx + 1)

    @property
    def hy(self) -> float:
        lo, hi = self.y_range
        return (hi - lo) / (self.ny + 1)

    @property
    def x_nodes(self) -> np.ndarray:
        lo, _ = self.x_range
        return lo + self.hx * np.arange(self.nx + 2)

    @property
    def y_nodes(self) -> np.ndarray:
        lo, _ = self.y_range
        return lo + self.hy * np.arange(self.ny + 2)

    def mesh(self):
        """Node coordinates, shape ``(nx + 2, ny + 2)``, boundary included."""
        return np.meshgrid(self.x_nodes, self.y_nodes, indexing="ij")

    def excised(self) -> np.ndarray:
        x, y = self.mesh()
        return x * x + y * y < self.eps_in**2

    def active(self) -> np.ndarray:
        mask = np.zeros((self.nx + 2, self.ny + 2), dtype=bool)
        mask[1:-1, 1:-1] = True
        return mask & ~self.excised()


# -- boundary data -------------------------------------------------------------

EdgeFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


def reference_electric(x, y):
    return x / (x * x + y * y)


def reference_magnetic(x, y):
    return y / (x * x + y * y)


@dataclass(frozen=True)
class BoundarySpec:
    """Dirichlet data on the edges ``left, right, bottom, top`` and the excision ``inner``.

    ``oracle`` mode uses the closed-form solution on every edge.  In
    ``asymptotic`` mode only data fixed by the boundary-value problem are
    used: the exact edge values, the leading far-field term and the blow-up
    profile on the excision plus an optional ``inner_remainder`` standing in
    for the unspecified ``o(1/R)`` correction.
    """

    kind: str
    mode: str
    edges: dict = field(default_factory=dict)

    EDGE_NAMES = ("left", "right", "bottom", "top", "inner")

    @classmethod
    def oracle(cls, kind: str) -> "BoundarySpec":
        ref = _reference(kind)
        return cls(kind, "oracle", {name: ref for name in cls.EDGE_NAMES})

    @classmethod
    def asymptotic(cls, kind: str, domain: str | None = None, inner_remainder: EdgeFn | None = None) -> "BoundarySpec":
        rem = inner_remainder if inner_remainder is not None else (lambda x, y: np.zeros_like(x))
        if kind == "electric":
            profile = lambda x, y: reference_electric(x, y) + rem(x, y)
            edges = {
                "left": (lambda x, y: 1.0 / x) if domain == "full" else (lambda x, y: np.zeros_like(x)),
                "right": lambda x, y: 1.0 / x,
                "bottom": lambda x, y: x / (1.0 + x * x),
                "top": lambda x, y: x / (1.0 + x * x),
                "inner": profile,
            }
        elif kind == "magnetic":
            edges = {
                "left": lambda x, y: y / (x * x),
                "right": lambda x, y: y / (x * x),
                "bottom": lambda x, y: np.zeros_like(x),
                "top": lambda x, y: 1.0 / (1.0 + x * x),
                "inner": lambda x, y: reference_magnetic(x, y) + rem(x, y),
            }
        else:
            raise ValueError(f"unknown problem kind {kind!r}")
        return cls(kind, "asymptotic", edges)


def _reference(kind: str) -> EdgeFn:
    if kind == "electric":
        return reference_electric
    if kind == "magnetic":
        return reference_magnetic
    raise ValueError(f"unknown problem kind {kind!r}")


# -- assembly ------------------------------------------------------------------


@dataclass
class LinearSystem:
    kind: str
    grid: StripGrid
    boundary: BoundarySpec
    matrix: sp.csr_matrix
    rhs: np.ndarray
    active: np.ndarray
    dirichlet: np.ndarray
    index: np.ndarray

    @property
    def n_unknowns(self) -> int:
        return self.rhs.size

    def scatter(self, u: np.ndarray) -> np.ndarray:
        """Full nodal array from the vector of unknowns."""
        full = self.dirichlet.copy()
        full[self.active] = u
        return full

    def gather(self, values: np.ndarray) -> np.ndarray:
        return values[self.active]

    def reference_values(self) -> np.ndarray:
        x, y = self.grid.mesh()
        with np.errstate(divide="ignore", invalid="ignore"):
            return _reference(self.kind)(x, y)


def _dirichlet_values(grid: StripGrid, boundary: BoundarySpec) -> np.ndarray:
    missing = [n for n in BoundarySpec.EDGE_NAMES if n not in boundary.edges]
    if missing:
        raise ValueError(f"boundary specification lacks edges {missing}")
    x, y = grid.mesh()
    vals = np.zeros_like(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        exc = grid.excised()
        vals[exc] = boundary.edges["inner"](x[exc], y[exc])
        vals[:, 0] = boundary.edges["bottom"](x[:, 0], y[:, 0])
        vals[:, -1] = boundary.edges["top"](x[:, -1], y[:, -1])
        vals[0, :] = boundary.edges["left"](x[0, :], y[0, :])
        vals[-1, :] = boundary.edges["right"](x[-1, :], y[-1, :])
    # singular values (the origin) are never referenced once the excision covers its stencil
    vals[~np.isfinite(vals)] = 0.0
    return vals


def _assemble(kind: str, grid: StripGrid, boundary: BoundarySpec) -> LinearSystem:
    if boundary.kind != kind:
        raise ValueError(f"boundary data are for the {boundary.kind} problem, not {kind}")
    active = grid.active()
    g = _dirichlet_values(grid, boundary)
    g[active] = 0.0
    index = -np.ones(active.shape, dtype=np.int64)
    n = int(active.sum())
    index[active] = np.arange(n)

    x, y = grid.mesh()
    hx, hy = grid.hx, grid.hy
    cx_p = (1.0 + (x + 0.5 * hx) ** 2) / hx**2
    cx_m = (1.0 + (x - 0.5 * hx) ** 2) / hx**2
    cy_p = (1.0 - (y + 0.5 * hy) ** 2) / hy**2
    cy_m = (1.0 - (y - 0.5 * hy) ** 2) / hy**2

    ii, jj = np.nonzero(active)
    rows = [index[ii, jj]]
    cols = [index[ii, jj]]
    data = [(cx_p + cx_m + cy_p + cy_m)[ii, jj]]
    rhs = np.zeros(n)
    for di, dj, coef in ((1, 0, cx_p), (-1, 0, cx_m), (0, 1, cy_p), (0, -1, cy_m)):
        ni, nj = ii + di, jj + dj
        c = coef[ii, jj]
        nbr = index[ni, nj]
        inner = nbr >= 0
        rows.append(index[ii, jj][inner])
        cols.append(nbr[inner])
        data.append(-c[inner])
        np.add.at(rhs, index[ii, jj][~inner], c[~inner] * g[ni, nj][~inner])
    mat = sp.csr_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )
    return LinearSystem(kind, grid, boundary, mat, rhs, active, g, index)


def assemble_electric_problem(grid: StripGrid, boundary: BoundarySpec) -> LinearSystem:
    if grid.domain not in ("electric", "full"):
        raise ValueError("the electric problem lives on the 'electric' (or 'full') strip")
    return _assemble("electric", grid, boundary)


def assemble_magnetic_problem(grid: StripGrid, boundary: BoundarySpec) -> LinearSystem:
    if grid.domain != "magnetic":
        raise ValueError("the magnetic problem lives on the 'magnetic' strip")
    return _assemble("magnetic", grid, boundary)


def assemble(kind: str, grid: StripGrid, boundary: BoundarySpec) -> LinearSystem:
    if kind == "electric":
        return assemble_electric_problem(grid, boundary)
    return assemble_magnetic_problem(grid, boundary)


def discrete_operator(values: np.ndarray, grid: StripGrid) -> np.ndarray:
    """Five-point flux-form ``L u`` at interior nodes (zero elsewhere)."""
    x, y = grid.mesh()
    hx, hy = grid.hx, grid.hy
    out = np.zeros_like(values)
    xc, yc = x[1:-1, 1:-1], y[1:-1, 1:-1]
    u = values
    flux_x = ((1 + (xc + hx / 2) ** 2) * (u[2:, 1:-1] - u[1:-1, 1:-1])
              - (1 + (xc - hx / 2) ** 2) * (u[1:-1, 1:-1] - u[:-2, 1:-1])) / hx**2
    flux_y = ((1 - (yc + hy / 2) ** 2) * (u[1:-1, 2:] - u[1:-1, 1:-1])
              - (1 - (yc - hy / 2) ** 2) * (u[1:-1, 1:-1] - u[1:-1, :-2])) / hy**2
    out[1:-1, 1:-1] = flux_x + flux_y
    return out


# -- solutions -----------------------------------------------------------------


@dataclass
class GridSolution:
    grid: StripGrid
    values: np.ndarray
    solve_mode: str
    linf_error_vs_reference: float
    iterations: int
    residual_norm: float
    system: LinearSystem | None = None
    energy_trace: list = field(default_factory=list)
    seconds: float = 0.0

    def error_field(self) -> np.ndarray:
        return np.where(self.system.active, self.values - self.system.reference_values(), 0.0)

    def linf_error_in_window(self, r_min: float) -> float:
        """Max nodal error over active nodes with ``R >= r_min``."""
        x, y = self.grid.mesh()
        mask = self.system.active & (np.hypot(x, y) >= r_min)
        return float(np.max(np.abs(self.values - self.system.reference_values())[mask]))


def _finish(system, u, mode, iterations, t0, trace=None) -> GridSolution:
    res = np.linalg.norm(system.matrix @ u - system.rhs) / max(np.linalg.norm(system.rhs), 1e-300)
    values = system.scatter(u)
    err = float(np.max(np.abs(u - system.gather(system.reference_values()))))
    return GridSolution(system.grid, values, mode, err, iterations, float(res), system,
                        trace or [], time.perf_counter() - t0)


def solve_direct(system: LinearSystem, tol: float = 1e-10, max_iter: int = 500) -> GridSolution:
    """Sparse LU for moderate systems, classical (Ruge-Stueben) AMG + CG beyond that.

    Classical coarsening follows the strong ``(1 + x^2)`` anisotropy far out
    along the strip, where aggregation-based AMG needs an order of magnitude
    more iterations.
    """
    t0 = time.perf_counter()
    if system.n_unknowns <= DIRECT_LU_LIMIT:
        u = spla.splu(system.matrix.tocsc()).solve(system.rhs)
        return _finish(system, u, "direct", 1, t0)
    import pyamg

    ml = pyamg.ruge_stuben_solver(system.matrix, max_coarse=500)
    residuals = []
    u = ml.solve(system.rhs, tol=tol, accel="cg", maxiter=max_iter, residuals=residuals)
    sol = _finish(system, u, "direct", len(residuals) - 1, t0)
    if not sol.residual_norm <= 10 * tol:
        raise SolverError(
            f"AMG-CG stalled at relative residual {sol.residual_norm:.3e} after {sol.iterations} iterations"
        )
    return sol


def _edge_weights(grid: StripGrid):
    x, y = grid.mesh()
    hx, hy = grid.hx, grid.hy
    wx = (1.0 + (0.5 * (x[1:, :] + x[:-1, :])) ** 2) / hx**2
    wy = (1.0 - (0.5 * (y[:, 1:] + y[:, :-1])) ** 2) / hy**2
    return wx, wy


def dirichlet_energy(values: np.ndarray, grid: StripGrid, params=None, a: float | None = None) -> float:
    """``pi a sum_e c_e (du_e / h_e)^2 hx hy`` over edges touching an active node.

    Midpoint-flux quadrature of ``pi a int (1+x^2) f_x^2 + (1-y^2) f_y^2``;
    its gradient in the unknowns is ``2 pi a hx hy (A u - b)``.
    """
    a_val = a if a is not None else (params.a if params is not None else 1.0)
    active = grid.active()
    wx, wy = _edge_weights(grid)
    ex = active[1:, :] | active[:-1, :]
    ey = active[:, 1:] | active[:, :-1]
    dx = values[1:, :] - values[:-1, :]
    dy = values[:, 1:] - values[:, :-1]
    total = np.sum((wx * dx * dx)[ex]) + np.sum((wy * dy * dy)[ey])
    return float(math.pi * abs(a_val) * grid.hx * grid.hy * total)


def solve_variational(
    system: LinearSystem,
    start: np.ndarray | None = None,
    params=None,
    tol: float = 1e-10,
    max_iter: int = 100_000,
) -> GridSolution:
    """Minimise the discrete Dirichlet energy by Jacobi-preconditioned conjugate gradients.

    Stops once the energy gradient, relative to its value at ``u = 0``, is
    below ``tol``.  The energy after every iteration is kept in
    ``energy_trace``.
    """
    t0 = time.perf_counter()
    a_val = params.a if params is not None else 1.0
    mat, b = system.matrix, system.rhs
    scale = 2.0 * math.pi * abs(a_val) * system.grid.hx * system.grid.hy
    u = np.zeros_like(b) if start is None else system.gather(start).astype(float).copy()
    e0 = dirichlet_energy(system.scatter(u), system.grid, a=a_val)
    diag_inv = 1.0 / mat.diagonal()
    r = b - mat @ u
    trace = [e0]
    b_norm = max(np.linalg.norm(b), 1e-300)
    z = diag_inv * r
    d = z.copy()
    rz = r @ z
    it = 0
    while np.linalg.norm(r) > tol * b_norm:
        if it >= max_iter:
            raise SolverError(f"variational solve hit the iteration cap ({max_iter})")
        ad = mat @ d
        step = rz / (d @ ad)
        u += step * d
        r -= step * ad
        # exact energy change of the step: -(scale/2) * step * r.z
        trace.append(trace[-1] - 0.5 * scale * step * rz)
        z = diag_inv * r
        rz_new = r @ z
        d = z + (rz_new / rz) * d
        rz = rz_new
        it += 1
    return _finish(system, u, "variational", it, t0, trace)


# -- comparison solutions and the complex PDE ------------------------------------


def comparison_u0(x, y):
    return -0.5 * np.log(x * x + y * y) + 0.5 * np.log(1.0 - y * y)


def comparison_v0(x, y):
    return -0.5 * np.log(x * x + y * y) + 0.5 * np.log(1.0 + x * x)


def _d1(f, x, y, h, axis):
    sx, sy = (h, 0.0) if axis == 0 else (0.0, h)
    return (-f(x + 2 * sx, y + 2 * sy) + 8 * f(x + sx, y + sy) - 8 * f(x - sx, y - sy) + f(x - 2 * sx, y - 2 * sy)) / (12 * h)


def _d2(f, x, y, h, axis):
    sx, sy = (h, 0.0) if axis == 0 else (0.0, h)
    return (
        -f(x + 2 * sx, y + 2 * sy) + 16 * f(x + sx, y + sy) - 30 * f(x, y)
        + 16 * f(x - sx, y - sy) - f(x - 2 * sx, y - 2 * sy)
    ) / (12 * h * h)


def half_disk_samples(kind: str, r_range=(0.1, 0.4), n_radii: int = 16, n_angles: int = 33):
    """Polar sample grid on the punctured half-disk inside the problem's domain."""
    radii = np.linspace(*r_range, n_radii)
    if kind == "U0":
        angles = np.linspace(-0.5 * math.pi, 0.5 * math.pi, n_angles)[1:-1]
    else:
        angles = np.linspace(0.0, math.pi, n_angles)[1:-1]
    rr, aa = np.meshgrid(radii, angles)
    return rr * np.cos(aa), rr * np.sin(aa)


def comparison_solution_residual(kind: str, h: float = 1e-3, r_range=(0.1, 0.4), samples=None) -> float:
    """Max ``|L U0|`` or ``|L' V0|`` by fourth-order central differences on a half-disk.

    ``L U = (1 + x^2) U_xx + d_y((1 - y^2) U_y)`` and
    ``L' V = d_x((1 + x^2) V_x) + (1 - y^2) V_yy``, expanded to non-divergence form.
    """
    x, y = samples if samples is not None else half_disk_samples(kind, r_range)
    if kind == "U0":
        f = comparison_u0
        res = (1 + x * x) * _d2(f, x, y, h, 0) + (1 - y * y) * _d2(f, x, y, h, 1) - 2 * y * _d1(f, x, y, h, 1)
    elif kind == "V0":
        f = comparison_v0
        res = (1 + x * x) * _d2(f, x, y, h, 0) + 2 * x * _d1(f, x, y, h, 0) + (1 - y * y) * _d2(f, x, y, h, 1)
    else:
        raise ValueError("kind must be 'U0' or 'V0'")
    return float(np.max(np.abs(res)))


@dataclass(frozen=True)
class ComplexCandidate:
    """A function ``Phi(z, conj z)`` given through its Wirtinger partials."""

    d_z: Callable[[complex], complex]
    d_zbar: Callable[[complex], complex]
    d_zz: Callable[[complex], complex]
    d_zbar_zbar: Callable[[complex], complex]
    d_z_zbar: Callable[[complex], complex]

    @classmethod
    def meromorphic_pole(cls, c: complex = 1.0) -> "ComplexCandidate":
        """``Phi = c / z``."""
        zero = lambda z: 0j
        return cls(lambda z: -c / z**2, zero, lambda z: 2 * c / z**3, zero, zero)

    @classmethod
    def antimeromorphic_pole(cls, c: complex = 1.0) -> "ComplexCandidate":
        """``Phi = c / conj(z)``."""
        zero = lambda z: 0j
        return cls(zero, lambda z: -c / z.conjugate() ** 2, zero, lambda z: 2 * c / z.conjugate() ** 3, zero)

    @classmethod
    def identity(cls) -> "ComplexCandidate":
        zero = lambda z: 0j
        return cls(lambda z: 1 + 0j, zero, zero, zero, zero)


def complex_pde_operator(cand: ComplexCandidate, z: complex) -> complex:
    if z == 0:
        raise ValueError("the operator is singular at z = 0")
    zb = z.conjugate()
    return (
        abs(z) ** 2 * (cand.d_zz(z) + cand.d_zbar_zbar(z))
        + (4 + z * z + zb * zb) * cand.d_z_zbar(z)
        + 2 * (z * cand.d_zbar(z) + zb * cand.d_z(z))
    )


def complex_pde_residual(cand: ComplexCandidate, samples, expected: Callable | None = None) -> float:
    """Max ``|operator(Phi) - expected|`` over the samples (``expected`` defaults to 0)."""
    worst = 0.0
    for z in samples:
        target = expected(z) if expected is not None else 0.0
        worst = max(worst, abs(complex_pde_operator(cand, complex(z)) - target))
    return worst


def strip_samples(n: int, rng: np.random.Generator, x_half: float = 5.0, r_min: float = 0.1):
    """Uniform samples of the strip ``|Im z| <= 1``, ``|Re z| <= x_half``, ``|z| >= r_min``."""
    out = []
    while len(out) < n:
        z = complex(rng.uniform(-x_half, x_half), rng.uniform(-1.0, 1.0))
        if abs(z) >= r_min:
            out.append(z)
    return out


# -- refinement studies ----------------------------------------------------------


@dataclass(frozen=True)
class ConvergenceReport:
    kind: str
    mode: str
    spacings: tuple[float, ...]
    errors: tuple[float, ...]
    orders: tuple[float, ...]
    parameter: str = "h"

    def min_order(self) -> float:
        return min(self.orders)


def observed_orders(sizes, errors):
    """``log(e_i / e_{i+1}) / log(s_i / s_{i+1})``; equals log2 ratios for halving."""
    return tuple(
        math.log(errors[i] / errors[i + 1]) / math.log(sizes[i] / sizes[i + 1])
        for i in range(len(errors) - 1)
    )


def solve_problem(kind: str, grid: StripGrid, boundary: BoundarySpec) -> GridSolution:
    return solve_direct(assemble(kind, grid, boundary))


def convergence_study(
    kind: str,
    spacings=(1 / 32, 1 / 64, 1 / 128),
    mode: str = "oracle",
    x_max: float = 4.0,
    eps_in: float = 0.25,
) -> ConvergenceReport:
    """Nodal L-infinity error against the closed form over a sequence of mesh widths."""
    if len(spacings) < 3:
        raise InsufficientGridsError("insufficient grids for order estimate (need at least 3)")
    domain = "electric" if kind == "electric" else "magnetic"
    boundary = BoundarySpec.oracle(kind) if mode == "oracle" else BoundarySpec.asymptotic(kind, domain)
    errors = []
    for h in spacings:
        grid = StripGrid.from_spacing(domain, x_max, eps_in, h)
        errors.append(solve_problem(kind, grid, boundary).linf_error_vs_reference)
    return ConvergenceReport(kind, mode, tuple(spacings), tuple(errors), observed_orders(spacings, errors))
