"""Named numerical checks run by ``zgkn verify`` and ``zgkn solve``.

Every check returns a :class:`CheckResult` carrying its value, tolerance and a
short descriptive anchor.  Randomised checks draw from a generator seeded by
the run seed and the check's fixed position, so results do not depend on the
order or concurrency with which checks are executed.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from . import charts, emfields, ernst, metric, pdesolver
from .charts import SpacetimeParams, SpheroidalPoint, TildePoint

# the kappa > 0 fixture: hyperextremal with p^2 = 7
KN_FIXTURE = SpacetimeParams(q=1.0, m=1.0, a=3.0, kappa=2.0)
CAUSALITY_FIXTURE = SpacetimeParams(q=1.0, m=0.0, a=1.0, kappa=2.0)
# area-identity samples keep Sigma >= AREA_COLLAR a^2; closer to the ring
# the cancellation in X V + W^2 exceeds the 1e-13 budget
AREA_COLLAR = 0.1


@dataclass(frozen=True)
class CheckResult:
    name: str
    criterion: int
    value: float
    tolerance: float
    passed: bool
    anchor: str
    detail: str = ""

    def as_dict(self) -> dict:
        d = asdict(self)
        d["value"] = float(d["value"])
        d["tolerance"] = float(d["tolerance"])
        return d


def _le(name, crit, value, tol, anchor, detail=""):
    return CheckResult(name, crit, float(value), float(tol), bool(value <= tol), anchor, detail)


def _rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, index])


def _admissible_samples(rng, params, n, r_span=5.0, collar=metric.RING_COLLAR):
    a_sq = params.a**2
    r_out, t_out = [], []
    while len(r_out) < n:
        r = rng.uniform(-r_span * abs(params.a), r_span * abs(params.a))
        t = rng.uniform(0.0, math.pi)
        if r * r + a_sq * math.cos(t) ** 2 >= collar * a_sq:
            r_out.append(r)
            t_out.append(t)
    return np.array(r_out), np.array(t_out)


# -- individual checks --------------------------------------------------------


def check_flatness_spheroidal(params, seed):
    m = metric.chart_metric("spheroidal", params.zero_g())
    val = metric.curvature_scan(m, ((0.5, 3.0), (0.2, math.pi - 0.2)), 1e-3)
    return _le("flatness_spheroidal", 1, val, 1e-4, "zero-G metric is a pullback of flat space")


def check_flatness_weyl(params, seed):
    m = metric.chart_metric("weyl", params.zero_g())
    val = metric.curvature_scan(m, ((0.1, 3.0), (-2.0, 2.0)), 1e-2)
    return _le("flatness_weyl", 1, val, 1e-10, "Weyl chart carries the Minkowski metric")


def check_conical_ring(params, seed):
    p0 = params.zero_g()
    worst = 0.0
    ok = True
    for eps in (1e-2, 1e-3):
        dev = abs(metric.conical_ratio(eps, p0) - 4 * math.pi)
        ok &= dev <= 5 * eps * 4 * math.pi
        worst = max(worst, dev / (5 * eps * 4 * math.pi))
    return CheckResult("conical_ratio_ring", 2, worst, 1.0, bool(ok), "ring loop ratio equals 4 pi",
                       "value is max |ratio - 4 pi| / (5 eps 4 pi) over eps in {1e-2, 1e-3}")


def check_conical_control(params, seed):
    dev = abs(metric.conical_ratio(1e-4, params.zero_g(), SpheroidalPoint(1.0, 0.8)) - 2 * math.pi)
    return _le("conical_ratio_control", 2, dev, 1e-6, "smooth point ratio equals 2 pi")


def check_area_identity(params, seed):
    worst = 0.0
    for k, par in enumerate((params.zero_g(), KN_FIXTURE)):
        rng = _rng(seed, 30 + k)
        r, t = _admissible_samples(rng, par, 10_000, collar=AREA_COLLAR)
        x, v, w = metric.orbit_metric(r, t, par)
        delta = r * r - 2 * par.kappa * par.m * r + par.kappa * par.q**2 + par.a**2
        worst = max(worst, float(np.max(np.abs(x * v + w * w - delta * np.sin(t) ** 2) / (1 + delta))))
    return _le("area_identity", 3, worst, 1e-13, "group-orbit area element is rho",
               "value is max |XV + W^2 - Delta sin^2| / (1 + Delta), kappa in {0, 2}")


def check_ernst_line(params, seed):
    rng = _rng(seed, 40)
    worst = 0.0
    for par in (KN_FIXTURE, params):
        if par.q == 0:
            continue
        r, t = _admissible_samples(rng, par, 5_000)
        for ri, ti in zip(r, t):
            worst = max(worst, abs(ernst.complex_line_residual(ernst.ernst_kn(ri, ti, par), par)))
    return _le("ernst_complex_line", 4, worst, 1e-14, "KN Ernst image lies in a complex line")


def check_potential_symmetries(params, seed):
    p0 = params.zero_g()
    src = emfields.SourceStrengths.canonical(p0)
    rng = _rng(seed, 50)
    r = rng.uniform(-5, 5, 10_000) * abs(p0.a)
    y = np.cos(rng.uniform(0, math.pi, 10_000))
    keep = r * r + p0.a**2 * y * y > 0
    r, y = r[keep], y[keep]
    phi, psi = emfields.potentials_ry(r, y, src, p0.a)
    phi_t, psi_t = emfields.potentials_ry(-r, -y, src, p0.a)
    phi_s, psi_s = emfields.potentials_ry(r, -y, src, p0.a)
    worst = max(
        np.max(np.abs(phi_t + phi)), np.max(np.abs(psi_t + psi)),
        np.max(np.abs(phi_s - phi)), np.max(np.abs(psi_s + psi)),
    )
    return _le("potential_parities", 5, worst, 1e-15, "potentials are odd under the sheet swap")


def _random_pair(rng, kappa=2.0):
    phi = complex(rng.normal(), rng.normal())
    e = complex(0.5 * kappa * abs(phi) ** 2 + rng.uniform(0.1, 2.0), rng.normal())
    return ernst.ErnstPair(e, phi)


def involutive_generators(rng, n_pairs=50):
    """Names of the generators whose square is the identity on random pairs."""
    Sym = ernst.SymmetryElement
    gens = {
        "translation": Sym.translation(complex(rng.normal(), rng.normal()), rng.normal()),
        "scaling": Sym.scaling(rng.uniform(0.2, 1.0)),
        "rotation": Sym.rotation(rng.uniform(0.2, 3.0)),
        "inverted_translation": Sym.inverted_translation(complex(rng.normal(), rng.normal()), rng.normal()),
        "rotation_pi": Sym.rotation(math.pi),
        "conjugation": Sym.conjugation(),
    }
    pairs = [_random_pair(rng) for _ in range(n_pairs)]
    out = []
    for name, g in gens.items():
        ok = True
        for p in pairs:
            q = ernst.apply_symmetry(g, ernst.apply_symmetry(g, p))
            scale = 1 + abs(p.e_pot) + abs(p.phi_pot)
            ok &= abs(q.e_pot - p.e_pot) <= 1e-12 * scale and abs(q.phi_pot - p.phi_pot) <= 1e-12 * scale
        if ok:
            out.append(name)
    return sorted(out)


def check_involutions(params, seed):
    found = involutive_generators(_rng(seed, 51))
    ok = found == ["conjugation", "rotation_pi"]
    return CheckResult("involutive_generators", 5, float(len(found)), 2.0, ok,
                       "only conjugation and the rotation by pi are involutive", ",".join(found))


def check_complex_pde(params, seed):
    zs = pdesolver.strip_samples(1000, _rng(seed, 60))
    cand = pdesolver.ComplexCandidate
    worst = max(
        pdesolver.complex_pde_residual(cand.meromorphic_pole(), zs),
        pdesolver.complex_pde_residual(cand.antimeromorphic_pole(), zs),
        pdesolver.complex_pde_residual(cand.identity(), zs, expected=lambda z: 2 * z.conjugate()),
    )
    return _le("complex_pde", 6, worst, 1e-13, "1/z is the meromorphic solution")


def check_comparison(params, seed):
    res_u = pdesolver.comparison_solution_residual("U0")
    res_v = pdesolver.comparison_solution_residual("V0")
    x, y = pdesolver.half_disk_samples("U0", (1e-3, 0.5), 40, 41)
    nonneg = bool(np.all(pdesolver.comparison_u0(x, y) >= 0))
    val = max(res_u, res_v)
    return CheckResult("comparison_solutions", 8, val, 1e-4, bool(val <= 1e-4 and nonneg),
                       "U0 is a nonnegative solution of LU = 0", f"U0 >= 0 on half-disk: {nonneg}")


def check_blowup(params, seed):
    p0 = params.zero_g()
    src = emfields.SourceStrengths.canonical(p0)
    dev = max(
        abs(emfields.blowup_exponent(src, p0, "in_plane_weyl") + 0.5),
        abs(emfields.blowup_exponent(src, p0, "generic_ring_coord") + 1.0),
        abs(emfields.blowup_exponent(src, p0, "far_field") + 1.0),
    )
    return _le("blowup_exponents", 9, dev, 0.02, "sesqui-polar blow-up at the ring",
               "value is max |fitted - expected| exponent")


def check_dipole(params, seed):
    p0 = params.zero_g()
    src = emfields.SourceStrengths.canonical(p0)
    rel = abs(emfields.dipole_moment_estimate(src, p0) - p0.q * p0.a) / abs(p0.q * p0.a)
    return _le("dipole_moment", 9, rel, 0.01, "magnetic dipole of strength q a")


def check_critical_points(params, seed):
    p0 = params.zero_g()
    pts = emfields.find_axis_critical_points(emfields.SourceStrengths.canonical(p0), p0)
    targets = sorted([(s * abs(p0.a), t) for s in (-1, 1) for t in (0.0, math.pi)])
    got = sorted((c.location.r, c.location.theta) for c in pts)
    if len(got) != 4:
        return CheckResult("axis_critical_points", 10, float(len(got)), 4.0, False,
                           "four axis saddle points", "wrong count")
    dev = max(abs(g[0] - t[0]) for g, t in zip(got, targets))
    saddles = all(c.kind == "saddle" for c in pts)
    return CheckResult("axis_critical_points", 10, dev, 1e-8, bool(dev <= 1e-8 and saddles),
                       "four axis saddle points", f"all saddles: {saddles}")


def check_schrodinger(params, seed):
    a = params.a
    rt = np.linspace(0.5, 5.0, 91) * abs(a)
    dev = float(np.max(np.abs(emfields.schrodinger_potential_fd(rt, a) - emfields.schrodinger_potential(rt, a))))
    src = emfields.SourceStrengths.canonical(params.zero_g())
    r1 = emfields.schrodinger_residual(src, params.zero_g(), h=2e-3)
    r2 = emfields.schrodinger_residual(src, params.zero_g(), h=1e-3)
    order = math.log2(r1 / r2)
    return CheckResult("schrodinger_form", 11, dev, 1e-6, bool(dev <= 1e-6 and order >= 1.8),
                       "radial potential is smooth and positive",
                       f"w-equation residual {r2:.3e} at h=1e-3, observed order {order:.2f}")


def check_causality(params, seed):
    roots = metric.causality_surface(CAUSALITY_FIXTURE, math.pi / 2)
    dev = min((abs(r - 1.0) for r in roots), default=math.inf)
    p0 = params.zero_g()
    none_at_zero_g = all(not metric.causality_surface(p0, t) for t in np.linspace(0.1, 3.0, 12))
    x_ring, _, _ = metric.orbit_metric(0.0, math.pi / 2, SpacetimeParams(p0.q, p0.m, p0.a, 0.0))
    ring_ok = abs(x_ring - p0.a**2) <= 1e-15 * p0.a**2
    return CheckResult("causality_surface", 12, dev, 1e-10, bool(dev <= 1e-10 and none_at_zero_g and ring_ok),
                       "causality limit surface; X equals a^2 on the zero-G ring",
                       f"no roots at kappa=0: {none_at_zero_g}; X(ring) = {x_ring!r}")


def seed_points(params, n_per_sheet, radius=0.3):
    """Start points on a circle around the ring image in each sheet."""
    p0 = params.zero_g()
    pts = []
    for sheet in (1, -1):
        for k in range(n_per_sheet):
            alpha = 2 * math.pi * (k + 0.5) / n_per_sheet
            rho = p0.rho0 + radius * abs(p0.a) * math.cos(alpha)
            z = radius * abs(p0.a) * math.sin(alpha)
            pts.append(charts.WeylSheetPoint(abs(rho), z, sheet))
    return pts


def field_line_contract(line: emfields.FieldLine, params, src, kind="electric"):
    """(monotone potential, crossings inside the disk, every sheet change recorded)."""
    p0 = params.zero_g()
    vals = [emfields.potentials(s, src, p0) for s in line.samples]
    series = np.array([v.phi_e if kind == "electric" else v.psi_m for v in vals])
    monotone = bool(np.all(np.diff(series) < 0)) if kind == "electric" else True
    in_disk = all(c[0] < p0.rho0 for c in line.crossings)
    changes = sum(1 for s0, s1 in zip(line.samples, line.samples[1:]) if s0.sheet != s1.sheet)
    return monotone, in_disk, changes == len(line.crossings)


def check_field_lines(params, seed):
    p0 = params.zero_g()
    src = emfields.SourceStrengths.canonical(p0)
    seeds = seed_points(p0, 50)
    bad = 0
    crossings = 0
    for s in seeds:
        line = emfields.trace_field_line(s, "electric", src, p0)
        mono, disk, recorded = field_line_contract(line, p0, src)
        bad += not (mono and disk and recorded)
        crossings += len(line.crossings)
    rng = _rng(seed, 130)
    norm_dev = 0.0
    for _ in range(500):
        w = charts.WeylSheetPoint(rng.uniform(0.05, 3), rng.uniform(-2, 2), int(rng.choice([-1, 1])))
        for kind in emfields.FIELD_KINDS:
            t = emfields.unit_tangent_field(w, kind, src, p0)
            norm_dev = max(norm_dev, abs(math.hypot(*t) - 1.0))
    return CheckResult("field_line_contract", 13, float(bad), 0.0, bool(bad == 0 and norm_dev <= 1e-12),
                       "unit tangent fields of the lines of force",
                       f"{len(seeds)} lines, {crossings} disk crossings, tangent norm deviation {norm_dev:.2e}")


def check_harmonicity(params, seed):
    p0 = params.zero_g()
    val = emfields.harmonicity_residual(emfields.SourceStrengths.canonical(p0), p0)
    return _le("harmonicity", 0, val, 1e-5, "potentials are flat-harmonic",
               "not an acceptance criterion; second-order truncation limited")


VERIFY_CHECKS: list[Callable] = [
    check_flatness_spheroidal,
    check_flatness_weyl,
    check_conical_ring,
    check_conical_control,
    check_area_identity,
    check_ernst_line,
    check_potential_symmetries,
    check_involutions,
    check_complex_pde,
    check_comparison,
    check_blowup,
    check_dipole,
    check_critical_points,
    check_schrodinger,
    check_causality,
    check_field_lines,
    check_harmonicity,
]


# -- solver checks (criterion 7) -----------------------------------------------

ASYMPTOTIC_EPS = (1e-1, 3e-2, 1e-2)
ASYMPTOTIC_H = 1 / 256
ASYMPTOTIC_X_MAX = 20.0
OBSERVATION_RADIUS = 0.5


def constant_remainder(x, y):
    """Bounded stand-in for the unspecified ``o(1/R)`` part of the blow-up profile."""
    return np.ones_like(x)


def asymptotic_sweep(kind, eps_values=ASYMPTOTIC_EPS, h=ASYMPTOTIC_H, x_max=ASYMPTOTIC_X_MAX,
                     r_obs=OBSERVATION_RADIUS, remainder=constant_remainder):
    """Window error of asymptotic-data solves along a decreasing excision radius."""
    domain = "electric" if kind == "electric" else "magnetic"
    bnd = pdesolver.BoundarySpec.asymptotic(kind, domain, remainder)
    errors = []
    for eps in eps_values:
        grid = pdesolver.StripGrid.from_spacing(domain, x_max, eps, h)
        errors.append(pdesolver.solve_problem(kind, grid, bnd).linf_error_in_window(r_obs))
    return errors


def check_oracle_convergence(kind, spacings):
    try:
        rep = pdesolver.convergence_study(kind, spacings)
    except pdesolver.InsufficientGridsError as exc:
        return CheckResult(f"oracle_order_{kind}", 7, math.nan, 1.8, False, "the data pin down the solution", str(exc))
    return CheckResult(f"oracle_order_{kind}", 7, rep.min_order(), 1.8, bool(rep.min_order() >= 1.8),
                       "the data pin down the solution",
                       "errors " + ", ".join(f"{e:.3e}" for e in rep.errors))


def check_variational(kind, h=1 / 64, x_max=4.0, eps_in=0.25):
    domain = "electric" if kind == "electric" else "magnetic"
    grid = pdesolver.StripGrid.from_spacing(domain, x_max, eps_in, h)
    system = pdesolver.assemble(kind, grid, pdesolver.BoundarySpec.oracle(kind))
    direct = pdesolver.solve_direct(system)
    var = pdesolver.solve_variational(system)
    dev = float(np.max(np.abs(var.values - direct.values)))
    return _le(f"variational_agreement_{kind}", 7, dev, 1e-8, "critical point of the Dirichlet energy",
               f"{var.iterations} iterations")


def check_asymptotic(kind, **kw):
    errs = asymptotic_sweep(kind, **kw)
    decreasing = all(e1 < e0 for e0, e1 in zip(errs, errs[1:]))
    return CheckResult(f"asymptotic_sweep_{kind}", 7, errs[-1], errs[0], bool(decreasing),
                       "uniqueness: the data pin down the solution",
                       "window errors " + ", ".join(f"{e:.4e}" for e in errs))
