"""Command-line front end: ``zgkn verify | fieldlines | solve | report``.

Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error,
3 runtime or I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import platform
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, emfields, pdesolver, suite
from .charts import ChartError, SpacetimeParams, WeylSheetPoint

SCHEMA_VERSION = 1
EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3

FIELDLINE_COLUMNS = ("rho", "z", "sheet", "arclength")
TANGENT_COLUMNS = ("kind", "rho", "z", "sheet", "t_rho", "t_z")
SOLUTION_COLUMNS = ("x", "y", "value")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GridSettings:
    nx: int | None = None
    ny: int | None = None
    x_max: float = 20.0
    eps_in: float = 1e-2
    spacings: tuple[float, ...] = (1 / 32, 1 / 64, 1 / 128)
    study_x_max: float = 4.0
    study_eps_in: float = 0.25
    sweep_eps: tuple[float, ...] = suite.ASYMPTOTIC_EPS
    sweep_h: float = suite.ASYMPTOTIC_H


@dataclass(frozen=True)
class TraceSettings:
    lines_per_sheet: int = 16
    seed_radius: float = 0.3
    max_step: float = 0.02
    max_steps: int = 20000
    boundary_radius: float = 8.0
    tangent_grid: int = 24


@dataclass(frozen=True)
class RunConfig:
    params: SpacetimeParams = SpacetimeParams()
    q_source: float | None = None
    i_source: float | None = None
    grid: GridSettings = GridSettings()
    trace: TraceSettings = TraceSettings()
    out: str = "zgkn_out"
    seed: int = 20240611

    def sources(self) -> emfields.SourceStrengths:
        canon = emfields.SourceStrengths.canonical(self.params)
        return emfields.SourceStrengths(
            canon.q_charge if self.q_source is None else self.q_source,
            canon.i_current if self.i_source is None else self.i_source,
        )

    def echo(self) -> dict:
        d = asdict(self)
        d["grid"]["spacings"] = list(self.grid.spacings)
        d["grid"]["sweep_eps"] = list(self.grid.sweep_eps)
        return d


def _build_params(d: dict) -> SpacetimeParams:
    try:
        return SpacetimeParams(**{k: float(d[k]) for k in ("q", "m", "a", "kappa") if k in d})
    except ChartError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | None, overrides: argparse.Namespace | None = None) -> RunConfig:
    raw: dict = {}
    if path:
        try:
            raw = json.loads(Path(path).read_text())
        except OSError as exc:
            raise OSError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    params = dict(raw.get("params", {}))
    grid = dict(raw.get("grid", {}))
    trace = dict(raw.get("trace", {}))
    top = {k: raw[k] for k in ("q_source", "i_source", "out", "seed") if k in raw}
    if overrides is not None:
        for flag in ("q", "m", "a", "kappa"):
            if getattr(overrides, flag, None) is not None:
                params[flag] = getattr(overrides, flag)
        if getattr(overrides, "grid", None):
            try:
                nx, ny = (int(v) for v in overrides.grid.split(","))
            except ValueError as exc:
                raise ConfigError("--grid expects NX,NY") from exc
            grid.update(nx=nx, ny=ny)
        if getattr(overrides, "xmax", None) is not None:
            grid["x_max"] = overrides.xmax
        if getattr(overrides, "eps_in", None) is not None:
            grid["eps_in"] = overrides.eps_in
        if getattr(overrides, "out", None):
            top["out"] = overrides.out
        if getattr(overrides, "seed", None) is not None:
            top["seed"] = overrides.seed
    for key in ("spacings", "sweep_eps"):
        if key in grid:
            grid[key] = tuple(float(v) for v in grid[key])
    try:
        cfg = RunConfig(
            params=_build_params(params),
            grid=GridSettings(**grid),
            trace=TraceSettings(**trace),
            **top,
        )
    except TypeError as exc:
        raise ConfigError(f"unknown configuration key: {exc}") from exc
    g = cfg.grid
    if (g.nx is None) != (g.ny is None) or (g.nx is not None and min(g.nx, g.ny) < 1):
        raise ConfigError("grid needs both nx and ny >= 1")
    if not 0 < g.eps_in < 0.5 < g.x_max:
        raise ConfigError("need 0 < eps_in < 1/2 < x_max")
    return cfg


# -- reports -------------------------------------------------------------------


@dataclass
class Report:
    command: str
    config: dict
    checks: list = field(default_factory=list)
    files: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def gating(self) -> list:
        # criterion 0 marks informational checks that never fail a run
        return [c for c in self.checks if c.criterion > 0]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.gating)

    def body(self) -> dict:
        names = [c.name for c in self.checks]
        if len(names) != len(set(names)):
            raise RuntimeError("duplicate check names in report")
        return {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "config": self.config,
            "checks": [c.as_dict() for c in self.checks],
            "files": sorted(self.files),
            "notes": self.notes,
            "summary": {
                "n_checks": len(self.gating),
                "n_failed": sum(not c.passed for c in self.gating),
                "n_informational": len(self.checks) - len(self.gating),
                "passed": self.passed,
            },
        }

    def to_json(self) -> str:
        doc = self.body()
        doc["environment"] = environment()
        return json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def environment() -> dict:
    return {
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "python": platform.python_version(),
        "platform": platform.platform(),
        "numpy": np.__version__,
        "zgkn": __version__,
    }


def atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(columns, rows, header: dict | None = None) -> str:
    buf = io.StringIO()
    if header is not None:
        buf.write("# " + json.dumps(_jsonable(header), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def read_csv(path: Path):
    """Parse a CSV written by this module: ``(header_json_or_None, columns, rows)``."""
    lines = Path(path).read_text().splitlines()
    header = None
    if lines and lines[0].startswith("# "):
        header = json.loads(lines[0][2:])
        lines = lines[1:]
    reader = csv.reader(lines)
    columns = next(reader)
    return header, columns, [row for row in reader]


def thread_cap() -> int:
    raw = os.environ.get("ZGKN_THREADS")
    if raw is None:
        return min(4, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError("ZGKN_THREADS must be a positive integer") from exc
    if n < 1:
        raise ConfigError("ZGKN_THREADS must be a positive integer")
    return n


def _run_checks(funcs, cfg: RunConfig):
    with ThreadPoolExecutor(max_workers=thread_cap()) as pool:
        futures = [pool.submit(f, cfg.params, cfg.seed) for f in funcs]
        return [f.result() for f in futures]


# -- subcommands ---------------------------------------------------------------


def run_verify(cfg: RunConfig) -> Report:
    report = Report("verify", cfg.echo())
    report.checks = _run_checks(suite.VERIFY_CHECKS, cfg)
    return report


def _trace_cfg(cfg: RunConfig, direction=1):
    t = cfg.trace
    return emfields.StepConfig(max_step=t.max_step, max_steps=t.max_steps,
                               boundary_radius=t.boundary_radius * abs(cfg.params.a), direction=direction)


def run_fieldlines(cfg: RunConfig) -> Report:
    params = cfg.params.zero_g()
    src = cfg.sources()
    out = Path(cfg.out) / "fieldlines"
    report = Report("fieldlines", cfg.echo())
    seeds = suite.seed_points(params, cfg.trace.lines_per_sheet, cfg.trace.seed_radius)

    def trace(job):
        kind, idx, start = job
        return kind, idx, start, emfields.trace_field_line(start, kind, src, params, _trace_cfg(cfg))

    jobs = [(kind, i, s) for kind in emfields.FIELD_KINDS for i, s in enumerate(seeds)]
    with ThreadPoolExecutor(max_workers=thread_cap()) as pool:
        results = list(pool.map(trace, jobs))

    bad, crossing_lines = [], 0
    for kind, idx, start, line in results:
        tag = "p" if start.sheet > 0 else "m"
        name = f"{kind}_{tag}{idx:03d}.csv"
        rows = [(s.rho, s.z_cyl, s.sheet, arc) for s, arc in zip(line.samples, line.arclength)]
        header = {"kind": kind, "termination": line.termination, "crossings": [list(c) for c in line.crossings]}
        atomic_write(out / name, _csv_text(FIELDLINE_COLUMNS, rows, header))
        report.files.append(str(Path("fieldlines") / name))
        monotone, in_disk, recorded = suite.field_line_contract(line, params, src, kind)
        crossing_lines += bool(line.crossings)
        if not (monotone and in_disk and recorded and line.termination in emfields.FieldLine.TAGS):
            bad.append(name)

    n = cfg.trace.tangent_grid
    rows, norm_dev = [], 0.0
    a = abs(params.a)
    for sheet in (1, -1):
        for rho in np.linspace(0.05 * a, 3 * a, n):
            for z in np.linspace(-2 * a, 2 * a, n):
                for kind in emfields.FIELD_KINDS:
                    try:
                        t = emfields.unit_tangent_field(WeylSheetPoint(rho, z, sheet), kind, src, params)
                    except (emfields.CriticalPointError, ValueError):
                        continue
                    norm_dev = max(norm_dev, abs(math.hypot(*t) - 1.0))
                    rows.append((kind, rho, z, sheet, t[0], t[1]))
    atomic_write(out / "tangents.csv", _csv_text(TANGENT_COLUMNS, rows))
    report.files.append(str(Path("fieldlines") / "tangents.csv"))

    report.checks = [
        suite.CheckResult("fieldline_contracts", 13, float(len(bad)), 0.0, not bad,
                          "unit tangent fields of the lines of force",
                          f"{len(results)} lines, {crossing_lines} cross the disk" + (f"; failing: {bad}" if bad else "")),
        suite.CheckResult("tangent_norms", 13, norm_dev, 1e-12, norm_dev <= 1e-12,
                          "unit tangent fields of the lines of force"),
    ]
    return report


def _solution_rows(sol: pdesolver.GridSolution):
    x, y = sol.grid.mesh()
    mask = sol.system.active
    return zip(x[mask], y[mask], sol.values[mask])


def run_solve(cfg: RunConfig) -> Report:
    report = Report("solve", cfg.echo())
    g = cfg.grid
    out = Path(cfg.out) / "solve"
    checks = []
    for kind in ("electric", "magnetic"):
        domain = "electric" if kind == "electric" else "magnetic"
        if g.nx is not None:
            # an explicit single grid replaces the refinement ladder
            try:
                grid = pdesolver.StripGrid(domain, g.x_max, g.eps_in, g.nx, g.ny)
            except ValueError as exc:
                raise ConfigError(f"{kind} grid: {exc}") from exc
            spacings = (grid.hx,)
        else:
            grid = pdesolver.StripGrid.from_spacing(domain, g.study_x_max, g.study_eps_in, g.spacings[-1])
            spacings = g.spacings
        checks.append(suite.check_oracle_convergence(kind, spacings))
        checks.append(suite.check_variational(kind))
        checks.append(suite.check_asymptotic(kind, eps_values=g.sweep_eps, h=g.sweep_h, x_max=g.x_max))
        if checks[-3].detail.startswith("insufficient"):
            report.notes.append(f"{kind}: insufficient grids for order estimate")
        for mode in ("oracle", "asymptotic"):
            bnd = pdesolver.BoundarySpec.oracle(kind) if mode == "oracle" else \
                pdesolver.BoundarySpec.asymptotic(kind, domain)
            sol = pdesolver.solve_problem(kind, grid, bnd)
            header = {
                "kind": kind, "mode": mode, "domain": grid.domain, "x_max": grid.x_max,
                "eps_in": grid.eps_in, "nx": grid.nx, "ny": grid.ny, "hx": grid.hx, "hy": grid.hy,
                "linf_error_vs_reference": sol.linf_error_vs_reference,
                "residual_norm": sol.residual_norm, "iterations": sol.iterations,
            }
            name = f"{kind}_{mode}.csv"
            atomic_write(out / name, _csv_text(SOLUTION_COLUMNS, _solution_rows(sol), header))
            report.files.append(str(Path("solve") / name))
    report.checks = checks
    return report


def print_summary(report_doc: dict, stream=sys.stdout):
    for c in report_doc["checks"]:
        status = "INFO" if c["criterion"] == 0 else ("PASS" if c["passed"] else "FAIL")
        print(f"{status}  [{c['criterion']:>2}] {c['name']:<32} value={c['value']!s:<24} tol={c['tolerance']}",
              file=stream)
    s = report_doc["summary"]
    print(f"{s['n_checks'] - s['n_failed']}/{s['n_checks']} checks passed", file=stream)


def run_report(out_dir: str) -> int:
    found = sorted(Path(out_dir).glob("*_report.json"))
    if not found:
        raise OSError(f"no reports found in {out_dir}")
    status = EXIT_OK
    for path in found:
        doc = json.loads(path.read_text())
        print(f"== {path.name} ({doc['command']}, schema {doc['schema_version']})")
        print_summary(doc)
        if not doc["summary"]["passed"]:
            status = EXIT_CHECK_FAILED
    return status


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON configuration file")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--seed", type=int, help="seed for randomised sweeps")
    common.add_argument("--kappa", type=float)
    common.add_argument("--a", type=float)
    common.add_argument("--q", type=float)
    common.add_argument("--m", type=float)
    common.add_argument("--grid", metavar="NX,NY", help="interior node counts for the single-grid solve")
    common.add_argument("--xmax", type=float, help="strip truncation abscissa")
    common.add_argument("--eps-in", dest="eps_in", type=float, help="excision radius around the ring")

    parser = argparse.ArgumentParser(prog="zgkn", description=(__doc__ or "").splitlines()[0])
    parser.add_argument("--version", action="version", version=f"zgkn {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="run the geometric and field checks")
    sub.add_parser("fieldlines", parents=[common], help="trace field lines and export CSV")
    sub.add_parser("solve", parents=[common], help="solve both strip problems and run the studies")
    sub.add_parser("report", parents=[common], help="summarise reports found in --out")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "report":
            return run_report(args.out or RunConfig().out)
        cfg = load_config(args.config, args)
        thread_cap()
        runner = {"verify": run_verify, "fieldlines": run_fieldlines, "solve": run_solve}[args.command]
        report = runner(cfg)
        path = Path(cfg.out) / f"{args.command}_report.json"
        atomic_write(path, report.to_json())
        print_summary(report.body())
        print(f"report written to {path}")
        return EXIT_OK if report.passed else EXIT_CHECK_FAILED
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, pdesolver.SolverError, RuntimeError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
