"""Command-line front end: single runs, convergence studies and CSV output.

Examples::

    hweno-bench --problem lax --nx 200 --dump-solution --dump-troubled
    hweno-bench --problem burgers1d --convergence 10,20,40,80,160,320
"""

import argparse
import csv
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import problems
from .problems import OracleError
from .rhs import MODES
from .timeloop import DT_POLICIES, SimulationAborted, TimeConfig, run

WORKERS_ENV = "HWENO_WORKERS"
CONVERGENCE_HEADER = "N,L1,L1_order,Linf,Linf_order,troubled_fraction,wall_seconds"
HISTORY_HEADER = "step,stage,time,flagged_count,flagged_fraction"


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    problem: str
    nx: Optional[int] = None
    ny: Optional[int] = None
    scheme: str = "hybrid"
    cfl: Optional[float] = None
    t_end: Optional[float] = None
    dt_policy: str = "cfl"
    fixed_dt: Optional[float] = None
    out: str = "out"
    dump_solution: bool = False
    dump_troubled: Optional[str] = None  # None, "summary" or "full"
    dump_timings: bool = False
    workers: int = 1
    convergence: Optional[tuple] = None

    def __post_init__(self):
        if self.problem not in problems.CATALOG:
            raise ConfigError(f"unknown problem {self.problem!r}; choose from {', '.join(problems.CATALOG)}")
        for key in ("nx", "ny", "workers"):
            v = getattr(self, key)
            if v is not None and v <= 0:
                raise ConfigError(f"{key} must be positive, got {v}")
        if self.convergence is not None and any(n <= 0 for n in self.convergence):
            raise ConfigError("convergence resolutions must be positive")


@dataclass
class ConvergenceRow:
    N: str
    L1: float
    L1_order: Optional[float]
    Linf: float
    Linf_order: Optional[float]
    troubled_fraction: float
    wall_seconds: float


# ----------------------------------------------------------------- parsing


def _positive_int(text):
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _positive_float(text):
    v = float(text)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be a positive number, got {text}")
    return v


def _int_list(text):
    try:
        vals = tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or any(v <= 0 for v in vals):
        raise argparse.ArgumentTypeError(f"expected positive resolutions, got {text!r}")
    return vals


def build_parser():
    p = argparse.ArgumentParser(prog="hweno-bench", description="Hybrid HWENO benchmark runner")
    p.add_argument("--config", help="key=value file; command-line flags override it")
    p.add_argument("--problem", choices=list(problems.CATALOG))
    p.add_argument("--nx", type=_positive_int)
    p.add_argument("--ny", type=_positive_int)
    p.add_argument("--scheme", choices=MODES, default="hybrid")
    p.add_argument("--cfl", type=_positive_float)
    p.add_argument("--t-end", type=float)
    p.add_argument("--dt-policy", choices=DT_POLICIES, default=None)
    p.add_argument("--fixed-dt", type=_positive_float)
    p.add_argument("--out", default="out")
    p.add_argument("--dump-solution", action="store_true")
    p.add_argument("--dump-troubled", nargs="?", const="summary", choices=("summary", "full"))
    p.add_argument("--dump-timings", action="store_true")
    p.add_argument("--workers", type=_positive_int)
    p.add_argument("--convergence", type=_int_list, metavar="N1,N2,...")
    return p


def read_config_file(path):
    """Turn a key=value file into argv tokens (flags that take no value accept true/false)."""
    tokens = []
    flags_without_value = {"dump-solution", "dump-timings"}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("_", "-")
            if key == "config":
                raise ConfigError(f"{path}:{lineno}: nested config files are not supported")
            if key in flags_without_value:
                if value.lower() in ("1", "true", "yes", "on"):
                    tokens.append(f"--{key}")
                elif value.lower() not in ("0", "false", "no", "off"):
                    raise ConfigError(f"{path}:{lineno}: {key} expects true/false, got {value!r}")
            else:
                tokens.append(f"--{key}={value}")
    return tokens


def parse_config(argv=None):
    """Parse CLI arguments (and an optional config file) into a RunConfig.

    Errors name the offending flag and exit with status 2.
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    first = parser.parse_args(argv)
    if first.config:
        try:
            file_tokens = read_config_file(first.config)
        except (OSError, ConfigError) as exc:
            parser.error(str(exc))
        args = parser.parse_args(file_tokens + argv)
    else:
        args = first
    if args.problem is None:
        parser.error("--problem is required")
    workers = args.workers
    if workers is None:
        env = os.environ.get(WORKERS_ENV)
        try:
            workers = int(env) if env else 1
        except ValueError:
            parser.error(f"{WORKERS_ENV} must be an integer, got {env!r}")
    dt_policy = args.dt_policy or ("accuracy" if args.convergence else "cfl")
    if args.fixed_dt is not None and args.dt_policy is None:
        dt_policy = "fixed"
    try:
        return RunConfig(
            problem=args.problem, nx=args.nx, ny=args.ny, scheme=args.scheme, cfl=args.cfl,
            t_end=args.t_end, dt_policy=dt_policy, fixed_dt=args.fixed_dt, out=args.out,
            dump_solution=args.dump_solution, dump_troubled=args.dump_troubled,
            dump_timings=args.dump_timings, workers=max(1, workers), convergence=args.convergence,
        )
    except ConfigError as exc:
        parser.error(str(exc))


# ------------------------------------------------------------------ running


def run_problem(p, nx=None, ny=None, mode="hybrid", cfl=None, t_end=None, dt_policy="cfl",
                fixed_dt=None, cell_log=None, **time_kw):
    """Build mesh, initial data and boundaries for preset ``p`` and run it."""
    mesh = p.build_mesh(nx, ny)
    field = problems.initial_field(p, mesh)
    bc = p.boundary(mesh)
    obstacle = p.obstacle(bc) if p.obstacle is not None else None
    post = None
    if p.post_stage is not None:
        def post(f):
            p.post_stage(f, mesh, obstacle)
    config = TimeConfig(t_end=p.t_end if t_end is None else t_end, cfl=cfl, dt_policy=dt_policy,
                        fixed_dt=fixed_dt, **time_kw)
    result = run(field, p.physics, bc, config, mode, obstacle=obstacle, post_stage=post,
                 cell_log=cell_log)
    result.extras["mesh"] = mesh
    return result


def _convergence_case(args):
    name, n, mode, cfl, t_end = args
    p = problems.preset(name)
    result = run_problem(p, n, None, mode, cfl, t_end, "accuracy")
    L1, Linf = problems.error_norms(result.field, p, result.t)
    mesh = result.extras["mesh"]
    label = str(mesh.n) if p.ndim == 1 else f"{mesh.nx}x{mesh.ny}"
    return label, n, L1, Linf, result.mean_troubled_fraction, result.wall_seconds


def _round6(v):
    return float(f"{v:.5e}")


def convergence_rows(results):
    """Rows with errors rounded as written, so orders match the CSV's own columns."""
    rows = []
    prev = None
    for label, n, L1, Linf, frac, wall in results:
        L1, Linf = _round6(L1), _round6(Linf)
        if prev is None:
            o1 = oi = None
        else:
            r = math.log(n / prev[0])
            o1 = math.log(prev[1] / L1) / r if L1 > 0 and prev[1] > 0 else None
            oi = math.log(prev[2] / Linf) / r if Linf > 0 and prev[2] > 0 else None
        rows.append(ConvergenceRow(label, L1, o1, Linf, oi, frac, wall))
        prev = (n, L1, Linf)
    return rows


def run_convergence(config):
    """Run every resolution of ``config.convergence`` and write convergence.csv."""
    p = problems.preset(config.problem)
    if p.exact is None:
        raise OracleError(f"problem {config.problem!r} has no exact solution; convergence study refused")
    ns = sorted(config.convergence)
    jobs = [(config.problem, n, config.scheme, config.cfl, config.t_end) for n in ns]
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_convergence_case, jobs))
    else:
        results = [_convergence_case(j) for j in jobs]
    rows = convergence_rows(results)
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    write_convergence_csv(rows, out / "convergence.csv")
    return rows


def _sci(v):
    return "" if v is None else f"{v:.5e}"


def write_convergence_csv(rows, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(CONVERGENCE_HEADER + "\n")
        for r in rows:
            fh.write(",".join([r.N, _sci(r.L1), _sci(r.L1_order), _sci(r.Linf), _sci(r.Linf_order),
                               _sci(r.troubled_fraction), _sci(r.wall_seconds)]) + "\n")


def _g17(v):
    return f"{v:.17g}"


def dump_solution(field, mesh, path, var_names=None):
    """One row per interior cell: centre coordinates, averages, then moments."""
    n_comp = field.n_comp
    names = list(var_names) if var_names is not None else [f"q{k}" for k in range(n_comp)]
    if field.ndim == 1:
        header = ["x"] + [f"{v}_avg" for v in names] + [f"{v}_mom" for v in names]
        coords = [mesh.centers]
    else:
        header = (["x", "y"] + [f"{v}_avg" for v in names] + [f"{v}_momx" for v in names]
                  + [f"{v}_momy" for v in names])
        X, Y = np.meshgrid(mesh.x_centers, mesh.y_centers, indexing="ij")
        coords = [X.ravel(), Y.ravel()]
    cols = list(coords)
    for k in range(field.q.shape[0]):
        inner = field.interior(k)
        cols += [inner[c].ravel() for c in range(n_comp)]
    data = np.column_stack(cols)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in data:
            fh.write(",".join(_g17(v) for v in row) + "\n")
    return path


def read_solution(path):
    """Inverse of dump_solution: (header, array)."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        rows = [[float(s) for s in line.split(",")] for line in fh if line.strip()]
    return header, np.array(rows, dtype=float).reshape(-1, len(header))


def dump_troubled_history(records, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HISTORY_HEADER.split(","))
        for step, stage, t, count, frac in records:
            w.writerow([step, stage, _g17(t), count, _g17(frac)])
    return path


def dump_troubled_cells(cells, path, ndim):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "time", "i"] if ndim == 1 else ["step", "time", "i", "j"])
        for step, t, idx in cells:
            for cell in idx:
                w.writerow([step, _g17(t), *cell])
    return path


def dump_timings(timings, wall, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("phase,seconds\n")
        for k in ("indicator", "limit", "reconstruct", "flux", "time-integration"):
            fh.write(f"{k},{timings.get(k, 0.0):.6e}\n")
        fh.write(f"wall,{wall:.6e}\n")
    return path


def run_single(config):
    p = problems.preset(config.problem)
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    cells = [] if config.dump_troubled == "full" else None
    result = run_problem(p, config.nx, config.ny, config.scheme, config.cfl, config.t_end,
                         config.dt_policy, config.fixed_dt, cell_log=cells)
    mesh = result.extras["mesh"]
    if config.dump_solution:
        dump_solution(result.field, mesh, out / "solution.csv", p.physics.var_names)
    if config.dump_troubled:
        dump_troubled_history(result.history, out / "troubled_history.csv")
        if cells is not None:
            dump_troubled_cells(cells, out / "troubled_cells.csv", p.ndim)
    if config.dump_timings:
        dump_timings(result.timings, result.wall_seconds, out / "timings.csv")
    return p, result


def main(argv=None):
    config = parse_config(argv)
    try:
        if config.convergence:
            rows = run_convergence(config)
            print(CONVERGENCE_HEADER)
            for r in rows:
                print(f"{r.N},{_sci(r.L1)},{_sci(r.L1_order)},{_sci(r.Linf)},{_sci(r.Linf_order)},"
                      f"{_sci(r.troubled_fraction)},{_sci(r.wall_seconds)}")
            return 0
        p, result = run_single(config)
    except OracleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SimulationAborted as exc:
        out = Path(config.out)
        out.mkdir(parents=True, exist_ok=True)
        dump_solution(exc.last_good, exc.last_good.mesh, out / "last_good.csv",
                      problems.preset(config.problem).physics.var_names)
        print(f"error: run aborted: {exc}; last good state written to {out / 'last_good.csv'}",
              file=sys.stderr)
        return 3
    mesh = result.extras["mesh"]
    res = str(mesh.n) if p.ndim == 1 else f"{mesh.nx}x{mesh.ny}"
    print(f"{p.name} N={res} scheme={config.scheme} steps={result.steps} t={result.t:.6g} "
          f"troubled={100 * result.mean_troubled_fraction:.2f}% wall={result.wall_seconds:.2f}s")
    if p.exact is not None:
        try:
            L1, Linf = problems.error_norms(result.field, p, result.t)
            print(f"L1={L1:.6e} Linf={Linf:.6e}")
        except OracleError:
            pass
    return 0


if __name__ == "__main__":
    sys.exit(main())
