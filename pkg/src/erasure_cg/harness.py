"""Experiment runner: matrix acquisition, fault sampling, solve, recovery, reports.

Protocol defaults: right-hand side ``b = A x`` with ``x`` uniform in
(0, 1)^n, Gaussian encoding scaled by 1/sqrt(n), absolute stopping tolerance
1e-10 on the masked residual, at most 10 n iterations, and all ``k`` faults
injected together at the end of an iteration drawn from [1, 0.25 n].
"""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import os
import re
import statistics
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .encoding import build_encoded_system, gen_gaussian_encoding
from .faults import FaultPlan, build_topology, sample_fault_plan
from .mmio import read_array, read_matrix_market, write_array
from .recovery import RecoveredSolution, recover
from .rng import stream
from .solver import SolveTrace, SolverConfig, solve
from .sparse_core import CsrMatrix, gen_ltridiag

__all__ = [
    "ExperimentConfig",
    "ExperimentReport",
    "ConfigError",
    "resolve_matrix",
    "run_experiment",
    "run_table",
    "emit_figure_data",
    "write_run_outputs",
    "REPORT_HEADER",
]

REPORT_HEADER = ["matrix", "n", "k", "seed", "iterations", "converged",
                 "raw_rel_residual", "fault_point"]
MEDIAN_HEADER = ["matrix", "k", "runs", "median_iterations", "median_raw_rel_residual"]

DATA_ENV = "ERASURE_CG_DATA"
MATRIX_URLS = {
    "nos3": "https://sparse.tamu.edu/HB/nos3",
    "mhdb416": "https://sparse.tamu.edu/HB/mhdb416",
}
_LTRIDIAG = re.compile(r"^ltridiag:?(\d+)$", re.IGNORECASE)


class ConfigError(ValueError):
    """Invalid experiment configuration or missing input."""


@dataclass(frozen=True)
class ExperimentConfig:
    matrix: str = "ltridiag:500"
    k: int | None = None
    k_frac: float | None = None
    seed: int = 0
    rhs_seed: int | None = None
    tol: float = 1e-10
    max_iter_mult: float = 10.0
    fault_frac: float = 0.25
    rhs_file: str | None = None
    fault_plan: FaultPlan | None = None
    inject_faults: bool = True
    recompute_residual_on_fault: bool = True
    data_dir: str | None = None

    def __post_init__(self):
        if self.k is not None and self.k_frac is not None:
            raise ConfigError("give k or k_frac, not both")
        if self.k is not None and self.k < 0:
            raise ConfigError("k must be nonnegative")
        if self.k_frac is not None and not 0 <= self.k_frac <= 1:
            raise ConfigError("k_frac must lie in [0, 1]")
        if self.seed < 0 or (self.rhs_seed is not None and self.rhs_seed < 0):
            raise ConfigError("seeds must be nonnegative")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if not self.max_iter_mult > 0:
            raise ConfigError("max_iter_mult must be positive")
        if not 0 < self.fault_frac <= 1:
            raise ConfigError("fault_frac must lie in (0, 1]")

    def resolve_k(self, n):
        if self.k_frac is not None:
            k = int(math.floor(self.k_frac * n + 0.5))
        else:
            k = self.k or 0
        if k > n:
            raise ConfigError(f"k={k} exceeds n={n}")
        return k

    def max_iters(self, n):
        return max(1, int(math.floor(self.max_iter_mult * n)))

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if data.get("fault_plan") is not None:
            data["fault_plan"] = FaultPlan.from_dict(data["fault_plan"])
        return cls(**data)


@dataclass(frozen=True)
class ExperimentReport:
    matrix: str
    n: int
    nnz: int
    k: int
    seed: int
    iterations: int
    termination: str
    converged: bool
    raw_rel_residual: float
    fault_point: int | None
    n_faulty: int

    def csv_row(self):
        return [self.matrix, self.n, self.k, self.seed, self.iterations,
                "true" if self.converged else "false",
                repr(float(self.raw_rel_residual)),
                "" if self.fault_point is None else self.fault_point]

    def to_dict(self):
        return dataclasses.asdict(self)


def resolve_matrix(source, data_dir=None):
    """Return ``(name, CsrMatrix)`` for a generator spec, a file path or a name.

    ``ltridiag:N`` (or ``Ltridiag500``) is generated. A bare name such as
    ``nos3`` is looked up as ``<name>.mtx`` in ``data_dir``, then in the
    directory named by ``$ERASURE_CG_DATA``, then in ``./data``.
    """
    m = _LTRIDIAG.match(source.strip())
    if m:
        n = int(m.group(1))
        return f"Ltridiag{n}", gen_ltridiag(n)
    if os.path.isfile(source):
        name = os.path.basename(source)
        for ext in (".mtx", ".mm"):
            if name.endswith(ext):
                name = name[: -len(ext)]
        return name, read_matrix_market(source)
    candidates = [d for d in (data_dir, os.environ.get(DATA_ENV), "data") if d]
    for d in candidates:
        path = os.path.join(d, f"{source}.mtx")
        if os.path.isfile(path):
            return source, read_matrix_market(path)
    hint = f" (download from {MATRIX_URLS[source]})" if source in MATRIX_URLS else ""
    raise ConfigError(f"matrix {source!r} not found in {candidates}{hint}")


def run_experiment(config: ExperimentConfig, matrix=None):
    """Run one solve end to end.

    Returns ``(report, trace, recovered)``. ``matrix`` may pass an already
    loaded ``(name, CsrMatrix)`` pair to skip resolving ``config.matrix``.
    """
    name, A = matrix if matrix is not None else resolve_matrix(config.matrix, config.data_dir)
    n = A.n_rows
    k = config.resolve_k(n)
    if config.rhs_file:
        b = read_array(config.rhs_file)[:, 0]
        if b.shape != (n,):
            raise ConfigError(f"rhs has length {b.shape[0]}, matrix has {n} rows")
    else:
        rhs_seed = config.seed if config.rhs_seed is None else config.rhs_seed
        x_true = stream(rhs_seed, "solution").uniform(n)
        b = A.matvec(x_true)

    E = gen_gaussian_encoding(n, k, config.seed)
    system = build_encoded_system(A, b, E, verify=n + k <= 2000)
    topology = build_topology(n, k)
    if config.fault_plan is not None:
        plan = config.fault_plan
    elif config.inject_faults:
        plan = sample_fault_plan(n, k, config.fault_frac, config.seed)
    else:
        plan = FaultPlan.empty()

    solver_config = SolverConfig(tol_abs=config.tol, max_iters=config.max_iters(n),
                                 recompute_residual_on_fault=config.recompute_residual_on_fault)
    state, faults, trace = solve(system, plan, topology, solver_config)
    recovered = recover(system, state, faults, require_converged=False)
    fired = trace.fault_iterations
    report = ExperimentReport(
        matrix=name, n=n, nnz=A.nnz, k=k, seed=config.seed,
        iterations=trace.iterations, termination=trace.termination,
        converged=state.converged, raw_rel_residual=recovered.raw_relative_residual,
        fault_point=fired[0] if fired else None, n_faulty=len(faults))
    return report, trace, recovered


def _atomic_write(path, text):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def report_csv(reports):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_HEADER)
    for rep in reports:
        w.writerow(rep.csv_row())
    return buf.getvalue()


def write_run_outputs(out_dir, report: ExperimentReport, trace: SolveTrace,
                      recovered: RecoveredSolution, with_trace=True):
    """Write ``report.csv``, ``summary.json``, ``solution.mtx`` and optionally the trace."""
    _atomic_write(os.path.join(out_dir, "report.csv"), report_csv([report]))
    summary = recovered.to_dict(report.k)
    summary.update(matrix=report.matrix, seed=report.seed,
                   termination=report.termination, fault_point=report.fault_point)
    _atomic_write(os.path.join(out_dir, "summary.json"),
                  json.dumps(summary, sort_keys=True, indent=2) + "\n")
    buf = io.StringIO()
    write_array(buf, recovered.x_star)
    _atomic_write(os.path.join(out_dir, "solution.mtx"), buf.getvalue())
    if with_trace:
        _atomic_write(os.path.join(out_dir, "trace.csv"), trace.to_csv())
        _atomic_write(os.path.join(out_dir, "trace.json"), trace.sidecar_json() + "\n")


def emit_figure_data(trace: SolveTrace, path):
    """CSV of ``iteration,residual_norm,fault_event`` for plotting."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["iteration", "residual_norm", "fault_event"])
    for rec in trace.records:
        w.writerow([rec.iteration, repr(float(rec.res_norm)), int(rec.fault_event)])
    _atomic_write(path, buf.getvalue())
    return path


def parse_k_spec(spec):
    """``3`` -> ``{'k': 3}``; ``'20%'`` -> ``{'k_frac': 0.2}``."""
    if isinstance(spec, str) and spec.endswith("%"):
        return {"k_frac": float(spec[:-1]) / 100.0}
    if isinstance(spec, float) and not spec.is_integer():
        return {"k_frac": spec}
    return {"k": int(spec)}


def run_table(matrix, k_list, seeds, base: ExperimentConfig | None = None):
    """Run every ``(k, seed)`` pair; returns ``(reports, medians)``.

    The right-hand side is drawn from ``base.rhs_seed`` (default 0) for all
    runs, so every row solves the same raw system and only the encoding and
    the fault plan vary with the seed.
    """
    base = base or ExperimentConfig()
    if base.rhs_seed is None and base.rhs_file is None:
        base = dataclasses.replace(base, rhs_seed=0)
    loaded = resolve_matrix(matrix, base.data_dir) if k_list else None
    reports = []
    for spec in k_list:
        for seed in seeds:
            k_fields = {"k": None, "k_frac": None, **parse_k_spec(spec)}
            cfg = dataclasses.replace(base, matrix=matrix, seed=int(seed), **k_fields)
            report, _, _ = run_experiment(cfg, matrix=loaded)
            reports.append(report)
    medians = []
    for k in dict.fromkeys(r.k for r in reports):
        rows = [r for r in reports if r.k == k]
        medians.append({
            "matrix": rows[0].matrix, "k": k, "runs": len(rows),
            "median_iterations": statistics.median(r.iterations for r in rows),
            "median_raw_rel_residual": statistics.median(r.raw_rel_residual for r in rows),
        })
    return reports, medians


def medians_csv(medians):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(MEDIAN_HEADER)
    for m in medians:
        w.writerow([m["matrix"], m["k"], m["runs"], m["median_iterations"],
                    repr(float(m["median_raw_rel_residual"]))])
    return buf.getvalue()


def write_table(out_dir, reports, medians):
    _atomic_write(os.path.join(out_dir, "table.csv"), report_csv(reports))
    _atomic_write(os.path.join(out_dir, "medians.csv"), medians_csv(medians))
