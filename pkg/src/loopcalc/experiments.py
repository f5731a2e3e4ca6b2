"""Seeded sweeps over random Ising grids, written out as CSV.

One row per instance. Instance ``i`` of every (size, beta, theta) cell is
drawn with seed ``seed_base + i``, so cells share their noise. Floats are
written with ``repr`` so that a CSV read back reproduces the logged values
bit for bit; apart from the two runtime columns the output is a pure
function of the config.
"""

from __future__ import annotations

import csv
import json
import math
import statistics
import time
from dataclasses import dataclass, field
from pathlib import Path

from .bp import BPConfig, run_bp
from .errors import ZeroDenominator
from .ising import MODES, IsingParams, forney_from_couplings, ising_log_z, sample_couplings
from .series import SeriesLimits, pfaffian_term, run_series

COLUMNS = (
    "instance_id", "seed", "rows", "cols", "beta", "theta", "mode",
    "bp_converged", "bp_iters", "log_z_exact", "log_z_bp", "log_z_zempty",
    "log_z_series_k", "err_bp", "err_zempty", "err_series", "n_gext",
    "runtime_ms_bp", "runtime_ms_zempty", "status",
)
RUNTIME_COLUMNS = ("runtime_ms_bp", "runtime_ms_zempty")
SUMMARY_COLUMNS = (
    "rows", "cols", "beta", "theta", "mode", "n", "n_exact", "n_converged",
    "mean_err_bp", "median_err_bp", "mean_err_zempty", "median_err_zempty",
    "mean_err_series", "median_err_series",
)


def error_metric(log_z_true: float, log_z_approx: float) -> float:
    """|log Z - log Z'| / |log Z|."""
    if log_z_true == 0:
        raise ZeroDenominator("log Z is zero; relative error undefined")
    return abs(log_z_true - log_z_approx) / abs(log_z_true)


@dataclass(frozen=True)
class ExperimentConfig:
    sizes: tuple[tuple[int, int], ...] = ((4, 4),)
    betas: tuple[float, ...] = (0.5, 1.0)
    thetas: tuple[float, ...] = (0.1,)
    mode: str = "mixed"
    instances: int = 10
    seed_base: int = 0
    bp: BPConfig = field(default_factory=BPConfig)
    series: SeriesLimits | None = None  # None: no series column
    exact_max_sites: int = 24
    out: str | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.instances < 0:
            raise ValueError("instances must be non-negative")
        for r, c in self.sizes:
            if r < 2 or c < 2:
                raise ValueError(f"grid {r}x{c} too small")
        if any(b < 0 for b in self.betas) or any(t < 0 for t in self.thetas):
            raise ValueError("beta and theta must be non-negative")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {"sizes", "betas", "thetas", "mode", "instances", "seed_base", "bp",
                 "series", "exact_max_sites", "out"}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        kw = dict(data)
        if "sizes" in kw:
            kw["sizes"] = tuple((int(r), int(c)) for r, c in kw["sizes"])
        for key in ("betas", "thetas"):
            if key in kw:
                kw[key] = tuple(float(x) for x in kw[key])
        if "bp" in kw:
            kw["bp"] = BPConfig(**kw["bp"])
        if kw.get("series") is not None:
            s = dict(kw["series"])
            if "time_budget_ms" in s:
                ms = s.pop("time_budget_ms")
                s["time_budget"] = None if ms is None else ms / 1000.0
            kw["series"] = SeriesLimits(**s)
        return cls(**kw)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def run_instance(params: IsingParams, config: ExperimentConfig, instance_id: int) -> dict:
    """One row; failures go into ``status`` instead of raising."""
    row = {k: None for k in COLUMNS}
    row.update(instance_id=instance_id, seed=params.seed, rows=params.rows, cols=params.cols,
               beta=params.beta, theta=params.theta, mode=params.mode)
    notes = []
    try:
        couplings = sample_couplings(params)
        graph = forney_from_couplings(couplings)
        if params.rows * params.cols <= config.exact_max_sites:
            row["log_z_exact"] = ising_log_z(couplings, max_sites=config.exact_max_sites)

        t0 = time.perf_counter()
        bp = run_bp(graph, config.bp)
        row["runtime_ms_bp"] = (time.perf_counter() - t0) * 1e3
        row.update(bp_converged=bp.converged, bp_iters=bp.iterations, log_z_bp=bp.bethe_log_z)
        if not bp.converged:
            notes.append("bp_not_converged")

        t0 = time.perf_counter()
        term = pfaffian_term(graph, bp, ())
        z0, n_gext = term.z_psi, term.n_gext
        row["runtime_ms_zempty"] = (time.perf_counter() - t0) * 1e3
        row["n_gext"] = n_gext
        if z0 > 0:
            row["log_z_zempty"] = bp.bethe_log_z + math.log(z0)
        else:
            notes.append("zempty_nonpositive")

        if config.series is not None:
            res = run_series(graph, bp, config.series)
            if res.log_z is not None:
                row["log_z_series_k"] = res.log_z
            else:
                notes.append("series_nonpositive")

        exact = row["log_z_exact"]
        if exact is not None:
            for col, src in (("err_bp", "log_z_bp"), ("err_zempty", "log_z_zempty"),
                             ("err_series", "log_z_series_k")):
                if row[src] is not None:
                    row[col] = error_metric(exact, row[src])
    except Exception as exc:  # recorded, never fatal to the sweep
        notes.append(f"error:{type(exc).__name__}:{exc}")
    row["status"] = ";".join(notes) if notes else "ok"
    return row


def _summarize(rows) -> list[dict]:
    cells = {}
    for r in rows:
        cells.setdefault((r["rows"], r["cols"], r["beta"], r["theta"], r["mode"]), []).append(r)
    out = []
    for (nr, nc, beta, theta, mode), group in cells.items():
        s = dict(rows=nr, cols=nc, beta=beta, theta=theta, mode=mode, n=len(group),
                 n_exact=sum(r["log_z_exact"] is not None for r in group),
                 n_converged=sum(bool(r["bp_converged"]) for r in group))
        for name in ("bp", "zempty", "series"):
            vals = [r[f"err_{name}"] for r in group if r[f"err_{name}"] is not None]
            s[f"mean_err_{name}"] = statistics.fmean(vals) if vals else None
            s[f"median_err_{name}"] = statistics.median(vals) if vals else None
        out.append(s)
    return out


@dataclass
class ExperimentResult:
    rows: list[dict]
    summary: list[dict]

    def write(self, path) -> Path:
        """Write rows to ``path`` and the per-cell summary next to it."""
        path = Path(path)
        write_csv(self.rows, COLUMNS, path)
        spath = summary_path(path)
        write_csv(self.summary, SUMMARY_COLUMNS, spath)
        return spath


def summary_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + "_summary" + (path.suffix or ".csv"))


def write_csv(rows, columns, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r.get(c)) for c in columns])


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Sweep sizes x betas x thetas x instances in that nesting order."""
    rows = []
    for nr, nc in config.sizes:
        for beta in config.betas:
            for theta in config.thetas:
                for i in range(config.instances):
                    params = IsingParams(nr, nc, beta, theta, config.mode, config.seed_base + i)
                    rows.append(run_instance(params, config, len(rows)))
    result = ExperimentResult(rows, _summarize(rows))
    if config.out:
        result.write(config.out)
    return result


def read_csv(path, drop_runtime: bool = True) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if drop_runtime:
        for r in rows:
            for c in RUNTIME_COLUMNS:
                r.pop(c, None)
    return rows
