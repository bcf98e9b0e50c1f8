"""Monte Carlo experiments: specs, trial execution, baselines and result files."""

import csv
import dataclasses
import itertools
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .bsm import BsmConfig, init_point, optimize_covariance_only, run_bsm
from .channel import GeometryConfig, Seed, dbm_to_watts, draw_channels
from .rates import nats_to_bits

__all__ = [
    "EXPERIMENT_KINDS",
    "BASELINES",
    "CSV_COLUMNS",
    "ConfigError",
    "ExperimentSpec",
    "SweepPoint",
    "TrialResult",
    "ResultRecord",
    "load_config",
    "make_spec",
    "baseline_no_irs",
    "baseline_random_phase",
    "run_trial",
    "replay_trial",
    "aggregate",
    "run_monte_carlo",
    "emit_results",
    "load_results",
]

log = logging.getLogger(__name__)

EXPERIMENT_KINDS = ("single", "convergence", "sweep-n", "sweep-ne", "sweep-power")
BASELINES = ("no-irs", "random-phase")

CSV_COLUMNS = (
    "experiment", "N", "Ne", "P0_watts", "trial_count", "failures",
    "mean_Cs_nats", "stderr_Cs_nats", "mean_Cs_bits",
    "mean_no_irs_nats", "stderr_no_irs_nats",
    "mean_random_phase_nats", "stderr_random_phase_nats",
)

# Default antenna counts, powers and sweep lists per experiment kind.
KIND_PRESETS = {
    "single": dict(geometry={"Nt": 4, "Nr": 3}, p0_dbm=[25.0], n=[25], ne=[2]),
    "convergence": dict(geometry={"Nt": 4, "Nr": 3}, p0_dbm=[10.0], n=[25], ne=[2]),
    "sweep-n": dict(geometry={"Nt": 12, "Nr": 8}, p0_dbm=[25.0], n=[9, 25, 49], ne=[2, 4]),
    "sweep-ne": dict(geometry={"Nt": 12, "Nr": 8}, p0_dbm=[25.0], n=[25], ne=[2, 4, 6]),
    "sweep-power": dict(geometry={"Nt": 8, "Nr": 6}, p0_dbm=[0.0, 10.0, 20.0, 30.0, 40.0],
                        n=[25], ne=[8]),
}


class ConfigError(ValueError):
    pass


def load_config(path):
    """Read a flat YAML/JSON mapping of GeometryConfig and BsmConfig fields.

    Returns ``(geometry_overrides, bsm_overrides)`` as plain dicts.
    """
    with open(path) as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a key-value mapping")
    geo_keys = set(GeometryConfig.field_names())
    bsm_keys = set(BsmConfig.field_names())
    unknown = sorted(set(data) - geo_keys - bsm_keys)
    if unknown:
        raise ConfigError(f"{path}: unknown keys {unknown}")
    geometry = {k: v for k, v in data.items() if k in geo_keys}
    bsm = {k: v for k, v in data.items() if k in bsm_keys}
    GeometryConfig(**geometry)
    BsmConfig(**bsm)
    return geometry, bsm


@dataclass(frozen=True)
class SweepPoint:
    N: int
    Ne: int
    P0: float


@dataclass
class ExperimentSpec:
    """Everything needed to reproduce a Monte Carlo run.

    ``geometry`` and ``bsm`` hold overrides of GeometryConfig / BsmConfig
    fields; ``N``, ``Ne`` and ``P0`` come from the sweep lists instead.
    """

    kind: str = "single"
    geometry: dict = field(default_factory=dict)
    bsm: dict = field(default_factory=dict)
    p0_watts: list = field(default_factory=lambda: [float(dbm_to_watts(25.0))])
    n_values: list = field(default_factory=lambda: [25])
    ne_values: list = field(default_factory=lambda: [2])
    trials: int = 10
    seed: int = 0
    baselines: list = field(default_factory=list)
    keep_trials: bool = True
    keep_traces: bool = False
    out_dir: str = None

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if not (self.p0_watts and self.n_values and self.ne_values):
            raise ConfigError("sweep lists must be nonempty")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        bad = [b for b in self.baselines if b not in BASELINES]
        if bad:
            raise ConfigError(f"unknown baselines {bad}")
        self.p0_watts = [float(p) for p in self.p0_watts]
        self.n_values = [int(n) for n in self.n_values]
        self.ne_values = [int(n) for n in self.ne_values]
        self.baselines = [b for b in BASELINES if b in self.baselines]
        for key in ("N", "Ne"):
            if key in self.geometry:
                raise ConfigError(f"{key} is set by the sweep lists, not the geometry")
        if "P0" in self.bsm:
            raise ConfigError("P0 is set by the sweep list, not the solver config")
        self.geometry_config(self.points()[0])
        BsmConfig(**self.bsm)

    def points(self):
        return [SweepPoint(N=n, Ne=ne, P0=p)
                for ne, n, p in itertools.product(self.ne_values, self.n_values, self.p0_watts)]

    def geometry_config(self, point):
        return GeometryConfig(**{**self.geometry, "N": point.N, "Ne": point.Ne})

    def bsm_config(self, point):
        return BsmConfig(**{**self.bsm, "P0": point.P0})

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


def make_spec(kind, geometry=None, bsm=None, p0_dbm=None, p0_watts=None, n_values=None,
              ne_values=None, **kwargs):
    """ExperimentSpec with the preset of `kind` and explicit overrides on top."""
    if kind not in KIND_PRESETS:
        raise ConfigError(f"unknown experiment kind {kind!r}")
    preset = KIND_PRESETS[kind]
    if p0_watts is None:
        p0_dbm = preset["p0_dbm"] if p0_dbm is None else p0_dbm
        p0_watts = [float(dbm_to_watts(p)) for p in p0_dbm]
    kwargs.setdefault("keep_traces", kind == "convergence")
    return ExperimentSpec(
        kind=kind,
        geometry={**preset["geometry"], **(geometry or {})},
        bsm=dict(bsm or {}),
        p0_watts=list(p0_watts),
        n_values=list(preset["n"] if n_values is None else n_values),
        ne_values=list(preset["ne"] if ne_values is None else ne_values),
        **kwargs,
    )


def baseline_no_irs(ch, P0, cfg=None):
    """Secrecy rate (nats) of the covariance-only iteration without the IRS."""
    cfg = (cfg or BsmConfig()).replace(P0=P0)
    return run_bsm(ch.without_irs(), cfg).final


def baseline_random_phase(ch, P0, seed, cfg=None, return_trace=False):
    """Secrecy rate (nats) with random phases held fixed and X optimized.

    The phases are the ones ``run_bsm`` would start from for the same seed,
    so the two runs are paired.
    """
    cfg = (cfg or BsmConfig()).replace(P0=P0, phase_init="uniform-random")
    theta0, _ = init_point(cfg, ch, seed)
    trace = optimize_covariance_only(ch, theta0, cfg)
    return trace if return_trace else trace.final


@dataclass
class TrialResult:
    trial: int
    C_s: float = math.nan
    C_B: float = math.nan
    C_E: float = math.nan
    iterations: int = 0
    converged: bool = False
    no_irs: float = None
    random_phase: float = None
    error: str = None
    trace: dict = None
    elapsed: float = 0.0

    def to_dict(self, include_timing=False):
        out = dataclasses.asdict(self)
        if not include_timing:
            out.pop("elapsed")
        if out["trace"] is None:
            out.pop("trace")
        return out


def run_trial(geometry, bsm, master, trial, baselines=(), keep_trace=False):
    """Draw one channel, run BSM and the requested baselines.

    Failures are captured in ``TrialResult.error`` instead of propagating.
    """
    t0 = time.perf_counter()
    seed = Seed(master, trial)
    res = TrialResult(trial=trial)
    try:
        ch = draw_channels(geometry, seed)
        tr = run_bsm(ch, bsm, seed)
        res.C_s, res.C_B, res.C_E = tr.C_s[-1], tr.C_B[-1], tr.C_E[-1]
        res.iterations, res.converged = tr.iterations, tr.converged
        if keep_trace:
            res.trace = tr.to_dict(include_time=False, include_solution=False)
        if "no-irs" in baselines:
            res.no_irs = baseline_no_irs(ch, bsm.P0, bsm)
        if "random-phase" in baselines:
            res.random_phase = baseline_random_phase(ch, bsm.P0, seed, bsm)
    except Exception as exc:  # recorded per trial; the sweep carries on
        log.warning("trial %d failed: %s", trial, exc)
        res.error = f"{type(exc).__name__}: {exc}"
    res.elapsed = time.perf_counter() - t0
    return res


def _run_task(args):
    point_index, geometry, bsm, master, trial, baselines, keep_trace = args
    return point_index, run_trial(geometry, bsm, master, trial, baselines, keep_trace)


def replay_trial(spec, trial, point=None):
    """Re-run a single recorded trial of `spec` (first sweep point by default)."""
    point = point or spec.points()[0]
    return run_trial(spec.geometry_config(point), spec.bsm_config(point), spec.seed, trial,
                     spec.baselines, spec.keep_traces)


def _mean_stderr(values):
    values = [v for v in values if v is not None and math.isfinite(v)]
    if not values:
        return None, None
    arr = np.asarray(values, dtype=float)
    mean = float(np.mean(arr))
    stderr = float(np.std(arr, ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
    return mean, stderr


@dataclass
class ResultRecord:
    """Aggregate over the trials of one sweep point (rates in nats)."""

    experiment: str
    N: int
    Ne: int
    P0_watts: float
    seed: int
    trial_count: int
    failures: int
    mean_Cs_nats: float
    stderr_Cs_nats: float
    mean_no_irs_nats: float = None
    stderr_no_irs_nats: float = None
    mean_random_phase_nats: float = None
    stderr_random_phase_nats: float = None
    mean_iterations: float = None
    trials: list = None
    elapsed: float = 0.0

    @property
    def mean_Cs_bits(self):
        return None if self.mean_Cs_nats is None else float(nats_to_bits(self.mean_Cs_nats))

    def csv_row(self):
        row = dataclasses.asdict(self)
        row["mean_Cs_bits"] = self.mean_Cs_bits
        return {c: ("" if row[c] is None else row[c]) for c in CSV_COLUMNS}

    def to_dict(self, include_timing=False):
        out = dataclasses.asdict(self)
        out["mean_Cs_bits"] = self.mean_Cs_bits
        if not include_timing:
            out.pop("elapsed")
        if self.trials is not None:
            out["trials"] = [t.to_dict(include_timing) for t in self.trials]
        else:
            out.pop("trials")
        return out


def aggregate(spec, point, results):
    """Combine trial results of one point; independent of completion order."""
    results = sorted(results, key=lambda r: r.trial)
    ok = [r for r in results if r.error is None]
    mean, stderr = _mean_stderr([r.C_s for r in ok])
    rec = ResultRecord(
        experiment=spec.kind, N=point.N, Ne=point.Ne, P0_watts=point.P0, seed=spec.seed,
        trial_count=len(results), failures=len(results) - len(ok),
        mean_Cs_nats=mean, stderr_Cs_nats=stderr,
        mean_iterations=float(np.mean([r.iterations for r in ok])) if ok else None,
        trials=results if spec.keep_trials or spec.keep_traces else None,
        elapsed=float(sum(r.elapsed for r in results)),
    )
    if "no-irs" in spec.baselines:
        rec.mean_no_irs_nats, rec.stderr_no_irs_nats = _mean_stderr([r.no_irs for r in ok])
    if "random-phase" in spec.baselines:
        rec.mean_random_phase_nats, rec.stderr_random_phase_nats = _mean_stderr(
            [r.random_phase for r in ok])
    return rec


def run_monte_carlo(spec, workers=1):
    """Run every (sweep point, trial) pair of `spec` and aggregate per point.

    With ``workers > 1`` trials run in a process pool; the output does not
    depend on scheduling.
    """
    points = spec.points()
    tasks = []
    for idx, point in enumerate(points):
        geometry, bsm = spec.geometry_config(point), spec.bsm_config(point)
        for trial in range(spec.trials):
            tasks.append((idx, geometry, bsm, spec.seed, trial, tuple(spec.baselines),
                          spec.keep_traces))

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (8 * workers))))
    else:
        outputs = [_run_task(t) for t in tasks]

    by_point = {i: [] for i in range(len(points))}
    for idx, res in outputs:
        by_point[idx].append(res)
    records = []
    for idx, point in enumerate(points):
        rec = aggregate(spec, point, by_point[idx])
        log.info("%s N=%d Ne=%d P0=%.4g W: mean C_s %.4f nats over %d trials (%d failed)",
                 spec.kind, point.N, point.Ne, point.P0, rec.mean_Cs_nats or float("nan"),
                 rec.trial_count, rec.failures)
        records.append(rec)
    return records


def emit_results(records, spec, out_dir, include_timing=False):
    """Write ``results.csv`` and ``results.json`` into `out_dir`.

    Timing is left out unless requested so that re-running a spec gives
    byte-identical files.
    """
    if not records:
        raise ValueError("no records to write")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "results.csv"
    json_path = out_dir / "results.json"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for rec in records:
            writer.writerow({k: (repr(v) if isinstance(v, float) else v)
                             for k, v in rec.csv_row().items()})
    doc = {
        "software_version": __version__,
        "spec": spec.to_dict(),
        "records": [rec.to_dict(include_timing) for rec in records],
    }
    with open(json_path, "w") as fh:
        json.dump(doc, fh, indent=2, allow_nan=True)
        fh.write("\n")
    return csv_path, json_path


def load_results(path):
    """Read a results.json back as ``(ExperimentSpec, list of record dicts)``."""
    with open(os.fspath(path)) as fh:
        doc = json.load(fh)
    return ExperimentSpec.from_dict(doc["spec"]), doc["records"]
