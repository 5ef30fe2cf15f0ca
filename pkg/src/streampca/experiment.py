"""Reproduction harness: seeded trials, per-step metric logs, CSV outputs.

A trial streams one data source through one estimator configuration in a
single pass, grading the evolving basis against the batch reference at a
fixed cadence. Suites run the (setting x method x seed) grid and summarize
medians across seeds.
"""

from __future__ import annotations

import itertools
import os
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import SchemaMismatch, StreamPCAError, TrialError
from .estimators import (METHODS, LearningRateSchedule, StreamingEstimator,
                         init_basis)
from .evaluation import CovarianceSpec, batch_pca, log_convergence
from .linalg import projection_energy
from .sources import (blocks, center_stream, harmonic_matrix, load_trajectory,
                      make_harmonic_model, make_spiked_model, spiked_matrix)

SOURCES = ("spiked", "harmonic", "trajectory-file")

CSV_COLUMNS = ("method", "seed", "step", "samples_seen", "convergence",
               "log_convergence", "g_value", "eta", "alpha", "wall_time_ms")
CSV_HEADER = ",".join(CSV_COLUMNS)

SUMMARY_COLUMNS = ("setting", "method", "seeds", "final_convergence_median",
                   "final_log_convergence_median", "final_accuracy_median",
                   "accuracy_at_10pct_median")


@dataclass(frozen=True)
class MethodEntry:
    """One estimator configuration within a comparison run."""

    method: str
    accelerated: bool = False
    a: float = 2.0
    beta: float = 0.1

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; "
                             f"expected one of {METHODS}")

    @property
    def label(self):
        return self.method + ("+accel" if self.accelerated else "")

    @classmethod
    def parse(cls, token, a=2.0, beta=0.1):
        """Parse tokens like ``block-power+accel`` or ``oja``."""
        parts = token.strip().split("+")
        accelerated = any(p.strip() == "accel" for p in parts[1:])
        return cls(method=parts[0].strip(), accelerated=accelerated,
                   a=a, beta=beta)


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment cell: a data source plus shared streaming settings."""

    source: str = "spiked"
    d: int = 100
    k: int = 1
    sigma: float = 0.5
    n: int = 10000
    block: int = 5
    methods: tuple = ()
    seeds: tuple = (1,)
    eval_every: int = 10
    modes: int = 25            # harmonic source only
    noise: float = 0.1         # harmonic source only
    path: str | None = None    # trajectory-file source only
    center: bool = False
    strict: bool = False

    def __post_init__(self):
        if self.source not in SOURCES:
            raise ValueError(f"unknown source {self.source!r}; "
                             f"expected one of {SOURCES}")
        if self.source == "trajectory-file" and not self.path:
            raise ValueError("trajectory-file source requires a path")
        if self.block < 1:
            raise ValueError(f"block size must be >= 1, got {self.block}")
        if self.eval_every < 1:
            raise ValueError(f"eval_every must be >= 1, got {self.eval_every}")
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))

    @property
    def setting(self):
        """Compact label identifying the data cell, used in file names."""
        if self.source == "spiked":
            return (f"spiked-d{self.d}-k{self.k}-sigma{self.sigma:g}"
                    f"-n{self.n}-B{self.block}")
        if self.source == "harmonic":
            return (f"harmonic-d{self.d}-m{self.modes}-k{self.k}"
                    f"-noise{self.noise:g}-n{self.n}-B{self.block}")
        stem = Path(self.path).stem if self.path else "traj"
        return f"traj-{stem}-k{self.k}-B{self.block}"


class TrialRecord(NamedTuple):
    """One metric evaluation row of a trial log."""

    method: str
    seed: int
    step: int
    samples_seen: int
    convergence: float
    log_convergence: float
    g_value: float
    eta: float
    alpha: float
    wall_time_ms: float


@dataclass(frozen=True)
class TrialDataset:
    """Data matrix, batch reference, and cached oracle energy for one seed."""

    X: np.ndarray        # raw samples, what the estimator streams
    X_eval: np.ndarray   # exactly centered copy when centering is on
    V_star: np.ndarray
    values: np.ndarray
    oracle_energy: float


def trial_seed_sequences(seed):
    """Independent sub-seeds for data, initialization and schedule.

    Changing one never changes what the others generate, so e.g. the
    schedule can be re-seeded without touching the data.
    """
    data_ss, init_ss, sched_ss = np.random.SeedSequence(seed).spawn(3)
    return data_ss, init_ss, sched_ss


def build_dataset(config, data_seed):
    """Generate (or load) the full matrix and compute the batch reference."""
    if config.source == "spiked":
        model_ss, stream_ss = data_seed.spawn(2)
        model = make_spiked_model(config.d, config.k, config.sigma, model_ss)
        X = spiked_matrix(model, config.n, np.random.default_rng(stream_ss))
    elif config.source == "harmonic":
        model_ss, stream_ss = data_seed.spawn(2)
        model = make_harmonic_model(config.d, config.modes,
                                    noise_sigma=config.noise, seed=model_ss)
        X = harmonic_matrix(model, config.n, np.random.default_rng(stream_ss))
    else:
        _, X = load_trajectory(config.path)

    X_eval = X - X.mean(axis=1, keepdims=True) if config.center else X
    V_star, values = batch_pca(CovarianceSpec(X_eval, centered=False), config.k)
    return TrialDataset(X=X, X_eval=X_eval, V_star=V_star, values=values,
                        oracle_energy=projection_energy(X_eval, V_star))


def run_trial(config, entry, seed, dataset=None, timer=time.perf_counter):
    """Stream one estimator over one seeded dataset; return TrialRecords.

    The data source is consumed exactly once. Metrics are evaluated every
    ``config.eval_every`` steps and at the final step; ``wall_time_ms`` is
    the cumulative time spent inside estimator updates. On failure a
    TrialError carrying the rows logged so far is raised.
    """
    data_ss, init_ss, sched_ss = trial_seed_sequences(seed)
    if dataset is None:
        dataset = build_dataset(config, data_ss)

    basis_ss, fill_ss = init_ss.spawn(2)
    d, n_total = dataset.X.shape
    estimator = StreamingEstimator(
        init_basis(d, config.k, basis_ss),
        method=entry.method, accelerated=entry.accelerated,
        schedule=LearningRateSchedule(entry.a, np.random.default_rng(sched_ss)),
        beta=entry.beta, strict=config.strict,
        rng=np.random.default_rng(fill_ss))

    stream = blocks(dataset.X, config.block)
    if config.center:
        stream = center_stream(stream, "running_mean")

    records = []
    elapsed_ms = 0.0
    step = 0
    samples = 0
    try:
        for block in stream:
            t0 = timer()
            result = estimator.step(block)
            elapsed_ms += (timer() - t0) * 1e3
            step += 1
            samples += block.samples.shape[1]
            if step % config.eval_every == 0 or samples >= n_total:
                conv = _graded_convergence(dataset, estimator.basis)
                records.append(TrialRecord(
                    entry.label, int(seed), step, samples, conv,
                    log_convergence(conv), result.g_value, result.eta,
                    result.alpha, elapsed_ms))
    except StreamPCAError as exc:
        raise TrialError(str(exc), records) from exc
    if samples != n_total:
        raise TrialError(f"single-pass accounting failed: streamed {samples} "
                         f"of {n_total} samples", records)
    return records


def _graded_convergence(dataset, W):
    value = 1.0 - projection_energy(dataset.X_eval, W) / dataset.oracle_energy
    return min(max(value, 0.0), 1.0)


def _format_value(value):
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def write_records_csv(path, records, error=None):
    """Write one trial log; a failure is recorded as a '#' trailer line."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(CSV_HEADER + "\n")
        for rec in records:
            fh.write(",".join(_format_value(v) for v in rec) + "\n")
        if error is not None:
            fh.write(f"# error: {error}\n")


def read_records_csv(path):
    """Read a trial log written by ``write_records_csv``."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise SchemaMismatch(f"{path}: header {header!r} != expected")
        records = []
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if len(parts) != len(CSV_COLUMNS):
                raise SchemaMismatch(f"{path}: row has {len(parts)} fields")
            records.append(TrialRecord(
                parts[0], int(parts[1]), int(parts[2]), int(parts[3]),
                *(float(p) for p in parts[4:])))
        return records


def trial_filename(setting, label, seed):
    return f"{setting}__{label}__seed{seed}.csv"


def max_workers():
    """Trial parallelism: STREAMPCA_THREADS when set, else the core count."""
    env = os.environ.get("STREAMPCA_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def accuracy_at_fraction(records, n_total, fraction=0.1):
    """Accuracy at the first evaluation with samples_seen >= fraction * n."""
    for rec in records:
        if rec.samples_seen >= fraction * n_total:
            return 1.0 - rec.convergence
    return None


class SuiteResult(NamedTuple):
    summary_rows: list
    trial_paths: list
    failures: list   # (setting, label, seed, message)

    @property
    def ok(self):
        return not self.failures


def run_suite(cells, out_dir, timer=time.perf_counter):
    """Run every (cell, method, seed) trial and summarize medians.

    One CSV per trial plus ``summary.csv`` land in ``out_dir``. Trials run
    in parallel (dataset shared across the methods of a seed); outputs are
    keyed by deterministic file names so the parallelism degree never
    changes the results.
    """
    cells = list(cells)
    for cell in cells:
        if not cell.methods:
            raise ValueError(f"cell {cell.setting}: empty methods list")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    tasks = [(cell, seed) for cell in cells for seed in cell.seeds]

    def run_cell_seed(task):
        cell, seed = task
        outputs = []
        data_ss, _, _ = trial_seed_sequences(seed)
        dataset = build_dataset(cell, data_ss)
        for entry in cell.methods:
            try:
                records = run_trial(cell, entry, seed, dataset=dataset,
                                    timer=timer)
                error = None
            except TrialError as exc:
                records, error = exc.records, str(exc)
            path = out_dir / trial_filename(cell.setting, entry.label, seed)
            write_records_csv(path, records, error=error)
            outputs.append((cell, entry, seed, path, records, error))
        return outputs

    results = []
    with ThreadPoolExecutor(max_workers=max_workers()) as pool:
        for outputs in pool.map(run_cell_seed, tasks):
            results.extend(outputs)

    by_group = {}
    failures = []
    trial_paths = []
    for cell, entry, seed, path, records, error in results:
        trial_paths.append(path)
        if error is not None:
            failures.append((cell.setting, entry.label, seed, error))
            continue
        by_group.setdefault((cell.setting, entry.label), []).append(records)

    summary_rows = []
    for (setting, label) in sorted(by_group):
        group = by_group[(setting, label)]
        finals = [recs[-1] for recs in group]
        at10 = [accuracy_at_fraction(recs, recs[-1].samples_seen)
                for recs in group]
        summary_rows.append({
            "setting": setting,
            "method": label,
            "seeds": len(group),
            "final_convergence_median":
                statistics.median(r.convergence for r in finals),
            "final_log_convergence_median":
                statistics.median(r.log_convergence for r in finals),
            "final_accuracy_median":
                statistics.median(1.0 - r.convergence for r in finals),
            "accuracy_at_10pct_median":
                statistics.median(a for a in at10 if a is not None),
        })

    summary_path = out_dir / "summary.csv"
    with open(summary_path, "w", encoding="utf-8") as fh:
        fh.write(",".join(SUMMARY_COLUMNS) + "\n")
        for row in summary_rows:
            fh.write(",".join(_format_value(row[c]) if c not in
                              ("setting", "method") else str(row[c])
                              for c in SUMMARY_COLUMNS) + "\n")
    return SuiteResult(summary_rows, trial_paths, failures)


def emit_plotdata(in_dir, out_path):
    """Concatenate trial CSVs into one long-format file keyed by setting.

    Adds a leading ``setting`` column recovered from each trial file name;
    all inputs must share the trial schema exactly.
    """
    in_dir = Path(in_dir)
    paths = sorted(p for p in in_dir.glob("*.csv")
                   if "__" in p.name and p.name != "summary.csv")
    if not paths:
        raise SchemaMismatch(f"no trial CSVs found in {in_dir}")
    rows_out = 0
    with open(out_path, "w", encoding="utf-8") as out:
        out.write("setting," + CSV_HEADER + "\n")
        for path in paths:
            setting = path.name.split("__", 1)[0]
            with open(path, "r", encoding="utf-8") as fh:
                header = fh.readline().strip()
                if header != CSV_HEADER:
                    raise SchemaMismatch(
                        f"{path}: header {header!r} != expected")
                for line in fh:
                    line = line.strip()
                    if not line or line.startswith("#"):
                        continue
                    out.write(f"{setting},{line}\n")
                    rows_out += 1
    return rows_out


def parse_seed_spec(spec):
    """Parse ``1..10``, ``3``, or ``1,4,9`` into a list of ints."""
    spec = str(spec).strip()
    seeds = []
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..")
            seeds.extend(range(int(lo), int(hi) + 1))
        else:
            seeds.append(int(part))
    if not seeds:
        raise ValueError(f"empty seed specification: {spec!r}")
    return seeds


def parse_config_file(path):
    """Read a flat ``key = value`` file; '#' starts a comment."""
    options = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{line_no}: expected 'key = value'")
            key, value = line.split("=", 1)
            options[key.strip()] = value.strip()
    return options


def _parse_list(value, cast):
    return [cast(part.strip()) for part in str(value).split(",") if part.strip()]


def suite_cells(options, overrides=None):
    """Expand a flat option mapping into experiment cells.

    ``d``, ``k`` and ``sigma`` may be comma lists; the cells are their
    cross product. ``overrides`` (e.g. CLI flags) win over file values.
    """
    merged = dict(options)
    if overrides:
        merged.update({k: v for k, v in overrides.items() if v is not None})

    a = float(merged.get("a", 2.0))
    beta = float(merged.get("beta", 0.1))
    methods = tuple(MethodEntry.parse(tok, a=a, beta=beta)
                    for tok in _parse_list(merged.get("methods", ""), str))
    if not methods:
        raise ValueError("no methods configured")
    seeds = tuple(parse_seed_spec(merged.get("seeds", "1")))

    base = ExperimentConfig(
        source=merged.get("source", "spiked"),
        n=int(merged.get("n", 10000)),
        block=int(merged.get("block", 5)),
        methods=methods,
        seeds=seeds,
        eval_every=int(merged.get("eval_every", 10)),
        modes=int(merged.get("modes", 25)),
        noise=float(merged.get("noise", 0.1)),
        path=merged.get("path"),
        center=str(merged.get("center", "false")).lower() in ("true", "1", "yes"),
        strict=str(merged.get("strict", "false")).lower() in ("true", "1", "yes"),
    )
    ds = _parse_list(merged.get("d", base.d), int)
    ks = _parse_list(merged.get("k", base.k), int)
    sigmas = _parse_list(merged.get("sigma", base.sigma), float)
    return [replace(base, d=d, k=k, sigma=sigma)
            for d, sigma, k in itertools.product(ds, sigmas, ks)]
