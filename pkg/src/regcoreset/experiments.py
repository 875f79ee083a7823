"""Experiment protocols: data generation, coreset quality tables, sparsity.

The relative-error protocol solves the chosen objective once on the full data
(value V1), then for every (scheme, sample size, lambda, trial) cell solves on
a sampled coreset and re-evaluates that solution on the full data (value V2).
The cell statistic is the median over trials of |V1 - V2| / V1.  All
randomness flows through seeds mixed from the master seed and the cell's
integer coordinates, so reports are byte-identical across runs and across
worker-thread counts.
"""

from __future__ import annotations

import csv as csv_module
import hashlib
import json
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict

import numpy as np

from .conditioning import p_conditioned_basis
from .coreset import build_coreset, identity_coreset
from .errors import DegenerateSignalError, ParseError, SchemaError
from .linalg import RegressionInstance, augment
from .objective import ObjectiveSpec
from .seeding import mix_seed
from .sensitivity import (
    ridge_leverage_scores,
    rlad_sensitivity_bounds,
    uniform_scores,
)
from .solvers import (
    evaluate_objective,
    solve_lasso,
    solve_modified_lasso,
    solve_rlad,
    solve_ridge,
    sparsity_count,
)

_TAG_DATA = 0x01
_TAG_XTRUE = 0x02
_TAG_NOISE = 0x03
_TAG_SCORES = 0x04
_TAG_CELL = 0x05

EXPERIMENT_SCHEMES = ("uniform", "ridge_leverage", "rlad_sensitivity", "identity")
_FAMILIES = ("modified_lasso", "rlad", "ridge", "lasso")

_LOSS_P = {"modified_lasso": 2.0, "lasso": 2.0, "ridge": 2.0, "rlad": 1.0}


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    d: int
    lambda_grid: tuple
    sample_sizes: tuple
    schemes: tuple = ("ridge_leverage", "uniform")
    objective_family: str = "modified_lasso"
    ng_alpha: float = 0.00065
    noise_scale: float = 1e-5
    trials_per_cell: int = 5
    master_seed: int = 0
    csv_path: str | None = None
    target_column: str | None = None
    normalize: bool = True

    def __post_init__(self):
        object.__setattr__(self, "lambda_grid", tuple(float(v) for v in self.lambda_grid))
        object.__setattr__(self, "sample_sizes", tuple(int(v) for v in self.sample_sizes))
        object.__setattr__(self, "schemes", tuple(self.schemes))
        if not self.lambda_grid or any(v < 0 for v in self.lambda_grid):
            raise ValueError("lambda_grid must be non-empty with entries >= 0")
        if not self.sample_sizes or any(v < 1 for v in self.sample_sizes):
            raise ValueError("sample_sizes must be non-empty with entries >= 1")
        if self.trials_per_cell < 1 or self.trials_per_cell % 2 == 0:
            raise ValueError(
                f"trials_per_cell must be odd and >= 1, got {self.trials_per_cell}"
            )
        if self.objective_family not in _FAMILIES:
            raise ValueError(f"unknown objective family {self.objective_family!r}")
        unknown = set(self.schemes) - set(EXPERIMENT_SCHEMES)
        if not self.schemes or unknown:
            raise ValueError(f"unsupported schemes: {sorted(unknown) or 'none given'}")
        if self.csv_path is None:
            if self.d < 2 or self.d % 2 != 0:
                raise ValueError("synthetic instances need an even d >= 2")
            if self.n <= self.d // 2:
                raise ValueError("synthetic instances need n > d/2")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = doc.keys() - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        missing = {"n", "d", "lambda_grid", "sample_sizes"} - doc.keys()
        if missing:
            raise ValueError(f"config missing required keys: {sorted(missing)}")
        return cls(**doc)

    def digest(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()


@dataclass(frozen=True)
class TrialReport:
    scheme: str
    sample_size: int
    lam: float
    relative_error: float
    seed: int
    solver_converged: bool


@dataclass
class DataTable:
    row_labels: list
    col_labels: list
    cells: list
    trials: list
    config_digest: str = ""


def generate_ng_matrix(n: int, d: int, alpha: float, seed: int) -> np.ndarray:
    """Nearly-degenerate design: a faint Gaussian block over a pinned identity.

    Top n - d/2 rows are [alpha * N(0,1), 1e-8 * U(0,1)]; the bottom d/2 rows
    are [0, I].  The tiny alpha makes the first d/2 columns almost invisible
    to uniform sampling while the identity rows are indispensable.
    """
    if d < 2 or d % 2 != 0:
        raise ValueError(f"d must be even and >= 2, got {d}")
    if n <= d // 2:
        raise ValueError(f"need n > d/2, got n={n}, d={d}")
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    half = d // 2
    rng = np.random.default_rng(seed)
    top = np.hstack(
        [
            alpha * rng.standard_normal((n - half, half)),
            1e-8 * rng.random((n - half, half)),
        ]
    )
    bottom = np.hstack([np.zeros((half, half)), np.eye(half)])
    return np.vstack([top, bottom])


def generate_response(A, x_true, noise_scale: float, seed: int) -> np.ndarray:
    """b = A x + noise_scale * (||Ax||_2 / ||e||_2) * e with Gaussian e.

    The rescaling pins the relative noise level exactly:
    ||b - Ax|| / ||Ax|| = noise_scale.
    """
    A = np.asarray(A, dtype=float)
    x_true = np.asarray(x_true, dtype=float)
    if noise_scale < 0:
        raise ValueError(f"noise_scale must be >= 0, got {noise_scale}")
    signal = A @ x_true
    if noise_scale == 0:
        return signal
    norm = np.linalg.norm(signal)
    if norm == 0:
        raise DegenerateSignalError("cannot scale noise against a zero signal")
    e = np.random.default_rng(seed).standard_normal(A.shape[0])
    return signal + noise_scale * (norm / np.linalg.norm(e)) * e


def load_csv(path, target_column: str, normalize: bool = True) -> RegressionInstance:
    """Read a numeric CSV with a header into a regression instance.

    The named target column becomes the response; every other column is a
    feature.  With normalize=True each feature column is divided by its max
    absolute value (all-zero columns are left alone).  Parse failures name
    the 1-based row and the column.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv_module.reader(fh)
        header = next(reader, None)
        if header is None:
            raise SchemaError(f"{path}: empty file, expected a header row")
        if target_column not in header:
            raise SchemaError(
                f"{path}: target column {target_column!r} not in header {header}"
            )
        if len(header) < 2:
            raise SchemaError(f"{path}: need at least one feature column")
        rows = []
        for lineno, record in enumerate(reader, start=2):
            if len(record) != len(header):
                raise ParseError(
                    f"{path}: row {lineno} has {len(record)} fields, "
                    f"expected {len(header)}"
                )
            parsed = []
            for name, cell in zip(header, record):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise ParseError(
                        f"{path}: row {lineno}, column {name!r}: "
                        f"cannot parse {cell!r} as a number"
                    ) from None
            rows.append(parsed)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    data = np.asarray(rows, dtype=float)
    target_idx = header.index(target_column)
    response = data[:, target_idx]
    features = np.delete(data, target_idx, axis=1)
    if normalize:
        scale = np.max(np.abs(features), axis=0)
        nonzero = scale > 0
        features[:, nonzero] /= scale[nonzero]
    return RegressionInstance(features, response)


def build_experiment_instance(
    config: ExperimentConfig,
) -> tuple[RegressionInstance, np.ndarray | None]:
    """Synthesize the NG instance, or load the configured CSV."""
    if config.csv_path is not None:
        if config.target_column is None:
            raise ValueError("csv_path requires target_column")
        return load_csv(config.csv_path, config.target_column, config.normalize), None
    A = generate_ng_matrix(
        config.n, config.d, config.ng_alpha, mix_seed(config.master_seed, _TAG_DATA)
    )
    x_true = np.random.default_rng(
        mix_seed(config.master_seed, _TAG_XTRUE)
    ).standard_normal(config.d)
    b = generate_response(
        A, x_true, config.noise_scale, mix_seed(config.master_seed, _TAG_NOISE)
    )
    return RegressionInstance(A, b), x_true


def _solve(family: str, instance: RegressionInstance, lam: float, coreset: bool = False):
    # Coreset instances are small, so extra iterations are cheap; their
    # reweighted rows can be badly scaled, so the tolerance is also relaxed
    # (the reported V2 only needs the solution, not a tight certificate).
    if family == "modified_lasso":
        tol, max_iter = (1e-7, 200000) if coreset else (1e-9, 50000)
        return solve_modified_lasso(instance, lam, tol=tol, max_iter=max_iter)
    if family == "lasso":
        tol, max_iter = (1e-7, 200000) if coreset else (1e-9, 50000)
        return solve_lasso(instance, lam, tol=tol, max_iter=max_iter)
    if family == "ridge":
        return solve_ridge(instance, lam)
    if family == "rlad":
        max_iter = 200000 if coreset else 50000
        return solve_rlad(instance, lam, tol=1e-6, max_iter=max_iter)
    raise ValueError(f"unknown objective family {family!r}")


def _scheme_scores(scheme, aprime, lam, config, scheme_idx, lam_idx):
    if scheme == "uniform":
        return uniform_scores(aprime.shape[0])
    if scheme == "ridge_leverage":
        return ridge_leverage_scores(aprime, lam)
    if scheme == "rlad_sensitivity":
        basis = p_conditioned_basis(
            aprime, 1.0, mix_seed(config.master_seed, _TAG_SCORES, scheme_idx, lam_idx)
        )
        return rlad_sensitivity_bounds(basis, lam, aprime)
    raise ValueError(f"scheme {scheme!r} has no score rule")


def run_relative_error_experiment(
    config: ExperimentConfig, threads: int = 1
) -> DataTable:
    """Median relative error |V1 - V2| / V1 per (size, lambda) x scheme cell.

    Trials whose coreset solver failed to converge are dropped from the
    median; a cell with no surviving trial raises.  The full-data solves and
    score computations happen once up front, then cells run independently
    (optionally on a thread pool) with per-cell seeds.
    """
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    instance, _ = build_experiment_instance(config)
    aprime = augment(instance)
    family = config.objective_family
    loss_p = _LOSS_P[family]
    spec_for = {
        lam: ObjectiveSpec.for_family(family, lam) for lam in config.lambda_grid
    }

    full_values = {}
    for lam in config.lambda_grid:
        result = _solve(family, instance, lam)
        if not result.converged:
            raise RuntimeError(
                f"full-data {family} solve failed to converge at lambda={lam}"
            )
        full_values[lam] = result.objective_value

    scores = {}
    for si, scheme in enumerate(config.schemes):
        if scheme == "identity":
            continue
        for li, lam in enumerate(config.lambda_grid):
            scores[(si, li)] = _scheme_scores(scheme, aprime, lam, config, si, li)

    tasks = [
        (si, zi, li, ti)
        for si in range(len(config.schemes))
        for zi in range(len(config.sample_sizes))
        for li in range(len(config.lambda_grid))
        for ti in range(config.trials_per_cell)
    ]

    def run_trial(task):
        si, zi, li, ti = task
        scheme = config.schemes[si]
        size = config.sample_sizes[zi]
        lam = config.lambda_grid[li]
        seed = mix_seed(config.master_seed, _TAG_CELL, si, zi, li, ti)
        if scheme == "identity":
            core = identity_coreset(instance)
        else:
            core = build_coreset(instance, scores[(si, li)], size, loss_p, seed)
        sub = _solve(family, core.as_instance(), lam, coreset=True)
        v1 = full_values[lam]
        v2 = evaluate_objective(instance, sub.solution, spec_for[lam])
        return TrialReport(
            scheme=scheme,
            sample_size=size,
            lam=lam,
            relative_error=abs(v1 - v2) / v1,
            seed=seed,
            solver_converged=sub.converged,
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            reports = list(pool.map(run_trial, tasks))
    else:
        reports = [run_trial(t) for t in tasks]
    by_cell = {}
    for task, report in zip(tasks, reports):
        by_cell.setdefault(task[:3], []).append(report)

    row_keys = [
        (zi, li)
        for zi in range(len(config.sample_sizes))
        for li in range(len(config.lambda_grid))
    ]
    row_labels = [_row_label(config, zi, li) for zi, li in row_keys]
    col_labels = list(config.schemes)
    cells, trials = [], []
    for zi, li in row_keys:
        cell_row, trial_row = [], []
        for si in range(len(config.schemes)):
            cell_reports = by_cell[(si, zi, li)]
            kept = [t.relative_error for t in cell_reports if t.solver_converged]
            if not kept:
                raise RuntimeError(
                    f"no converged trials for scheme={config.schemes[si]} "
                    f"size={config.sample_sizes[zi]} lambda={config.lambda_grid[li]}"
                )
            cell_row.append(float(statistics.median(kept)))
            trial_row.append([t.relative_error for t in cell_reports])
        cells.append(cell_row)
        trials.append(trial_row)
    return DataTable(
        row_labels=row_labels,
        col_labels=col_labels,
        cells=cells,
        trials=trials,
        config_digest=config.digest(),
    )


def _row_label(config: ExperimentConfig, zi: int, li: int) -> str:
    size = config.sample_sizes[zi]
    lam = config.lambda_grid[li]
    if len(config.lambda_grid) == 1:
        return str(size)
    if len(config.sample_sizes) == 1:
        return format(lam, "g")
    return f"{size}|{format(lam, 'g')}"


def run_sparsity_experiment(config: ExperimentConfig) -> DataTable:
    """Zero-coordinate counts (|x_j| < 1e-6) per solver across the lambda grid.

    Rows are the three solvers (lasso, squared-l1 lasso, ridge); columns are
    the lambda values; each solver runs on the full instance.
    """
    instance, _ = build_experiment_instance(config)
    methods = ("lasso", "modified_lasso", "ridge")
    cells = [[0] * len(config.lambda_grid) for _ in methods]
    for li, lam in enumerate(config.lambda_grid):
        for mi, method in enumerate(methods):
            result = _solve(method, instance, lam)
            if not result.converged:
                raise RuntimeError(
                    f"{method} failed to converge at lambda={lam}"
                )
            cells[mi][li] = sparsity_count(result.solution, 1e-6)
    return DataTable(
        row_labels=list(methods),
        col_labels=[format(lam, "g") for lam in config.lambda_grid],
        cells=[[float(c) for c in row] for row in cells],
        trials=[[[float(c)] for c in row] for row in cells],
        config_digest=config.digest(),
    )


def emit_report(table: DataTable, format: str = "json") -> str:
    """Serialize a table: canonical JSON, or CSV with 6-significant-digit cells."""
    if format == "json":
        doc = {
            "rows": list(table.row_labels),
            "cols": list(table.col_labels),
            "cells": [[float(c) for c in row] for row in table.cells],
            "trials": [
                [[float(v) for v in cell] for cell in row] for row in table.trials
            ],
            "config_digest": table.config_digest,
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))
    if format == "csv":
        lines = ["label," + ",".join(str(c) for c in table.col_labels)]
        for label, row in zip(table.row_labels, table.cells):
            rendered = [_six_significant(float(value)) for value in row]
            lines.append(f"{label}," + ",".join(rendered))
        return "\n".join(lines)
    raise ValueError(f"unknown report format {format!r}")


def _six_significant(value: float) -> str:
    """Positional rendering with six significant digits, zeros kept."""
    if value == 0.0 or not np.isfinite(value):
        return "0.000000" if value == 0.0 else repr(value)
    exponent = int(np.floor(np.log10(abs(value))))
    return f"{value:.{max(5 - exponent, 0)}f}"


def parse_report(text: str) -> DataTable:
    """Inverse of emit_report(..., 'json')."""
    doc = json.loads(text)
    missing = {"rows", "cols", "cells", "trials", "config_digest"} - doc.keys()
    if missing:
        raise ValueError(f"report missing keys: {sorted(missing)}")
    return DataTable(
        row_labels=list(doc["rows"]),
        col_labels=list(doc["cols"]),
        cells=doc["cells"],
        trials=doc["trials"],
        config_digest=doc["config_digest"],
    )
