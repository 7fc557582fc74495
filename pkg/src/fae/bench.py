"""Monte Carlo sweep over amplitudes and iteration counts.

Every trial draws from its own substream keyed by ``(amplitude bits, ell,
trial index)``, so aggregates do not depend on execution order or on how the
cells are spread across worker processes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .bounds import staged_count, theorem1_bound, worst_case_count, error_for_ell
from .errors import DegenerateNuError, DomainError
from .estimator import (
    SAFE_THETA_MAX,
    EstimatorConfig,
    result_from_arrays,
    run_trial,
    trace_diagnostics,
)
from .oracle import attenuate, float_key, substream

CSV_HEADER = (
    "amplitude", "ell", "j0_mode", "trials", "delta_c", "err_q95",
    "n_orac_exact_median", "n_orac_exact_min", "n_orac_exact_max",
    "n_orac_paper_median", "coverage_rate", "seed",
)
_INT_COLUMNS = {"ell", "j0_mode", "trials", "n_orac_exact_min", "n_orac_exact_max", "seed"}


@dataclass(frozen=True)
class BenchConfig:
    amplitudes: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4)
    ell_min: int = 3
    ell_max: int = 14
    trials: int = 1000
    delta_c: float = 0.01
    master_seed: int = 0
    percentile: float = 0.95
    initial_theta_max: float = SAFE_THETA_MAX
    backend: str | None = None
    keep_trials: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "amplitudes", tuple(float(a) for a in self.amplitudes))
        if not self.amplitudes:
            raise DomainError("at least one amplitude is required")
        for a in self.amplitudes:
            attenuate(a)
        if self.trials < 1:
            raise DomainError(f"trials must be >= 1, got {self.trials!r}")
        if not 1 <= self.ell_min <= self.ell_max:
            raise DomainError(f"empty ell range {self.ell_min}..{self.ell_max}")
        if not 0.0 < self.percentile < 1.0:
            raise DomainError(f"percentile must lie in (0, 1), got {self.percentile!r}")
        if not 0 <= self.master_seed < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.master_seed!r}")
        EstimatorConfig(delta_c=self.delta_c, ell=self.ell_min)

    @property
    def ells(self) -> range:
        return range(self.ell_min, self.ell_max + 1)

    def estimator_config(self, ell: int) -> EstimatorConfig:
        return EstimatorConfig(delta_c=self.delta_c, ell=ell, initial_theta_max=self.initial_theta_max)


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    error: float
    n_orac_exact: int
    n_orac_paper: int
    j0: int
    covered: bool
    all_pass: bool
    failure: str | None = None


@dataclass
class CellResult:
    """All trials for one ``(amplitude, ell)`` pair plus their aggregates."""

    amplitude: float
    ell: int
    delta_c: float
    percentile: float
    records: list[TrialRecord] = field(repr=False)

    @property
    def ok(self) -> list[TrialRecord]:
        return [r for r in self.records if r.failure is None]

    @property
    def trials(self) -> int:
        return len(self.records)

    @property
    def failures(self) -> int:
        return self.trials - len(self.ok)

    @property
    def errors(self) -> np.ndarray:
        return np.array([r.error for r in self.ok])

    @property
    def err_q(self) -> float:
        return quantile_error(self.errors, self.percentile) if self.ok else math.nan

    @property
    def n_exact(self) -> np.ndarray:
        return np.array([r.n_orac_exact for r in self.ok], dtype=np.int64)

    @property
    def n_paper(self) -> np.ndarray:
        return np.array([r.n_orac_paper for r in self.ok], dtype=np.int64)

    @property
    def j0_mode(self) -> int:
        """Most common ``j0``; ties go to the smaller value."""
        counts = Counter(r.j0 for r in self.ok)
        if not counts:
            return -1
        top = max(counts.values())
        return min(j for j, c in counts.items() if c == top)

    @property
    def first_stage_only(self) -> bool:
        return self.j0_mode == self.ell

    @property
    def coverage_rate(self) -> float:
        """Fraction of trials whose final interval holds the true angle; failures count as misses."""
        return sum(r.covered for r in self.records) / self.trials

    @property
    def all_pass_rate(self) -> float:
        return sum(r.all_pass for r in self.records) / self.trials

    def row(self, seed: int) -> dict:
        ok = bool(self.ok)
        exact = self.n_exact
        return {
            "amplitude": self.amplitude,
            "ell": self.ell,
            "j0_mode": self.j0_mode,
            "trials": self.trials,
            "delta_c": self.delta_c,
            "err_q95": self.err_q,
            "n_orac_exact_median": float(np.median(exact)) if ok else math.nan,
            "n_orac_exact_min": int(exact.min()) if ok else -1,
            "n_orac_exact_max": int(exact.max()) if ok else -1,
            "n_orac_paper_median": float(np.median(self.n_paper)) if ok else math.nan,
            "coverage_rate": self.coverage_rate,
            "seed": seed,
        }


@dataclass
class TrialSet:
    config: BenchConfig
    cells: list[CellResult]

    def cell(self, amplitude: float, ell: int) -> CellResult:
        for c in self.cells:
            if c.amplitude == amplitude and c.ell == ell:
                return c
        raise KeyError((amplitude, ell))

    def rows(self) -> list[dict]:
        return [c.row(self.config.master_seed) for c in self.cells]

    def by_amplitude(self) -> dict[float, list[CellResult]]:
        out: dict[float, list[CellResult]] = {}
        for c in self.cells:
            out.setdefault(c.amplitude, []).append(c)
        return out


@dataclass(frozen=True)
class ScalingFit:
    intercept_b: float
    residual_rms: float
    free_slope: float
    free_intercept: float = math.nan
    n_points: int = 0


def run_cell(config: BenchConfig, amplitude: float, ell: int) -> CellResult:
    theta = attenuate(amplitude)
    est = config.estimator_config(ell)
    a_key = float_key(amplitude)
    records = []
    for t in range(config.trials):
        rng = substream(config.master_seed, a_key, ell, t)
        try:
            arr = run_trial(theta, est, rng, config.backend)
        except DegenerateNuError as exc:
            records.append(TrialRecord(t, math.nan, -1, -1, -1, False, False, failure=str(exc)))
            continue
        res = result_from_arrays(arr, est)
        diag = trace_diagnostics(res, theta)
        records.append(TrialRecord(
            trial=t,
            error=abs(4 * math.sin(res.theta_hat) - amplitude),
            n_orac_exact=res.exact_q_calls,
            n_orac_paper=res.paper_q_calls,
            j0=res.j0,
            covered=diag.final_covered,
            all_pass=diag.all_pass,
        ))
    return CellResult(amplitude, ell, config.delta_c, config.percentile, records)


def _run_cell_args(args):
    return run_cell(*args)


def run_bench(config: BenchConfig, workers: int = 1) -> TrialSet:
    """Run ``config.trials`` seeded trials for every ``(amplitude, ell)`` cell."""
    jobs = [(config, a, ell) for a in config.amplitudes for ell in config.ells]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_run_cell_args, jobs))
    else:
        cells = [run_cell(*job) for job in jobs]
    return TrialSet(config, cells)


def quantile_error(errors: Sequence[float], q: float) -> float:
    """Smallest error ``e`` such that at least ``q N`` of the errors are ``<= e``."""
    if len(errors) == 0:
        raise DomainError("quantile of an empty error list")
    if not 0.0 < q < 1.0:
        raise DomainError(f"q must lie in (0, 1), got {q!r}")
    ordered = sorted(float(e) for e in errors)
    k = max(1, math.ceil(q * len(ordered)))
    return ordered[k - 1]


def fit_scaling(points: Iterable[tuple[float, float]]) -> ScalingFit:
    """Fit ``log10 N = -log10 eps + b`` by least squares; also refit the slope freely."""
    pts = list(points)
    if len(pts) < 2:
        raise DomainError("need at least two points to fit")
    eps = np.array([p[0] for p in pts], dtype=float)
    n = np.array([p[1] for p in pts], dtype=float)
    if np.any(eps <= 0) or np.any(n <= 0):
        raise DomainError("fit points must be positive")
    x, y = np.log10(eps), np.log10(n)
    b = float(np.mean(y + x))
    rms = float(np.sqrt(np.mean((y - (b - x)) ** 2)))
    if np.ptp(x) > 0:
        slope, intercept = (float(v) for v in np.polyfit(x, y, 1))
    else:
        slope = intercept = math.nan
    return ScalingFit(b, rms, slope, intercept, len(pts))


def fit_all(tset: TrialSet) -> dict[float, ScalingFit]:
    """One fit per amplitude over cells with a positive error quantile."""
    fits = {}
    for a, cells in tset.by_amplitude().items():
        pts = [(c.err_q, float(np.median(c.n_exact))) for c in cells if c.ok and c.err_q > 0]
        if len(pts) >= 2:
            fits[a] = fit_scaling(pts)
    return fits


# --- invariant checks used by the acceptance suite and `verify` ---------------

def coverage_floor(ell: int, j0: int, delta_c: float, trials: int) -> float:
    """``1 - (2 ell - j0) delta_c`` less three binomial standard deviations."""
    p = max(0.0, 1 - (2 * ell - j0) * delta_c)
    return p - 3 * math.sqrt(p * (1 - p) / trials)


def accounting_violations(tset: TrialSet) -> list[str]:
    """Trials whose worst-case-convention count exceeds the staged or closed-form query bound."""
    out = []
    for cell in tset.cells:
        est = tset.config.estimator_config(cell.ell)
        t1 = theorem1_bound(error_for_ell(cell.ell), 2 * cell.ell * cell.delta_c)
        for r in cell.ok:
            staged = staged_count(cell.ell, r.j0, est.n_shot_first, est.n_shot_second)
            if r.n_orac_paper > staged or r.n_orac_paper > t1:
                out.append(f"a={cell.amplitude} ell={cell.ell} trial={r.trial}: "
                           f"{r.n_orac_paper} > min({staged}, {t1:.6g})")
    return out


def median_worst_case_violations(tset: TrialSet) -> list[tuple[float, int]]:
    return [
        (c.amplitude, c.ell) for c in tset.cells
        if c.ok and np.median(c.n_exact) > worst_case_count(c.ell, c.delta_c)
    ]


# --- export -------------------------------------------------------------------

def _fmt(name: str, value) -> str:
    if name in _INT_COLUMNS:
        return str(int(value))
    return format(float(value), ".17g")


def to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in rows:
        w.writerow([_fmt(k, row[k]) for k in CSV_HEADER])
    return buf.getvalue()


def read_csv(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise DomainError(f"unexpected CSV header {reader.fieldnames!r}")
        return [
            {k: int(v) if k in _INT_COLUMNS else float(v) for k, v in row.items()}
            for row in reader
        ]


def to_json_document(tset: TrialSet, fits: dict[float, ScalingFit]) -> dict:
    cfg = asdict(tset.config)
    cfg["amplitudes"] = list(cfg["amplitudes"])
    doc = {
        "config": cfg,
        "cells": [
            {**row, "first_stage_only": c.first_stage_only, "failures": c.failures,
             "all_pass_rate": c.all_pass_rate}
            for c, row in zip(tset.cells, tset.rows())
        ],
        "fits": {repr(a): asdict(f) for a, f in fits.items()},
    }
    if tset.config.keep_trials:
        doc["trials"] = [
            {"amplitude": c.amplitude, "ell": c.ell, **asdict(r)}
            for c in tset.cells for r in c.records
        ]
    return doc


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def export(tset: TrialSet, fits: dict[float, ScalingFit], fmt: str, path: str | Path) -> None:
    """Write the sweep as ``csv``, ``json`` or ``svg``; raises OSError if ``path`` is unwritable."""
    path = Path(path)
    if fmt == "csv":
        path.write_text(to_csv(tset.rows()))
    elif fmt == "json":
        path.write_text(json.dumps(_json_safe(to_json_document(tset, fits)), indent=2) + "\n")
    elif fmt == "svg":
        write_svg(tset, fits, path)
    else:
        raise DomainError(f"unknown export format {fmt!r}")


def write_svg(tset: TrialSet, fits: dict[float, ScalingFit], path: str | Path) -> None:
    """Log-log panels of error quantile vs median Grover calls, one per amplitude."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "fae"
    groups = tset.by_amplitude()
    ncols = 2 if len(groups) > 1 else 1
    nrows = math.ceil(len(groups) / ncols)
    fig, axes = plt.subplots(nrows, ncols, figsize=(5.5 * ncols, 4.2 * nrows), squeeze=False)
    for ax in axes.flat[len(groups):]:
        ax.set_visible(False)
    for ax, (a, cells) in zip(axes.flat, groups.items()):
        pts = [(c.err_q, float(np.median(c.n_exact)), c) for c in cells if c.ok and c.err_q > 0]
        if pts:
            ax.scatter([p[0] for p in pts], [p[1] for p in pts], color="tab:green", zorder=3)
            for err, n, c in pts:
                label = "First Stage Only" if c.first_stage_only else f"j0={c.j0_mode}"
                ax.annotate(label, (err, n), textcoords="offset points", xytext=(4, 4), fontsize=7)
        if a in fits:
            xs = np.array([min(p[0] for p in pts), max(p[0] for p in pts)])
            ax.plot(xs, 10 ** fits[a].intercept_b / xs, color="tab:blue",
                    label=f"b = {fits[a].intercept_b:.3f}")
            ax.legend(loc="upper right", fontsize=8)
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel(f"estimation error ({tset.config.percentile:.0%} quantile)")
        ax.set_ylabel("Grover calls (median)")
        ax.set_title(f"amplitude = {a:g}")
        ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
