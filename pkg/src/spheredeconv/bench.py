"""Benchmark sweep: MSE tables over n, rate regression, CSV/JSON output.

run_bench drives the two radius estimators over a grid of sample sizes
with seeded replications; both modes consume identical samples per
replication so the known/unknown comparison is paired.  Everything is
deterministic given the BenchSpec base_seed (wall-clock columns aside).
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import sys
from dataclasses import dataclass, fields

import numpy as np

from .charfn import EvalGrid
from .errors import ConfigError, NumericalError
from .estimators import FitConfig, fit_joint, fit_radius_known_density, truncation_level
from .geometry import FourierDensity, fourier_coefficient
from .simulate import derive_seed, generate, scenario

# paper-scale grid; the desk default keeps the suite in minutes
FULL_GRID = (
    100, 200, 300, 400, 500,
    1_000, 2_000, 3_000, 5_000,
    10_000, 50_000, 75_000, 100_000,
    300_000, 500_000, 800_000, 1_000_000,
)
DESK_GRID = (100, 1_000, 10_000)
MODES = ("known_f", "unknown_f")
EMIT_COLUMNS = ("n", "mode", "mse_R", "mse_C", "l2_density_err", "reps", "base_seed", "wall_ms")
TAIL_CUTOFF = 64  # |k| beyond which truth coefficients are treated as zero


@dataclass(frozen=True)
class BenchSpec:
    scenario_id: int
    n_values: tuple = DESK_GRID
    replications: int = 10
    mode: str = "both"
    out_path: str | None = None
    base_seed: int = 0
    fit_overrides: dict | None = None

    def __post_init__(self) -> None:
        if self.scenario_id not in (1, 2, 3, 4):
            raise ConfigError(f"unknown scenario id {self.scenario_id}")
        ns = tuple(int(n) for n in self.n_values)
        if not ns:
            raise ConfigError("n_values must be non-empty")
        if any(n < 50 for n in ns):
            raise ConfigError("sample sizes below 50 are not benchable")
        if list(ns) != sorted(ns):
            raise ConfigError("n_values must be sorted ascending")
        object.__setattr__(self, "n_values", ns)
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if self.mode not in MODES + ("both",):
            raise ConfigError(f"mode must be one of {MODES + ('both',)}")
        if self.fit_overrides:
            allowed = {f.name for f in fields(FitConfig)}
            bad = set(self.fit_overrides) - allowed
            if bad:
                raise ConfigError(f"unknown FitConfig overrides: {sorted(bad)}")

    def modes(self) -> tuple:
        return MODES if self.mode == "both" else (self.mode,)


@dataclass
class BenchRow:
    n: int
    mode: str
    mse_R: float
    mse_C: float
    l2_density_err: float
    reps: int
    base_seed: int
    wall_ms: float
    # diagnostics, not emitted: rate regression wants a robust location
    med_abs_R: float = math.nan
    failures: int = 0


@dataclass(frozen=True)
class RateFit:
    mode: str
    slope: float
    intercept: float
    stderr: float


def _truth_coeffs(density, k_cutoff: int) -> np.ndarray:
    """Truth Fourier coefficients c_{-K}..c_K, zero-padded when the truth
    has fewer and computed by quadrature for callable densities."""
    if isinstance(density, FourierDensity):
        out = np.zeros(2 * k_cutoff + 1, dtype=complex)
        have = density.cutoff
        lo = k_cutoff - min(have, k_cutoff)
        src = density.coeffs[have - min(have, k_cutoff) : have + min(have, k_cutoff) + 1]
        out[lo : lo + src.size] = src
        return out
    ks = np.arange(-k_cutoff, k_cutoff + 1)
    return np.array([fourier_coefficient(density, int(k)) for k in ks])


def _density_tail_mass(density, level: int) -> float:
    """sum over level < |k| <= TAIL_CUTOFF of |c_k|^2 for the truth."""
    if isinstance(density, FourierDensity):
        have = density.cutoff
        if have <= level:
            return 0.0
        mid = have
        tail = np.concatenate([density.coeffs[: mid - level], density.coeffs[mid + level + 1 :]])
        return float(np.sum(np.abs(tail) ** 2))
    total = 0.0
    for k in range(level + 1, TAIL_CUTOFF + 1):
        total += 2.0 * abs(fourier_coefficient(density, k)) ** 2
    return total


def run_bench(spec: BenchSpec, progress: bool = False) -> list:
    """Run the sweep; one row per (n, mode), deterministic given base_seed.

    Replications run sequentially with seeds derived from (base_seed,
    scenario, n, replication); a replication whose fit raises is recorded
    as a failure and excluded from that cell's aggregates.
    """
    scn = scenario(spec.scenario_id)
    grid = EvalGrid.build(dim=2, nu_est=0.5)
    rows = []
    for n in spec.n_values:
        level = truncation_level(n)
        k_cut = max(4, level)
        base_kwargs = dict(k_cutoff=k_cut, n_trunc=min(level, k_cut))
        base_kwargs.update(spec.fit_overrides or {})
        cfg = FitConfig(**base_kwargs)
        level = min(level, cfg.k_cutoff)
        truth = _truth_coeffs(scn.density, cfg.k_cutoff)
        tail_sq = _density_tail_mass(scn.density, level)
        cell = {
            mode: dict(sq_r=[], sq_c=[], sq_f=[], wall=0.0, failures=0)
            for mode in spec.modes()
        }
        for rep in range(spec.replications):
            seed = derive_seed(spec.base_seed, spec.scenario_id, n, rep)
            sample = generate(scn, n, seed)
            for mode in spec.modes():
                acc = cell[mode]
                try:
                    if mode == "known_f":
                        report = fit_radius_known_density(sample, scn.density, cfg, grid)
                    else:
                        report = fit_joint(sample, cfg, grid)
                except (NumericalError, ValueError) as exc:
                    acc["failures"] += 1
                    if progress:
                        print(f"  [fail] n={n} mode={mode} rep={rep}: {exc}", file=sys.stderr)
                    continue
                acc["sq_r"].append((report.r_hat - scn.r_star) ** 2)
                acc["sq_c"].append(float(np.sum((report.c_hat - scn.c_star) ** 2)))
                if mode == "known_f":
                    acc["sq_f"].append(0.0)
                else:
                    mid = report.f_hat_coeffs.size // 2
                    low = report.f_hat_coeffs[mid - level : mid + level + 1]
                    ref = truth[cfg.k_cutoff - level : cfg.k_cutoff + level + 1]
                    acc["sq_f"].append(float(np.sum(np.abs(low - ref) ** 2)) + tail_sq)
                acc["wall"] += report.wall_time * 1000.0
        for mode in spec.modes():
            acc = cell[mode]
            ok = len(acc["sq_r"])
            rows.append(
                BenchRow(
                    n=n,
                    mode=mode,
                    mse_R=float(np.mean(acc["sq_r"])) if ok else math.nan,
                    mse_C=float(np.mean(acc["sq_c"])) if ok else math.nan,
                    l2_density_err=float(np.mean(acc["sq_f"])) if ok else math.nan,
                    reps=spec.replications,
                    base_seed=spec.base_seed,
                    wall_ms=acc["wall"] / ok if ok else math.nan,
                    med_abs_R=float(np.median(np.sqrt(acc["sq_r"]))) if ok else math.nan,
                    failures=acc["failures"],
                )
            )
            if progress:
                r = rows[-1]
                print(f"n={r.n} {r.mode}: mse_R={r.mse_R:.3e} ({r.failures} failures)", file=sys.stderr)
    return rows


def rate_regression(rows) -> dict:
    """OLS of log(median |R_hat - R*|) on log n, one fit per mode.

    Needs >= 3 distinct n per mode and positive finite medians; the
    standard error uses the usual residual variance with m - 2 dof.
    """
    out = {}
    for mode in MODES:
        pts = [(row.n, row.med_abs_R) for row in rows if row.mode == mode]
        if not pts:
            continue
        if len({n for n, _ in pts}) < 3:
            raise ValueError(f"rate regression for {mode} needs >= 3 distinct n")
        meds = np.array([m for _, m in pts])
        if not np.all(np.isfinite(meds)) or np.any(meds <= 0.0):
            raise ValueError(f"rate regression for {mode}: medians must be positive finite")
        x = np.log([n for n, _ in pts])
        y = np.log(meds)
        slope, intercept = np.polyfit(x, y, 1)
        resid = y - (slope * x + intercept)
        dof = len(pts) - 2
        sxx = float(np.sum((x - x.mean()) ** 2))
        stderr = math.sqrt(float(np.sum(resid**2)) / dof / sxx) if dof > 0 else 0.0
        out[mode] = RateFit(mode=mode, slope=float(slope), intercept=float(intercept), stderr=stderr)
    if not out:
        raise ValueError("no rows to regress")
    return out


def _format_value(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def emit(rows, path: str, fmt: str = "csv") -> str:
    """Write rows to path in the stable column order; returns the path."""
    if fmt not in ("csv", "json"):
        raise ConfigError(f"unknown output format {fmt!r}")
    try:
        with open(path, "w", newline="") as handle:
            if fmt == "csv":
                writer = csv.writer(handle)
                writer.writerow(EMIT_COLUMNS)
                for row in rows:
                    writer.writerow([_format_value(getattr(row, col)) for col in EMIT_COLUMNS])
            else:
                payload = [
                    {col: getattr(row, col) for col in EMIT_COLUMNS} for row in rows
                ]
                json.dump(payload, handle, indent=1)
                handle.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write benchmark output to {path!r}: {exc}") from exc
    return path


def read_rows(path: str, fmt: str = "csv") -> list:
    """Parse a file written by emit back into BenchRow values."""
    try:
        with open(path, newline="") as handle:
            if fmt == "csv":
                reader = csv.DictReader(handle)
                raw = list(reader)
            elif fmt == "json":
                raw = json.load(handle)
            else:
                raise ConfigError(f"unknown output format {fmt!r}")
    except OSError as exc:
        raise OSError(f"cannot read benchmark output from {path!r}: {exc}") from exc
    rows = []
    for rec in raw:
        rows.append(
            BenchRow(
                n=int(rec["n"]),
                mode=str(rec["mode"]),
                mse_R=float(rec["mse_R"]),
                mse_C=float(rec["mse_C"]),
                l2_density_err=float(rec["l2_density_err"]),
                reps=int(rec["reps"]),
                base_seed=int(rec["base_seed"]),
                wall_ms=float(rec["wall_ms"]),
            )
        )
    return rows


def determinism_hash(rows) -> str:
    """SHA-256 over every emitted column except wall_ms."""
    stable = [col for col in EMIT_COLUMNS if col != "wall_ms"]
    digest = hashlib.sha256()
    for row in rows:
        line = ",".join(_format_value(getattr(row, col)) for col in stable)
        digest.update(line.encode())
        digest.update(b"\n")
    return digest.hexdigest()
