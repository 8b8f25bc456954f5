"""Monte Carlo power study on equicorrelated Gaussian test statistics.

Each replication draws T_i = sqrt(rho)*Z0 + sqrt(1-rho)*Z_i + mu_i (one
common factor, exact equicorrelated covariance), converts to two-sided
Gaussian p-values and applies every configured procedure. True nulls occupy
the first ``true_count`` coordinates (mu = 0), the rest sit at ``effect``.

Replication r consumes its own counter block of the Philox stream (key =
seed, counter = r * 2**128), so results are bit-identical no matter how
replications are batched or threaded; accumulation happens on per-replication
arrays with a fixed layout.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.special import erfc

from .procedures import ProcedureSpec, feasible_constants, standard_roster

__all__ = [
    "SimConfig",
    "CellStats",
    "SimReport",
    "default_true_counts",
    "sample_statistics",
    "two_sided_p",
    "run_study",
]

_SQRT2 = math.sqrt(2.0)
_BATCH = 2048


def default_true_counts(n: int) -> tuple[int, ...]:
    """Quarter-point grid {0, n/4, n/2, 3n/4, n}, rounded and deduplicated."""
    return tuple(sorted({0, round(n / 4), round(n / 2), round(3 * n / 4), n}))


@dataclass(frozen=True)
class SimConfig:
    """One study: a single n, grids over true counts and effect sizes, and a
    procedure roster (the ten-procedure standard set when omitted)."""

    n: int
    true_counts: tuple[int, ...] = ()
    effects: tuple[float, ...] = (0.1, 1.0, 3.0)
    rho: float = 0.5
    reps: int = 20000
    alpha: float = 0.5
    gamma: float = 0.05
    fdr_level: float = 0.05
    seed: int = 0
    procedures: tuple[ProcedureSpec, ...] | None = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be positive")
        if not self.true_counts:
            object.__setattr__(self, "true_counts", default_true_counts(self.n))
        if any(not 0 <= t <= self.n for t in self.true_counts):
            raise ValueError("true counts must lie in 0..n")
        if not self.effects:
            raise ValueError("at least one effect size is required")
        if any(not math.isfinite(d) for d in self.effects):
            raise ValueError("effect sizes must be finite")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError("rho must lie in [0, 1)")
        if self.reps < 1:
            raise ValueError("reps must be positive")
        if not 0.0 < self.alpha < 1.0 or not 0.0 <= self.gamma < 1.0:
            raise ValueError("alpha must lie in (0,1) and gamma in [0,1)")

    def roster(self) -> tuple[ProcedureSpec, ...]:
        if self.procedures is not None:
            return self.procedures
        return standard_roster(self.n, gamma=self.gamma, alpha=self.alpha,
                               fdr_level=self.fdr_level)


@dataclass(frozen=True)
class CellStats:
    """Estimates for one (true_count, effect, procedure) cell.

    ``avg_power`` is NaN when every hypothesis is null (0/0 proportion);
    standard errors use the population variance, so se <= 0.5/sqrt(reps).
    ``containment_violations`` counts replications where a modified
    procedure rejected less than its unmodified parent (None for procedures
    without a parent)."""

    n: int
    true_count: int
    effect: float
    procedure: str
    avg_power: float
    tail_fdp: float
    fdr: float
    se_power: float
    se_tail: float
    se_fdr: float
    containment_violations: int | None = None


@dataclass(frozen=True)
class SimReport:
    """Per-cell estimates, plus any procedures whose constants could not be
    built (name -> error text); a failure drops only that procedure's
    column, the rest of the study is unaffected."""

    config: SimConfig
    cells: tuple[CellStats, ...] = field(default_factory=tuple)
    failures: tuple[tuple[str, str], ...] = field(default_factory=tuple)


def two_sided_p(t: float) -> float:
    """Two-sided Gaussian p-value 2*(1 - Phi(|t|)) = erfc(|t|/sqrt(2))."""
    if not math.isfinite(t):
        raise ValueError(f"test statistic must be finite, got {t}")
    return float(erfc(abs(t) / _SQRT2))


def _two_sided_p_vec(t: np.ndarray) -> np.ndarray:
    return erfc(np.abs(t) / _SQRT2)


def _mean_vector(n: int, true_count: int, effect: float) -> np.ndarray:
    mu = np.full(n, float(effect))
    mu[:true_count] = 0.0
    return mu


def sample_statistics(n: int, true_count: int, effect: float, rho: float,
                      rng: np.random.Generator) -> np.ndarray:
    """One draw of the test-statistic vector. Consumes n+1 standard normals:
    the common factor first, then the n idiosyncratic terms."""
    if not 0 <= true_count <= n:
        raise ValueError("true_count must lie in 0..n")
    if not 0.0 <= rho < 1.0:
        raise ValueError("rho must lie in [0, 1)")
    z = rng.standard_normal(n + 1)
    return (math.sqrt(rho) * z[0] + math.sqrt(1.0 - rho) * z[1:]
            + _mean_vector(n, true_count, effect))


def _replication_rng(seed: int, rep: int) -> np.random.Generator:
    key = seed & ((1 << 64) - 1)
    return np.random.Generator(np.random.Philox(key=key, counter=rep << 128))


def _procedure_tables(
    config: SimConfig, cache_dir
) -> tuple[list[tuple[str, str, np.ndarray]], list[tuple[str, str]]]:
    """(name, direction, applied thresholds) per procedure, computed once;
    procedures whose constants fail are reported instead of aborting."""
    tables = []
    failures = []
    for spec in config.roster():
        try:
            base = feasible_constants(spec, cache_dir=cache_dir)
        except Exception as exc:  # noqa: BLE001 - isolate the failed column
            failures.append((spec.name, str(exc)))
            continue
        thresholds = np.minimum(spec.alpha * base.values, 1.0)
        tables.append((spec.name, spec.direction, thresholds))
    return tables, failures


def _run_batch(config: SimConfig, tables, truth: np.ndarray, mu: np.ndarray,
               start: int, stop: int, R: dict[str, np.ndarray], V: dict[str, np.ndarray]) -> None:
    n = config.n
    count = stop - start
    z = np.empty((count, n + 1))
    for idx in range(count):
        z[idx] = _replication_rng(config.seed, start + idx).standard_normal(n + 1)
    t = (math.sqrt(config.rho) * z[:, :1]
         + math.sqrt(1.0 - config.rho) * z[:, 1:] + mu)
    p = _two_sided_p_vec(t)
    order = np.argsort(p, axis=1, kind="stable")
    ps = np.take_along_axis(p, order, axis=1)
    false_running = np.cumsum(truth[order], axis=1)
    rows = np.arange(count)
    for name, direction, thr in tables:
        hit = ps <= thr
        if direction == "su":
            any_hit = hit.any(axis=1)
            k = np.where(any_hit, n - np.argmax(hit[:, ::-1], axis=1), 0)
        else:
            k = np.argmax(~hit, axis=1)
            k = np.where(hit.all(axis=1), n, k)
        false_count = np.where(k > 0, false_running[rows, np.maximum(k - 1, 0)], 0)
        R[name][start:stop] = k
        V[name][start:stop] = false_count


def _cell_stats(config: SimConfig, name: str, true_count: int, effect: float,
                R: np.ndarray, V: np.ndarray) -> CellStats:
    reps = config.reps
    fdp = V / np.maximum(R, 1)
    tail = fdp > config.gamma
    if true_count < config.n:
        power = (R - V) / (config.n - true_count)
        avg_power = float(np.mean(power))
        se_power = float(np.std(power)) / math.sqrt(reps)
    else:
        avg_power = se_power = float("nan")
    return CellStats(
        n=config.n,
        true_count=true_count,
        effect=effect,
        procedure=name,
        avg_power=avg_power,
        tail_fdp=float(np.mean(tail)),
        fdr=float(np.mean(fdp)),
        se_power=se_power,
        se_tail=float(np.std(tail)) / math.sqrt(reps),
        se_fdr=float(np.std(fdp)) / math.sqrt(reps),
    )


def run_study(
    config: SimConfig,
    threads: int | None = None,
    cache_dir: str | Path | None = None,
    trace: str | Path | None = None,
) -> SimReport:
    """Run the full grid and estimate power and error rates per procedure.

    ``threads`` only affects throughput (default: all logical cores, or the
    MTBOUNDS_THREADS environment variable); the report is bit-identical for
    any thread count. ``trace`` appends one CSV row per replication and
    procedure with the rejection counts, for debugging."""
    if threads is None:
        threads = int(os.environ.get("MTBOUNDS_THREADS", 0)) or (os.cpu_count() or 1)
    if threads < 1:
        raise ValueError("threads must be positive")
    tables, failures = _procedure_tables(config, cache_dir)
    if not tables:
        raise RuntimeError(f"every procedure failed: {failures}")
    specs = config.roster()
    parents = _parent_labels(specs)
    truth_template = np.zeros(config.n, dtype=bool)
    cells: list[CellStats] = []
    trace_fh = open(trace, "a", encoding="utf-8") if trace is not None else None
    try:
        if trace_fh is not None and trace_fh.tell() == 0:
            trace_fh.write("n,trueCount,d,rep,procedure,R,V\n")
        for true_count in config.true_counts:
            truth = truth_template.copy()
            truth[:true_count] = True
            for effect in config.effects:
                mu = _mean_vector(config.n, true_count, effect)
                R = {name: np.zeros(config.reps, dtype=np.int64) for name, _, _ in tables}
                V = {name: np.zeros(config.reps, dtype=np.int64) for name, _, _ in tables}
                spans = [(s, min(s + _BATCH, config.reps))
                         for s in range(0, config.reps, _BATCH)]
                if threads == 1 or len(spans) == 1:
                    for start, stop in spans:
                        _run_batch(config, tables, truth, mu, start, stop, R, V)
                else:
                    with ThreadPoolExecutor(max_workers=threads) as pool:
                        done = [pool.submit(_run_batch, config, tables, truth, mu,
                                            start, stop, R, V)
                                for start, stop in spans]
                        for fut in done:
                            fut.result()
                for name, _, _ in tables:
                    stats = _cell_stats(config, name, true_count, effect, R[name], V[name])
                    parent = parents.get(name)
                    if parent is not None and parent in R:
                        violations = int(np.count_nonzero(R[name] < R[parent]))
                        stats = replace(stats, containment_violations=violations)
                    cells.append(stats)
                if trace_fh is not None:
                    for name, _, _ in tables:
                        for rep in range(config.reps):
                            trace_fh.write(f"{config.n},{true_count},{effect!r},{rep},"
                                           f"{name},{R[name][rep]},{V[name][rep]}\n")
    finally:
        if trace_fh is not None:
            trace_fh.close()
    return SimReport(config=config, cells=tuple(cells), failures=tuple(failures))


def _parent_labels(specs: tuple[ProcedureSpec, ...]) -> dict[str, str]:
    """Map each modified procedure's name to its unmodified twin's name."""
    out: dict[str, str] = {}
    by_key = {(s.family, s.rate, s.alpha): s.name for s in specs if not s.modified}
    for s in specs:
        if s.modified:
            parent = by_key.get((s.family, s.rate, s.alpha))
            if parent is not None:
                out[s.name] = parent
    return out
