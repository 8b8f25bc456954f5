"""Step-up/step-down testing procedures, decision statistics and adjusted
p-values.

Hypotheses are identified by their 1-based position in the input p-value
vector. Sorting is stable on (value, original index), so ties are resolved
reproducibly; rejection counts do not depend on the tie order because the
step rules only look at order statistics.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import lp
from .constants import (
    CriticalVector,
    Family,
    bh_constants,
    by_constants,
    gr_sd_constants,
    lr_fdp_constants,
    lr_kfwer_constants,
    rescale,
)
from .matrices import ErrorRateSpec, associated_matrix

__all__ = [
    "PValueVector",
    "DecisionSet",
    "AdjustedPValues",
    "step_up",
    "step_down",
    "adjusted_pvalues",
    "fdp_stats",
    "ProcedureSpec",
    "feasible_constants",
    "run_procedure",
    "standard_roster",
]

FAMILIES = ("bh", "rs", "by", "gr")


@dataclass(frozen=True)
class PValueVector:
    """Raw p-values with optional hypothesis labels and (for simulation or
    validation) the truth indicator, True meaning the null holds."""

    values: np.ndarray
    labels: tuple[str, ...] | None = None
    truth: np.ndarray | None = None

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("p-values must form a nonempty 1-D array")
        if np.any(~np.isfinite(v)) or np.any(v < 0) or np.any(v > 1):
            raise ValueError("p-values must lie in [0, 1]")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.labels is not None and len(self.labels) != v.size:
            raise ValueError("labels length must match values")
        if self.truth is not None:
            t = np.asarray(self.truth, dtype=bool)
            if t.shape != v.shape:
                raise ValueError("truth length must match values")
            t.setflags(write=False)
            object.__setattr__(self, "truth", t)

    @property
    def n(self) -> int:
        return self.values.size

    def order(self) -> np.ndarray:
        """Stable ascending sort permutation (0-based original indices)."""
        return np.argsort(self.values, kind="stable")


@dataclass(frozen=True)
class DecisionSet:
    """Outcome of one procedure application.

    ``rejected`` holds 1-based original hypothesis indices; ``cutoff_index``
    is the number of rejected order statistics (0 = nothing rejected).
    ``n_false``/``fdp`` are filled only when the truth is known; the FDP is 0
    when nothing is rejected.
    """

    rejected: frozenset[int]
    cutoff_index: int
    n_rejected: int
    n_false: int | None = None
    fdp: float | None = None


@dataclass(frozen=True)
class AdjustedPValues:
    """Adjusted p-values aligned with the sorted p-value order.

    ``values[i-1]`` belongs to the hypothesis with the i-th smallest raw
    p-value; ``order[i-1]`` is that hypothesis's 0-based original index.
    """

    values: np.ndarray
    order: np.ndarray

    def __post_init__(self) -> None:
        for name in ("values", "order"):
            a = np.asarray(getattr(self, name))
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    def in_original_order(self) -> np.ndarray:
        out = np.empty_like(self.values)
        out[self.order] = self.values
        return out


def _applied_thresholds(p: PValueVector, c: CriticalVector) -> np.ndarray:
    if c.n != p.n:
        raise ValueError(f"constants have length {c.n}, p-values {p.n}")
    return np.minimum(c.values, 1.0)  # thresholds above 1 are vacuous


def _decision(p: PValueVector, order: np.ndarray, k: int) -> DecisionSet:
    rejected = frozenset(int(j) + 1 for j in order[:k])
    n_false = fdp = None
    if p.truth is not None:
        n_false = int(np.count_nonzero(p.truth[order[:k]]))
        fdp = n_false / k if k else 0.0
    return DecisionSet(rejected=rejected, cutoff_index=k, n_rejected=k,
                       n_false=n_false, fdp=fdp)


def step_up(p: PValueVector, c: CriticalVector) -> DecisionSet:
    """Reject the k smallest p-values, k the largest index whose order
    statistic sits at or below its constant; nothing if no index qualifies."""
    thr = _applied_thresholds(p, c)
    order = p.order()
    hits = np.flatnonzero(p.values[order] <= thr)
    k = int(hits[-1]) + 1 if hits.size else 0
    return _decision(p, order, k)


def step_down(p: PValueVector, c: CriticalVector) -> DecisionSet:
    """Reject the longest prefix of sorted p-values that stays at or below
    the constants throughout; nothing if the smallest p-value already
    exceeds its constant."""
    thr = _applied_thresholds(p, c)
    order = p.order()
    ok = p.values[order] <= thr
    misses = np.flatnonzero(~ok)
    k = int(misses[0]) if misses.size else p.n
    return _decision(p, order, k)


def adjusted_pvalues(p: PValueVector, c: CriticalVector, direction: str) -> AdjustedPValues:
    """Generic adjusted p-values: the smallest alpha at which the hypothesis
    is rejected by the procedure family alpha*c.

    Step-up takes the running suffix-minimum of pv_(j)/c_j, step-down the
    running prefix-maximum, both clipped to 1. A zero constant makes the
    ratio +inf (then clipped): hypotheses at such positions are only ever
    rejected through a later (step-up) position.
    """
    if direction not in ("su", "sd"):
        raise ValueError(f"direction must be 'su' or 'sd', got {direction!r}")
    if c.n != p.n:
        raise ValueError(f"constants have length {c.n}, p-values {p.n}")
    order = p.order()
    ps = p.values[order]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(c.values > 0, ps / c.values, np.inf)
    ratio = np.where(np.isnan(ratio), np.inf, ratio)  # 0/0 under the same convention
    if direction == "su":
        adj = np.minimum.accumulate(ratio[::-1])[::-1]
    else:
        adj = np.maximum.accumulate(ratio)
    return AdjustedPValues(values=np.minimum(adj, 1.0), order=order)


def fdp_stats(decision: DecisionSet, truth) -> tuple[int, int, float]:
    """(false rejections, rejections, false discovery proportion) given the
    truth indicator; the FDP is 0 when nothing is rejected."""
    t = np.asarray(truth, dtype=bool)
    v = sum(1 for j in decision.rejected if t[j - 1])
    r = decision.n_rejected
    return v, r, (v / r if r else 0.0)


@dataclass(frozen=True)
class ProcedureSpec:
    """A fully parameterized procedure.

    Families ``bh`` and ``rs`` are floors for an error-rate matrix: they are
    rescaled into its feasible set and optionally LP-improved, then applied
    at level ``alpha`` in the matrix's stepping direction. Families ``by``
    (step-up) and ``gr`` (step-down) are the pre-normalized FDR procedures;
    they take no matrix and cannot be modified.
    """

    family: str
    n: int
    alpha: float
    rate: ErrorRateSpec | None = None
    modified: bool = False
    label: str | None = None

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.family in ("by", "gr"):
            if self.rate is not None:
                raise ValueError(f"family {self.family!r} does not take an error-rate matrix")
            if self.modified:
                raise ValueError(f"family {self.family!r} has no modified variant")
        else:
            if self.rate is None:
                raise ValueError(f"family {self.family!r} requires an error-rate spec")
            if self.rate.n != self.n:
                raise ValueError(f"rate spec has n={self.rate.n}, procedure has n={self.n}")

    @property
    def direction(self) -> str:
        if self.family == "by":
            return "su"
        if self.family == "gr":
            return "sd"
        return self.rate.direction

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        if self.family == "by":
            return "FDR-BY-SU"
        if self.family == "gr":
            return "FDR-GR-SD"
        kind = "FDP" if self.rate.rate.is_fdp else f"kFWER(k={self.rate.k})"
        base = f"{kind}-{self.family.upper()}-{self.direction.upper()}"
        return f"{base} (mod)" if self.modified else base


def _floor_constants(spec: ProcedureSpec) -> CriticalVector:
    if spec.family == "bh":
        return bh_constants(spec.n)
    if spec.rate.rate.is_fdp:
        return lr_fdp_constants(spec.n, spec.rate.gamma)
    return lr_kfwer_constants(spec.n, spec.rate.k)


def feasible_constants(spec: ProcedureSpec, cache_dir: str | Path | None = None) -> CriticalVector:
    """The level-1 constants of the procedure: rescaled (and, if requested,
    LP-improved) for bh/rs, the pre-normalized family vector for by/gr.
    Multiply by alpha to obtain the applied thresholds."""
    if spec.family == "by":
        return by_constants(spec.n)
    if spec.family == "gr":
        return gr_sd_constants(spec.n)
    matrix = associated_matrix(spec.rate)
    floor, _ = rescale(_floor_constants(spec), matrix)
    if not spec.modified:
        return floor
    problem = lp.build_problem(matrix, floor)
    solution = (lp.solve_cached(problem, cache_dir) if cache_dir is not None
                else lp.solve(problem))
    if solution.status is not lp.SolveStatus.OPTIMAL:
        raise RuntimeError(f"constant optimization failed: {solution.status.value}")
    return solution.xi


def run_procedure(
    p: PValueVector,
    spec: ProcedureSpec,
    cache_dir: str | Path | None = None,
) -> tuple[DecisionSet, AdjustedPValues]:
    """Apply the procedure to raw p-values.

    Decisions come from the thresholds alpha * feasible constants; adjusted
    p-values use the unscaled constants, so "adjusted <= alpha" matches the
    rejection decision at every level.
    """
    if p.n != spec.n:
        raise ValueError(f"procedure is for n={spec.n}, got {p.n} p-values")
    base = feasible_constants(spec, cache_dir=cache_dir)
    thresholds = base.scaled(spec.alpha)
    apply = step_up if spec.direction == "su" else step_down
    return apply(p, thresholds), adjusted_pvalues(p, base, spec.direction)


def standard_roster(
    n: int,
    gamma: float = 0.05,
    alpha: float = 0.5,
    fdr_level: float = 0.05,
) -> tuple[ProcedureSpec, ...]:
    """The ten-procedure comparison set: the four rescaled tail-FDP
    procedures with their modified variants (level ``alpha``, parameter
    ``gamma``) plus the BY step-up and GR step-down FDR procedures at
    ``fdr_level``."""
    procs: list[ProcedureSpec] = []
    for family in ("bh", "rs"):
        for factory in (ErrorRateSpec.fdp_su, ErrorRateSpec.fdp_sd):
            rate = factory(n, gamma)
            for modified in (False, True):
                procs.append(ProcedureSpec(family=family, n=n, alpha=alpha,
                                           rate=rate, modified=modified))
    procs.append(ProcedureSpec(family="by", n=n, alpha=fdr_level))
    procs.append(ProcedureSpec(family="gr", n=n, alpha=fdr_level))
    return tuple(procs)
