"""Bound matrices for generalized multiple-testing error rates.

Each supported error rate (kFWER or tail-FDP, step-up or step-down) has an
associated nonnegative n-by-n matrix A. Row i of A turns a vector c of
critical constants into an upper bound (A @ c)[i-1] on the error rate when
exactly i null hypotheses are true, valid under arbitrary dependence of the
p-values. Constants with ``max(A @ c) <= 1`` therefore control the rate at
level alpha once multiplied by alpha.

Rows and columns are 1-based in every public field and docstring (row i =
number of true hypotheses, column j = index of the j-th critical constant);
the raw ``entries`` array uses ordinary 0-based numpy indexing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "Rate",
    "ErrorRateSpec",
    "AssociatedMatrix",
    "FdpSuAux",
    "FdpSdAux",
    "kfwer_su_matrix",
    "kfwer_sd_matrix",
    "fdp_su_aux",
    "fdp_su_matrix",
    "fdp_sd_aux",
    "fdp_sd_matrix",
    "associated_matrix",
    "bound_vector",
    "is_feasible",
    "row_events",
]


class Rate(str, Enum):
    """Error rate plus stepping direction targeted by a matrix or procedure."""

    KFWER_SU = "kfwer-su"
    KFWER_SD = "kfwer-sd"
    FDP_SU = "fdp-su"
    FDP_SD = "fdp-sd"

    @property
    def is_fdp(self) -> bool:
        return self in (Rate.FDP_SU, Rate.FDP_SD)

    @property
    def direction(self) -> str:
        """Stepping direction, ``"su"`` or ``"sd"``."""
        return "su" if self in (Rate.KFWER_SU, Rate.FDP_SU) else "sd"


@dataclass(frozen=True)
class ErrorRateSpec:
    """Which error rate a matrix or procedure targets, with its parameter.

    kFWER variants carry ``k`` (1 <= k <= n), FDP variants carry ``gamma``
    (0 <= gamma < 1). ``n`` is the number of hypotheses.
    """

    rate: Rate
    n: int
    k: int | None = None
    gamma: float | None = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        if self.rate.is_fdp:
            if self.gamma is None:
                raise ValueError(f"{self.rate.value} requires gamma")
            if self.k is not None:
                raise ValueError(f"{self.rate.value} does not take k")
            if not 0.0 <= self.gamma < 1.0:
                raise ValueError(f"gamma must lie in [0, 1), got {self.gamma}")
        else:
            if self.k is None:
                raise ValueError(f"{self.rate.value} requires k")
            if self.gamma is not None:
                raise ValueError(f"{self.rate.value} does not take gamma")
            if not 1 <= self.k <= self.n:
                raise ValueError(f"k must satisfy 1 <= k <= n={self.n}, got {self.k}")

    @classmethod
    def kfwer_su(cls, n: int, k: int) -> "ErrorRateSpec":
        return cls(Rate.KFWER_SU, n, k=k)

    @classmethod
    def kfwer_sd(cls, n: int, k: int) -> "ErrorRateSpec":
        return cls(Rate.KFWER_SD, n, k=k)

    @classmethod
    def fdp_su(cls, n: int, gamma: float) -> "ErrorRateSpec":
        return cls(Rate.FDP_SU, n, gamma=gamma)

    @classmethod
    def fdp_sd(cls, n: int, gamma: float) -> "ErrorRateSpec":
        return cls(Rate.FDP_SD, n, gamma=gamma)

    @property
    def direction(self) -> str:
        return self.rate.direction

    def param_text(self) -> str:
        """Human/CSV-header form, e.g. ``rate=fdp-su n=50 gamma=0.05``."""
        if self.rate.is_fdp:
            return f"rate={self.rate.value} n={self.n} gamma={self.gamma!r}"
        return f"rate={self.rate.value} n={self.n} k={self.k}"


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class AssociatedMatrix:
    """The nonnegative bound matrix for one error-rate spec.

    ``entries[i-1, j-1]`` is the coefficient of constant c_j in the bound on
    the error rate when i hypotheses are true. Entries are immutable.
    """

    spec: ErrorRateSpec
    entries: np.ndarray

    def __post_init__(self) -> None:
        e = np.asarray(self.entries, dtype=float)
        if e.shape != (self.spec.n, self.spec.n):
            raise ValueError(f"entries must be {self.spec.n}x{self.spec.n}, got {e.shape}")
        object.__setattr__(self, "entries", _readonly(e))

    @property
    def n(self) -> int:
        return self.spec.n


@dataclass(frozen=True)
class FdpSuAux:
    """Per-row index machinery behind the FDP step-up matrix.

    For row (true count) ``row``:

    - ``usable``: largest column l whose minimal order-statistic level
      floor(gamma*l)+1 still fits below ``row``; columns past it never occur
      in the bound for this row.
    - ``levels``: for columns l = 1..usable, the order-statistic level paired
      with column l. Starts at 1, nondecreasing, steps of at most 1.
    - ``n_events``: number of distinct levels (= levels[-1]).
    - ``event_cols``: for each level k = 1..n_events, the largest column
      carrying that level; these are the columns with nonzero matrix entries.
    """

    row: int
    usable: int
    n_events: int
    event_cols: np.ndarray
    levels: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "event_cols", _readonly(np.asarray(self.event_cols, dtype=int)))
        object.__setattr__(self, "levels", _readonly(np.asarray(self.levels, dtype=int)))


@dataclass(frozen=True)
class FdpSdAux:
    """Per-row index machinery behind the FDP step-down matrix.

    - ``col_map``: for bound level l = 1..floor(gamma*n)+1, the column index
      min(n, n+l-row, ceil(l/gamma)-1) whose constant enters the bound at
      level l (the gamma term drops out when gamma == 0).
    - ``n_events``: number of levels that actually contribute.
    - ``columns``: distinct values of ``col_map`` (the only columns that can
      receive weight in this row).
    """

    row: int
    col_map: np.ndarray
    n_events: int
    columns: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        cm = _readonly(np.asarray(self.col_map, dtype=int))
        object.__setattr__(self, "col_map", cm)
        object.__setattr__(self, "columns", frozenset(int(c) for c in cm))


def kfwer_su_matrix(n: int, k: int) -> AssociatedMatrix:
    """Bound matrix for the k-familywise error rate of step-up procedures.

    Row i is zero below the diagonal band: for i >= k the entries are
    i/(u*(u+1)) at columns j = n+k-i .. n-1 (u = j-n+i) and 1 at column n;
    rows i < k are identically zero.
    """
    spec = ErrorRateSpec.kfwer_su(n, k)
    A = np.zeros((n, n))
    for i in range(k, n + 1):
        u = np.arange(k, i, dtype=float)  # u = j-n+i for j = n+k-i .. n-1
        cols = u.astype(int) + n - i
        A[i - 1, cols - 1] = i / (u * (u + 1.0))
        A[i - 1, n - 1] = 1.0
    return AssociatedMatrix(spec, A)


def kfwer_sd_matrix(n: int, k: int) -> AssociatedMatrix:
    """Bound matrix for the k-familywise error rate of step-down procedures.

    Single nonzero entry per row i >= k: value i/k at column n-i+k.
    """
    spec = ErrorRateSpec.kfwer_sd(n, k)
    A = np.zeros((n, n))
    for i in range(k, n + 1):
        A[i - 1, n - i + k - 1] = i / k
    return AssociatedMatrix(spec, A)


def _min_levels(gamma: float, n: int) -> np.ndarray:
    """floor(gamma*l)+1 for l = 1..n: the smallest order-statistic level at
    which rejecting down to constant l can push the FDP above gamma."""
    lvals = np.arange(1, n + 1, dtype=float)
    return np.floor(gamma * lvals).astype(int) + 1


def fdp_su_aux(n: int, gamma: float, i: int) -> FdpSuAux:
    """Index machinery for row ``i`` of the FDP step-up matrix."""
    ErrorRateSpec.fdp_su(n, gamma)  # validates n, gamma
    if not 1 <= i <= n:
        raise ValueError(f"row must satisfy 1 <= i <= n={n}, got {i}")
    m = _min_levels(gamma, n)
    usable = int(np.searchsorted(m, i, side="right"))  # m is nondecreasing, m[0] = 1 <= i
    lv = np.arange(1, usable + 1)
    levels = np.maximum(i - n + lv, m[:usable])
    n_events = int(levels[-1])
    # levels is nondecreasing with steps <= 1 and starts at 1, so every level
    # 1..n_events occurs; the last column carrying level k sits at position
    # (count of entries <= k) in 1-based terms.
    event_cols = np.searchsorted(levels, np.arange(1, n_events + 1), side="right")
    return FdpSuAux(row=i, usable=usable, n_events=n_events,
                    event_cols=event_cols, levels=levels)


def fdp_su_matrix(n: int, gamma: float) -> AssociatedMatrix:
    """Bound matrix for the tail false discovery proportion of step-up
    procedures.

    Row i is supported on its event columns: i*(1/k - 1/(k+1)) at the column
    of level k < n_events and i/n_events at the last one.
    """
    spec = ErrorRateSpec.fdp_su(n, gamma)
    A = np.zeros((n, n))
    m = _min_levels(gamma, n)
    for i in range(1, n + 1):
        usable = int(np.searchsorted(m, i, side="right"))
        lv = np.arange(1, usable + 1)
        levels = np.maximum(i - n + lv, m[:usable])
        M = int(levels[-1])
        cols = np.searchsorted(levels, np.arange(1, M + 1), side="right")
        ks = np.arange(1, M + 1, dtype=float)
        coef = i / (ks * (ks + 1.0))  # 1/k - 1/(k+1) without cancellation
        coef[-1] = i / M
        A[i - 1, cols - 1] = coef
    return AssociatedMatrix(spec, A)


def fdp_sd_aux(n: int, gamma: float, i: int) -> FdpSdAux:
    """Index machinery for row ``i`` of the FDP step-down matrix."""
    ErrorRateSpec.fdp_sd(n, gamma)
    if not 1 <= i <= n:
        raise ValueError(f"row must satisfy 1 <= i <= n={n}, got {i}")
    lmax = math.floor(gamma * n) + 1
    lv = np.arange(1, lmax + 1)
    col_map = np.minimum(n, n + lv - i)
    if gamma > 0.0:
        col_map = np.minimum(col_map, np.ceil(lv / gamma).astype(int) - 1)
    n_events = min(lmax, i, math.floor(gamma * ((n - i) / (1.0 - gamma) + 1.0)) + 1)
    return FdpSdAux(row=i, col_map=col_map, n_events=int(n_events))


def fdp_sd_matrix(n: int, gamma: float) -> AssociatedMatrix:
    """Bound matrix for the tail false discovery proportion of step-down
    procedures.

    Row i first receives staircase weights i*(1/j - 1/(j+1)) for levels
    j < n_events and i/n_events at the last level, then each level's weight
    is moved to its mapped column; columns mapped by several levels
    accumulate.
    """
    spec = ErrorRateSpec.fdp_sd(n, gamma)
    A = np.zeros((n, n))
    for i in range(1, n + 1):
        aux = fdp_sd_aux(n, gamma, i)
        N = aux.n_events
        js = np.arange(1, N + 1, dtype=float)
        w = i / (js * (js + 1.0))
        w[-1] = i / N
        np.add.at(A[i - 1], aux.col_map[:N] - 1, w)
    return AssociatedMatrix(spec, A)


def associated_matrix(spec: ErrorRateSpec) -> AssociatedMatrix:
    """Build the matrix for any error-rate spec."""
    if spec.rate is Rate.KFWER_SU:
        return kfwer_su_matrix(spec.n, spec.k)
    if spec.rate is Rate.KFWER_SD:
        return kfwer_sd_matrix(spec.n, spec.k)
    if spec.rate is Rate.FDP_SU:
        return fdp_su_matrix(spec.n, spec.gamma)
    return fdp_sd_matrix(spec.n, spec.gamma)


def _constant_values(c) -> np.ndarray:
    values = getattr(c, "values", c)
    return np.asarray(values, dtype=float)


def bound_vector(matrix: AssociatedMatrix, c) -> np.ndarray:
    """A @ c: component i bounds the error rate when i hypotheses are true.

    ``c`` may be a CriticalVector or a plain array of length n.
    """
    v = _constant_values(c)
    if v.shape != (matrix.n,):
        raise ValueError(f"constants must have length {matrix.n}, got shape {v.shape}")
    return matrix.entries @ v


def is_feasible(matrix: AssociatedMatrix, c, tol: float = 0.0) -> bool:
    """Whether c is nondecreasing, nonnegative and max(A @ c) <= 1 + tol."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    v = _constant_values(c)
    if v.shape != (matrix.n,):
        raise ValueError(f"constants must have length {matrix.n}, got shape {v.shape}")
    if np.any(v < 0) or np.any(np.diff(v) < 0):
        return False
    return float(np.max(matrix.entries @ v)) <= 1.0 + tol


def row_events(spec: ErrorRateSpec, i: int) -> list[tuple[int, int]]:
    """The order-statistic event system whose union row ``i`` bounds.

    Returns (level, column) pairs, both 1-based: when i hypotheses are true,
    the error-rate event for constants c is contained in the union over pairs
    of {(level-th smallest true-null p-value) <= c[column]}, and row i of the
    matrix dotted with c is the generalized Bonferroni bound on that union's
    probability. An empty list means the event is impossible for this row.
    """
    n = spec.n
    if not 1 <= i <= n:
        raise ValueError(f"row must satisfy 1 <= i <= n={n}, got {i}")
    if spec.rate is Rate.KFWER_SU:
        if i < spec.k:
            return []
        return [(l, n - i + l) for l in range(spec.k, i + 1)]
    if spec.rate is Rate.KFWER_SD:
        if i < spec.k:
            return []
        return [(spec.k, n - i + spec.k)]
    if spec.rate is Rate.FDP_SU:
        aux = fdp_su_aux(n, spec.gamma, i)
        return [(k + 1, int(col)) for k, col in enumerate(aux.event_cols)]
    aux = fdp_sd_aux(n, spec.gamma, i)
    return [(l + 1, int(aux.col_map[l])) for l in range(aux.n_events)]
