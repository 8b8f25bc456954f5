"""Linear-programming improvement of feasible critical constants.

Given a bound matrix A and a feasible floor c, the program maximizes
``sum_j a_j xi_j`` (a = weighted column sums of A) over all nondecreasing
xi >= c with ``max(A @ xi) <= 1``. Its optimum dominates the floor
coordinatewise, so the resulting procedure rejects everything the floor
procedure rejects; the objective is the sum of the rows' maximal
significance bounds and serves as a surrogate for power.

The solver is a self-contained dense primal simplex with Bland's
anti-cycling pivot rule, which makes repeated solves bit-identical. The
problem is solved in shifted coordinates z = xi - c: the floor constraints
become the nonnegativity bounds and the all-slack basis is immediately
feasible, so no phase-1 is needed.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .constants import CriticalVector, Family
from .matrices import AssociatedMatrix, bound_vector

__all__ = [
    "SOLVER_VERSION",
    "SolveStatus",
    "InfeasibleFloorError",
    "LPProblem",
    "LPSolution",
    "build_problem",
    "solve",
    "diagnostics",
    "solve_cached",
    "cache_key",
]

SOLVER_VERSION = "bland-simplex-1"
FEASIBILITY_TOL = 1e-9

logger = logging.getLogger(__name__)


class SolveStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    NUMERIC_FAILURE = "numeric-failure"


class InfeasibleFloorError(ValueError):
    """The floor vector violates the bound constraints."""


@dataclass(frozen=True)
class LPProblem:
    """The assembled program: matrix, feasible floor, mean-1 weights, optional
    per-coordinate cap."""

    matrix: AssociatedMatrix
    floor: CriticalVector
    weights: np.ndarray
    cap: float | None = None

    @property
    def n(self) -> int:
        return self.matrix.n

    @property
    def objective_coefficients(self) -> np.ndarray:
        """a_j = sum_i weights_i * A_ij; plain column sums under uniform
        weights."""
        return self.weights @ self.matrix.entries


@dataclass(frozen=True)
class LPSolution:
    """Solver output. ``xi`` is None unless status is OPTIMAL.

    m1 = max xi_i / floor_i over floor_i > 0 (nan if the floor is zero);
    m2 = max (A xi)_i / (A floor)_i over rows with positive floor bound.
    Both are vertex diagnostics: the objective value is the unique part of
    the optimum, the maximizing vertex need not be.
    """

    status: SolveStatus
    xi: CriticalVector | None
    objective: float
    floor_objective: float
    m1: float
    m2: float
    iterations: int
    solver_version: str = SOLVER_VERSION


def build_problem(
    matrix: AssociatedMatrix,
    floor: CriticalVector,
    weights: np.ndarray | None = None,
    cap: float | None = None,
) -> LPProblem:
    """Validate inputs and assemble an LPProblem.

    Raises InfeasibleFloorError when max(A @ floor) > 1 + 1e-9, ValueError on
    dimension mismatch or bad weights.
    """
    n = matrix.n
    if floor.n != n:
        raise ValueError(f"floor has length {floor.n}, matrix is {n}x{n}")
    worst = float(np.max(bound_vector(matrix, floor)))
    if worst > 1.0 + FEASIBILITY_TOL:
        raise InfeasibleFloorError(f"floor is infeasible: max bound {worst:.12g} > 1")
    if weights is None:
        w = np.ones(n)
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != (n,):
            raise ValueError(f"weights must have length {n}")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and nonnegative")
        total = float(w.sum())
        if total <= 0:
            raise ValueError("weights must have positive sum")
        w = w * (n / total)  # mean 1, so uniform weights give plain column sums
    if cap is not None:
        if cap <= 0:
            raise ValueError("cap must be positive")
        if float(floor.values[-1]) > cap:
            raise ValueError("cap lies below the floor")
    w.setflags(write=False)
    return LPProblem(matrix=matrix, floor=floor, weights=w, cap=cap)


class _Unbounded(Exception):
    pass


class _IterationLimit(Exception):
    pass


def _simplex_max(
    rows: np.ndarray,
    rhs: np.ndarray,
    obj: np.ndarray,
    tol: float = FEASIBILITY_TOL,
    max_iter: int | None = None,
    log_every: int = 1000,
) -> tuple[np.ndarray, int]:
    """Maximize obj @ x subject to rows @ x <= rhs, x >= 0, with rhs >= 0.

    Standard dense tableau; Bland's rule (lowest-index entering column,
    lowest-basis-index tie break on the ratio test) guarantees termination.
    """
    m, nvar = rows.shape
    width = nvar + m + 1
    T = np.zeros((m + 1, width))
    T[:m, :nvar] = rows
    T[:m, nvar:nvar + m] = np.eye(m)
    T[:m, -1] = rhs
    T[m, :nvar] = -obj
    basis = np.arange(nvar, nvar + m)
    if max_iter is None:
        max_iter = 1000 + 50 * width
    for it in range(1, max_iter + 1):
        negative = np.flatnonzero(T[m, :nvar + m] < -tol)
        if negative.size == 0:
            break
        enter = int(negative[0])
        col = T[:m, enter]
        positive = col > tol
        if not positive.any():
            raise _Unbounded
        ratios = np.full(m, np.inf)
        ratios[positive] = T[:m, -1][positive] / col[positive]
        best = ratios.min()
        candidates = np.flatnonzero(ratios <= best)
        leave = int(candidates[np.argmin(basis[candidates])])
        pivot_row = T[leave] / T[leave, enter]
        T -= np.outer(T[:, enter], pivot_row)
        T[leave] = pivot_row
        basis[leave] = enter
        np.maximum(T[:m, -1], 0.0, out=T[:m, -1])  # degeneracy dribble
        if log_every and it % log_every == 0:
            logger.info("simplex iteration %d, objective %.9g", it, T[m, -1])
    else:
        raise _IterationLimit
    x = np.zeros(nvar + m)
    x[basis] = T[:m, -1]
    return x[:nvar], it


def _failure(problem: LPProblem, iterations: int) -> LPSolution:
    return LPSolution(
        status=SolveStatus.NUMERIC_FAILURE,
        xi=None,
        objective=float("nan"),
        floor_objective=float(problem.objective_coefficients @ problem.floor.values),
        m1=float("nan"),
        m2=float("nan"),
        iterations=iterations,
    )


def solve(problem: LPProblem, *, log_every: int = 1000) -> LPSolution:
    """Run the simplex and package the optimum with its diagnostics.

    Never returns an infeasible point: numeric trouble (cycling cap,
    unboundedness, post-solve bound violation) yields NUMERIC_FAILURE with
    ``xi`` set to None.
    """
    A = problem.matrix.entries
    c = problem.floor.values
    n = problem.n
    mono = -np.eye(n)
    mono[np.arange(1, n), np.arange(n - 1)] = 1.0
    blocks = [A, mono]
    rhs = [
        np.maximum(1.0 - A @ c, 0.0),
        np.maximum(np.diff(c, prepend=0.0), 0.0),
    ]
    if problem.cap is not None:
        blocks.append(np.eye(n))
        rhs.append(np.maximum(problem.cap - c, 0.0))
    try:
        zeta, iterations = _simplex_max(
            np.vstack(blocks), np.concatenate(rhs),
            problem.objective_coefficients, log_every=log_every,
        )
    except (_Unbounded, _IterationLimit):
        return _failure(problem, 0)
    xi = c + np.maximum(zeta, 0.0)
    stepped = np.maximum.accumulate(xi)
    if np.max(stepped - xi) > FEASIBILITY_TOL:
        return _failure(problem, iterations)
    xi = stepped
    if float(np.max(A @ xi)) > 1.0 + FEASIBILITY_TOL:
        return _failure(problem, iterations)
    params = dict(problem.floor.params or {})
    if "parent" in params:
        params["origin"] = params.pop("parent")
    params["parent"] = problem.floor.family.value
    xi_vec = CriticalVector(xi, Family.MODIFIED, params)
    f_floor, f_xi, m1, m2 = diagnostics(problem.matrix, problem.floor, xi_vec,
                                        weights=problem.weights)
    return LPSolution(
        status=SolveStatus.OPTIMAL,
        xi=xi_vec,
        objective=f_xi,
        floor_objective=f_floor,
        m1=m1,
        m2=m2,
        iterations=iterations,
    )


def diagnostics(
    matrix: AssociatedMatrix,
    floor: CriticalVector,
    xi: CriticalVector,
    weights: np.ndarray | None = None,
) -> tuple[float, float, float, float]:
    """(F(floor), F(xi), m1, m2) for any feasible pair."""
    w = np.ones(matrix.n) if weights is None else weights
    a = w @ matrix.entries
    f_floor = float(a @ floor.values)
    f_xi = float(a @ xi.values)
    pos = floor.values > 0
    m1 = float(np.max(xi.values[pos] / floor.values[pos])) if pos.any() else float("nan")
    bf = bound_vector(matrix, floor)
    bx = bound_vector(matrix, xi)
    rows = bf > 0
    m2 = float(np.max(bx[rows] / bf[rows])) if rows.any() else float("nan")
    return f_floor, f_xi, m1, m2


def cache_key(problem: LPProblem) -> str:
    """Content hash identifying a solve: rate, n, parameter, floor family and
    exact values, weights, cap and solver version."""
    spec = problem.matrix.spec
    h = hashlib.sha256()
    parts = [
        spec.rate.value,
        str(spec.n),
        repr(spec.k) if spec.k is not None else repr(spec.gamma),
        problem.floor.family.value,
        repr(sorted((problem.floor.params or {}).items())),
        repr(problem.cap),
        SOLVER_VERSION,
    ]
    h.update("|".join(parts).encode())
    h.update(problem.floor.values.tobytes())
    h.update(problem.weights.tobytes())
    return h.hexdigest()


def _solution_to_json(solution: LPSolution) -> dict:
    def encode(x: float):
        return None if np.isnan(x) else x

    return {
        "solver_version": solution.solver_version,
        "status": solution.status.value,
        "xi": None if solution.xi is None else solution.xi.values.tolist(),
        "xi_params": None if solution.xi is None else dict(solution.xi.params or {}),
        "objective": encode(solution.objective),
        "floor_objective": solution.floor_objective,
        "m1": encode(solution.m1),
        "m2": encode(solution.m2),
        "iterations": solution.iterations,
    }


def _solution_from_json(payload: dict) -> LPSolution:
    def decode(x) -> float:
        return float("nan") if x is None else float(x)

    xi = None
    if payload["xi"] is not None:
        xi = CriticalVector(np.array(payload["xi"], dtype=float), Family.MODIFIED,
                            payload.get("xi_params") or None)
    return LPSolution(
        status=SolveStatus(payload["status"]),
        xi=xi,
        objective=decode(payload["objective"]),
        floor_objective=float(payload["floor_objective"]),
        m1=decode(payload["m1"]),
        m2=decode(payload["m2"]),
        iterations=int(payload["iterations"]),
        solver_version=payload["solver_version"],
    )


def solve_cached(problem: LPProblem, cache_dir: str | Path, **kwargs) -> LPSolution:
    """solve() with an on-disk JSON cache keyed by ``cache_key``.

    Cached vectors round-trip bit-for-bit (JSON stores shortest-roundtrip
    decimals). Entries written by a different solver version are re-solved
    and overwritten.
    """
    cache = Path(cache_dir)
    cache.mkdir(parents=True, exist_ok=True)
    path = cache / f"{cache_key(problem)}.json"
    if path.exists():
        try:
            payload = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError):
            payload = None
        if payload and payload.get("solver_version") == SOLVER_VERSION:
            return _solution_from_json(payload)
    solution = solve(problem, **kwargs)
    path.write_text(json.dumps(_solution_to_json(solution)))
    return solution
