"""Readers and writers for the CLI's file formats.

CSV is the default surface: matrices are written as n rows of n decimals
behind a ``# spec:`` comment header, constants and solutions as indexed
rows, simulation reports with the fixed column set
``n,trueCount,d,procedure,avgPower,tailFDP,fdr,se_power``. Floats are
emitted as shortest round-trip decimals so outputs (and the solution cache)
reproduce bit-for-bit. JSON payloads mirror the CSV contents.
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import numpy as np

from .constants import CriticalVector
from .lp import LPProblem, LPSolution
from .matrices import AssociatedMatrix
from .procedures import AdjustedPValues, DecisionSet, PValueVector
from .simulation import SimReport

__all__ = [
    "InputFormatError",
    "read_pvalues",
    "read_weights",
    "matrix_csv",
    "matrix_json",
    "constants_csv",
    "constants_json",
    "read_constants",
    "solution_csv",
    "solution_json",
    "decisions_csv",
    "decisions_json",
    "report_csv",
    "report_json",
    "write_text",
]


class InputFormatError(ValueError):
    """Malformed input file; carries the offending line number."""

    def __init__(self, path, line_no: int, message: str):
        self.path = str(path)
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")


def _fmt(x: float) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "NA"
    return repr(float(x))


def read_pvalues(path: str | Path) -> PValueVector:
    """Parse a p-value file: one decimal per line, or ``label,value`` rows.

    Blank lines and ``#`` comments are skipped. Raises InputFormatError with
    the line number on non-numeric or out-of-range values.
    """
    values: list[float] = []
    labels: list[str] = []
    saw_label = False
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            label = None
            text = line
            if "," in line:
                label, text = (part.strip() for part in line.split(",", 1))
            try:
                value = float(text)
            except ValueError:
                raise InputFormatError(path, line_no, f"not a number: {text!r}") from None
            if not 0.0 <= value <= 1.0:
                raise InputFormatError(path, line_no, f"p-value out of [0, 1]: {value!r}")
            values.append(value)
            labels.append(label if label is not None else str(len(values)))
            saw_label = saw_label or label is not None
    if not values:
        raise InputFormatError(path, 0, "no p-values found")
    return PValueVector(np.array(values), labels=tuple(labels) if saw_label else None)


def read_weights(path: str | Path, n: int) -> np.ndarray:
    """Parse a weights file: one nonnegative decimal per line, n lines."""
    weights: list[float] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                w = float(line)
            except ValueError:
                raise InputFormatError(path, line_no, f"not a number: {line!r}") from None
            if w < 0 or not math.isfinite(w):
                raise InputFormatError(path, line_no, f"weight must be finite and >= 0: {w!r}")
            weights.append(w)
    if len(weights) != n:
        raise InputFormatError(path, 0, f"expected {n} weights, found {len(weights)}")
    return np.array(weights)


def matrix_csv(matrix: AssociatedMatrix) -> str:
    lines = [f"# spec: {matrix.spec.param_text()}"]
    lines += [",".join(_fmt(x) for x in row) for row in matrix.entries]
    return "\n".join(lines) + "\n"


def matrix_json(matrix: AssociatedMatrix) -> str:
    spec = matrix.spec
    payload = {
        "spec": {
            "rate": spec.rate.value,
            "n": spec.n,
            **({"k": spec.k} if spec.k is not None else {"gamma": spec.gamma}),
        },
        "entries": [[float(x) for x in row] for row in matrix.entries],
    }
    return json.dumps(payload, indent=2) + "\n"


def _params_text(c: CriticalVector) -> str:
    if not c.params:
        return ""
    return " " + " ".join(f"{k}={v!r}" for k, v in sorted(c.params.items(), key=lambda kv: kv[0]))


def constants_csv(c: CriticalVector) -> str:
    lines = [f"# family: {c.family.value}{_params_text(c)}", "index,value"]
    lines += [f"{i},{_fmt(v)}" for i, v in enumerate(c.values, start=1)]
    return "\n".join(lines) + "\n"


def constants_json(c: CriticalVector) -> str:
    payload = {
        "family": c.family.value,
        "params": dict(c.params or {}),
        "values": [float(v) for v in c.values],
    }
    return json.dumps(payload, indent=2) + "\n"


def read_constants(path: str | Path) -> CriticalVector:
    """Read constants back from either output format of ``constants``."""
    text = Path(path).read_text(encoding="utf-8")
    stripped = text.lstrip()
    if stripped.startswith("{"):
        payload = json.loads(text)
        return CriticalVector(np.array(payload["values"], dtype=float))
    values = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith("index,"):
            continue
        part = line.split(",")[-1]
        try:
            values.append(float(part))
        except ValueError:
            raise InputFormatError(path, line_no, f"not a number: {part!r}") from None
    if not values:
        raise InputFormatError(path, 0, "no constants found")
    return CriticalVector(np.array(values))


def solution_csv(problem: LPProblem, solution: LPSolution) -> str:
    spec = problem.matrix.spec
    lines = [
        f"# spec: {spec.param_text()} floor={problem.floor.family.value}",
        f"# solver: {solution.solver_version}",
        f"# status: {solution.status.value}",
        f"# F_floor: {_fmt(solution.floor_objective)}",
        f"# F_xi: {_fmt(solution.objective)}",
        f"# M1: {_fmt(solution.m1)}",
        f"# M2: {_fmt(solution.m2)}",
        "index,floor,xi",
    ]
    xi = solution.xi.values if solution.xi is not None else [float("nan")] * problem.n
    lines += [f"{i},{_fmt(f)},{_fmt(x)}"
              for i, (f, x) in enumerate(zip(problem.floor.values, xi), start=1)]
    return "\n".join(lines) + "\n"


def solution_json(problem: LPProblem, solution: LPSolution) -> str:
    spec = problem.matrix.spec
    payload = {
        "spec": {
            "rate": spec.rate.value,
            "n": spec.n,
            **({"k": spec.k} if spec.k is not None else {"gamma": spec.gamma}),
        },
        "floor_family": problem.floor.family.value,
        "solver": solution.solver_version,
        "status": solution.status.value,
        "F_floor": solution.floor_objective,
        "F_xi": None if math.isnan(solution.objective) else solution.objective,
        "M1": None if math.isnan(solution.m1) else solution.m1,
        "M2": None if math.isnan(solution.m2) else solution.m2,
        "floor": [float(v) for v in problem.floor.values],
        "xi": None if solution.xi is None else [float(v) for v in solution.xi.values],
    }
    return json.dumps(payload, indent=2) + "\n"


def decisions_csv(p: PValueVector, decision: DecisionSet, adjusted: AdjustedPValues,
                  header: str) -> str:
    adj = adjusted.in_original_order()
    lines = [
        f"# procedure: {header}",
        f"# rejections: {decision.n_rejected}",
        "index,label,pvalue,adjusted_pvalue,rejected",
    ]
    for i in range(p.n):
        label = p.labels[i] if p.labels else str(i + 1)
        flag = "1" if (i + 1) in decision.rejected else "0"
        lines.append(f"{i + 1},{label},{_fmt(p.values[i])},{_fmt(adj[i])},{flag}")
    return "\n".join(lines) + "\n"


def decisions_json(p: PValueVector, decision: DecisionSet, adjusted: AdjustedPValues,
                   header: str) -> str:
    adj = adjusted.in_original_order()
    payload = {
        "procedure": header,
        "rejections": decision.n_rejected,
        "hypotheses": [
            {
                "index": i + 1,
                "label": (p.labels[i] if p.labels else str(i + 1)),
                "pvalue": float(p.values[i]),
                "adjusted_pvalue": float(adj[i]),
                "rejected": (i + 1) in decision.rejected,
            }
            for i in range(p.n)
        ],
    }
    return json.dumps(payload, indent=2) + "\n"


def report_csv(report: SimReport) -> str:
    lines = ["n,trueCount,d,procedure,avgPower,tailFDP,fdr,se_power"]
    for cell in report.cells:
        lines.append(
            f"{cell.n},{cell.true_count},{_fmt(cell.effect)},{cell.procedure},"
            f"{_fmt(cell.avg_power)},{_fmt(cell.tail_fdp)},{_fmt(cell.fdr)},"
            f"{_fmt(cell.se_power)}"
        )
    return "\n".join(lines) + "\n"


def report_json(report: SimReport) -> str:
    def nan_null(x: float):
        return None if isinstance(x, float) and math.isnan(x) else x

    payload = {
        "config": {
            "n": report.config.n,
            "true_counts": list(report.config.true_counts),
            "effects": list(report.config.effects),
            "rho": report.config.rho,
            "reps": report.config.reps,
            "alpha": report.config.alpha,
            "gamma": report.config.gamma,
            "fdr_level": report.config.fdr_level,
            "seed": report.config.seed,
        },
        "cells": [
            {
                "n": c.n,
                "trueCount": c.true_count,
                "d": c.effect,
                "procedure": c.procedure,
                "avgPower": nan_null(c.avg_power),
                "tailFDP": c.tail_fdp,
                "fdr": c.fdr,
                "se_power": nan_null(c.se_power),
                "se_tail": c.se_tail,
                "se_fdr": c.se_fdr,
                "containment_violations": c.containment_violations,
            }
            for c in report.cells
        ],
        "failures": [{"procedure": name, "error": err} for name, err in report.failures],
    }
    return json.dumps(payload, indent=2) + "\n"


def write_text(text: str, output: str | Path | None) -> None:
    """Write to the given path, or stdout when no path is given."""
    if output is None:
        sys.stdout.write(text)
    else:
        Path(output).write_text(text, encoding="utf-8")
