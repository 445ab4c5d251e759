"""JSON problem and solution files.

A problem file holds ``mask_ref`` (an embedded mask dict or a path to one),
``s``, ``psi`` (``null`` for no obstacle), ``f``, ``method`` and ``params``.
An optional ``operator`` entry selects ``navier`` (default) or
``restricted``, with ``backend`` ``kernel`` or ``bigbox``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .grid import DomainMask
from .restricted import RestrictedOperator
from .spectral import NavierOperator
from .vi import ObstacleProblem, Solution, solve


class ProblemFileError(ValueError):
    pass


def load_mask(ref, base: Path | None = None) -> DomainMask:
    if isinstance(ref, str):
        path = Path(ref)
        if base is not None and not path.is_absolute():
            path = base / path
        with open(path) as fh:
            ref = json.load(fh)
    if not isinstance(ref, dict):
        raise ProblemFileError("mask_ref must be a mask object or a path to one")
    try:
        return DomainMask.from_dict(ref)
    except KeyError as exc:
        raise ProblemFileError(f"mask is missing field {exc}") from exc


def build_operator(mask: DomainMask, s: float, kind: str = "navier", backend: str = "kernel",
                   **kw):
    if kind == "navier":
        return NavierOperator.on(mask, s)
    if kind == "restricted":
        if backend == "kernel":
            return RestrictedOperator.kernel(mask, s, **kw)
        if backend == "bigbox":
            return RestrictedOperator.bigbox(mask, s, **kw)
        raise ProblemFileError(f"unknown restricted backend {backend!r}")
    raise ProblemFileError(f"unknown operator {kind!r}")


def problem_to_dict(problem: ObstacleProblem, method: str = "psor", params=None) -> dict:
    op = problem.operator
    out = {"mask_ref": op.mask.to_dict(), "s": op.s,
           "psi": None if problem.psi is None else [float(x) for x in problem.psi],
           "f": [float(x) for x in problem.f], "method": method, "params": dict(params or {}),
           "operator": op.kind}
    if op.kind == "restricted":
        out["backend"] = op.backend
    return out


def problem_from_dict(d: dict, base: Path | None = None):
    """Returns ``(problem, method, params)``."""
    for key in ("mask_ref", "s", "f"):
        if key not in d:
            raise ProblemFileError(f"problem file is missing {key!r}")
    mask = load_mask(d["mask_ref"], base)
    op = build_operator(mask, float(d["s"]), d.get("operator", "navier"), d.get("backend", "kernel"))
    psi = d.get("psi")
    psi = None if psi is None else np.asarray(psi, dtype=float)
    return ObstacleProblem(op, psi, np.asarray(d["f"], dtype=float)), d.get("method", "psor"), \
        dict(d.get("params", {}))


def read_problem(path):
    path = Path(path)
    with open(path) as fh:
        return problem_from_dict(json.load(fh), path.parent)


def write_json(path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def solve_file(path, out=None) -> Solution:
    problem, method, params = read_problem(path)
    sol = solve(problem, method, **params)
    if out is not None:
        write_json(out, sol.to_dict())
    return sol
