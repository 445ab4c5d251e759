"""Theorem reports and the discrete positivity set."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ..grid import DomainMask

PASS = "pass"
WEAK_PASS = "weak-pass"
VACUOUS_PASS = "vacuous-pass"
FAIL = "fail"
INFO = "info"

PASSING = {PASS, WEAK_PASS, VACUOUS_PASS, INFO}


def _clean(x):
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_clean(v) for v in x]
    return x


@dataclass
class TheoremReport:
    """Worst-case margins of one discrete claim.

    Margins are oriented so that ``>= 0`` means the claim holds, and are
    normalised by the instance scale.  ``floor`` is set for strict claims.
    """

    theorem: str
    instance: dict
    margins: dict
    tolerance: float
    status: str
    floor: float | None = None
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status in PASSING

    @property
    def worst(self) -> float | None:
        vals = [v for v in self.margins.values() if v is not None]
        return min(vals) if vals else None

    def to_dict(self) -> dict:
        return _clean({"theorem": self.theorem, "instance": self.instance,
                       "margins": self.margins, "tolerance": self.tolerance,
                       "floor": self.floor, "status": self.status, "notes": list(self.notes)})


class Check:
    """Accumulates the worst margin per named sub-claim."""

    def __init__(self, theorem: str, instance: dict, tol: float, floor: float | None = None,
                 info: bool = False):
        self.theorem = theorem
        self.instance = dict(instance)
        self.tol = tol
        self.floor = floor
        self.info = info
        self.margins: dict[str, float] = {}
        self.notes: list[str] = []
        self.count = 0
        self.vacuous = False

    def add(self, name: str, value: float) -> None:
        value = float(value)
        old = self.margins.get(name)
        self.margins[name] = value if old is None else min(old, value)

    def instance_done(self) -> None:
        self.count += 1

    def note(self, text: str) -> None:
        if text not in self.notes:
            self.notes.append(text)

    def report(self) -> TheoremReport:
        inst = dict(self.instance)
        inst["instances"] = self.count
        if self.info:
            status = INFO
        elif not self.margins:
            status = VACUOUS_PASS if self.vacuous else FAIL
        else:
            worst = min(self.margins.values())
            if not math.isfinite(worst) or worst < -self.tol:
                status = FAIL
            elif self.floor is not None and worst <= self.floor:
                status = WEAK_PASS
            elif self.vacuous:
                status = VACUOUS_PASS
            else:
                status = PASS
        return TheoremReport(self.theorem, inst, dict(self.margins), self.tol, status,
                             self.floor, list(self.notes))


@dataclass(frozen=True, eq=False)
class PositivitySet:
    """Nodes where ``v >= eps`` on a whole ``rho``-cell neighbourhood inside the mask."""

    v: np.ndarray
    rho: int
    eps: float
    positions: np.ndarray

    def __len__(self) -> int:
        return int(self.positions.size)

    @property
    def empty(self) -> bool:
        return self.positions.size == 0


def positivity_set(mask: DomainMask, v, rho: int = 1, eps: float | None = None,
                   rel: float = 1e-3) -> PositivitySet:
    v = np.asarray(v, dtype=float)
    if eps is None:
        eps = rel * float(np.abs(v).max())
    if eps <= 0:
        return PositivitySet(v, rho, eps, np.zeros(0, dtype=np.int64))
    inner = mask.interior_positions(rho)
    nbrs = mask.neighbourhoods(rho)
    keep = [k for k in inner if np.all(v[nbrs[k]] >= eps)]
    pos = np.array(keep, dtype=np.int64)
    if pos.size:
        assert v[pos].min() >= eps
    return PositivitySet(v, rho, eps, pos)


def merge_reports(reports) -> list[TheoremReport]:
    """Deterministic order: by theorem id, then instance descriptor."""
    return sorted(reports, key=lambda r: (r.theorem, json.dumps(_clean(r.instance), sort_keys=True)))
