"""Checks on the extension solver: exact traces, the constant, and the energy identity."""

from __future__ import annotations

import math

import numpy as np

from ..extension import (calibrate_cs, closed_form_cs, energy_identity_check, graded_mesh,
                         solve_mode_ode, trace)
from ..spectral import NavierOperator
from .common import descriptor, instance_rng, interval
from .report import Check, TheoremReport

TRACE_LAMBDAS = (1.0, 4.0)
ENERGY_CELLS = (200, 400, 800)


def half_trace_errors(lams=TRACE_LAMBDAS, cells: int = 4000) -> dict:
    """At ``s = 1/2`` the profile is ``exp(-sqrt(lam) y)`` and the trace is ``sqrt(lam)``."""
    out = {}
    for lam in lams:
        prof = solve_mode_ode(0.5, lam, graded_mesh(0.5, 20.0 / math.sqrt(lam), cells))
        exact = np.exp(-math.sqrt(lam) * prof.y)
        out[lam] = {"trace": abs(trace(0.5, lam, cells) - math.sqrt(lam)) / math.sqrt(lam),
                    "profile": float(np.abs(prof.theta - exact).max())}
    return out


def scaling_error(s: float, lams=(0.5, 2.0, 9.0)) -> float:
    """Relative deviation of ``trace(lam) / trace(1)`` from ``lam^s``."""
    t1 = trace(s, 1.0)
    return max(abs(trace(s, lam) / t1 / lam ** s - 1.0) for lam in lams)


def energy_refinement(s: float, n: int, v, cells=ENERGY_CELLS, cs: float | None = None) -> np.ndarray:
    op = NavierOperator.on(interval(n), s)
    cs = calibrate_cs(s) if cs is None else cs
    return np.array([energy_identity_check(op, v, cells=c, cs=cs) for c in cells])


def check_extension(seed: int, n: int, s: float, sink=None) -> list[TheoremReport]:
    out = []
    if not 0.0 < s < 1.0:
        return out
    inst = descriptor(n, s)
    cal = Check("E:constant", inst, 5e-3)
    cs = calibrate_cs(s)
    cal.add("relative_gap", -abs(cs / closed_form_cs(s) - 1.0))
    cal.instance_done()
    sc = Check("E:scaling", inst, 1e-2)
    sc.add("power_law", -scaling_error(s))
    sc.instance_done()
    en = Check("E:energy", descriptor(n, s, cells=list(ENERGY_CELLS)), 2e-2)
    rng = instance_rng(seed, "extension", n, s)
    for _ in range(3):
        v = rng.normal(size=n)
        errs = energy_refinement(s, n, v, cs=cs)
        en.add("identity", -float(errs[-1]))
        en.add("refinement_decrease", float((errs[:-1] - errs[1:]).min()))
        en.instance_done()
    out += [cal.report(), sc.report(), en.report()]
    if sink is not None:
        lam1 = 1.0
        sink(f"profile_s{s}", solve_mode_ode(s, lam1, graded_mesh(s, 20.0, 400)))
    return out


def check_half_trace() -> list[TheoremReport]:
    chk = Check("E:half_trace", {"size": None, "s": 0.5, "lambdas": list(TRACE_LAMBDAS)}, 1e-3)
    for lam, err in half_trace_errors().items():
        chk.add(f"trace_lam{lam:g}", -err["trace"])
        chk.add(f"profile_lam{lam:g}", -err["profile"])
        chk.instance_done()
    return [chk.report()]


def check_extension_theorems(seed: int, sizes, s_list, sink=None) -> list[TheoremReport]:
    out = check_half_trace()
    for n in sizes:
        for s in s_list:
            out += check_extension(seed, n, s, sink)
    return out
