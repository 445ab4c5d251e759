"""Checks on the multiplier ``mu = L u - f``: two-sided bounds and localisation."""

from __future__ import annotations

import numpy as np

from ..spectral import NavierOperator, eigendecompose
from ..vi import ObstacleProblem, PenaltyConfig, solve_penalty
from .common import default_tol, descriptor, instance_rng, interval
from .report import Check, TheoremReport
from .variational import accurate, random_problem

LS_INSTANCES = 30
PENALTY_INSTANCES = 10
PENALTY_EPS = (1e-1, 1e-2, 1e-3)


def ls_bounds(problem: ObstacleProblem) -> tuple[np.ndarray, np.ndarray]:
    """Upper bounds for ``mu``: ``(L (psi - omega_f)^+)^+`` and ``(L (psi - omega_f)^+ - f)^+``.

    The first follows from the shift ``u -> u - omega_f``, which turns the
    problem into one with zero forcing; the second is the form that also
    subtracts ``f``, and can fail when ``f`` changes sign.
    """
    op = problem.operator
    lifted = op.apply(np.maximum(problem.psi - op.solve(problem.f), 0.0))
    return np.maximum(lifted, 0.0), np.maximum(lifted - problem.f, 0.0)


def ls_margins(problem: ObstacleProblem, u) -> dict:
    """Scale-relative margins of the multiplier bounds and of complementarity."""
    op = problem.operator
    sc = problem.scale
    mu = op.apply(u) - problem.f
    shifted, printed = ls_bounds(problem)
    gap = u - problem.psi
    free = gap > 1e-6 * sc
    return {
        "lower": float(mu.min()) / sc,
        "upper": float((shifted - mu).min()) / sc,
        "upper_with_f": float((printed - mu).min()) / sc,
        "complementarity": -float((mu * gap).max()) / sc,
        "free_set_multiplier": -float(np.abs(mu[free]).max(initial=0.0)) / sc,
    }


def check_measure(seed: int, n: int, s: float, sink=None) -> list[TheoremReport]:
    rng = instance_rng(seed, "measure", n, s)
    op = NavierOperator.on(interval(n), s)
    inst = descriptor(n, s)
    ls = Check("T:measure", inst, default_tol())
    printed = Check("T:measure.printed", inst, default_tol(), info=True)
    loc = Check("T:regularity.iii", inst, default_tol())
    for k in range(LS_INSTANCES):
        prob = random_problem(op, rng)
        sol = accurate(prob)
        if sink is not None and k == 0:
            sink(f"regularity_n{n}_s{s}", prob, sol)
        mg = ls_margins(prob, sol.u)
        ls.add("lower", mg["lower"])
        ls.add("upper", mg["upper"])
        printed.add("upper_with_f", mg["upper_with_f"])
        loc.add("complementarity", mg["complementarity"])
        loc.add("free_set_multiplier", mg["free_set_multiplier"])
        for c in (ls, printed, loc):
            c.instance_done()
    printed.note("upper bound that also subtracts f; fails for sign-changing forcing")
    return [ls.report(), printed.report(), loc.report()]


def check_penalty(seed: int, n: int, s: float) -> list[TheoremReport]:
    """Penalty route: ``u <= u_eps <= u + eps`` and ``0 <= L u_eps - f <= (L psi~)^+``."""
    rng = instance_rng(seed, "penalty", n, s)
    op = NavierOperator.on(interval(n), s)
    inst = descriptor(n, s, eps=list(PENALTY_EPS))
    sand = Check("T:measure.sandwich", inst, default_tol())
    ls = Check("T:measure.penalty", inst, default_tol())
    for _ in range(PENALTY_INSTANCES):
        prob = random_problem(op, rng)
        ref = accurate(prob)
        sc = prob.scale
        for eps in PENALTY_EPS:
            pen = solve_penalty(prob, PenaltyConfig(eps), reference=ref, certify=False)
            sand.add("lower", float((pen.u - ref.u).min()) / sc)
            sand.add("upper", float((ref.u + eps - pen.u).min()) / sc)
            mg = ls_margins(prob, pen.u)
            ls.add("lower", mg["lower"])
            ls.add("upper", mg["upper"])
        sand.instance_done()
        ls.instance_done()
    return [sand.report(), ls.report()]


def check_eigenmode_obstacle(n: int, s: float) -> list[TheoremReport]:
    """``psi = phi_1 / max phi_1``, ``f = 0``: the bound is ``lam_1^s psi`` in closed form."""
    d = eigendecompose(interval(n))
    op = NavierOperator(d, s)
    phi = d.eigenvectors[:, 0]
    psi = phi / phi.max()
    prob = ObstacleProblem(op, psi, np.zeros(n))
    mu = op.apply(accurate(prob).u)
    sc = prob.scale
    chk = Check("T:measure.eigenmode", descriptor(n, s), default_tol())
    chk.add("closed_form_bound", float((d.eigenvalues[0] ** s * psi - mu).min()) / sc)
    chk.add("lower", float(mu.min()) / sc)
    chk.instance_done()
    inactive = ObstacleProblem(op, psi - 10.0, np.zeros(n))
    u0 = accurate(inactive).u
    chk.add("inactive_multiplier", -float(np.abs(op.apply(u0)).max()) / inactive.scale)
    chk.instance_done()
    return [chk.report()]


def check_regularity_theorems(seed: int, sizes, s_list, sink=None) -> list[TheoremReport]:
    out = []
    for n in sizes:
        for s in s_list:
            out += check_measure(seed, n, s, sink)
            out += check_penalty(seed, n, s)
            out += check_eigenmode_obstacle(n, s)
    return out
