"""Checks on the obstacle problem: supersolutions, comparison, stability."""

from __future__ import annotations

import numpy as np

from ..spectral import NavierOperator
from ..vi import ObstacleProblem, PenaltyConfig, solve_active_set_enum, solve_penalty, solve_psor
from .common import default_tol, descriptor, instance_rng, interval
from .instances import random_forcing, random_obstacle, sparse_nonneg
from .report import Check, TheoremReport

SUPERSOLUTIONS = 20
K_MEMBERS = 20
PAIRS = 30
UNIQUENESS_SIZE = 10
UNIQUENESS_INSTANCES = 10


def accurate(problem: ObstacleProblem):
    return solve_psor(problem, tol=1e-12 * problem.scale)


def supersolution(problem: ObstacleProblem, g) -> np.ndarray:
    """``omega_{f+g} + t L^{-1} 1`` with the least ``t >= 0`` that lifts it above ``psi``.

    ``L U - f = g + t >= 0``, so ``U`` is a supersolution lying in ``K``.
    """
    op = problem.operator
    w = op.solve(problem.f + g)
    lift = op.solve(np.ones(problem.m))
    t = max(0.0, float(np.max((problem.psi - w) / lift)))
    return w + t * lift


def random_members(problem: ObstacleProblem, u, rng, count: int):
    """Members of ``K``: ``u + |noise|`` and ``max(psi, u + noise)`` alternately."""
    amp = 0.1 * (1.0 + float(np.abs(u).max()))
    out = []
    for k in range(count):
        noise = rng.normal(scale=amp, size=u.size) * (rng.random(u.size) < 0.5)
        out.append(u + np.abs(noise) if k % 2 == 0 else np.maximum(problem.psi, u + noise))
    return out


def random_problem(op, rng, sign: str = "any") -> ObstacleProblem:
    x = op.mask.coords()
    return ObstacleProblem(op, random_obstacle(x, rng), random_forcing(op.m, rng, sign))


def check_sup(seed: int, n: int, s: float, sink=None) -> list[TheoremReport]:
    rng = instance_rng(seed, "sup", n, s)
    op = NavierOperator.on(interval(n), s)
    prob = random_problem(op, rng)
    sol = accurate(prob)
    if sink is not None:
        sink(f"vi_n{n}_s{s}", prob, sol)
    sc = prob.scale
    u = sol.u
    inst = descriptor(n, s)
    b = Check("T:sup.b", inst, default_tol())
    for k in range(SUPERSOLUTIONS):
        U = supersolution(prob, sparse_nonneg(n, rng))
        if k % 4 == 3:
            U = np.minimum(U, supersolution(prob, sparse_nonneg(n, rng)))
        b.add("supersolution", float((op.apply(U) - prob.f).min()) / sc)
        b.add("above_solution", float((U - u).min()) / sc)
        b.instance_done()
    c = Check("T:sup.c", inst, default_tol())
    d = Check("T:sup.d", inst, default_tol())
    c.add("supersolution", float(sol.mu.min()) / sc)
    members = random_members(prob, u, rng, K_MEMBERS) + [u]
    for v in members:
        c.add("orthogonality", -abs(op.inner(sol.mu, np.maximum(u - v, 0.0))) / sc)
        d.add("monotone_pairing", op.inner(op.apply(v) - prob.f, v - u) / sc)
        c.instance_done()
        d.instance_done()
    return [b.report(), c.report(), d.report()]


def check_uniqueness(seed: int, s: float, sink=None) -> list[TheoremReport]:
    """PSOR, enumeration and the penalty limit agree on small instances."""
    n = UNIQUENESS_SIZE
    rng = instance_rng(seed, "unique", n, s)
    op = NavierOperator.on(interval(n), s)
    chk = Check("T:sup.a", descriptor(n, s), default_tol())
    for _ in range(UNIQUENESS_INSTANCES):
        prob = random_problem(op, rng)
        a = accurate(prob)
        e = solve_active_set_enum(prob)
        eps = 1e-6
        p = solve_penalty(prob, PenaltyConfig(eps), reference=a)
        sc = prob.scale
        chk.add("psor_vs_enum", -float(np.abs(a.u - e.u).max()) / sc)
        chk.add("psor_vs_penalty", -float(np.abs(a.u - p.u).max() - eps) / sc)
        chk.instance_done()
    return [chk.report()]


def check_comparison_f(seed: int, n: int, s: float) -> list[TheoremReport]:
    rng = instance_rng(seed, "compare_f", n, s)
    op = NavierOperator.on(interval(n), s)
    chk = Check("compare_f", descriptor(n, s), default_tol())
    for _ in range(10):
        p2 = random_problem(op, rng)
        p1 = p2.with_forcing(p2.f + sparse_nonneg(n, rng, 0.4))
        u1, u2 = accurate(p1).u, accurate(p2).u
        chk.add("ordered", float((u1 - u2).min()) / p1.scale)
        chk.instance_done()
    return [chk.report()]


def check_bounded(seed: int, n: int, s: float) -> list[TheoremReport]:
    rng = instance_rng(seed, "bounded1", n, s)
    op = NavierOperator.on(interval(n), s)
    x = op.mask.coords()
    inst = descriptor(n, s)
    full = Check("T:bounded1", inst, default_tol())
    one = {k: Check(f"T:bounded1.{k}", inst, default_tol()) for k in ("i", "ii")}
    shift = Check("T:bounded1.shift", inst, default_tol())
    for _ in range(PAIRS):
        p1 = random_problem(op, rng)
        psi2 = p1.psi + 0.3 * random_obstacle(x, rng)
        p2 = p1.with_obstacle(psi2)
        u1, u2 = accurate(p1).u, accurate(p2).u
        sc = max(p1.scale, p2.scale)
        du, dp = u1 - u2, p1.psi - psi2
        full.add("sup_norm", (np.abs(dp).max() - np.abs(du).max()) / sc)
        one["i"].add("positive_part", (np.maximum(dp, 0).max() - np.maximum(du, 0).max()) / sc)
        one["ii"].add("negative_part", (np.maximum(-dp, 0).max() - np.maximum(-du, 0).max()) / sc)
        for c in (full, *one.values()):
            c.instance_done()
        # psi + c with c >= 0 lifts u by at most c
        cst = float(rng.uniform(0.0, 0.5))
        u3 = accurate(p1.with_obstacle(p1.psi + cst)).u
        shift.add("lower", float((u3 - u1).min()) / sc)
        shift.add("upper", float((u1 + cst - u3).min()) / sc)
        shift.instance_done()
    return [full.report(), one["i"].report(), one["ii"].report(), shift.report()]


def check_infty(seed: int, n: int, s: float) -> list[TheoremReport]:
    rng = instance_rng(seed, "infty", n, s)
    op = NavierOperator.on(interval(n), s)
    chk = Check("C:infty", descriptor(n, s), default_tol())
    for k in range(10):
        prob = random_problem(op, rng, sign="zero" if k % 2 else "any")
        u = accurate(prob).u
        sc = prob.scale
        chk.add("above_obstacle_and_free_solution",
                float((u - np.maximum(prob.psi, op.solve(prob.f))).min()) / sc)
        if not prob.f.any():
            pp = np.maximum(prob.psi, 0.0)
            chk.add("f0_lower", float((u - pp).min()) / sc)
            chk.add("f0_upper", float(pp.max() - u.max()) / sc)
        chk.instance_done()
    # a nonpositive obstacle with f = 0 gives u = 0
    prob = ObstacleProblem(op, -np.abs(random_obstacle(op.mask.coords(), rng)), np.zeros(n))
    chk.add("trivial_zero", -float(np.abs(accurate(prob).u).max()))
    chk.instance_done()
    return [chk.report()]


def energy_norm(op, v) -> float:
    return float(np.sqrt(max(op.quadratic_form(v), 0.0)))


def check_continuity(seed: int, n: int, s: float) -> list[TheoremReport]:
    """Obstacles (and forcings) converging to a limit give solutions converging in energy."""
    rng = instance_rng(seed, "continuity", n, s)
    op = NavierOperator.on(interval(n), s)
    x = op.mask.coords()
    inst = descriptor(n, s, steps=[2.0 ** -k for k in range(1, 6)])
    lin = Check("T:Linfty", inst, default_tol())
    hs = Check("T:Hs2", inst, default_tol())
    hs.note("no discrete analogue of the constraint on the positive part of the obstacles")
    for _ in range(3):
        prob = random_problem(op, rng)
        u = accurate(prob).u
        sc = prob.scale
        w = rng.uniform(0.0, 1.0, size=n)
        df = random_forcing(n, rng)
        gaps_l, gaps_h = [], []
        for k in range(1, 6):
            d = 2.0 ** -k
            ul = accurate(prob.with_obstacle(prob.psi - d * w)).u
            gaps_l.append(energy_norm(op, ul - u))
            lin.add("sup_bound", (d * np.abs(w).max() - np.abs(ul - u).max()) / sc)
            ph = ObstacleProblem(op, prob.psi + d * np.sin(np.pi * x[:, 0]), prob.f + d * df)
            gaps_h.append(energy_norm(op, accurate(ph).u - u))
        gl, gh = np.array(gaps_l) / sc, np.array(gaps_h) / sc
        lin.add("gap_decrease", float((gl[:-1] - gl[1:]).min()))
        hs.add("gap_decrease", float((gh[:-1] - gh[1:]).min()))
        lin.instance_done()
        hs.instance_done()
    return [lin.report(), hs.report()]


def check_vi_theorems(seed: int, sizes, s_list, sink=None) -> list[TheoremReport]:
    out = []
    for s in s_list:
        out += check_uniqueness(seed, s)
        for n in sizes:
            out += check_sup(seed, n, s, sink)
            out += check_comparison_f(seed, n, s)
            out += check_bounded(seed, n, s)
            out += check_infty(seed, n, s)
            out += check_continuity(seed, n, s)
    return out
