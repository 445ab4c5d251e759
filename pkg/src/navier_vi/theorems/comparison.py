"""Navier (spectral) versus Dirichlet (restricted) obstacle problems with ``f = 0``."""

from __future__ import annotations

import numpy as np

from ..grid import DomainMask, full_mask, mask_from_positions, square_grid
from ..restricted import RestrictedOperator, check_navier_dominates
from ..spectral import NavierOperator
from ..vi import ObstacleProblem
from .common import default_tol, descriptor, instance_rng, interval, strict_floor
from .report import Check, TheoremReport, positivity_set
from .variational import accurate

DOMINANCE_DRAWS = 20
BOX_FACTORS = (2, 4, 8)
BIGBOX_2D_FACTOR = 4


def comparison_obstacles(x: np.ndarray) -> dict[str, np.ndarray]:
    """Nonnegative obstacles on ``(0, 1)``; all vanish on the outer thirds."""
    t = x[:, 0]
    mid = (t > 1 / 3) & (t < 2 / 3)
    z = np.clip(6.0 * (t - 0.5), -1.0, 1.0)
    bump = np.where(mid, (1.0 - z * z) ** 2, 0.0)
    two = (np.exp(-((t - 0.4) / 0.04) ** 2) + 0.7 * np.exp(-((t - 0.6) / 0.04) ** 2)) * mid
    return {"indicator": mid.astype(float), "bump": bump, "two_bumps": two}


def restricted_on(mask: DomainMask, s: float) -> RestrictedOperator:
    if mask.grid.dim == 1:
        return RestrictedOperator.kernel(mask, s)
    return RestrictedOperator.bigbox(mask, s, factor=BIGBOX_2D_FACTOR)


def zero_region(mask: DomainMask, psi) -> np.ndarray:
    """Interior (one-cell) positions of ``{psi == 0}``."""
    zero = np.nonzero(psi == 0.0)[0]
    if zero.size == 0:
        return zero
    sub = mask_from_positions(mask, zero)
    return zero[sub.interior_positions(1)]


def compare(navier: NavierOperator, restricted: RestrictedOperator, psi) -> dict:
    """Solve both problems and collect the margins of every sub-claim."""
    mask = navier.mask
    f = np.zeros(navier.m)
    pn = ObstacleProblem(navier, psi, f)
    pd = ObstacleProblem(restricted, psi, f)
    sn, sd = accurate(pn), accurate(pd)
    un, ud = sn.u, sd.u
    sc = max(pn.scale, pd.scale)
    out = {"solutions": (pn, sn, pd, sd), "margins": {}, "strict": {}, "vacuous": []}
    mg, st = out["margins"], out["strict"]
    mg["iii.ordered"] = float((ud - un).min()) / sc
    mg["ii.navier_of_dirichlet"] = float(navier.apply(ud).min()) / sc
    pset = positivity_set(mask, un - psi, eps=1e-3 * sc)
    if pset.empty:
        out["vacuous"].append("P[u_N - psi] is empty")
    else:
        p = pset.positions
        mg["i.navier_harmonic"] = -float(np.abs(sn.mu[p]).max()) / sc
        st["iv.strict_gap"] = float((ud - un)[p].min()) / sc
    pdset = positivity_set(mask, ud - psi, eps=1e-3 * sc)
    if not pdset.empty:
        mg["i.dirichlet_harmonic"] = -float(np.abs(sd.mu[pdset.positions]).max()) / sc
    again = accurate(ObstacleProblem(restricted, un, f))
    mg["v.resolve"] = -float(np.abs(again.u - ud).max()) / sc
    e = [restricted.quadratic_form(ud), restricted.quadratic_form(un),
         navier.quadratic_form(un), navier.quadratic_form(ud)]
    norm = max(e[3], 1e-300)
    if np.array_equal(un, ud):
        out["vacuous"].append("u_N equals u_D")
    st["vi.dirichlet_pair"] = (e[1] - e[0]) / norm
    st["vi.mixed"] = (e[2] - e[1]) / norm
    st["vi.navier_pair"] = (e[3] - e[2]) / norm
    out["energies"] = e
    out["zero_region"] = zero_region(mask, psi)
    out["positivity"] = positivity_set(mask, un - psi)
    return out


def _instances(n: int):
    yield "1d", interval(n), None
    g = square_grid(min(n, 15))
    yield "2d", full_mask(g), None


def _obstacles_for(mask: DomainMask):
    x = mask.coords()
    if mask.grid.dim == 1:
        return comparison_obstacles(x)
    r2 = ((x - 0.5) ** 2).sum(axis=1)
    return {"disc_bump": np.where(r2 < 1 / 36, (1.0 - 36.0 * r2) ** 2, 0.0)}


def check_comparing(n: int, s: float, sink=None) -> list[TheoremReport]:
    out = []
    for dim_tag, mask, _ in _instances(n):
        navier = NavierOperator.on(mask, s)
        restricted = restricted_on(mask, s)
        for name, psi in _obstacles_for(mask).items():
            inst = descriptor(n, s, domain=dim_tag, obstacle=name, backend=restricted.backend)
            res = compare(navier, restricted, psi)
            if sink is not None:
                pn, sn, pd, sd = res["solutions"]
                sink(f"comparison_{dim_tag}_{name}_n{n}_s{s}_navier", pn, sn)
                sink(f"comparison_{dim_tag}_{name}_n{n}_s{s}_dirichlet", pd, sd)
            main = Check("T:comparing1", inst, default_tol())
            for k, v in res["margins"].items():
                main.add(k, v)
            main.instance_done()
            strict = Check("T:comparing1.strict", inst, default_tol(), floor=strict_floor())
            for k, v in res["strict"].items():
                strict.add(k, v)
            strict.instance_done()
            for c in (main, strict):
                for note in res["vacuous"]:
                    c.note(note)
                    c.vacuous = True
            out += [main.report(), strict.report()]
            zr = res["zero_region"]
            true = Check("R:true", inst, default_tol())
            if zr.size:
                outside = ~np.isin(zr, res["positivity"].positions)
                true.add("zero_region_inside_positivity_set", -float(outside.mean()))
                true.instance_done()
            else:
                true.vacuous = True
                true.note("obstacle has no interior zero region")
            out.append(true.report())
    return out


def dominance_sweep(seed: int, n: int, s: float) -> list[TheoremReport]:
    """``L_N v >= L_D v`` for nonnegative ``v`` (strict on the interior of the support)."""
    rng = instance_rng(seed, "dominance", n, s)
    mask = interval(n)
    navier = NavierOperator.on(mask, s)
    restricted = restricted_on(mask, s)
    chk = Check("T:comparing1.dominance", descriptor(n, s), default_tol(), floor=strict_floor())
    for _ in range(DOMINANCE_DRAWS):
        v = rng.random(n) * (rng.random(n) < 0.6)
        if not v.any():
            v[n // 2] = 1.0
        rep = check_navier_dominates(navier, restricted, v)
        scale = float(np.abs(navier.apply(v)).max())
        chk.add("min_margin", rep.min_margin / scale)
        if rep.support_min is not None:
            chk.add("support_interior", rep.support_min / scale)
        chk.instance_done()
    return [chk.report()]


def backend_agreement(n: int, s: float, factors=BOX_FACTORS) -> np.ndarray:
    """Relative max-entry gap between big-box matrices and the lattice-kernel matrix."""
    mask = interval(n)
    ref = RestrictedOperator.kernel(mask, s).matrix
    return np.array([float(np.abs(RestrictedOperator.bigbox(mask, s, R).matrix - ref).max()
                           / np.abs(ref).max()) for R in factors])


def check_backends(n: int, s: float) -> list[TheoremReport]:
    gaps = backend_agreement(n, s)
    chk = Check("R:backends", descriptor(n, s, factors=list(BOX_FACTORS)), default_tol())
    chk.add("gap_decrease", float((gaps[:-1] - gaps[1:]).min()))
    chk.instance_done()
    chk.note("largest-box relative gap %.3e" % gaps[-1])
    return [chk.report()]


def check_navier_dirichlet(seed: int, sizes, s_list, sink=None) -> list[TheoremReport]:
    out = []
    for n in sizes:
        for s in s_list:
            if s >= 1.0:
                continue
            out += check_comparing(n, s, sink)
            out += dominance_sweep(seed, n, s)
            out += check_backends(n, s)
    return out
