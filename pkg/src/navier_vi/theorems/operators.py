"""Checks on the spectral operator: domain monotonicity, limits, truncation."""

from __future__ import annotations

import numpy as np

from ..grid import extend_by_zero, full_mask, make_shrinking_family, restrict, square_grid
from ..spectral import NavierOperator, eigendecompose
from .common import (default_tol, descriptor, disc, instance_rng, interval, middle_half,
                     random_nested_pair, strict_floor)
from .instances import sign_changing
from .report import Check, TheoremReport

NESTED_INSTANCES = 10
TRUNCATION_DRAWS = 100
GAMMA_RADII = (8, 4, 2, 1)


def _nested_instances(n: int, rng):
    pairs = [random_nested_pair(n, rng) for _ in range(NESTED_INSTANCES - 1)]
    inner = disc()
    pairs.append((inner, full_mask(square_grid(inner.grid.nodes[0]))))
    return pairs


def domain_monotonicity(inner, outer, s: float, u) -> tuple[float, float]:
    """Relative form margin and relative pointwise margin (for ``u >= 0``).

    Form: ``<L_in u, u> - <L_out u~, u~>``; pointwise: ``min(L_in u - (L_out u~)|_in)``.
    """
    a = NavierOperator.on(inner, s)
    b = NavierOperator.on(outer, s)
    ut = extend_by_zero(u, inner, outer)
    fa = a.quadratic_form(u)
    form = (fa - b.quadratic_form(ut)) / fa
    la = a.apply(u)
    point = float((la - restrict(b.apply(ut), outer, inner)).min()) / float(np.abs(la).max())
    return form, point


def check_lemma2(seed: int, n: int, s: float) -> list[TheoremReport]:
    rng = instance_rng(seed, "lemma2", n, s)
    form = Check("L:lemma2.form", descriptor(n, s), default_tol(), floor=strict_floor())
    point = Check("L:lemma2.pointwise", descriptor(n, s), default_tol(), floor=strict_floor())
    for inner, outer in _nested_instances(n, rng):
        u = rng.random(len(inner)) + 0.05
        f, p = domain_monotonicity(inner, outer, s, u)
        form.add("form_gap", f)
        point.add("pointwise_gap", p)
        form.instance_done()
        point.instance_done()
    if s == 1.0:
        form.note("s = 1 is local: gaps vanish away from the boundary layer")
        point.note("s = 1 is local: gaps vanish away from the boundary layer")
    return [form.report(), point.report()]


def shrinking_family(base, enclosing, cells=GAMMA_RADII):
    h = min(base.grid.spacing)
    return make_shrinking_family(base, enclosing, [c * h for c in cells])


def eigen_convergence(base, enclosing, count: int = 5) -> np.ndarray:
    """Rows: family member; columns: relative gap to the first base eigenvalues.

    Sorted eigenvalues are compared index by index, which is insensitive to
    the choice of basis inside a cluster of tied eigenvalues.
    """
    ref = eigendecompose(base).eigenvalues[:count]
    gaps = []
    for mask in shrinking_family(base, enclosing):
        lam = eigendecompose(mask).eigenvalues[:ref.size]
        gaps.append(np.abs(lam - ref) / ref)
    return np.array(gaps)


def check_eigen_convergence(n: int, s: float) -> list[TheoremReport]:
    chk = Check("eq:i", descriptor(n, s, modes=5), default_tol())
    cases = [(middle_half(n), interval(n))]
    inner = disc()
    cases.append((inner, full_mask(square_grid(inner.grid.nodes[0]))))
    for base, enc in cases:
        gaps = eigen_convergence(base, enc)
        chk.add("gap_decrease", float((gaps[:-1] - gaps[1:]).min()))
        chk.instance_done()
    chk.note("tied eigenvalues compared index by index in sorted order")
    return [chk.report()]


def gamma_limit_forms(n: int, s: float, u=None, cells=GAMMA_RADII):
    """Forms ``<L_{Omega_r} u, u>`` along the shrinking family and the base form.

    The base is the middle half of an ``n``-node interval, ``u`` defaults to
    its first eigenvector.
    """
    base, enc = middle_half(n), interval(n)
    if u is None:
        u = eigendecompose(base).eigenvectors[:, 0]
    fam = shrinking_family(base, enc, cells)
    forms = np.array([NavierOperator.on(mk, s).quadratic_form(extend_by_zero(u, base, mk))
                      for mk in fam])
    return forms, NavierOperator.on(base, s).quadratic_form(u)


def gamma_limit_gaps(n: int, s: float, u=None, cells=GAMMA_RADII) -> np.ndarray:
    forms, target = gamma_limit_forms(n, s, u, cells)
    return (target - forms) / target


def check_gamma_limit(seed: int, n: int, s: float) -> list[TheoremReport]:
    rng = instance_rng(seed, "gamma", n, s)
    base = middle_half(n)
    mono = Check("L:eige_ueps2.i", descriptor(n, s, radii_cells=list(GAMMA_RADII)), default_tol())
    rate = Check("L:eige_ueps2.rate", descriptor(n, s, radii_cells=list(GAMMA_RADII)), default_tol(), info=True)
    weak = Check("L:eige_ueps2.ii", descriptor(n, s, radii_cells=list(GAMMA_RADII)), default_tol())
    for u in (None, rng.random(len(base)) + 0.05):
        gaps = gamma_limit_gaps(n, s, u)
        mono.add("gap_decrease", float((gaps[:-1] - gaps[1:]).min()))
        mono.add("below_limit", float(gaps.min()))
        rate.add("final_over_initial", float(gaps[-1] / gaps[0]) if gaps[0] > 0 else 0.0)
        mono.instance_done()
        rate.instance_done()
    # pairing with nonnegative test vectors increases monotonically toward the limit
    fam = shrinking_family(base, interval(n))
    for _ in range(3):
        u = rng.random(len(base))
        v = rng.random(len(base))
        ref = NavierOperator.on(base, s)
        target = ref.inner(ref.apply(u), v)
        vals = []
        for mk in fam:
            op = NavierOperator.on(mk, s)
            vals.append(op.inner(op.apply(extend_by_zero(u, base, mk)), extend_by_zero(v, base, mk)))
        gaps = (target - np.array(vals)) / abs(target)
        weak.add("gap_decrease", float((gaps[:-1] - gaps[1:]).min()))
        weak.add("below_limit", float(gaps.min()))
        weak.instance_done()
    rate.note("decay of the form gap is roughly linear in the radius")
    return [mono.report(), rate.report(), weak.report()]


def truncation_margins(op: NavierOperator, v, m: float) -> dict:
    """Margins (>= 0 when the claim holds) of the three truncation inequalities.

    Each margin is divided by ``1 + <L v, v>``.
    """
    scale = 1.0 + op.quadratic_form(v)
    out = {}
    lv = op.apply(v)
    neg = np.maximum(-(v + m), 0.0)
    if neg.any() and (v + m).max() > 0:
        out["i"] = -(op.inner(lv, neg) + op.quadratic_form(neg)) / scale
    pos = np.maximum(v - m, 0.0)
    if pos.any() and (v - m).min() < 0:
        out["ii"] = (op.inner(lv, pos) - op.quadratic_form(pos)) / scale
        out["iii"] = (op.quadratic_form(v) - op.quadratic_form(pos)
                      - op.quadratic_form(np.minimum(v, m))) / scale
    return out


def check_truncation(seed: int, n: int, s: float) -> list[TheoremReport]:
    rng = instance_rng(seed, "m_new", n, s)
    op = NavierOperator.on(interval(n), s)
    checks = {k: Check(f"L:m_new.{k}", descriptor(n, s), 1e-10, floor=strict_floor()) for k in ("i", "ii", "iii")}
    mp = Check("R:MP", descriptor(n, s), 1e-10, floor=strict_floor())
    for _ in range(TRUNCATION_DRAWS):
        v = sign_changing(n, rng)
        m = float(rng.uniform(0.0, 0.5) * np.abs(v).max()) if rng.random() < 0.7 else 0.0
        for k, val in truncation_margins(op, v, m).items():
            checks[k].add("margin", val)
            checks[k].instance_done()
        vp, vm = np.maximum(v, 0.0), np.maximum(-v, 0.0)
        mp.add("cross_form", -op.inner(op.apply(vp), vm) / (1.0 + op.quadratic_form(v)))
        mp.instance_done()
    return [c.report() for c in checks.values()] + [mp.report()]


def check_spectral_invariants(n: int, s: float) -> list[TheoremReport]:
    op = NavierOperator.on(interval(n), s)
    A = np.asarray(op.matrix)
    big = float(np.abs(A).max())
    mm = Check("S:m-matrix", descriptor(n, s), default_tol())
    off = A - np.diag(np.diag(A))
    mm.add("offdiagonal_nonpositive", -float(off.max()) / big)
    inv = np.asarray(op.inverse_matrix)
    mm.add("inverse_nonnegative", float(inv.min()) / float(np.abs(inv).max()))
    mm.add("row_sums_nonnegative", float(A.sum(axis=1).min()) / big)
    mm.instance_done()
    sym = Check("S:symmetry", descriptor(n, s), default_tol())
    sym.add("asymmetry", -float(np.abs(A - A.T).max()) / big)
    sym.instance_done()
    modes = Check("S:modes", descriptor(n, s), 1e-9)
    d = op.decomposition
    act = np.array([op.apply(d.eigenvectors[:, j]) for j in range(len(d.eigenvalues))]).T
    expect = d.eigenvectors * d.eigenvalues ** s
    modes.add("mode_action", -float(np.abs(act - expect).max() / np.abs(expect).max()))
    modes.instance_done()
    return [mm.report(), sym.report(), modes.report()]


def check_operator_theorems(seed: int, sizes, s_list, sink=None) -> list[TheoremReport]:
    out = []
    for n in sizes:
        for s in s_list:
            out += check_spectral_invariants(n, s)
            out += check_lemma2(seed, n, s)
            out += check_eigen_convergence(n, s)
            out += check_gamma_limit(seed, n, s)
            out += check_truncation(seed, n, s)
    return out
