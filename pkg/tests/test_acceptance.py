"""Acceptance gate: one test (and one PASS/FAIL line) per criterion."""

import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from navier_vi.cli import main
from navier_vi.extension import calibrate_cs, closed_form_cs
from navier_vi.grid import build_mask, full_mask, interval_grid, mask_from_positions, square_grid
from navier_vi.spectral import NavierOperator, eigendecompose
from navier_vi.theorems import check_navier_dirichlet
from navier_vi.theorems.common import instance_rng, random_nested_pair
from navier_vi.theorems.extension_checks import energy_refinement, half_trace_errors
from navier_vi.theorems.instances import random_forcing, random_obstacle, sign_changing
from navier_vi.theorems.operators import domain_monotonicity, gamma_limit_gaps, truncation_margins
from navier_vi.theorems.regularity import ls_margins
from navier_vi.vi import (ObstacleProblem, PenaltyConfig, solve_active_set_enum, solve_penalty,
                          solve_psor)

SEED = 20240607


def record(number: int, ok: bool, text: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {text}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)
    assert ok, line


def _interval_op(n, s):
    return NavierOperator.on(full_mask(interval_grid(n)), s)


def _problem(op, rng):
    x = op.mask.coords()
    return ObstacleProblem(op, random_obstacle(x, rng), random_forcing(op.m, rng))


def _accurate(prob):
    return solve_psor(prob, tol=1e-12 * prob.scale)


def test_01_eigen_core():
    t0 = time.perf_counter()
    worst_lam, worst_orth = 0.0, 0.0
    for n in (1, 2, 3, 17, 64, 127, 200):
        m = full_mask(interval_grid(n))
        a, b = eigendecompose(m, "sine"), eigendecompose(m, "dense")
        worst_lam = max(worst_lam, float(np.abs(a.eigenvalues / b.eigenvalues - 1).max()))
        worst_orth = max(worst_orth, a.orthonormality_residual(), b.orthonormality_residual())
    dt = time.perf_counter() - t0
    record(1, worst_lam <= 1e-9 and worst_orth <= 1e-10 and dt < 10,
           f"sine vs dense eigenvalues rel {worst_lam:.1e} (<=1e-9), "
           f"orthonormality {worst_orth:.1e} (<=1e-10), {dt:.1f}s (<10s)")


def test_02_operator_identity():
    masks = [full_mask(interval_grid(200)),
             mask_from_positions(full_mask(interval_grid(220)), np.r_[5:100, 130:205]),
             build_mask(square_grid(14), lambda x, y: (x - .5) ** 2 + (y - .5) ** 2 < 0.2)]
    worst = 0.0
    for m in masks:
        d = eigendecompose(m)
        assert len(m) <= 200
        for s in (0.25, 0.5, 0.75, 1.0):
            op = NavierOperator(d, s)
            for j in range(len(m)):
                phi = d.eigenvectors[:, j]
                ref = d.eigenvalues[j] ** s * phi
                worst = max(worst, float(np.abs(op.apply(phi) - ref).max() / np.abs(ref).max()))
    record(2, worst <= 1e-9, f"L^s phi_j = lam_j^s phi_j rel {worst:.1e} (<=1e-9), m <= 200, 4 orders")


def test_03_solver_equivalence():
    rng = np.random.default_rng(SEED)
    t0 = time.perf_counter()
    worst = 0.0
    for k in range(50):
        n = 3 + k % 8
        s = (0.25, 0.5, 0.75, 1.0)[k % 4]
        prob = _problem(_interval_op(n, s), rng)
        a, b = solve_psor(prob), solve_active_set_enum(prob)
        worst = max(worst, float(np.abs(a.u - b.u).max()))
    dt = time.perf_counter() - t0
    record(3, worst <= 1e-8 and dt < 30,
           f"PSOR vs enumeration max diff {worst:.1e} (<=1e-8) on 50 instances, {dt:.1f}s (<30s)")


def test_04_penalty_sandwich():
    rng = np.random.default_rng(SEED + 4)
    lo, hi = np.inf, np.inf
    for k in range(10):
        prob = _problem(_interval_op(31, (0.25, 0.5, 0.75)[k % 3]), rng)
        ref = _accurate(prob)
        for eps in (1e-1, 1e-2, 1e-3):
            pen = solve_penalty(prob, PenaltyConfig(eps), reference=ref, certify=False)
            lo = min(lo, float((pen.u - ref.u).min()))
            hi = min(hi, float((ref.u + eps - pen.u).min()))
    record(4, lo >= -1e-8 and hi >= -1e-8,
           f"u - 1e-8 <= u_eps <= u + eps + 1e-8: worst lower {lo:.1e}, worst upper {hi:.1e}")


def test_05_lewy_stampacchia():
    violations, comp_viol, lower_viol, worst = 0, 0, 0, 0.0
    for s in (0.25, 0.5, 0.75):
        rng = instance_rng(SEED, "acceptance-ls", 31, s)
        op = _interval_op(31, s)
        for _ in range(30):
            prob = _problem(op, rng)
            mg = ls_margins(prob, _accurate(prob).u)
            violations += mg["upper_with_f"] < -1e-8
            lower_viol += mg["lower"] < -1e-8
            comp_viol += mg["complementarity"] < -1e-8
            worst = min(worst, mg["upper_with_f"])
    record(5, violations == 0 and lower_viol == 0 and comp_viol == 0,
           f"0 <= mu <= (L(psi-omega_f)^+ - f)^+: {violations}/90 upper violations "
           f"(worst {worst:.2e}*scale), {lower_viol} lower, {comp_viol} complementarity")


def test_05_companion_shifted_bound():
    """The bound without the ``- f`` term holds on the same instances."""
    worst = 0.0
    for s in (0.25, 0.5, 0.75):
        rng = instance_rng(SEED, "acceptance-ls", 31, s)
        op = _interval_op(31, s)
        for _ in range(30):
            prob = _problem(op, rng)
            mg = ls_margins(prob, _accurate(prob).u)
            worst = min(worst, mg["upper"], mg["lower"], mg["complementarity"])
    assert worst >= -1e-8


def test_06_linf_stability():
    rng = np.random.default_rng(SEED + 6)
    worst = {"full": np.inf, "i": np.inf, "ii": np.inf}
    for k in range(30):
        op = _interval_op(31, (0.25, 0.5, 0.75)[k % 3])
        p1 = _problem(op, rng)
        p2 = p1.with_obstacle(p1.psi + 0.3 * random_obstacle(op.mask.coords(), rng))
        du = _accurate(p1).u - _accurate(p2).u
        dp = p1.psi - p2.psi
        worst["full"] = min(worst["full"], np.abs(dp).max() + 1e-8 - np.abs(du).max())
        worst["i"] = min(worst["i"], np.maximum(dp, 0).max() + 1e-8 - np.maximum(du, 0).max())
        worst["ii"] = min(worst["ii"], np.maximum(-dp, 0).max() + 1e-8 - np.maximum(-du, 0).max())
    record(6, min(worst.values()) >= 0,
           "|u1-u2| <= |psi1-psi2| + 1e-8 on 30 pairs: slack "
           + ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))


def test_07_domain_monotonicity_and_gamma_limit():
    rng = np.random.default_rng(SEED + 7)
    forms, points = [], []
    for k in range(10):
        if k < 9:
            inner, outer = random_nested_pair(63, rng)
        else:
            inner = build_mask(square_grid(15), lambda x, y: (x - .5) ** 2 + (y - .5) ** 2 < 0.09)
            outer = full_mask(square_grid(15))
        f, p = domain_monotonicity(inner, outer, 0.5, rng.random(len(inner)) + 0.05)
        forms.append(f)
        points.append(p)
    strict = min(forms) > 0 and min(points) > 0
    # base of m = 127 nodes (middle half of 255), radii 8h, 4h, 2h, h
    gaps = gamma_limit_gaps(255, 0.5)
    monotone = bool(np.all(np.diff(gaps) < 0) and gaps[-1] > 0)
    ratio = gaps[-1] / gaps[0]
    record(7, strict and monotone and ratio < 0.05,
           f"form margin min {min(forms):.2e}, pointwise min {min(points):.2e} (>0); "
           f"gamma-limit gaps {np.array2string(gaps, precision=4)} monotone={monotone}, "
           f"final/initial {ratio:.3f} (<0.05)")


def test_08_truncation():
    worst, strict_min = np.inf, np.inf
    draws = 0
    for s in (0.25, 0.5, 0.75):
        rng = instance_rng(SEED, "acceptance-mnew", 63, s)
        op = _interval_op(63, s)
        for _ in range(100):
            v = sign_changing(63, rng)
            m = float(rng.uniform(0.0, 0.5) * np.abs(v).max())
            mg = truncation_margins(op, v, m)
            if mg:
                draws += 1
                worst = min(worst, min(mg.values()))
                strict_min = min(strict_min, min(mg.values()))
    record(8, worst > -1e-10 and draws > 0,
           f"truncation i-iii margins over {draws} draws: min {worst:.2e} (>-1e-10), "
           f"strict margin logged {strict_min:.2e}")


def test_09_navier_dirichlet():
    reps = check_navier_dirichlet(SEED, [63], [0.25, 0.5, 0.75])
    comp = [r for r in reps if r.theorem == "T:comparing1"]
    ordered = min(r.margins["iii.ordered"] for r in comp)
    resolve = min(r.margins["v.resolve"] for r in comp)
    chain = [r for r in reps if r.theorem == "T:comparing1.strict"]
    chain_ok = all(r.passed for r in chain)
    weak = sum(r.status == "weak-pass" for r in chain)
    true = [r for r in reps if r.theorem == "R:true" and r.instance["obstacle"] == "bump"]
    true_ok = all(r.status == "pass" for r in true) and bool(true)
    record(9, ordered >= -1e-8 and resolve >= -1e-8 and chain_ok and true_ok
           and all(r.passed for r in comp),
           f"u_N <= u_D + 1e-8 (min {ordered:.1e}), re-solve {resolve:.1e}, "
           f"energy chain ok={chain_ok} ({weak} weak), R:true on bump ok={true_ok}")


def test_10_extension():
    t0 = time.perf_counter()
    traces = half_trace_errors()
    trace_err = max(v["trace"] for v in traces.values())
    cs_err = max(abs(calibrate_cs(s) / closed_form_cs(s) - 1) for s in (0.25, 0.5, 0.75))
    rng = np.random.default_rng(SEED + 10)
    worst, decreasing = 0.0, True
    for s in (0.25, 0.5, 0.75):
        errs = energy_refinement(s, 31, rng.normal(size=31))
        worst = max(worst, float(errs[-1]))
        decreasing &= bool(np.all(np.diff(errs) < 0))
    dt = time.perf_counter() - t0
    record(10, trace_err <= 1e-3 and cs_err <= 5e-3 and worst <= 2e-2 and decreasing and dt < 60,
           f"trace err {trace_err:.1e} (<=1e-3), c_s err {cs_err:.1e} (<=5e-3), "
           f"energy identity {worst:.1e} (<=2e-2) decreasing={decreasing}, {dt:.1f}s (<60s)")


def test_11_reproducibility(tmp_path):
    args = ["run", "--suite", "all", "--sizes", "15", "--s", "0.5", "--seed", str(SEED)]
    codes = [main(args + ["--out", str(tmp_path / name)]) for name in ("a", "b")]
    bodies = [(tmp_path / name / "report.json").read_text().split('"body": ', 1)[1]
              for name in ("a", "b")]
    record(11, bodies[0] == bodies[1] and codes[0] == codes[1],
           f"two identical runs: byte-identical bodies={bodies[0] == bodies[1]}, exit codes {codes}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
