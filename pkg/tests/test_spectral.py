import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import fractional_matrix_power

from navier_vi.grid import build_mask, full_mask, interval_grid, mask_from_positions, square_grid
from navier_vi.spectral import (NavierOperator, box_eigenvalues, eigendecompose,
                                stencil_matrix)


def test_three_node_eigenvalues():
    lam, _ = box_eigenvalues(interval_grid(3))
    # 64 sin^2(k pi / 8)
    assert np.allclose(lam, [9.372583002030479, 32.0, 54.62741699796952], rtol=1e-14)


def test_single_node_mode():
    d = eigendecompose(full_mask(interval_grid(1)))
    assert d.eigenvalues[0] == pytest.approx(8.0)
    assert abs(d.eigenvectors[0, 0]) == pytest.approx(np.sqrt(2.0))


@pytest.mark.parametrize("n", [5, 40, 200])
def test_sine_matches_dense(n):
    m = full_mask(interval_grid(n))
    a = eigendecompose(m, "sine")
    b = eigendecompose(m, "dense")
    assert np.allclose(a.eigenvalues, b.eigenvalues, rtol=1e-9, atol=0)
    assert a.orthonormality_residual() < 1e-10
    assert b.orthonormality_residual() < 1e-10


def test_trace_identity():
    # trace of the stencil equals m * sum(2 / h^2) on any mask
    m = build_mask(square_grid(11), lambda x, y: x + y < 1.2)
    d = eigendecompose(m)
    h = m.grid.spacing
    assert d.eigenvalues.sum() == pytest.approx(len(m) * sum(2 / hh ** 2 for hh in h), rel=1e-12)


def test_square_ties_and_projector():
    d = eigendecompose(full_mask(square_grid(6)))
    sizes = [len(c) for c in d.clusters()]
    assert sizes[:2] == [1, 2]
    P = d.projector(d.clusters()[1])
    w = d.weight
    # weighted projector: idempotent in the weighted product
    assert np.allclose(P @ P, P, atol=1e-12)
    assert np.trace(P) == pytest.approx(2.0)
    assert w > 0


@pytest.mark.parametrize("s", [0.25, 0.5, 0.75, 1.0])
def test_matrix_equals_fractional_matrix_power(s):
    m = mask_from_positions(full_mask(interval_grid(20)), [1, 2, 3, 4, 5, 9, 10, 11, 12])
    op = NavierOperator.on(m, s)
    ref = np.real(fractional_matrix_power(stencil_matrix(m), s))
    assert np.allclose(op.matrix, ref, rtol=1e-9, atol=1e-9 * np.abs(ref).max())


def test_solve_and_form_of_first_mode():
    op = NavierOperator.on(full_mask(interval_grid(3)), 0.5)
    phi = op.decomposition.eigenvectors[:, 0]
    coeff = op.decomposition.coefficients(op.solve(phi))
    assert coeff[0] == pytest.approx(0.3266407412190941, rel=1e-12)
    # lam_1^(1/2) = 8 sin(pi / 8)
    assert op.quadratic_form(phi) == pytest.approx(3.0614674589207183, rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(s=st.floats(0.05, 1.0), seed=st.integers(0, 2 ** 32 - 1), n=st.integers(3, 40))
def test_apply_solve_roundtrip_and_symmetry(s, seed, n):
    rng = np.random.default_rng(seed)
    op = NavierOperator.on(full_mask(interval_grid(n)), s)
    u, v = rng.normal(size=n), rng.normal(size=n)
    assert np.allclose(op.apply(op.solve(u)), u, rtol=1e-9, atol=1e-9 * np.abs(u).max())
    assert op.inner(op.apply(u), v) == pytest.approx(op.inner(u, op.apply(v)), rel=1e-9, abs=1e-9)
    assert op.quadratic_form(u) > 0
    half = op.half_apply(u)
    assert op.inner(half, half) == pytest.approx(op.quadratic_form(u), rel=1e-9)


@settings(max_examples=15, deadline=None)
@given(s=st.floats(0.05, 1.0), n=st.integers(3, 30))
def test_m_matrix(s, n):
    op = NavierOperator.on(full_mask(interval_grid(n)), s)
    A = np.asarray(op.matrix)
    off = A - np.diag(np.diag(A))
    assert off.max() <= 1e-12 * np.abs(A).max()
    assert op.inverse_matrix.min() > 0


def test_invalid_order():
    with pytest.raises(ValueError):
        NavierOperator.on(full_mask(interval_grid(5)), 0.0)
    with pytest.raises(ValueError):
        NavierOperator.on(full_mask(interval_grid(5)), 1.5)


def test_export_roundtrip(tmp_path):
    op = NavierOperator.on(full_mask(interval_grid(6)), 0.4)
    op.export_csv(tmp_path / "m.csv")
    assert np.array_equal(np.loadtxt(tmp_path / "m.csv", delimiter=","), op.matrix)
    d = op.to_dict()
    assert d["backend"] == "navier" and len(d["eigenvalues"]) == 6


def test_wrong_length_vector():
    op = NavierOperator.on(full_mask(interval_grid(6)), 0.4)
    with pytest.raises(ValueError):
        op.apply(np.ones(5))
