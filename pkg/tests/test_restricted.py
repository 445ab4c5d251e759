import math

import numpy as np
import pytest

from navier_vi.grid import full_mask, interval_grid, mask_from_positions, square_grid
from navier_vi.restricted import (BackendError, RestrictedOperator, check_navier_dominates,
                                  enclosing_box, fractional_constant, lattice_weight_sum,
                                  lattice_weights, symbol_on_plane_wave)
from navier_vi.spectral import NavierOperator


def test_constant_at_half():
    assert fractional_constant(1, 0.5) == pytest.approx(1 / math.pi, rel=1e-14)
    # 2D, s = 1/2: 2 Gamma(3/2) / (pi * 2 sqrt(pi)) = 1 / (2 pi)
    assert fractional_constant(2, 0.5) == pytest.approx(1 / (2 * math.pi), rel=1e-14)


@pytest.mark.parametrize("s", [0.1, 0.3, 0.5, 0.8])
def test_lattice_weights_closed_form(s):
    w = lattice_weights(s, 50)
    k = np.arange(1, 51)
    ref = np.exp([math.lgamma(kk - s) - math.lgamma(kk + 1 + s) for kk in k])
    assert np.allclose(w, ref, rtol=1e-12)
    # telescoping sum, checked against a long partial sum plus the k^{-2s} tail
    big = lattice_weights(s, 10 ** 6)
    tail = 2 * (10 ** 6) ** (-2 * s) / (2 * s)
    assert 2 * big.sum() + tail == pytest.approx(lattice_weight_sum(s), rel=1e-4)


@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
@pytest.mark.parametrize("xi", [1.0, 7.0, 40.0])
def test_symbol_is_power_of_lattice_laplacian(s, xi):
    h = 1 / 32
    ref = (4 / h ** 2 * math.sin(xi * h / 2) ** 2) ** s
    assert symbol_on_plane_wave(s, h, xi) == pytest.approx(ref, rel=1e-5)


@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
def test_bigbox_converges_to_kernel(s):
    m = full_mask(interval_grid(15))
    ref = RestrictedOperator.kernel(m, s).matrix
    errs = [np.abs(RestrictedOperator.bigbox(m, s, R).matrix - ref).max() / np.abs(ref).max()
            for R in (2, 4, 8)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-3


def test_bigbox_rejects_trivial_box():
    with pytest.raises(BackendError):
        RestrictedOperator.bigbox(full_mask(interval_grid(7)), 0.5, factor=1)


def test_kernel_is_1d_only():
    with pytest.raises(BackendError):
        RestrictedOperator.kernel(full_mask(square_grid(4)), 0.5)


def test_enclosing_box_keeps_spacing():
    g = interval_grid(7)
    big, off = enclosing_box(g, 4)
    assert big.spacing == pytest.approx(g.spacing)
    assert big.coords(np.array([off[0]]))[0, 0] == pytest.approx(g.coords(np.array([0]))[0, 0])


@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
def test_navier_dominates_kernel(s, rng):
    m = mask_from_positions(full_mask(interval_grid(40)), np.arange(3, 35))
    nav = NavierOperator.on(m, s)
    res = RestrictedOperator.kernel(m, s)
    # N - R is entrywise nonnegative
    assert (np.asarray(nav.matrix) - res.matrix).min() > -1e-10 * np.abs(res.matrix).max()
    for _ in range(5):
        rep = check_navier_dominates(nav, res, rng.random(len(m)))
        assert rep.passed and rep.strict


def test_riesz_option_builds():
    op = RestrictedOperator.kernel(full_mask(interval_grid(9)), 0.5, weights="riesz")
    assert op.meta["weights"] == "riesz"
    assert np.all(np.linalg.eigvalsh(op.matrix) > 0)


def test_dominance_needs_nonnegative():
    m = full_mask(interval_grid(9))
    with pytest.raises(ValueError):
        check_navier_dominates(NavierOperator.on(m, 0.5), RestrictedOperator.kernel(m, 0.5),
                               -np.ones(9))
