import math

import numpy as np
import pytest

from navier_vi.extension import (CalibrationError, calibrate_cs, closed_form_cs, energy_identity_check,
                                 gamma, graded_mesh, grading_exponent, mode_energy, neumann_trace,
                                 solve_mode_ode, trace)
from navier_vi.grid import full_mask, interval_grid
from navier_vi.spectral import NavierOperator


@pytest.mark.parametrize("lam", [1.0, 4.0])
def test_half_order_exact_profile(lam):
    y = graded_mesh(0.5, 20 / math.sqrt(lam), 4000)
    prof = solve_mode_ode(0.5, lam, y)
    assert np.abs(prof.theta - np.exp(-math.sqrt(lam) * y)).max() < 1e-3
    assert neumann_trace(prof) == pytest.approx(math.sqrt(lam), rel=1e-3)


def test_closed_form_constant_at_half():
    assert closed_form_cs(0.5) == pytest.approx(1.0)


@pytest.mark.parametrize("s", [0.1, 0.25, 0.5, 0.75, 0.9])
def test_calibration_matches_closed_form(s):
    assert calibrate_cs(s) == pytest.approx(closed_form_cs(s), rel=5e-3)


@pytest.mark.parametrize("s", [0.25, 0.75])
def test_trace_scales_like_power(s):
    t1 = trace(s, 1.0)
    for lam in (0.25, 3.0, 30.0):
        assert trace(s, lam) / t1 == pytest.approx(lam ** s, rel=1e-6)


def test_trace_equals_energy_discretely():
    prof = solve_mode_ode(0.3, 2.0, graded_mesh(0.3, 20 / math.sqrt(2.0), 300))
    assert neumann_trace(prof) == pytest.approx(mode_energy(prof), rel=1e-10)


def test_grading_exponent():
    assert grading_exponent(0.5) == 2.0
    assert grading_exponent(0.1) == pytest.approx(10.0)
    assert grading_exponent(0.8) == pytest.approx(5.0)


@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
def test_energy_identity_improves(s, rng):
    op = NavierOperator.on(full_mask(interval_grid(21)), s)
    v = rng.normal(size=21)
    cs = calibrate_cs(s)
    errs = [energy_identity_check(op, v, cells=c, cs=cs) for c in (200, 400, 800)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 2e-2


def test_invalid_inputs():
    y = graded_mesh(0.5, 20, 10)
    with pytest.raises(ValueError):
        solve_mode_ode(1.0, 1.0, y)
    with pytest.raises(ValueError):
        solve_mode_ode(0.5, -1.0, y)
    with pytest.raises(ValueError):
        solve_mode_ode(0.5, 1.0, graded_mesh(0.5, 5, 10))
    with pytest.raises(ValueError):
        gamma(0.0)
    with pytest.raises(ValueError):
        energy_identity_check(NavierOperator.on(full_mask(interval_grid(5)), 1.0), np.ones(5))


def test_calibration_guard():
    with pytest.raises(CalibrationError):
        calibrate_cs(0.5, cells=3)


def test_profile_csv(tmp_path):
    prof = solve_mode_ode(0.5, 1.0, graded_mesh(0.5, 20, 50))
    prof.to_csv(tmp_path / "p.csv")
    data = np.loadtxt(tmp_path / "p.csv", delimiter=",", skiprows=1)
    assert data.shape == (51, 2)
    assert data[0, 1] == 1.0 and data[-1, 1] == 0.0
