"""Mode-by-mode extension problem for the spectral fractional Laplacian.

For an eigenpair ``(lam, phi)`` the harmonic extension of ``phi`` is
``phi(x) * theta(y)`` where ``theta`` solves the degenerate ODE

    (y^{1-2s} theta')' = lam * y^{1-2s} theta,   theta(0) = 1, theta(Y) = 0.

The ODE is discretised by linear finite elements with the weight integrated
exactly on each cell and a lumped weighted mass; the unknown is the deficit
``d = 1 - theta`` so that the flux at ``y = 0`` is free of cancellation on
strongly graded meshes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded


class CalibrationError(RuntimeError):
    pass


def gamma(x: float) -> float:
    if not 0.0 < x < 3.0:
        raise ValueError(f"gamma evaluated outside (0, 3): {x}")
    return math.gamma(x)


def closed_form_cs(s: float) -> float:
    """``2^{2s-1} Gamma(s) / Gamma(1-s)``."""
    return 2.0 ** (2.0 * s - 1.0) * gamma(s) / gamma(1.0 - s)


def grading_exponent(s: float) -> float:
    return max(2.0, 1.0 / s, 1.0 / (1.0 - s))


def graded_mesh(s: float, Y: float, cells: int) -> np.ndarray:
    """``y_j = Y (j/M)^gamma``, clustered at ``y = 0``."""
    if cells < 2:
        raise ValueError("need at least two cells")
    return Y * (np.arange(cells + 1) / cells) ** grading_exponent(s)


@dataclass(frozen=True, eq=False)
class ModeProfile:
    s: float
    lam: float
    y: np.ndarray = field(repr=False)
    theta: np.ndarray = field(repr=False)
    deficit: np.ndarray = field(repr=False)
    boundary: float = 1.0

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["y", "theta"])
            for a, b in zip(self.y, self.theta):
                w.writerow([repr(float(a)), repr(float(b))])


def _cell_data(s: float, y: np.ndarray):
    p = 2.0 - 2.0 * s
    yp = y ** p / p
    stiff = np.diff(yp) / np.diff(y) ** 2
    mid = (0.5 * (y[1:] + y[:-1])) ** p / p
    mass = np.empty(y.size)
    mass[0] = mid[0]
    mass[1:-1] = np.diff(mid)
    mass[-1] = yp[-1] - mid[-1]
    return stiff, mass


def solve_mode_ode(s: float, lam: float, y, boundary: float = 1.0) -> ModeProfile:
    """Solve the separated extension ODE on the mesh ``y`` (``y[0] = 0``)."""
    y = np.asarray(y, dtype=float)
    if not 0.0 < s < 1.0:
        raise ValueError("s must lie in (0, 1)")
    if lam <= 0:
        raise ValueError("eigenvalue must be positive")
    if y[0] != 0.0 or np.any(np.diff(y) <= 0):
        raise ValueError("mesh must start at 0 and increase strictly")
    if y[-1] * math.sqrt(lam) < 20.0 * (1.0 - 1e-12):
        raise ValueError("mesh span must be at least 20 / sqrt(lam)")
    stiff, mass = _cell_data(s, y)
    n = y.size - 2
    ab = np.zeros((3, n))
    ab[0, 1:] = -stiff[1:-1]
    ab[1] = stiff[:-1] + stiff[1:] + lam * mass[1:-1]
    ab[2, :-1] = -stiff[1:-1]
    rhs = lam * mass[1:-1].copy()
    rhs[-1] += stiff[-1]
    try:
        inner = solve_banded((1, 1), ab, rhs)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError("mode ODE system is singular") from exc
    d = np.concatenate([[0.0], inner, [1.0]])
    theta = boundary * (1.0 - d)
    return ModeProfile(float(s), float(lam), y, theta, d, float(boundary))


def neumann_trace(profile: ModeProfile) -> float:
    """Weighted flux ``-lim y^{1-2s} theta'(y)`` at ``y = 0`` of the discrete scheme."""
    stiff, mass = _cell_data(profile.s, profile.y)
    return profile.boundary * (stiff[0] * profile.deficit[1] + profile.lam * mass[0])


def mode_energy(profile: ModeProfile) -> float:
    """``int y^{1-2s} (theta'^2 + lam theta^2) dy`` in the discrete scheme."""
    stiff, mass = _cell_data(profile.s, profile.y)
    b = profile.boundary
    return float(b * b * (np.sum(stiff * np.diff(profile.deficit) ** 2)
                          + profile.lam * np.sum(mass * (1.0 - profile.deficit) ** 2)))


def reference_mesh(s: float, lam: float = 1.0, cells: int = 4000, span: float = 20.0) -> np.ndarray:
    return graded_mesh(s, span / math.sqrt(lam), cells)


def trace(s: float, lam: float, cells: int = 4000, span: float = 20.0) -> float:
    return neumann_trace(solve_mode_ode(s, lam, reference_mesh(s, lam, cells, span)))


def calibrate_cs(s: float, cells: int = 4000, span: float = 20.0) -> float:
    """``c_s = 1 / trace(s, lam=1)`` on a fine reference mesh."""
    cs = 1.0 / trace(s, 1.0, cells, span)
    ref = closed_form_cs(s)
    if abs(cs / ref - 1.0) > 0.02:
        raise CalibrationError(f"calibrated c_s = {cs:.6g} differs from {ref:.6g} by more than 2%")
    return cs


def energy_identity_check(navier, v, mesh=None, cells: int = 800, cs: float | None = None) -> float:
    """Relative gap between ``c_s * E(w_v)`` and ``<L^s v, v>``.

    ``mesh`` is a y-mesh shared by all modes; by default it is graded with
    span ``20 / sqrt(lam_1)``.
    """
    s = navier.s
    if not 0.0 < s < 1.0:
        raise ValueError("extension needs s in (0, 1)")
    lam = navier.decomposition.eigenvalues
    coeff = navier.decomposition.coefficients(v)
    if mesh is None:
        mesh = graded_mesh(s, 20.0 / math.sqrt(lam[0]), cells)
    mesh = np.asarray(mesh, dtype=float)
    cs = calibrate_cs(s) if cs is None else cs
    energy = 0.0
    for lj, cj in zip(lam, coeff):
        if cj == 0.0:
            continue
        energy += cj * cj * mode_energy(solve_mode_ode(s, lj, mesh))
    form = navier.quadratic_form(v)
    lhs = cs * energy
    if form == 0.0:
        return 0.0 if lhs == 0.0 else math.inf
    return abs(lhs - form) / form
