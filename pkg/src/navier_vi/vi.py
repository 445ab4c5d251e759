"""Discrete obstacle problem ``min 1/2 <Lv, v> - <f, v>`` over ``{v >= psi}``.

With the weighted inner product this is the linear complementarity problem

    u >= psi,   mu = L u - f >= 0,   mu * (u - psi) = 0

for the dense matrix of ``L`` (an M-matrix for every operator in this
package).  The multiplier ``mu`` is reported pointwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq


class ConvergenceError(RuntimeError):
    def __init__(self, message, residuals=None, iterations=None):
        super().__init__(message)
        self.residuals = residuals
        self.iterations = iterations


class SandwichError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class ObstacleProblem:
    """Obstacle ``psi`` (``None`` means unconstrained) and forcing ``f`` for ``operator``."""

    operator: object
    psi: np.ndarray | None
    f: np.ndarray

    def __post_init__(self):
        m = self.operator.m
        f = np.array(self.f, dtype=float)
        if f.shape != (m,):
            raise ValueError(f"forcing has shape {f.shape}, expected ({m},)")
        f.flags.writeable = False
        object.__setattr__(self, "f", f)
        if self.psi is not None:
            psi = np.array(self.psi, dtype=float)
            if psi.shape != (m,):
                raise ValueError(f"obstacle has shape {psi.shape}, expected ({m},)")
            if not np.all(np.isfinite(psi)):
                raise ValueError("obstacle must be finite; use psi=None for no obstacle")
            psi.flags.writeable = False
            object.__setattr__(self, "psi", psi)

    @property
    def m(self) -> int:
        return self.operator.m

    @property
    def constrained(self) -> bool:
        return self.psi is not None

    @property
    def scale(self) -> float:
        """``1 + |f|_inf + |L psi^+|_inf``, the reference size for tolerances."""
        out = 1.0 + float(np.abs(self.f).max())
        if self.psi is not None:
            out += float(np.abs(self.operator.apply(np.maximum(self.psi, 0.0))).max())
        return out

    def default_tol(self) -> float:
        return 1e-9 * self.scale

    def energy(self, v) -> float:
        return 0.5 * self.operator.quadratic_form(v) - self.operator.inner(self.f, v)

    def with_obstacle(self, psi) -> "ObstacleProblem":
        return ObstacleProblem(self.operator, psi, self.f)

    def with_forcing(self, f) -> "ObstacleProblem":
        return ObstacleProblem(self.operator, self.psi, f)


@dataclass(frozen=True)
class KKTResiduals:
    primal: float
    dual: float
    complementarity: float
    natural: float

    def within(self, tol: float, primal_tol: float = 0.0) -> bool:
        return (self.primal >= -primal_tol and self.dual >= -tol
                and self.complementarity <= tol and self.natural <= tol)

    def to_dict(self) -> dict:
        return {"primal": _finite_or_none(self.primal), "dual": self.dual,
                "complementarity": self.complementarity, "natural": self.natural}


def _finite_or_none(x: float):
    return x if math.isfinite(x) else None


@dataclass(frozen=True, eq=False)
class Solution:
    u: np.ndarray = field(repr=False)
    mu: np.ndarray = field(repr=False)
    residuals: KKTResiduals
    iterations: int
    method: str
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"u": [float(x) for x in self.u], "mu": [float(x) for x in self.mu],
                "residuals": self.residuals.to_dict(), "iterations": int(self.iterations),
                "method": self.method, "params": dict(self.params)}


def kkt_residuals(problem: ObstacleProblem, u) -> KKTResiduals:
    """``(min(u - psi), min(mu), max(mu * (u - psi)))`` plus ``|min(u - psi, mu)|_inf``."""
    u = np.asarray(u, dtype=float)
    mu = problem.operator.apply(u) - problem.f
    if problem.psi is None:
        return KKTResiduals(math.inf, float(mu.min()), 0.0, float(np.abs(mu).max()))
    gap = u - problem.psi
    return KKTResiduals(float(gap.min()), float(mu.min()), float((mu * gap).max()),
                        float(np.abs(np.minimum(gap, mu)).max()))


def _finish(problem, u, iterations, method, params=None) -> Solution:
    u = np.array(u, dtype=float)
    mu = problem.operator.apply(u) - problem.f
    return Solution(u, mu, kkt_residuals(problem, u), iterations, method, params or {})


def _unconstrained(problem, method) -> Solution:
    return _finish(problem, problem.operator.solve(problem.f), 0, method)


def solve_psor(problem: ObstacleProblem, tol: float | None = None, omega: float = 1.5,
               max_iter: int = 100000) -> Solution:
    """Projected SOR, started from ``max(psi, L^{-1} f)``."""
    if not 0.0 < omega < 2.0:
        raise ValueError("relaxation must lie in (0, 2)")
    if not problem.constrained:
        return _unconstrained(problem, "psor")
    tol = problem.default_tol() if tol is None else float(tol)
    A = np.asarray(problem.operator.matrix)
    psi = problem.psi
    f = problem.f
    d = np.diag(A).copy()
    u = np.maximum(psi, problem.operator.solve(f))
    res = kkt_residuals(problem, u)
    it = 0
    while not res.within(tol):
        if it >= max_iter:
            raise ConvergenceError(f"PSOR did not converge in {max_iter} sweeps", res, it)
        it += 1
        for i in range(u.size):
            r = f[i] - A[i] @ u
            u[i] = max(psi[i], u[i] + omega * r / d[i])
        res = kkt_residuals(problem, u)
    return Solution(u.copy(), A @ u - f, res, it, "psor", {"omega": omega, "tol": tol})


def solve_active_set_enum(problem: ObstacleProblem, tol: float | None = None) -> Solution:
    """Brute force over all ``2^m`` active sets; the KKT point is unique."""
    m = problem.m
    if m > 15:
        raise ValueError("active-set enumeration is limited to m <= 15")
    if not problem.constrained:
        return _unconstrained(problem, "enum")
    tol = 1e-10 * problem.scale if tol is None else float(tol)
    A = np.asarray(problem.operator.matrix)
    psi, f = problem.psi, problem.f
    bits = (np.arange(2 ** m)[:, None] >> np.arange(m)) & 1
    for count, row in enumerate(bits.astype(bool)):
        act = row
        ina = ~act
        u = psi.copy()
        if ina.any():
            rhs = f[ina] - A[np.ix_(ina, act)] @ psi[act]
            u[ina] = np.linalg.solve(A[np.ix_(ina, ina)], rhs)
        mu = A @ u - f
        if np.all(u[ina] >= psi[ina] - tol) and np.all(mu[act] >= -tol):
            return _finish(problem, u, count + 1, "enum", {"active": np.nonzero(act)[0].tolist()})
    raise RuntimeError("no KKT point found among all active sets")


def smoothstep(t, eps: float):
    """1 for ``t <= 0``, 0 for ``t >= eps``, C^1 cubic in between."""
    x = np.clip(np.asarray(t, dtype=float) / eps, 0.0, 1.0)
    return 1.0 - x * x * (3.0 - 2.0 * x)


@dataclass(frozen=True)
class PenaltyConfig:
    eps: float
    damping: float = 1.0
    max_iter: int = 100000
    tol: float | None = None
    sandwich_tol: float = 1e-8

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError("damping must lie in (0, 1]")

    def theta(self, t):
        return smoothstep(t, self.eps)


def _node_update(a, r, g, p, eps):
    """Root ``t`` of ``a t + r - theta_eps(t - p) g = 0`` (increasing in ``t``)."""
    if g <= 0.0:
        return -r / a
    t = (g - r) / a
    if t <= p:
        return t
    t = -r / a
    if t >= p + eps:
        return t
    c0 = a * p + r - g

    def phi(x):
        return c0 + a * eps * x + g * x * x * (3.0 - 2.0 * x)

    return p + eps * brentq(phi, 0.0, 1.0, xtol=1e-16, rtol=4 * np.finfo(float).eps)


def solve_penalty(problem: ObstacleProblem, config: PenaltyConfig,
                  reference: Solution | None = None, certify: bool = True) -> Solution:
    """Penalised equation ``L u_eps = theta_eps(u_eps - psi) (L psi)^+``.

    General ``f`` is handled by the shift ``u -> u - L^{-1} f`` with obstacle
    ``(psi - L^{-1} f)^+``.  The nonlinear system is solved by a damped
    nonlinear Gauss-Seidel fixed-point sweep (exact scalar solves).  With
    ``certify`` the result is checked against the PSOR solution:
    ``u - tol <= u_eps <= u + eps + tol``.
    """
    if not problem.constrained:
        return _unconstrained(problem, "penalty")
    op = problem.operator
    A = np.asarray(op.matrix)
    omega_f = op.solve(problem.f)
    psi_t = np.maximum(problem.psi - omega_f, 0.0)
    g = np.maximum(op.apply(psi_t), 0.0)
    eps = config.eps
    if config.tol is None:
        # rounding in t is amplified by the penalty slope ~ |g| / eps
        slope_floor = 10.0 * np.finfo(float).eps * float(g.max(initial=0.0)) \
            * (1.0 + float(psi_t.max(initial=0.0))) / eps
        tol = 1e-13 * problem.scale + slope_floor
    else:
        tol = config.tol
    alpha = config.damping
    d = np.diag(A)
    v = psi_t.copy()
    it = 0
    while True:
        resid = float(np.abs(A @ v - config.theta(v - psi_t) * g).max())
        if resid <= tol:
            break
        if it >= config.max_iter:
            raise ConvergenceError(f"penalty iteration did not converge in {config.max_iter} sweeps",
                                   resid, it)
        it += 1
        for i in range(v.size):
            r = A[i] @ v - d[i] * v[i]
            t = _node_update(d[i], r, g[i], psi_t[i], eps)
            v[i] += alpha * (t - v[i])
    sol = _finish(problem, v + omega_f, it, "penalty",
                  {"eps": eps, "damping": alpha, "fixed_point_residual": resid})
    if certify:
        if reference is None:
            reference = solve_psor(problem, tol=1e-12 * problem.scale)
        st = config.sandwich_tol
        lo = float((sol.u - reference.u).min())
        hi = float((sol.u - reference.u - eps).max())
        if lo < -st or hi > st:
            raise SandwichError(f"penalty sandwich violated: lower {lo:.3e}, upper {hi:.3e}")
    return sol


def solve(problem: ObstacleProblem, method: str = "psor", **params) -> Solution:
    if method == "psor":
        return solve_psor(problem, **params)
    if method == "enum":
        return solve_active_set_enum(problem, **params)
    if method == "penalty":
        params = dict(params)
        cfg = PenaltyConfig(**{k: params.pop(k) for k in list(params)
                               if k in PenaltyConfig.__dataclass_fields__})
        return solve_penalty(problem, cfg, **params)
    raise ValueError(f"unknown method {method!r}")
