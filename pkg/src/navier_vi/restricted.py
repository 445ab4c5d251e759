"""Restricted (Dirichlet) fractional Laplacian on zero-extended grid functions.

Two backends:

* ``kernel`` (1D only): ``(Lv)_i = C(1,s) h^{-2s} sum_{k != 0} (v_i - v_{i+k}) w_k``
  over the whole lattice, with ``v = 0`` off the mask.  The default weights
  ``w_k = Gamma(|k|-s) / Gamma(|k|+1+s)`` are those of the s-th power of the
  lattice Laplacian on ``hZ`` (``w_k ~ |k|^{-1-2s}`` for large ``|k|``); the
  plain Riesz weights ``|k|^{-1-2s}`` are available as ``weights="riesz"``.
* ``bigbox``: the spectral operator of a large enclosing box applied to the
  zero extension and restricted back to the mask.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .extension import gamma
from .grid import BoxGrid, DomainMask
from .spectral import NavierOperator, box_eigenvalues, box_mode_rows


class BackendError(ValueError):
    pass


def fractional_constant(dim: int, s: float) -> float:
    """``C(n, s) = 4^s Gamma(n/2 + s) / (pi^{n/2} |Gamma(-s)|)``."""
    abs_gamma_neg = gamma(1.0 - s) / s
    return 4.0 ** s * gamma(dim / 2.0 + s) / (math.pi ** (dim / 2.0) * abs_gamma_neg)


def lattice_weights(s: float, kmax: int) -> np.ndarray:
    """``Gamma(k-s)/Gamma(k+1+s)`` for ``k = 1..kmax`` by upward recurrence."""
    w = np.empty(max(kmax, 1))
    w[0] = gamma(1.0 - s) / gamma(2.0 + s)
    for k in range(1, kmax):
        w[k] = w[k - 1] * (k - s) / (k + 1 + s)
    return w[:kmax]


def lattice_weight_sum(s: float) -> float:
    """``sum_{k != 0} Gamma(|k|-s)/Gamma(|k|+1+s) = Gamma(1-s) / (s Gamma(1+s))`` (telescoping)."""
    return gamma(1.0 - s) / (s * gamma(1.0 + s))


def riesz_weight_sum(s: float, cutoff: int) -> float:
    """Two-sided ``sum |k|^{-1-2s}`` for ``|k| <= cutoff`` plus the integral tail bound."""
    k = np.arange(1, cutoff + 1, dtype=float)
    return 2.0 * (float(np.sum(k ** (-1.0 - 2.0 * s))) + cutoff ** (-2.0 * s) / (2.0 * s))


def enclosing_box(grid: BoxGrid, factor: int) -> tuple[BoxGrid, np.ndarray]:
    """Box ``factor`` times larger per axis with the same spacing, roughly centred.

    Returns the big grid and the per-axis index offset of the original nodes.
    """
    factor = int(factor)
    if factor < 1:
        raise ValueError("box factor must be >= 1")
    extents, nodes, offsets = [], [], []
    for (a, b), n, h in zip(grid.extents, grid.nodes, grid.spacing):
        off = ((factor - 1) * (n + 1)) // 2
        n_big = factor * (n + 1) - 1
        lo = a - off * h
        extents.append((lo, lo + (n_big + 1) * h))
        nodes.append(n_big)
        offsets.append(off)
    return BoxGrid(tuple(extents), tuple(nodes)), np.array(offsets)


class RestrictedOperator:
    kind = "restricted"

    def __init__(self, mask: DomainMask, s: float, matrix: np.ndarray, backend: str, meta: dict):
        s = float(s)
        if not 0.0 < s < 1.0:
            raise ValueError("restricted operator needs s in (0, 1)")
        self.mask = mask
        self.s = s
        self.backend = backend
        self.meta = meta
        M = 0.5 * (matrix + matrix.T)
        M.flags.writeable = False
        self.matrix = M

    @classmethod
    def kernel(cls, mask: DomainMask, s: float, weights: str = "lattice",
               cutoff: int | None = None) -> "RestrictedOperator":
        if mask.grid.dim != 1:
            raise BackendError("kernel-sum backend is one-dimensional; use bigbox in 2D")
        h = mask.grid.spacing[0]
        p = mask.indices
        dist = np.abs(p[:, None] - p[None, :])
        kmax = int(dist.max()) if len(p) > 1 else 1
        if weights == "lattice":
            w = lattice_weights(s, kmax)
            total = lattice_weight_sum(s)
            meta = {"weights": "lattice"}
        elif weights == "riesz":
            cutoff = 10 * len(mask) if cutoff is None else int(cutoff)
            w = np.arange(1, kmax + 1, dtype=float) ** (-1.0 - 2.0 * s)
            total = riesz_weight_sum(s, cutoff)
            meta = {"weights": "riesz", "cutoff": cutoff}
        else:
            raise ValueError(f"unknown kernel weights {weights!r}")
        scale = fractional_constant(1, s) * h ** (-2.0 * s)
        M = np.zeros((len(p), len(p)))
        off = dist > 0
        M[off] = -w[dist[off] - 1]
        np.fill_diagonal(M, total)
        meta["constant"] = fractional_constant(1, s)
        return cls(mask, s, scale * M, "kernel", meta)

    @classmethod
    def bigbox(cls, mask: DomainMask, s: float, factor: int = 8) -> "RestrictedOperator":
        big, offsets = enclosing_box(mask.grid, factor)
        multi = mask.grid.multi_index(mask.indices) + offsets
        idx = big.linear_index(multi)
        if len(idx) == big.size:
            raise BackendError("enclosing box coincides with the domain; "
                               "the big-box backend would reproduce the Navier operator")
        lam, modes = box_eigenvalues(big)
        rows = box_mode_rows(big, idx, modes)
        M = big.cell_volume * ((rows * lam ** s) @ rows.T)
        return cls(mask, s, M, "bigbox", {"factor": int(factor), "box_nodes": list(big.nodes)})

    def __repr__(self) -> str:
        return f"RestrictedOperator(s={self.s}, backend={self.backend!r}, mask={self.mask!r})"

    @property
    def m(self) -> int:
        return len(self.mask)

    @property
    def weight(self) -> float:
        return self.mask.weight

    @cached_property
    def _eig(self):
        return np.linalg.eigh(self.matrix)

    def apply(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.m,):
            raise ValueError(f"vector of length {v.shape} does not live on a mask of size {self.m}")
        return self.matrix @ v

    def half_apply(self, v) -> np.ndarray:
        lam, V = self._eig
        return V @ (np.sqrt(lam) * (V.T @ np.asarray(v, dtype=float)))

    def solve(self, f) -> np.ndarray:
        return np.linalg.solve(self.matrix, np.asarray(f, dtype=float))

    def quadratic_form(self, v) -> float:
        v = np.asarray(v, dtype=float)
        return float(self.weight * v @ (self.matrix @ v))

    def inner(self, u, v) -> float:
        return float(self.weight * np.dot(u, v))

    @cached_property
    def inverse_matrix(self) -> np.ndarray:
        M = np.linalg.inv(self.matrix)
        M = 0.5 * (M + M.T)
        M.flags.writeable = False
        return M

    def to_dict(self) -> dict:
        lam = self._eig[0]
        return {"mask_ref": self.mask.to_dict(), "s": self.s, "backend": self.backend,
                "params": dict(self.meta), "eigenvalues": [float(x) for x in lam]}


def symbol_on_plane_wave(s: float, h: float, xi: float, weights: str = "lattice",
                         cutoff: int = 100000) -> float:
    """Symbol of the 1D kernel-sum operator on ``exp(i xi x)`` over the full lattice.

    The weight sum is taken in closed form (lattice) or with its tail bound
    (Riesz); only the oscillatory cosine series is truncated.
    """
    c = fractional_constant(1, s) * h ** (-2.0 * s)
    k = np.arange(1, cutoff + 1, dtype=float)
    if weights == "lattice":
        w = lattice_weights(s, cutoff)
        total = lattice_weight_sum(s)
    else:
        w = k ** (-1.0 - 2.0 * s)
        total = riesz_weight_sum(s, cutoff)
    return float(c * (total - 2.0 * np.sum(w * np.cos(xi * h * k))))


@dataclass(frozen=True)
class DominanceReport:
    min_margin: float
    tolerance: float
    support_min: float | None
    passed: bool
    strict: bool

    def to_dict(self) -> dict:
        return {"min_margin": self.min_margin, "tolerance": self.tolerance,
                "support_min": self.support_min, "passed": self.passed, "strict": self.strict}


def check_navier_dominates(navier: NavierOperator, restricted: RestrictedOperator, v,
                           rtol: float = 1e-8) -> DominanceReport:
    """Margin of ``L_navier v - L_restricted v`` for nonnegative ``v``."""
    if navier.mask != restricted.mask:
        raise ValueError("operators live on different masks")
    if navier.s != restricted.s:
        raise ValueError("operators have different orders")
    v = np.asarray(v, dtype=float)
    if np.any(v < 0):
        raise ValueError("dominance check needs a nonnegative vector")
    ln = navier.apply(v)
    diff = ln - restricted.apply(v)
    tol = rtol * float(np.abs(ln).max()) if v.any() else 0.0
    interior = _support_interior(navier.mask, v)
    support_min = float(diff[interior].min()) if interior.size else None
    margin = float(diff.min())
    strict = support_min is not None and support_min > 0
    return DominanceReport(margin, tol, support_min, margin >= -tol, strict)


def _support_interior(mask: DomainMask, v) -> np.ndarray:
    nbrs = mask.neighbourhoods(1)
    return np.array([k for k, nb in enumerate(nbrs) if v[k] > 0 and np.all(v[nb] > 0)],
                    dtype=np.int64)
