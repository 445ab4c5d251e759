"""Discrete Dirichlet Laplacian on a mask and its spectral fractional powers.

Eigenvectors are normalised in the weighted inner product
``<u, v> = h^dim * sum(u * v)``, so that coefficients and quadratic forms
approximate their continuum counterparts under refinement.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .grid import BoxGrid, DomainMask

MATERIALIZE_LIMIT = 512
DENSE_LIMIT = 2000


class EigenError(RuntimeError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


def stencil_matrix(mask: DomainMask) -> np.ndarray:
    """3-point (1D) / 5-point (2D) Laplacian with zero values outside the mask."""
    grid = mask.grid
    m = len(mask)
    A = np.diag(np.full(m, sum(2.0 / h ** 2 for h in grid.spacing)))
    adj = mask.adjacency().tocoo()
    multi = grid.multi_index(mask.indices)
    for i, j in zip(adj.row, adj.col):
        axis = int(np.nonzero(multi[i] != multi[j])[0][0])
        A[i, j] = -1.0 / grid.spacing[axis] ** 2
    return A


def box_eigenvalues(grid: BoxGrid) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form eigenvalues of the full-box stencil and their mode numbers.

    Returns ``(lam, modes)`` sorted ascending; ``modes[k]`` holds the 1-based
    sine frequencies per axis of the k-th eigenpair.
    """
    per_axis = []
    for n, h in zip(grid.nodes, grid.spacing):
        k = np.arange(1, n + 1)
        per_axis.append((4.0 / h ** 2) * np.sin(k * np.pi / (2 * (n + 1))) ** 2)
    if grid.dim == 1:
        lam = per_axis[0]
        modes = np.arange(1, grid.nodes[0] + 1)[:, None]
    else:
        lam = (per_axis[0][:, None] + per_axis[1][None, :]).ravel()
        kx, ky = np.meshgrid(np.arange(1, grid.nodes[0] + 1), np.arange(1, grid.nodes[1] + 1),
                             indexing="ij")
        modes = np.stack([kx.ravel(), ky.ravel()], axis=-1)
    order = np.argsort(lam, kind="stable")
    return lam[order], modes[order]


def box_mode_rows(grid: BoxGrid, indices, modes: np.ndarray) -> np.ndarray:
    """Entries of the normalised sine eigenvectors at nodes ``indices``.

    Shape ``(len(indices), len(modes))``.
    """
    multi = grid.multi_index(indices)
    out = np.ones((multi.shape[0], modes.shape[0]))
    for axis, (n, (a, b)) in enumerate(zip(grid.nodes, grid.extents)):
        arg = np.outer(multi[:, axis] + 1, modes[:, axis]) * np.pi / (n + 1)
        out *= np.sqrt(2.0 / (b - a)) * np.sin(arg)
    return out


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    mask: DomainMask
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)
    method: str = "dense"

    @property
    def weight(self) -> float:
        return self.mask.weight

    def coefficients(self, v) -> np.ndarray:
        return self.weight * (self.eigenvectors.T @ _on_mask(v, self.mask))

    def synthesize(self, c) -> np.ndarray:
        return self.eigenvectors @ c

    def orthonormality_residual(self) -> float:
        G = self.weight * (self.eigenvectors.T @ self.eigenvectors)
        return float(np.abs(G - np.eye(G.shape[0])).max())

    def eigen_residual(self) -> float:
        A = stencil_matrix(self.mask)
        R = A @ self.eigenvectors - self.eigenvectors * self.eigenvalues
        return float(np.abs(R).max() * np.sqrt(self.weight))

    def clusters(self, rtol: float = 1e-10) -> list[np.ndarray]:
        """Index groups of (numerically) tied eigenvalues."""
        lam = self.eigenvalues
        breaks = np.nonzero(np.diff(lam) > rtol * lam[-1])[0] + 1
        return np.split(np.arange(lam.size), breaks)

    def projector(self, idx) -> np.ndarray:
        """Weighted orthogonal projector onto span of eigenvectors ``idx``."""
        P = self.eigenvectors[:, idx]
        return self.weight * (P @ P.T)


def _on_mask(v, mask: DomainMask) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape[0] != len(mask):
        raise ValueError(f"vector of length {v.shape[0]} does not live on a mask of size {len(mask)}")
    return v


def eigendecompose(mask: DomainMask, method: str = "auto") -> SpectralDecomposition:
    """Eigenpairs of the stencil on ``mask``: closed form on full boxes, dense otherwise."""
    if method == "auto":
        method = "sine" if mask.is_full_box else "dense"
    w = mask.weight
    if method == "sine":
        if not mask.is_full_box:
            raise ValueError("closed-form sine basis needs a full-box mask")
        lam, modes = box_eigenvalues(mask.grid)
        vecs = box_mode_rows(mask.grid, mask.indices, modes)
    elif method == "dense":
        if len(mask) > DENSE_LIMIT:
            raise ValueError(f"dense eigensolve capped at m = {DENSE_LIMIT}")
        A = stencil_matrix(mask)
        try:
            lam, V = np.linalg.eigh(A)
        except np.linalg.LinAlgError as exc:
            raise EigenError(f"eigensolver failed: {exc}") from exc
        vecs = V / np.sqrt(w)
        res = np.abs(A @ V - V * lam).max()
        if res > 1e-8 * lam[-1]:
            raise EigenError(f"eigen residual {res:.3e} too large", residual=res)
    else:
        raise ValueError(f"unknown method {method!r}")
    if lam[0] <= 0:
        raise EigenError("stencil matrix is not positive definite", residual=lam[0])
    lam = np.ascontiguousarray(lam)
    vecs = np.ascontiguousarray(vecs)
    lam.flags.writeable = False
    vecs.flags.writeable = False
    return SpectralDecomposition(mask, lam, vecs, method)


class NavierOperator:
    """The spectral fractional Laplacian ``L^s`` on a mask.

    ``apply`` and ``solve`` act mode-wise; :attr:`matrix` is the dense
    matrix ``h^dim * Phi diag(lam^s) Phi^T`` (symmetric in the plain
    Euclidean sense), built lazily.
    """

    kind = "navier"

    def __init__(self, decomposition: SpectralDecomposition, s: float):
        s = float(s)
        if not 0.0 < s <= 1.0:
            raise ValueError("fractional order must lie in (0, 1]")
        self.decomposition = decomposition
        self.s = s

    @classmethod
    def on(cls, mask: DomainMask, s: float) -> "NavierOperator":
        return cls(eigendecompose(mask), s)

    def __repr__(self) -> str:
        return f"NavierOperator(s={self.s}, mask={self.mask!r})"

    @property
    def mask(self) -> DomainMask:
        return self.decomposition.mask

    @property
    def m(self) -> int:
        return len(self.mask)

    @property
    def weight(self) -> float:
        return self.mask.weight

    def power_apply(self, v, t: float) -> np.ndarray:
        d = self.decomposition
        return d.synthesize(d.eigenvalues ** t * d.coefficients(v))

    def apply(self, v) -> np.ndarray:
        return self.power_apply(v, self.s)

    def half_apply(self, v) -> np.ndarray:
        return self.power_apply(v, self.s / 2)

    def solve(self, f) -> np.ndarray:
        return self.power_apply(f, -self.s)

    def quadratic_form(self, v) -> float:
        d = self.decomposition
        c = d.coefficients(v)
        return float(np.sum(d.eigenvalues ** self.s * c * c))

    def inner(self, u, v) -> float:
        return float(self.weight * np.dot(u, v))

    def power_matrix(self, t: float) -> np.ndarray:
        d = self.decomposition
        V = d.eigenvectors
        M = self.weight * ((V * d.eigenvalues ** t) @ V.T)
        return 0.5 * (M + M.T)

    @cached_property
    def matrix(self) -> np.ndarray:
        if self.m > MATERIALIZE_LIMIT:
            raise ValueError(f"dense operator materialisation capped at m = {MATERIALIZE_LIMIT}")
        M = self.power_matrix(self.s)
        M.flags.writeable = False
        return M

    @cached_property
    def inverse_matrix(self) -> np.ndarray:
        M = self.power_matrix(-self.s)
        M.flags.writeable = False
        return M

    def to_dict(self) -> dict:
        return {"mask_ref": self.mask.to_dict(), "s": self.s, "backend": self.kind,
                "eigenvalues": [float(x) for x in self.decomposition.eigenvalues]}

    def export_csv(self, path) -> None:
        np.savetxt(path, self.matrix, delimiter=",", fmt="%.17g")
