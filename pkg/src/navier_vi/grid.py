"""Uniform tensor grids on boxes, node masks, and nested mask families.

A :class:`BoxGrid` with ``n`` interior nodes on ``(a, b)`` has spacing
``h = (b - a) / (n + 1)``; the two boundary layers are not stored.  Interior
nodes are addressed by a linear index in C order over the axes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree


class EmptyDomainError(ValueError):
    pass


class NestingError(ValueError):
    pass


@dataclass(frozen=True)
class BoxGrid:
    extents: tuple[tuple[float, float], ...]
    nodes: tuple[int, ...]

    def __post_init__(self):
        extents = tuple((float(a), float(b)) for a, b in self.extents)
        nodes = tuple(int(n) for n in self.nodes)
        if len(extents) != len(nodes) or len(nodes) not in (1, 2):
            raise ValueError("grid must be 1D or 2D with one extent per axis")
        for (a, b), n in zip(extents, nodes):
            if not b > a:
                raise ValueError(f"empty interval ({a}, {b})")
            if n < 1:
                raise ValueError("need at least one interior node per axis")
        object.__setattr__(self, "extents", extents)
        object.__setattr__(self, "nodes", nodes)

    @property
    def dim(self) -> int:
        return len(self.nodes)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple((b - a) / (n + 1) for (a, b), n in zip(self.extents, self.nodes))

    @property
    def cell_volume(self) -> float:
        """Weight of the discrete inner product, ``prod(h)``."""
        return float(np.prod(self.spacing))

    @property
    def size(self) -> int:
        return int(np.prod(self.nodes))

    def multi_index(self, linear) -> np.ndarray:
        """Per-axis indices as an array of shape ``(k, dim)``."""
        return np.stack(np.unravel_index(np.asarray(linear, dtype=np.int64), self.nodes), axis=-1)

    def linear_index(self, multi) -> np.ndarray:
        multi = np.atleast_2d(np.asarray(multi, dtype=np.int64))
        return np.ravel_multi_index(tuple(multi.T), self.nodes)

    def coords(self, linear=None) -> np.ndarray:
        """Node coordinates, shape ``(k, dim)``; all interior nodes by default."""
        if linear is None:
            linear = np.arange(self.size)
        idx = self.multi_index(linear)
        lo = np.array([a for a, _ in self.extents])
        h = np.array(self.spacing)
        return lo + (idx + 1) * h

    def to_dict(self) -> dict:
        return {"dim": self.dim, "extents": [list(e) for e in self.extents],
                "nodes_per_axis": list(self.nodes)}


def interval_grid(n: int, a: float = 0.0, b: float = 1.0) -> BoxGrid:
    return BoxGrid(((a, b),), (n,))


def square_grid(n: int, a: float = 0.0, b: float = 1.0) -> BoxGrid:
    return BoxGrid(((a, b), (a, b)), (n, n))


@dataclass(frozen=True, eq=False)
class DomainMask:
    """A nonempty set of interior nodes of ``grid``, stored sorted."""

    grid: BoxGrid
    indices: np.ndarray = field(repr=False)

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        if idx.ndim != 1:
            raise ValueError("indices must be one-dimensional")
        if idx.size == 0:
            raise EmptyDomainError("empty domain: mask selects no interior node")
        idx = np.unique(idx)
        if idx.size != np.asarray(self.indices).size:
            raise ValueError("duplicate node indices in mask")
        if idx[0] < 0 or idx[-1] >= self.grid.size:
            raise ValueError("mask index outside the interior of the grid")
        idx.flags.writeable = False
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return int(self.indices.size)

    def __eq__(self, other) -> bool:
        return (isinstance(other, DomainMask) and self.grid == other.grid
                and np.array_equal(self.indices, other.indices))

    def __hash__(self) -> int:
        return hash((self.grid, self.indices.tobytes()))

    def __repr__(self) -> str:
        return f"DomainMask(dim={self.grid.dim}, nodes={self.grid.nodes}, m={len(self)})"

    @property
    def m(self) -> int:
        return len(self)

    @property
    def weight(self) -> float:
        return self.grid.cell_volume

    @property
    def is_full_box(self) -> bool:
        return len(self) == self.grid.size

    def coords(self) -> np.ndarray:
        return self.grid.coords(self.indices)

    def issubset(self, other: "DomainMask") -> bool:
        if self.grid != other.grid:
            return False
        return bool(np.isin(self.indices, other.indices, assume_unique=True).all())

    def positions_in(self, other: "DomainMask") -> np.ndarray:
        """Positions of this mask's nodes inside ``other`` (which must contain it)."""
        if not self.issubset(other):
            raise NestingError("mask is not contained in the target mask")
        return np.searchsorted(other.indices, self.indices)

    def adjacency(self) -> csr_matrix:
        """Nearest-neighbour (stencil) adjacency between mask nodes."""
        multi = self.grid.multi_index(self.indices)
        lookup = {tuple(p): k for k, p in enumerate(multi)}
        rows, cols = [], []
        for k, p in enumerate(multi):
            for axis in range(self.grid.dim):
                q = list(p)
                q[axis] += 1
                j = lookup.get(tuple(q))
                if j is not None:
                    rows += [k, j]
                    cols += [j, k]
        return csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(self), len(self)))

    def n_components(self) -> int:
        return int(connected_components(self.adjacency(), directed=False)[0])

    def interior_positions(self, rho: int = 1) -> np.ndarray:
        """Positions of nodes whose Euclidean ``rho``-cell neighbourhood lies in the mask.

        Neighbourhood nodes that fall on the box boundary count as outside.
        """
        multi = self.grid.multi_index(self.indices)
        offsets = _ball_offsets(self.grid.dim, rho)
        member = set(map(tuple, multi))
        shape = np.array(self.grid.nodes)
        keep = []
        for k, p in enumerate(multi):
            q = p + offsets
            if np.any(q < 0) or np.any(q >= shape):
                continue
            if all(tuple(r) in member for r in q):
                keep.append(k)
        return np.array(keep, dtype=np.int64)

    def neighbourhoods(self, rho: int = 1) -> list[np.ndarray]:
        """For every node, positions (within the mask) of its ``rho``-cell neighbours."""
        multi = self.grid.multi_index(self.indices)
        lookup = {tuple(p): k for k, p in enumerate(multi)}
        offsets = _ball_offsets(self.grid.dim, rho)
        out = []
        for p in multi:
            out.append(np.array([lookup[tuple(q)] for q in p + offsets if tuple(q) in lookup],
                                dtype=np.int64))
        return out

    def to_dict(self) -> dict:
        d = self.grid.to_dict()
        d["included_indices"] = [int(i) for i in self.indices]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DomainMask":
        grid = BoxGrid(tuple(tuple(e) for e in d["extents"]), tuple(d["nodes_per_axis"]))
        if int(d.get("dim", grid.dim)) != grid.dim:
            raise ValueError("dim does not match extents")
        return cls(grid, np.asarray(d["included_indices"], dtype=np.int64))


def _ball_offsets(dim: int, rho: int) -> np.ndarray:
    r = np.arange(-rho, rho + 1)
    grids = np.meshgrid(*([r] * dim), indexing="ij")
    offs = np.stack([g.ravel() for g in grids], axis=-1)
    return offs[(offs ** 2).sum(axis=1) <= rho * rho]


def full_mask(grid: BoxGrid) -> DomainMask:
    return DomainMask(grid, np.arange(grid.size))


def build_mask(grid: BoxGrid, predicate: Callable[..., bool]) -> DomainMask:
    """Mask of the interior nodes whose coordinates satisfy ``predicate(x[, y])``."""
    pts = grid.coords()
    keep = [k for k, p in enumerate(pts) if predicate(*p)]
    if not keep:
        raise EmptyDomainError("empty domain: predicate selects no interior node")
    return DomainMask(grid, np.array(keep, dtype=np.int64))


def mask_from_positions(super_mask: DomainMask, positions) -> DomainMask:
    return DomainMask(super_mask.grid, super_mask.indices[np.asarray(positions, dtype=np.int64)])


def extend_by_zero(v, sub: DomainMask, sup: DomainMask) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (len(sub),):
        raise ValueError(f"vector of length {v.shape} does not live on a mask of size {len(sub)}")
    out = np.zeros(len(sup))
    out[sub.positions_in(sup)] = v
    return out


def restrict(v, sup: DomainMask, sub: DomainMask) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (len(sup),):
        raise ValueError(f"vector of length {v.shape} does not live on a mask of size {len(sup)}")
    return v[sub.positions_in(sup)].copy()


@dataclass(frozen=True, eq=False)
class NestedFamily:
    base: DomainMask
    enclosing: DomainMask
    radii: tuple[float, ...]
    masks: tuple[DomainMask, ...]
    index_maps: tuple[np.ndarray, ...]

    def __iter__(self):
        return iter(self.masks)

    def __len__(self) -> int:
        return len(self.masks)

    def check(self) -> bool:
        chain = [self.enclosing, *self.masks, self.base]
        return all(b.issubset(a) for a, b in zip(chain, chain[1:]))


def dilate(base: DomainMask, enclosing: DomainMask, radius: float) -> DomainMask:
    """Nodes of ``enclosing`` within Euclidean distance ``radius`` of ``base``."""
    if not base.issubset(enclosing):
        raise NestingError("base mask must be contained in the enclosing mask")
    tree = cKDTree(base.coords())
    dist, _ = tree.query(enclosing.coords())
    h = min(base.grid.spacing)
    keep = np.nonzero(dist <= radius + 1e-9 * h)[0]
    return mask_from_positions(enclosing, keep)


def make_shrinking_family(base: DomainMask, enclosing: DomainMask,
                          radii: Sequence[float]) -> NestedFamily:
    """Dilations of ``base`` inside ``enclosing`` for strictly decreasing ``radii``."""
    radii = tuple(float(r) for r in radii)
    if not radii:
        raise ValueError("need at least one radius")
    if any(r <= 0 for r in radii) or any(b >= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be positive and strictly decreasing")
    masks = tuple(dilate(base, enclosing, r) for r in radii)
    if radii[-1] < min(base.grid.spacing) and len(masks[-1]) == len(base):
        warnings.warn("smallest radius is below one grid cell; the last dilation equals the base",
                      stacklevel=2)
    maps = tuple(b.positions_in(a) for a, b in zip(masks, masks[1:]))
    return NestedFamily(base, enclosing, radii, masks, maps)
