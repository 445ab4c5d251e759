"""Seeding and mask helpers shared by the theorem suites."""

from __future__ import annotations

import zlib

import numpy as np

from ..grid import DomainMask, build_mask, full_mask, interval_grid, mask_from_positions, square_grid

GRID_2D = 15

_SETTINGS = {"tol": 1e-8, "floor": 1e-12}


def configure(tol: float | None = None, floor: float | None = None) -> None:
    """Override the relative tolerance and the strictness floor for later checks."""
    if tol is not None:
        _SETTINGS["tol"] = float(tol)
    if floor is not None:
        _SETTINGS["floor"] = float(floor)


def settings() -> dict:
    return dict(_SETTINGS)


def default_tol() -> float:
    return _SETTINGS["tol"]


def strict_floor() -> float:
    return _SETTINGS["floor"]


def instance_rng(seed: int, tag: str, *keys) -> np.random.Generator:
    """Independent stream per (suite tag, size, s, ...), derived from one 64-bit seed."""
    key = [zlib.crc32(tag.encode())] + [int(round(float(k) * 1_000_000)) for k in keys]
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(key)))


def interval(n: int) -> DomainMask:
    return full_mask(interval_grid(n))


def subinterval(n: int, lo: int, hi: int) -> DomainMask:
    """Nodes ``lo..hi-1`` of an ``n``-node interval."""
    return mask_from_positions(interval(n), np.arange(lo, hi))


def middle_half(n: int) -> DomainMask:
    q = (n + 1) // 4
    return subinterval(n, q, n - q)


def disc(n: int = GRID_2D, radius: float = 0.3) -> DomainMask:
    return build_mask(square_grid(n), lambda x, y: (x - 0.5) ** 2 + (y - 0.5) ** 2 <= radius ** 2)


def random_nested_pair(n: int, rng: np.random.Generator) -> tuple[DomainMask, DomainMask]:
    """Two sub-intervals, the inner one at least a cell away from the ends of the outer."""
    lo = int(rng.integers(0, max(1, n // 4)))
    hi = int(rng.integers(n - n // 4, n + 1))
    outer = subinterval(n, lo, hi)
    width = hi - lo
    a = lo + 1 + int(rng.integers(0, max(1, width // 4)))
    b = hi - 1 - int(rng.integers(0, max(1, width // 4)))
    if b - a < 2:
        a, b = lo + 1, hi - 1
    return subinterval(n, a, b), outer


def descriptor(n: int, s: float, **extra) -> dict:
    out = {"size": int(n), "s": float(s)}
    out.update(extra)
    return out
