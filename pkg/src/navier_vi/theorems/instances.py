"""Random instance generators shared by the theorem checks."""

from __future__ import annotations

import numpy as np


def bumps(x: np.ndarray, rng: np.random.Generator, count: int | None = None) -> np.ndarray:
    """Sum of Gaussian bumps at random centres; ``x`` has shape ``(m, dim)``."""
    count = int(rng.integers(1, 4)) if count is None else count
    out = np.zeros(x.shape[0])
    for _ in range(count):
        c = rng.uniform(0.2, 0.8, size=x.shape[1])
        w = rng.uniform(0.05, 0.2)
        out += rng.uniform(0.3, 1.0) * np.exp(-((x - c) ** 2).sum(axis=1) / (2 * w * w))
    return out


def random_obstacle(x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    kind = rng.integers(3)
    if kind == 0:
        return bumps(x, rng) - rng.uniform(0.0, 0.4)
    if kind == 1:
        walk = np.cumsum(rng.normal(size=x.shape[0])) / np.sqrt(x.shape[0])
        return walk - walk.mean() + rng.uniform(-0.2, 0.3)
    return rng.uniform(-1.0, 1.0, size=x.shape[0])


def random_forcing(m: int, rng: np.random.Generator, sign: str = "any") -> np.ndarray:
    f = rng.normal(scale=rng.uniform(0.1, 3.0), size=m)
    if sign == "zero":
        return np.zeros(m)
    if sign == "nonneg":
        return np.abs(f)
    return f


def sparse_nonneg(m: int, rng: np.random.Generator, density: float = 0.2) -> np.ndarray:
    g = rng.exponential(size=m) * (rng.random(m) < density)
    if not g.any():
        g[rng.integers(m)] = rng.exponential()
    return g


def sign_changing(m: int, rng: np.random.Generator) -> np.ndarray:
    while True:
        v = rng.normal(size=m)
        if rng.random() < 0.5:
            k = min(5, m)
            v = np.convolve(v, np.ones(k) / k, mode="same")
        if v.max() > 0 > v.min():
            return v
