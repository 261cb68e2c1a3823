"""Weighted-array reductions for the law-of-large-numbers harness.

The experiments in :mod:`uvboot.mc` study sums of elementwise products
eps * x of two n x n arrays (random weights and random observations), the
fraction of cells where the weights stray from their centers relative to a
scale array, and the off-diagonal mean of a symmetric construction.  Arrays
are dense row-major float matrices; the harness keeps n <= 2000, i.e. at most
32M cells, which is comfortable for desk-scale runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "ArraySpec",
    "exceedance_rate",
    "marcinkiewicz_scale",
    "read_matrix_csv",
    "symmetric_array_mean",
    "weighted_array_sum",
    "write_matrix_csv",
]


@dataclass(frozen=True)
class ArraySpec:
    """Generators and deterministic maps describing one weighted-array study.

    ``x_gen`` and ``eps_gen`` map (n, m, stream) to n x n arrays; ``centers``
    and ``scales`` map (n, m) to the deterministic comparison arrays; ``m_rule``
    maps n to the resampling size coupled to it.  Scales must be strictly
    positive and the generators deterministic given the stream.
    """

    x_gen: Callable[[int, int, np.random.Generator], np.ndarray]
    eps_gen: Callable[[int, int, np.random.Generator], np.ndarray]
    centers: Callable[[int, int], np.ndarray]
    scales: Callable[[int, int], np.ndarray]
    m_rule: Callable[[int], int]


def _as_square(a, name: str) -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {arr.shape}")
    return arr


def weighted_array_sum(x, eps) -> float:
    """Full double sum of eps_ij * x_ij (diagonal included)."""
    x = _as_square(x, "x")
    eps = _as_square(eps, "eps")
    if x.shape != eps.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {eps.shape}")
    return float((eps * x).sum())


def exceedance_rate(eps, centers, scales, delta: float) -> float:
    """Fraction of cells with |eps - centers| > delta * scales."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    eps = _as_square(eps, "eps")
    centers = _as_square(centers, "centers")
    scales = _as_square(scales, "scales")
    if not (eps.shape == centers.shape == scales.shape):
        raise ValueError(
            f"shape mismatch: {eps.shape}, {centers.shape}, {scales.shape}"
        )
    if not np.all(scales > 0):
        raise ValueError("non-positive scale found")
    return float((np.abs(eps - centers) > delta * scales).mean())


def symmetric_array_mean(eps, x) -> float:
    """Off-diagonal mean sum_{i != j} eps_ij x_ij / (n (n - 1))."""
    x = _as_square(x, "x")
    eps = _as_square(eps, "eps")
    if x.shape != eps.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {eps.shape}")
    n = x.shape[0]
    if n < 2:
        raise ValueError("need n >= 2")
    prod = eps * x
    np.fill_diagonal(prod, 0.0)
    return float(prod.sum()) / (n * (n - 1))


def marcinkiewicz_scale(u_star: float, m: int, d: float) -> float:
    """m^(-(d-2)) * u_star, the normalization of the fractional-moment law."""
    if not d > 2:
        raise ValueError("d must exceed 2")
    if m < 1:
        raise ValueError("m must be positive")
    return float(m) ** (-(d - 2.0)) * u_star


def write_matrix_csv(path, a) -> None:
    """Write a matrix as CSV with round-trip-exact float formatting."""
    arr = _as_square(a, "matrix")
    with open(path, "w", encoding="utf-8") as fh:
        for row in arr:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_matrix_csv(path) -> np.ndarray:
    arr = np.loadtxt(path, delimiter=",", ndmin=2)
    return _as_square(arr, "matrix")
