"""Multinomial resampling weights for the m-out-of-n bootstrap.

Drawing m indices with replacement from {1, ..., n} and counting hits gives a
weight vector with the multinomial(m; 1/n, ..., 1/n) law.  The counts are
generated by numpy's sequential conditional-binomial method, whose cost is
O(n) per vector and essentially independent of m, which matters for the
heavy-tailed experiments where m grows like n^3.

Reproducibility contract: every stream is derived as

    numpy.random.default_rng(SeedSequence(entropy=master_seed, spawn_key=path))

via :func:`derive_stream`.  Distinct paths give statistically independent
streams, and the scheme is fixed so any experiment can be replayed from its
master seed.  Replicate r of an experiment uses path (0, r); dataset-level
draws use paths starting with 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Dispersion",
    "WeightVector",
    "derive_stream",
    "dispersion_q",
    "draw_weight_matrix",
    "draw_weights",
    "replicate_stream",
    "weight_dispersion",
]


def derive_stream(master_seed: int, *path: int) -> np.random.Generator:
    """Derive a reproducible, independent generator from a master seed and a path."""
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(p) for p in path))
    return np.random.default_rng(seq)


def replicate_stream(master_seed: int, index: int) -> np.random.Generator:
    """Stream owned by replicate ``index``; path (0, index) of the master seed."""
    return derive_stream(master_seed, 0, index)


@dataclass(frozen=True)
class WeightVector:
    """Bootstrap counts w_i >= 0 with sum w_i = m, one per original observation."""

    counts: np.ndarray
    m: int
    n: int

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (self.n,):
            raise ValueError(f"expected {self.n} counts, got shape {counts.shape}")
        if self.m < 1 or self.n < 1:
            raise ValueError("m and n must be positive")
        if np.any(counts < 0):
            raise ValueError("negative bootstrap count")
        total = int(counts.sum())
        if total != self.m:
            raise ValueError(f"counts sum to {total}, expected m={self.m}")
        counts = counts.copy()
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    def to_csv_row(self) -> str:
        return ",".join(str(int(c)) for c in self.counts)


@dataclass(frozen=True)
class Dispersion:
    """Weight dispersion Q = sum_t (w_t/m - 1/n)^2 and its exact expectation."""

    q: float
    expected: float


def draw_weights(n: int, m: int, stream: np.random.Generator) -> WeightVector:
    """One multinomial(m; 1/n, ..., 1/n) draw from the given stream."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    counts = stream.multinomial(m, np.full(n, 1.0 / n))
    return WeightVector(counts=counts, m=m, n=n)


def draw_weight_matrix(n: int, m: int, count: int, stream: np.random.Generator) -> np.ndarray:
    """Stack ``count`` weight vectors drawn sequentially from one stream.

    Returns an (count, n) int64 array; every row is validated to sum to m.
    """
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    if count < 1:
        raise ValueError("count must be positive")
    mat = stream.multinomial(m, np.full(n, 1.0 / n), size=count).astype(np.int64)
    if not np.all(mat.sum(axis=1) == m):
        raise AssertionError("multinomial rows do not sum to m")
    return mat


def dispersion_q(counts, m: int) -> np.ndarray | float:
    """Q = sum over cells of (w/m - 1/n)^2, vectorized over leading axes."""
    arr = np.asarray(counts, dtype=float)
    n = arr.shape[-1]
    dev = arr / float(m) - 1.0 / n
    return np.sum(dev * dev, axis=-1)


def weight_dispersion(w: WeightVector) -> Dispersion:
    """Dispersion of one weight vector, with expectation (1 - 1/n) / m attached.

    Per cell the second moment of w_t/m - 1/n is (1 - 1/n)/(n m); summing over
    the n cells gives the attached value.  Q vanishes iff the counts are
    exactly uniform, which requires n | m.
    """
    q = float(dispersion_q(w.counts, w.m))
    expected = (1.0 - 1.0 / w.n) / w.m
    return Dispersion(q=q, expected=expected)
