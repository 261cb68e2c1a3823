"""Shared fixtures and independent brute-force oracles.

The oracles below are deliberately naive double loops over kernel.eval so the
vectorized implementations are checked against an independent computation
path; they must stay loop-based.
"""

import numpy as np
import pytest

from uvboot import Sample, WeightVector, get_kernel, kernel_ids


def brute_u(kernel, sample):
    n = sample.n
    total = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                total += kernel.eval(sample.points[i], sample.points[j])
    return total / (n * (n - 1))


def brute_v(kernel, sample):
    n = sample.n
    total = 0.0
    for i in range(n):
        for j in range(n):
            total += kernel.eval(sample.points[i], sample.points[j])
    return total / (n * n)


def brute_deleted(kernel, sample, i):
    keep = [j for j in range(sample.n) if j != i]
    return brute_u(kernel, Sample(sample.points[keep]))


def brute_bootstrap_u(kernel, sample, w):
    n = sample.n
    total = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                total += int(w.counts[i]) * int(w.counts[j]) * kernel.eval(
                    sample.points[i], sample.points[j]
                )
    return total / (w.m * (w.m - 1))


def brute_bootstrap_v(kernel, sample, w):
    n = sample.n
    total = 0.0
    for i in range(n):
        for j in range(n):
            total += int(w.counts[i]) * int(w.counts[j]) * kernel.eval(
                sample.points[i], sample.points[j]
            )
    return total / (w.m * (w.m - 1))


def brute_split(kernel, sample, w, proj):
    n, m = sample.n, w.m
    g = 0.0
    h_lin = 0.0
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            c = int(w.counts[i]) * int(w.counts[j]) / (m * (m - 1)) - 1.0 / (n * (n - 1))
            h = kernel.eval(sample.points[i], sample.points[j])
            g += c * (h - proj[i] - proj[j])
            h_lin += c * (proj[i] + proj[j])
    return g, h_lin


def random_sample(kernel, n, rng):
    """Random sample with the kernel's required dimension, O(1)-scaled values."""
    return Sample(rng.normal(0.5, 1.0, (n, kernel.dim)))


def random_weights(n, m, rng):
    counts = rng.multinomial(m, np.full(n, 1.0 / n))
    return WeightVector(counts=counts, m=m, n=n)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


@pytest.fixture(scope="session")
def repo_root():
    import pathlib

    return pathlib.Path(__file__).resolve().parent.parent


@pytest.fixture(params=kernel_ids())
def any_kernel(request):
    return get_kernel(request.param)
