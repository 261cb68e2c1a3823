"""Pairwise statistics over distinct pairs, leave-one-out versions, jackknife.

Everything here is derived from one O(n^2) pass collected in :class:`PairSums`:

* ``total`` -- sum of h over all ordered pairs i != j,
* ``row[i]`` -- sum of h(x_i, x_j) over j != i,
* ``diag[i]`` -- h(x_i, x_i).

The pairwise mean over distinct pairs is ``total / (n(n-1))``; including the
diagonal terms gives the all-pairs mean ``(total + sum(diag)) / n^2``.  The
n leave-one-out statistics follow in O(n) from the row sums, and the jackknife
variance estimate is a scaled spread of those around the full statistic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernels import DimensionMismatchError, Kernel, Sample

__all__ = [
    "JackknifeEstimate",
    "PairSums",
    "deleted_u_all",
    "jackknife_sigma2",
    "pair_sums",
    "u_from_sums",
    "u_statistic",
    "v_from_sums",
    "v_statistic",
]

#: Jackknife scalings selectable by name.  "n/4" is calibrated so the estimate
#: converges to the variance of the one-point projection (see jackknife_sigma2);
#: "n(n-1)" is kept selectable for comparison with the uncalibrated convention.
JACKKNIFE_NORMALIZATIONS = ("n/4", "n(n-1)")


@dataclass(frozen=True)
class PairSums:
    """Row sums, ordered-pair total, and diagonal of a kernel on a sample."""

    total: float
    row: np.ndarray
    diag: np.ndarray

    @property
    def n(self) -> int:
        return self.row.shape[0]


@dataclass(frozen=True)
class JackknifeEstimate:
    """Leave-one-out statistics and the variance estimate built from them."""

    deleted: np.ndarray
    sigma2_hat: float
    normalization: float


def _check_pair_inputs(kernel: Kernel, sample: Sample, min_n: int) -> None:
    if sample.n < min_n:
        raise ValueError(f"need at least {min_n} observations, got {sample.n}")
    if sample.dim != kernel.dim:
        raise DimensionMismatchError(
            f"kernel '{kernel.id}' expects dimension {kernel.dim}, sample has {sample.dim}"
        )


def _kahan_add(acc: np.ndarray, comp: np.ndarray, update: np.ndarray) -> None:
    y = update - comp
    t = acc + y
    comp[...] = (t - acc) - y
    acc[...] = t


def pair_sums(
    kernel: Kernel,
    sample: Sample,
    compensated: bool = False,
    block_size: int = 1024,
) -> PairSums:
    """Accumulate row sums in one pass over unordered pairs.

    Each unordered pair is evaluated once and its value added to both rows, so
    ``total == row.sum()`` holds by construction.  Accumulation is plain
    left-to-right block summation by default; ``compensated=True`` switches to
    Kahan accumulation across blocks (and an exact final total).
    """
    _check_pair_inputs(kernel, sample, 2)
    pts = sample.points
    n = sample.n
    row = np.zeros(n)
    comp = np.zeros(n) if compensated else None

    def add(sl, update):
        if compensated:
            _kahan_add(row[sl], comp[sl], update)
        else:
            row[sl] += update

    for i0 in range(0, n, block_size):
        i1 = min(i0 + block_size, n)
        pi = pts[i0:i1]
        hb = kernel.cross(pi, pi)
        upper = np.triu(hb, k=1)
        add(slice(i0, i1), upper.sum(axis=1) + upper.sum(axis=0))
        for j0 in range(i1, n, block_size):
            j1 = min(j0 + block_size, n)
            hb = kernel.cross(pi, pts[j0:j1])
            add(slice(i0, i1), hb.sum(axis=1))
            add(slice(j0, j1), hb.sum(axis=0))

    total = math.fsum(row) if compensated else float(row.sum())
    diag = np.asarray(kernel.diag(pts), dtype=float)
    return PairSums(total=total, row=row, diag=diag)


def u_from_sums(sums: PairSums, n: int) -> float:
    if n < 2 or sums.n != n:
        raise ValueError(f"pair sums of length {sums.n} do not match n={n} (need n >= 2)")
    return sums.total / (n * (n - 1))


def v_from_sums(sums: PairSums, n: int) -> float:
    if sums.n != n:
        raise ValueError(f"pair sums of length {sums.n} do not match n={n}")
    return (sums.total + float(sums.diag.sum())) / (n * n)


def u_statistic(kernel: Kernel, sample: Sample, compensated: bool = False) -> float:
    """Mean of h over all ordered pairs of distinct observations."""
    return u_from_sums(pair_sums(kernel, sample, compensated=compensated), sample.n)


def v_statistic(kernel: Kernel, sample: Sample, compensated: bool = False) -> float:
    """Mean of h over all n^2 ordered pairs, diagonal included.

    Defined for n = 1 as h(x_1, x_1).
    """
    if sample.n == 1:
        _check_pair_inputs(kernel, sample, 1)
        return float(kernel.diag(sample.points)[0])
    return v_from_sums(pair_sums(kernel, sample, compensated=compensated), sample.n)


def deleted_u_all(sums: PairSums, n: int) -> np.ndarray:
    """All n leave-one-out pairwise means, in O(n) given the pair sums.

    Removing point i removes its row (twice, once per orientation), so the
    statistic on the remaining n-1 points is (total - 2 row_i) / ((n-1)(n-2)).
    """
    if n < 3:
        raise ValueError("leave-one-out statistics need n >= 3")
    if sums.n != n:
        raise ValueError(f"pair sums of length {sums.n} do not match n={n}")
    return (sums.total - 2.0 * sums.row) / ((n - 1) * (n - 2))


def _resolve_normalization(normalization, n: int) -> float:
    if normalization == "n/4":
        return n / 4.0
    if normalization == "n(n-1)":
        return float(n * (n - 1))
    value = float(normalization)
    if value <= 0:
        raise ValueError("jackknife normalization must be positive")
    return value


def jackknife_sigma2(
    deleted,
    u_n: float,
    n: int,
    normalization="n/4",
) -> JackknifeEstimate:
    """Jackknife estimate of the projection variance from leave-one-out spread.

    Returns ``c * sum_i (deleted_i - u_n)^2`` with the constant ``c`` recorded
    in the result.  The default ``c = n/4`` makes the estimate consistent for
    the variance of the one-point projection: the leave-one-out deviations
    behave like -2 htilde_i / n, so the raw sum of squares is ~ 4 Var(htilde)/n.
    The historical constant ``"n(n-1)"`` is selectable for comparison but grows
    without bound; a float fixes the constant directly.
    """
    if n < 3:
        raise ValueError("jackknife needs n >= 3")
    deleted = np.asarray(deleted, dtype=float)
    if deleted.shape != (n,):
        raise ValueError(f"expected {n} leave-one-out values, got shape {deleted.shape}")
    const = _resolve_normalization(normalization, n)
    dev = deleted - u_n
    sigma2 = const * float(dev @ dev)
    return JackknifeEstimate(deleted=deleted, sigma2_hat=sigma2, normalization=const)
