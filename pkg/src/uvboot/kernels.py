"""Symmetric pairwise kernels, samples, and projection diagnostics.

A kernel is a symmetric, deterministic real function ``h(x, y)`` of two
d-dimensional observations.  Pairwise statistics built on top of it (see
:mod:`uvboot.ustat` and :mod:`uvboot.boot`) only ever touch kernels through
the vectorized ``cross`` / ``diag`` evaluators defined here, so all O(n^2)
work stays inside numpy.

Built-in catalog (stable ids, used by the CLI and experiment configs):

========== === =============================================
id         dim definition
========== === =============================================
product     1  x * y
variance    1  (x - y)^2 / 2
gini        1  |x - y|
kendall     2  sign((x1 - y1) * (x2 - y2))
sqrtprod    1  sign(x * y) * sqrt(|x * y|)
========== === =============================================
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "DimensionMismatchError",
    "Kernel",
    "ProjectionSummary",
    "Sample",
    "UnknownKernelError",
    "as_observation",
    "degeneracy_check",
    "empirical_projection",
    "eval_builtin",
    "get_kernel",
    "kernel_ids",
]


class UnknownKernelError(ValueError):
    """Requested kernel id is not in the built-in catalog."""


class DimensionMismatchError(ValueError):
    """Observation dimension does not match what the kernel expects."""


def as_observation(x, dim: int | None = None) -> np.ndarray:
    """Coerce ``x`` to a finite 1-d float array, optionally checking its length."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1:
        raise ValueError(f"an observation must be a scalar or 1-d, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("observation has non-finite coordinates")
    if dim is not None and arr.size != dim:
        raise DimensionMismatchError(f"expected dimension {dim}, got {arr.size}")
    return arr


@dataclass(frozen=True)
class Sample:
    """Ordered list of d-dimensional observations, stored as an (n, d) array.

    The array is copied on construction, validated to be finite, and frozen
    (read-only) so samples can be shared between threads/processes safely.
    """

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError(f"sample must be a non-empty (n, d) array, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("sample contains non-finite coordinates")
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class Kernel:
    """Symmetric pairwise kernel with vectorized evaluation.

    ``cross(a, b)`` maps an (na, d) and an (nb, d) block of observations to the
    (na, nb) matrix of kernel values; ``diag(a)`` returns the length-na vector
    h(a_i, a_i).  Both must be pure and symmetric: cross(a, b).T == cross(b, a).
    """

    id: str
    dim: int
    _cross: Callable[[np.ndarray, np.ndarray], np.ndarray]
    _diag: Callable[[np.ndarray], np.ndarray]

    def eval(self, x, y) -> float:
        """Evaluate h on a single pair of observations."""
        xo = as_observation(x, self.dim)
        yo = as_observation(y, self.dim)
        return float(self._cross(xo[None, :], yo[None, :])[0, 0])

    def cross(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if a.ndim != 2 or b.ndim != 2 or a.shape[1] != self.dim or b.shape[1] != self.dim:
            raise DimensionMismatchError(
                f"kernel '{self.id}' expects (*, {self.dim}) blocks, "
                f"got {a.shape} and {b.shape}"
            )
        return self._cross(a, b)

    def diag(self, a: np.ndarray) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        if a.ndim != 2 or a.shape[1] != self.dim:
            raise DimensionMismatchError(
                f"kernel '{self.id}' expects (*, {self.dim}) blocks, got {a.shape}"
            )
        return self._diag(a)

    def gram(self, sample: Sample) -> np.ndarray:
        """Full n x n matrix of kernel values for one sample."""
        return self.cross(sample.points, sample.points)


def _product_cross(a, b):
    return a[:, 0][:, None] * b[:, 0][None, :]


def _variance_cross(a, b):
    d = a[:, 0][:, None] - b[:, 0][None, :]
    return 0.5 * d * d


def _gini_cross(a, b):
    return np.abs(a[:, 0][:, None] - b[:, 0][None, :])


def _kendall_cross(a, b):
    d0 = a[:, 0][:, None] - b[:, 0][None, :]
    d1 = a[:, 1][:, None] - b[:, 1][None, :]
    return np.sign(d0 * d1)


def _sqrtprod_cross(a, b):
    p = a[:, 0][:, None] * b[:, 0][None, :]
    return np.sign(p) * np.sqrt(np.abs(p))


def _zeros_diag(a):
    return np.zeros(a.shape[0])


KERNELS = {
    "product": Kernel("product", 1, _product_cross, lambda a: a[:, 0] ** 2),
    "variance": Kernel("variance", 1, _variance_cross, _zeros_diag),
    "gini": Kernel("gini", 1, _gini_cross, _zeros_diag),
    "kendall": Kernel("kendall", 2, _kendall_cross, _zeros_diag),
    "sqrtprod": Kernel("sqrtprod", 1, _sqrtprod_cross, lambda a: np.abs(a[:, 0])),
}


def kernel_ids() -> tuple[str, ...]:
    return tuple(KERNELS)


def get_kernel(kernel_id: str) -> Kernel:
    try:
        return KERNELS[kernel_id]
    except KeyError:
        raise UnknownKernelError(
            f"unknown kernel {kernel_id!r}; built-ins: {', '.join(KERNELS)}"
        ) from None


def eval_builtin(kernel_id: str, x, y) -> float:
    """Evaluate a built-in kernel on one pair of observations."""
    return get_kernel(kernel_id).eval(x, y)


@dataclass(frozen=True)
class ProjectionSummary:
    """Per-point centered projection estimates and their spread.

    ``htilde[i]`` is the leave-self-out row mean of kernel values minus the
    full pairwise mean; it estimates the conditional expectation of the
    centered kernel given observation i.  ``var_htilde`` is its sample
    variance and ``var_kernel`` the sample variance of all off-diagonal
    kernel values (used as the comparison scale in :func:`degeneracy_check`).
    """

    htilde: np.ndarray
    var_htilde: float
    var_kernel: float


def empirical_projection(kernel: Kernel, sample: Sample, block_size: int = 1024) -> ProjectionSummary:
    """Estimate the centered one-point projection of a kernel on a sample.

    For each i, htilde_i = (sum_{j != i} h(x_i, x_j)) / (n - 1) - U_n where
    U_n is the pairwise mean over distinct ordered pairs.  With this choice
    sum_i htilde_i vanishes identically (each unordered pair enters the row
    sums twice and U_n * n(n-1) counts it twice as well); the function checks
    the cancellation to 1e-9 relative to the mean absolute kernel value.
    """
    n = sample.n
    if n < 2:
        raise ValueError("empirical_projection needs n >= 2")
    if sample.dim != kernel.dim:
        raise DimensionMismatchError(
            f"kernel '{kernel.id}' expects dimension {kernel.dim}, sample has {sample.dim}"
        )
    pts = sample.points
    row = np.zeros(n)
    sum_h = 0.0  # over unordered pairs
    sum_h2 = 0.0
    sum_abs = 0.0
    for i0 in range(0, n, block_size):
        i1 = min(i0 + block_size, n)
        pi = pts[i0:i1]
        hb = kernel.cross(pi, pi)
        upper = np.triu(hb, k=1)
        row[i0:i1] += upper.sum(axis=1) + upper.sum(axis=0)
        mask = np.triu(np.ones(hb.shape, dtype=bool), k=1)
        vals = hb[mask]
        sum_h += vals.sum()
        sum_h2 += (vals * vals).sum()
        sum_abs += np.abs(vals).sum()
        for j0 in range(i1, n, block_size):
            j1 = min(j0 + block_size, n)
            hb = kernel.cross(pi, pts[j0:j1])
            row[i0:i1] += hb.sum(axis=1)
            row[j0:j1] += hb.sum(axis=0)
            sum_h += hb.sum()
            sum_h2 += (hb * hb).sum()
            sum_abs += np.abs(hb).sum()

    pairs = n * (n - 1)  # ordered count; unordered sums enter twice
    u_n = 2.0 * sum_h / pairs
    htilde = row / (n - 1) - u_n

    scale = 2.0 * sum_abs / pairs
    if abs(htilde.mean()) > 1e-9 * max(scale, 1e-300):
        raise RuntimeError(
            "projection centering identity violated: "
            f"mean(htilde) = {htilde.mean():.3e} at kernel scale {scale:.3e}"
        )

    var_htilde = float(htilde.var(ddof=1)) if n >= 2 else 0.0
    mean_h = u_n
    var_kernel = (2.0 * sum_h2 - pairs * mean_h * mean_h) / (pairs - 1) if pairs >= 2 else 0.0
    return ProjectionSummary(htilde=htilde, var_htilde=var_htilde, var_kernel=max(float(var_kernel), 0.0))


def degeneracy_check(summary: ProjectionSummary, threshold: float = 0.01) -> str:
    """Flag a kernel/sample pair whose projection variance is relatively tiny.

    Returns ``"near-degenerate"`` when var_htilde is exactly zero or below
    ``threshold`` times the spread of the kernel values themselves, otherwise
    ``"non-degenerate"``.  Diagnostic only; nothing downstream is blocked.
    """
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    if summary.var_htilde == 0.0 or summary.var_htilde < threshold * summary.var_kernel:
        return "near-degenerate"
    return "non-degenerate"
