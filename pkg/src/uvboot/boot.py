"""Weighted bootstrap statistics, the studentized pivot, and its decomposition.

Given multinomial counts w (see :mod:`uvboot.weights`), the bootstrap version
of the pairwise mean is the weighted sum

    u_star = sum_{i != j} w_i w_j h(x_i, x_j) / (m (m - 1)),

and the all-pairs version adds the diagonal:

    v_star = u_star + sum_i w_i^2 h(x_i, x_i) / (m (m - 1)).

Studentizing the deviation u_star - u_n by twice the jackknife scale and the
square root of the weight dispersion Q gives a pivot that is asymptotically
standard normal for non-degenerate kernels; :mod:`uvboot.mc` verifies this
empirically.  The deviation also splits exactly, for any vector ``proj`` of
per-point values, into a part built on the doubly-centered kernel
h(x_i, x_j) - proj_i - proj_j and a part linear in ``proj``, which is the
basis of the scaling diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernels import DimensionMismatchError, Kernel, Sample
from .ustat import (
    JackknifeEstimate,
    PairSums,
    deleted_u_all,
    jackknife_sigma2,
    u_from_sums,
    v_from_sums,
)
from .weights import WeightVector, dispersion_q, draw_weight_matrix

__all__ = [
    "BootstrapReplicate",
    "ConfidenceInterval",
    "DegenerateNormalizerError",
    "HoeffdingSplit",
    "ReplicateEngine",
    "bootstrap_ci",
    "bootstrap_u",
    "bootstrap_v",
    "hoeffding_split",
    "studentized_pivot",
]


class DegenerateNormalizerError(ValueError):
    """Pivot normalizer vanished: jackknife scale is zero or weights are uniform."""


@dataclass(frozen=True)
class BootstrapReplicate:
    """One bootstrap draw: weighted statistics, dispersion, and pivots."""

    u_star: float
    v_star: float
    q: float
    pivot_u: float
    pivot_v: float
    weight_checksum: int


@dataclass(frozen=True)
class HoeffdingSplit:
    """Degenerate part ``g`` and linear part ``h_lin`` of u_star - u_n."""

    g: float
    h_lin: float


@dataclass(frozen=True)
class ConfidenceInterval:
    """Two-sided bootstrap-t interval for the expected kernel value."""

    lo: float
    hi: float
    level: float
    u_n: float
    se: float
    sigma2_hat: float
    m: int
    replicates_used: int
    replicates_dropped: int


def _check_bootstrap_inputs(kernel: Kernel, sample: Sample, w: WeightVector) -> None:
    if w.n != sample.n:
        raise ValueError(f"weight vector of length {w.n} does not match n={sample.n}")
    if sample.n < 2:
        raise ValueError("bootstrap statistics need n >= 2")
    if w.m < 2:
        raise ValueError("bootstrap statistics need m >= 2")
    if sample.dim != kernel.dim:
        raise DimensionMismatchError(
            f"kernel '{kernel.id}' expects dimension {kernel.dim}, sample has {sample.dim}"
        )


def _weighted_sums(kernel: Kernel, sample: Sample, wf: np.ndarray, block_size: int) -> tuple[float, float]:
    """(full quadratic form sum_{ij} w_i w_j h_ij, diagonal part sum_i w_i^2 h_ii)."""
    pts = sample.points
    n = sample.n
    quad = 0.0
    for i0 in range(0, n, block_size):
        i1 = min(i0 + block_size, n)
        hb = kernel.cross(pts[i0:i1], pts)
        quad += float(wf[i0:i1] @ (hb @ wf))
    diag = np.asarray(kernel.diag(pts), dtype=float)
    diag_quad = float((wf * wf) @ diag)
    return quad, diag_quad


def bootstrap_u(kernel: Kernel, sample: Sample, w: WeightVector, block_size: int = 1024) -> float:
    """Weighted pairwise mean over distinct index pairs, normalized by m(m-1)."""
    _check_bootstrap_inputs(kernel, sample, w)
    wf = w.counts.astype(float)
    quad, diag_quad = _weighted_sums(kernel, sample, wf, block_size)
    return (quad - diag_quad) / (w.m * (w.m - 1))


def bootstrap_v(kernel: Kernel, sample: Sample, w: WeightVector, block_size: int = 1024) -> float:
    """All-pairs weighted mean: bootstrap_u plus the w_i^2-weighted diagonal."""
    _check_bootstrap_inputs(kernel, sample, w)
    wf = w.counts.astype(float)
    quad, diag_quad = _weighted_sums(kernel, sample, wf, block_size)
    denom = w.m * (w.m - 1)
    return (quad - diag_quad) / denom + diag_quad / denom


def studentized_pivot(u_star: float, u_n: float, sigma2_hat: float, q: float) -> float:
    """(u_star - u_n) / (2 sqrt(sigma2_hat) sqrt(q)).

    The same formula studentizes the all-pairs version with v-inputs.  Raises
    :class:`DegenerateNormalizerError` when either normalizer is not strictly
    positive, which signals that the normal limit does not apply to this
    replicate (uniform weights) or sample (zero jackknife spread).
    """
    if not sigma2_hat > 0 or not q > 0:
        raise DegenerateNormalizerError(
            f"pivot undefined: sigma2_hat={sigma2_hat!r}, q={q!r}"
        )
    return (u_star - u_n) / (2.0 * math.sqrt(sigma2_hat) * math.sqrt(q))


def hoeffding_split(
    kernel: Kernel,
    sample: Sample,
    w: WeightVector,
    proj,
    block_size: int = 1024,
) -> HoeffdingSplit:
    """Split u_star - u_n into degenerate and linear parts along ``proj``.

    With c_ij = w_i w_j / (m(m-1)) - 1/(n(n-1)) over distinct pairs:

        g     = sum_{i != j} c_ij (h(x_i, x_j) - proj_i - proj_j)
        h_lin = sum_{i != j} c_ij (proj_i + proj_j)

    g + h_lin equals the full deviation for *any* proj vector (the proj terms
    cancel); passing the empirical projection makes g the completely
    degenerate remainder.  g is accumulated from the shifted kernel blocks
    directly; h_lin uses the closed form of its inner sum,
    2 sum_i proj_i (w_i (m - w_i)/(m(m-1)) - 1/n).
    """
    _check_bootstrap_inputs(kernel, sample, w)
    p = np.asarray(proj, dtype=float)
    n = sample.n
    if p.shape != (n,):
        raise ValueError(f"projection vector must have length {n}, got shape {p.shape}")
    pts = sample.points
    wf = w.counts.astype(float)
    m = w.m

    quad = 0.0   # sum_{ij} w_i w_j g_ij, diagonal cells included for now
    plain = 0.0  # sum_{ij} g_ij, ditto
    for i0 in range(0, n, block_size):
        i1 = min(i0 + block_size, n)
        gb = kernel.cross(pts[i0:i1], pts) - p[i0:i1][:, None] - p[None, :]
        quad += float(wf[i0:i1] @ (gb @ wf))
        plain += float(gb.sum())
    gdiag = np.asarray(kernel.diag(pts), dtype=float) - 2.0 * p
    quad -= float((wf * wf) @ gdiag)
    plain -= float(gdiag.sum())
    g = quad / (m * (m - 1)) - plain / (n * (n - 1))

    h_lin = 2.0 * float(p @ (wf * (m - wf))) / (m * (m - 1)) - 2.0 * float(p.sum()) / n
    return HoeffdingSplit(g=g, h_lin=h_lin)


class ReplicateEngine:
    """Caches one sample's gram matrix and base statistics for repeated draws.

    Intended for replication loops: the O(n^2) kernel work happens once, after
    which each replicate costs one matrix-vector product (``batch`` turns a
    whole weight matrix into statistics with a single matrix product).  The
    jackknife scale is computed lazily, so consistency experiments that never
    studentize skip it.
    """

    def __init__(self, kernel: Kernel, sample: Sample, normalization="n/4"):
        if sample.n < 2:
            raise ValueError("ReplicateEngine needs n >= 2")
        if sample.dim != kernel.dim:
            raise DimensionMismatchError(
                f"kernel '{kernel.id}' expects dimension {kernel.dim}, sample has {sample.dim}"
            )
        self.kernel = kernel
        self.sample = sample
        self.n = sample.n
        self.gram = kernel.gram(sample)
        diag = np.asarray(kernel.diag(sample.points), dtype=float)
        row = self.gram.sum(axis=1) - diag
        self.pair = PairSums(total=float(row.sum()), row=row, diag=diag)
        self.u_n = u_from_sums(self.pair, self.n)
        self.v_n = v_from_sums(self.pair, self.n)
        self._normalization = normalization
        self._jack: JackknifeEstimate | None = None

    @property
    def jack(self) -> JackknifeEstimate:
        if self._jack is None:
            deleted = deleted_u_all(self.pair, self.n)
            self._jack = jackknife_sigma2(deleted, self.u_n, self.n, self._normalization)
        return self._jack

    @property
    def sigma2_hat(self) -> float:
        return self.jack.sigma2_hat

    def _check_counts(self, counts: np.ndarray, m: int) -> np.ndarray:
        counts = np.asarray(counts)
        if counts.ndim != 2 or counts.shape[1] != self.n:
            raise ValueError(f"expected (R, {self.n}) weight rows, got {counts.shape}")
        if m < 2:
            raise ValueError("bootstrap statistics need m >= 2")
        if not np.all(counts.sum(axis=1) == m):
            raise AssertionError("weight rows do not sum to m")
        return counts

    def stats_batch(self, counts: np.ndarray, m: int) -> dict:
        """u_star, v_star, q arrays for an (R, n) matrix of weight rows."""
        counts = self._check_counts(counts, m)
        wf = counts.astype(float)
        denom = float(m) * (m - 1)
        quad = np.einsum("ri,ri->r", wf @ self.gram, wf)
        diag_quad = (wf * wf) @ self.pair.diag
        u_star = (quad - diag_quad) / denom
        v_star = u_star + diag_quad / denom
        q = dispersion_q(counts, m)
        return {"u_star": u_star, "v_star": v_star, "q": q}

    def pivot_batch(self, counts: np.ndarray, m: int) -> dict:
        """stats_batch plus studentized pivots and a ``valid`` mask.

        Rows with q = 0 are marked invalid and get NaN pivots; a zero
        jackknife scale invalidates every row, so it raises instead.
        """
        if not self.sigma2_hat > 0:
            raise DegenerateNormalizerError(
                f"jackknife scale is not positive: {self.sigma2_hat!r}"
            )
        out = self.stats_batch(counts, m)
        q = out["q"]
        valid = q > 0
        scale = 2.0 * math.sqrt(self.sigma2_hat) * np.sqrt(np.where(valid, q, np.nan))
        out["pivot_u"] = (out["u_star"] - self.u_n) / scale
        out["pivot_v"] = (out["v_star"] - self.v_n) / scale
        out["valid"] = valid
        return out

    def stats(self, w: WeightVector) -> tuple[float, float, float]:
        """(u_star, v_star, q) for one weight vector."""
        if w.n != self.n:
            raise ValueError(f"weight vector of length {w.n} does not match n={self.n}")
        if w.m < 2:
            raise ValueError("bootstrap statistics need m >= 2")
        wf = w.counts.astype(float)
        denom = w.m * (w.m - 1)
        quad = float(wf @ (self.gram @ wf))
        diag_quad = float((wf * wf) @ self.pair.diag)
        u_star = (quad - diag_quad) / denom
        v_star = u_star + diag_quad / denom
        q = float(dispersion_q(w.counts, w.m))
        return u_star, v_star, q

    def replicate(self, w: WeightVector) -> BootstrapReplicate:
        """Statistics and pivots for one weight vector (raises on zero normalizer)."""
        u_star, v_star, q = self.stats(w)
        pivot_u = studentized_pivot(u_star, self.u_n, self.sigma2_hat, q)
        pivot_v = studentized_pivot(v_star, self.v_n, self.sigma2_hat, q)
        return BootstrapReplicate(
            u_star=u_star,
            v_star=v_star,
            q=q,
            pivot_u=pivot_u,
            pivot_v=pivot_v,
            weight_checksum=int(w.counts.sum()),
        )


def bootstrap_ci(
    kernel: Kernel,
    sample: Sample,
    m: int,
    replicates: int,
    level: float,
    stream: np.random.Generator,
    normalization="n/4",
) -> ConfidenceInterval:
    """Bootstrap-t interval for the expected kernel value.

    Centers at the pairwise mean u_n and inverts the replicate pivots: with
    t_lo, t_hi the (1 -/+ level)/2 empirical pivot quantiles and
    se = 2 sqrt(sigma2_hat / n), the interval is
    [u_n - t_hi * se, u_n - t_lo * se].  Replicates with zero weight
    dispersion are dropped and counted; if all are dropped (or the jackknife
    scale vanishes) a :class:`DegenerateNormalizerError` is raised.
    Deterministic given the stream: all replicate weights are drawn from it in
    one sequential batch.
    """
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0, 1)")
    if replicates < 1:
        raise ValueError("need at least one replicate")
    if sample.n < 3:
        raise ValueError("bootstrap_ci needs n >= 3")
    engine = ReplicateEngine(kernel, sample, normalization)
    counts = draw_weight_matrix(sample.n, m, replicates, stream)
    out = engine.pivot_batch(counts, m)
    valid = out["valid"]
    used = int(valid.sum())
    if used == 0:
        raise DegenerateNormalizerError("all replicates had zero weight dispersion")
    pivots = out["pivot_u"][valid]
    alpha = 1.0 - level
    t_lo, t_hi = np.quantile(pivots, [alpha / 2.0, 1.0 - alpha / 2.0])
    se = 2.0 * math.sqrt(engine.sigma2_hat / sample.n)
    return ConfidenceInterval(
        lo=float(engine.u_n - t_hi * se),
        hi=float(engine.u_n - t_lo * se),
        level=level,
        u_n=engine.u_n,
        se=se,
        sigma2_hat=engine.sigma2_hat,
        m=m,
        replicates_used=used,
        replicates_dropped=replicates - used,
    )
