"""Seeded data generators: i.i.d. families and a stationary AR(1) process.

All generators take an explicit numpy Generator (see
:func:`uvboot.weights.derive_stream`) and are deterministic given its state.
Normal variates come from numpy's ziggurat sampler; Pareto uses the inverse
CDF ``x_min * u^(-1/alpha)`` with u uniform on (0, 1], so heavy tails with
only fractional moments are exact.  The AR(1) process starts from its
stationary law, making every finite stretch strictly stationary; with
Gaussian innovations it is absolutely regular with geometrically decaying
mixing coefficients, which is the dependence regime the consistency
experiments target.

The closed-form moment helpers double as test oracles and as the moment
pre-checks of the heavy-tail experiments.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter
from scipy.stats import norm

from .kernels import Sample

__all__ = [
    "DistSpec",
    "MixingSpec",
    "ar1_pairwise_product_mean",
    "ar1_sample",
    "dist_abs_mean",
    "dist_mean",
    "dist_var",
    "iid_sample",
    "pareto_abs_moment",
]

_FAMILIES = {
    "normal": ("mu", "sigma"),
    "uniform": ("a", "b"),
    "exponential": ("rate",),
    "pareto": ("alpha", "x_min"),
}

_SPEC_RE = re.compile(r"^\s*([a-z0-9_]+)\s*\(\s*([^)]*)\s*\)\s*$")


@dataclass(frozen=True)
class DistSpec:
    """One of the supported i.i.d. families with validated parameters."""

    family: str
    params: tuple[float, ...]

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(
                f"unknown family {self.family!r}; supported: {', '.join(_FAMILIES)}"
            )
        params = tuple(float(p) for p in self.params)
        names = _FAMILIES[self.family]
        if len(params) != len(names):
            raise ValueError(
                f"{self.family} takes {len(names)} parameters {names}, got {len(params)}"
            )
        if self.family == "normal" and params[1] <= 0:
            raise ValueError("normal needs sigma > 0")
        if self.family == "uniform" and params[1] <= params[0]:
            raise ValueError("uniform needs b > a")
        if self.family == "exponential" and params[0] <= 0:
            raise ValueError("exponential needs rate > 0")
        if self.family == "pareto" and (params[0] <= 0 or params[1] <= 0):
            raise ValueError("pareto needs alpha > 0 and x_min > 0")
        object.__setattr__(self, "params", params)

    @classmethod
    def normal(cls, mu: float, sigma: float) -> "DistSpec":
        return cls("normal", (mu, sigma))

    @classmethod
    def uniform(cls, a: float, b: float) -> "DistSpec":
        return cls("uniform", (a, b))

    @classmethod
    def exponential(cls, rate: float) -> "DistSpec":
        return cls("exponential", (rate,))

    @classmethod
    def pareto(cls, alpha: float, x_min: float = 1.0) -> "DistSpec":
        return cls("pareto", (alpha, x_min))

    @classmethod
    def parse(cls, text: str) -> "DistSpec":
        """Parse compact strings like ``normal(1,1)`` or ``pareto(0.8,1)``."""
        match = _SPEC_RE.match(text.lower())
        if not match:
            raise ValueError(f"cannot parse distribution spec {text!r}")
        family, args = match.group(1), match.group(2)
        params = tuple(float(p) for p in args.split(",")) if args.strip() else ()
        return cls(family, params)

    def to_dict(self) -> dict:
        return {"family": self.family, "params": list(self.params)}

    @classmethod
    def from_dict(cls, data: dict) -> "DistSpec":
        return cls(data["family"], tuple(data["params"]))


@dataclass(frozen=True)
class MixingSpec:
    """Gaussian AR(1): X_t = phi X_{t-1} + e_t with e_t ~ N(0, innovation_sd^2)."""

    phi: float
    innovation_sd: float = 1.0

    def __post_init__(self):
        if not abs(self.phi) < 1:
            raise ValueError("AR(1) needs |phi| < 1 for strict stationarity")
        if self.innovation_sd <= 0:
            raise ValueError("innovation_sd must be positive")

    @property
    def stationary_var(self) -> float:
        return self.innovation_sd**2 / (1.0 - self.phi**2)

    def to_dict(self) -> dict:
        return {"phi": self.phi, "innovation_sd": self.innovation_sd}

    @classmethod
    def from_dict(cls, data: dict) -> "MixingSpec":
        return cls(float(data["phi"]), float(data.get("innovation_sd", 1.0)))


def iid_sample(spec: DistSpec, n: int, stream: np.random.Generator) -> Sample:
    """n independent draws from the family, as a 1-d sample."""
    if n < 1:
        raise ValueError("n must be positive")
    if spec.family == "normal":
        mu, sigma = spec.params
        values = stream.normal(mu, sigma, n)
    elif spec.family == "uniform":
        a, b = spec.params
        values = stream.uniform(a, b, n)
    elif spec.family == "exponential":
        (rate,) = spec.params
        values = stream.exponential(1.0 / rate, n)
    else:  # pareto, by inverse CDF; 1 - U lies in (0, 1] so the result is finite
        alpha, x_min = spec.params
        u = 1.0 - stream.random(n)
        values = x_min * u ** (-1.0 / alpha)
    return Sample(values)


def ar1_sample(spec: MixingSpec, n: int, stream: np.random.Generator) -> Sample:
    """n consecutive values of the stationary Gaussian AR(1) process.

    X_0 is drawn from N(0, innovation_sd^2 / (1 - phi^2)); the recursion is
    applied with a linear filter, so the whole path is one vectorized pass.
    """
    if n < 1:
        raise ValueError("n must be positive")
    x0 = stream.normal(0.0, math.sqrt(spec.stationary_var))
    if n == 1:
        return Sample([x0])
    innov = stream.normal(0.0, spec.innovation_sd, n - 1)
    rest, _ = lfilter([1.0], [1.0, -spec.phi], innov, zi=np.array([spec.phi * x0]))
    return Sample(np.concatenate(([x0], rest)))


def ar1_pairwise_product_mean(spec: MixingSpec, n: int) -> float:
    """Average of E[X_i X_j] over distinct pairs of the stationary AR(1).

    E[X_i X_j] = phi^|i-j| * stationary variance, so the average is the exact
    geometric sum 2 sum_{k=1}^{n-1} (n - k) phi^k * var / (n (n - 1)).  This is
    the closed-form consistency target for the product kernel on AR(1) data.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    k = np.arange(1, n)
    total = 2.0 * float(((n - k) * spec.phi**k).sum()) * spec.stationary_var
    return total / (n * (n - 1))


def pareto_abs_moment(alpha: float, x_min: float, q: float) -> float:
    """E |X|^q for Pareto(alpha, x_min): alpha x_min^q / (alpha - q), inf if q >= alpha."""
    if alpha <= 0 or x_min <= 0:
        raise ValueError("pareto needs alpha > 0 and x_min > 0")
    if q < 0:
        raise ValueError("moment order must be non-negative")
    if q >= alpha:
        return math.inf
    return alpha * x_min**q / (alpha - q)


def dist_mean(spec: DistSpec) -> float:
    """E X (inf for Pareto with alpha <= 1)."""
    if spec.family == "normal":
        return spec.params[0]
    if spec.family == "uniform":
        return 0.5 * (spec.params[0] + spec.params[1])
    if spec.family == "exponential":
        return 1.0 / spec.params[0]
    alpha, x_min = spec.params
    return math.inf if alpha <= 1 else alpha * x_min / (alpha - 1)


def dist_var(spec: DistSpec) -> float:
    """Var X (inf for Pareto with alpha <= 2)."""
    if spec.family == "normal":
        return spec.params[1] ** 2
    if spec.family == "uniform":
        return (spec.params[1] - spec.params[0]) ** 2 / 12.0
    if spec.family == "exponential":
        return 1.0 / spec.params[0] ** 2
    alpha, x_min = spec.params
    if alpha <= 2:
        return math.inf
    return x_min**2 * alpha / ((alpha - 1) ** 2 * (alpha - 2))


def dist_abs_mean(spec: DistSpec) -> float:
    """E |X|, used as the tight per-cell bound in the array experiments."""
    if spec.family == "normal":
        mu, sigma = spec.params
        # folded-normal mean
        return sigma * math.sqrt(2.0 / math.pi) * math.exp(-0.5 * (mu / sigma) ** 2) + mu * (
            1.0 - 2.0 * float(norm.cdf(-mu / sigma))
        )
    if spec.family == "uniform":
        a, b = spec.params
        if a >= 0:
            return 0.5 * (a + b)
        if b <= 0:
            return -0.5 * (a + b)
        return 0.5 * (a * a + b * b) / (b - a)
    if spec.family == "exponential":
        return 1.0 / spec.params[0]
    return dist_mean(spec)
