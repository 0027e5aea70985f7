"""
Simulators for the benchmark models and the heavy-tailed samplers they need.

All samplers take a :class:`numpy.random.Generator`; for a fixed stream the
output is bit-identical across runs.  Student-t variates come from
``Generator.standard_t`` (a normal divided by the square root of a scaled
gamma variate).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Union

import numba
import numpy as np
from numpy.random import Generator
from scipy.signal import lfilter

from .core import TimeSeries

__all__ = [
    "Ar1",
    "Garch",
    "InnovationDist",
    "Ma",
    "ModelSpec",
    "StandardNormal",
    "StudentT",
    "SymmetrizedFrechet",
    "linear_coefficients",
    "sample_multipliers",
    "sample_symmetrized_frechet",
    "simulate",
    "simulate_ar1",
    "simulate_garch",
    "simulate_ma",
]


@dataclass(frozen=True)
class StudentT:
    """
    Student t with ``df`` degrees of freedom.

    With ``unit_variance`` the draws are scaled by ``sqrt((df - 2) / df)``.
    """

    df: float
    unit_variance: bool = False

    def __post_init__(self):
        if not self.df > 0:
            raise ValueError("degrees of freedom must be positive")
        if self.unit_variance and not self.df > 2:
            raise ValueError("unit-variance scaling needs df > 2")

    def sample(self, rng: Generator, size) -> np.ndarray:
        x = rng.standard_t(self.df, size)
        if self.unit_variance:
            x *= math.sqrt((self.df - 2.0) / self.df)
        return x

    @property
    def key(self) -> str:
        return f"student_t(df={self.df:g},unit_variance={int(self.unit_variance)})"


@dataclass(frozen=True)
class SymmetrizedFrechet:
    """``P(e > x) = P(e < -x) = (1 - exp(-x^-alpha)) / 2`` for ``x > 0``."""

    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("tail index must be positive")

    def sample(self, rng: Generator, size) -> np.ndarray:
        return sample_symmetrized_frechet(self.alpha, rng, size)

    @property
    def key(self) -> str:
        return f"frechet(alpha={self.alpha:g})"


@dataclass(frozen=True)
class StandardNormal:
    def sample(self, rng: Generator, size) -> np.ndarray:
        return rng.standard_normal(size)

    @property
    def key(self) -> str:
        return "normal"


InnovationDist = Union[StudentT, SymmetrizedFrechet, StandardNormal]


def sample_symmetrized_frechet(alpha: float, rng: Generator, size=None):
    """Random sign times ``(-log U)^(-1/alpha)``, ``U`` uniform on (0, 1)."""
    if not alpha > 0:
        raise ValueError("tail index must be positive")
    u = rng.random(size)
    # U == 0 has probability 2^-53; map it away from log(0)
    u = np.where(u > 0.0, u, np.nextafter(0.0, 1.0))
    sign = np.where(rng.random(size) < 0.5, -1.0, 1.0)
    out = sign * (-np.log(u)) ** (-1.0 / alpha)
    return float(out) if size is None else out


def sample_multipliers(m: int, rng: Generator, dist: str = "student_t", df: float = 5.0) -> np.ndarray:
    """
    ``m`` i.i.d. multipliers with mean 0 and variance 1.

    Parameters
    ----------
    dist : {"student_t", "normal"}
        ``"student_t"`` draws t(df) scaled by ``sqrt((df - 2) / df)``.
    """
    if m < 1:
        raise ValueError("need at least one multiplier")
    if dist == "normal":
        return rng.standard_normal(m)
    if dist != "student_t":
        raise ValueError(f"unknown multiplier distribution {dist!r}")
    if not df > 2:
        raise ValueError("scaled Student-t multipliers need df > 2")
    return rng.standard_t(df, m) * math.sqrt((df - 2.0) / df)


@dataclass(frozen=True)
class Garch:
    """``X_t = sigma_t e_t``, ``sigma_t^2 = alpha0 + alpha1 X_{t-1}^2 + beta1 sigma_{t-1}^2``."""

    alpha0: float
    alpha1: float
    beta1: float
    innovation: InnovationDist = StudentT(8.0, unit_variance=True)
    burn_in: int = 2000

    def __post_init__(self):
        if not self.alpha0 > 0 or self.alpha1 < 0 or self.beta1 < 0:
            raise ValueError("GARCH needs alpha0 > 0, alpha1 >= 0, beta1 >= 0")
        if self.burn_in < 0:
            raise ValueError("burn_in must be non-negative")
        if self.alpha1 + self.beta1 >= 1:
            warnings.warn(
                f"alpha1 + beta1 = {self.alpha1 + self.beta1:g} >= 1: no finite unconditional variance",
                stacklevel=3,
            )

    @property
    def key(self) -> str:
        return (
            f"garch(alpha0={self.alpha0!r},alpha1={self.alpha1!r},beta1={self.beta1!r},"
            f"innovation={self.innovation.key},burn_in={self.burn_in})"
        )


@dataclass(frozen=True)
class Ar1:
    """``X_t = phi X_{t-1} + e_t`` started from ``X_0 = 0``."""

    phi: float
    innovation: InnovationDist = SymmetrizedFrechet(3.0)
    burn_in: int = 1000

    def __post_init__(self):
        if not abs(self.phi) < 1:
            raise ValueError("AR(1) needs |phi| < 1")
        if self.burn_in < 0:
            raise ValueError("burn_in must be non-negative")

    @property
    def key(self) -> str:
        return f"ar1(phi={self.phi!r},innovation={self.innovation.key},burn_in={self.burn_in})"


@dataclass(frozen=True)
class Ma:
    """``X_t = sum_j psi_j e_{t-j}``, ``j = 0..q``."""

    coefficients: tuple[float, ...]
    innovation: InnovationDist = SymmetrizedFrechet(3.0)
    burn_in: int = 0

    def __post_init__(self):
        coef = tuple(float(c) for c in self.coefficients)
        if len(coef) < 1 or not all(math.isfinite(c) for c in coef):
            raise ValueError("MA needs at least one finite coefficient")
        object.__setattr__(self, "coefficients", coef)

    @property
    def key(self) -> str:
        coef = ",".join(repr(c) for c in self.coefficients)
        return f"ma(coefficients=({coef}),innovation={self.innovation.key})"


ModelSpec = Union[Garch, Ar1, Ma]


@numba.njit(cache=True)
def _garch_recursion(eps, alpha0, alpha1, beta1, sigma2_0):
    x = np.empty_like(eps)
    s2 = sigma2_0
    prev = 0.0
    for t in range(eps.shape[0]):
        if t > 0:
            s2 = alpha0 + alpha1 * prev * prev + beta1 * s2
        prev = math.sqrt(s2) * eps[t]
        x[t] = prev
    return x


def simulate_garch(spec: Garch, n: int, rng: Generator) -> TimeSeries:
    """
    Simulate ``burn_in + n`` steps and return the last ``n``.

    The recursion starts at the unconditional variance
    ``alpha0 / (1 - alpha1 - beta1)`` when ``alpha1 + beta1 < 1`` and at
    ``alpha0`` otherwise.
    """
    if n < 1:
        raise ValueError("n must be positive")
    persistence = spec.alpha1 + spec.beta1
    sigma2_0 = spec.alpha0 / (1.0 - persistence) if persistence < 1 else spec.alpha0
    eps = np.ascontiguousarray(spec.innovation.sample(rng, spec.burn_in + n), dtype=np.float64)
    x = _garch_recursion(eps, spec.alpha0, spec.alpha1, spec.beta1, sigma2_0)
    return TimeSeries(x[spec.burn_in :])


def simulate_ar1(spec: Ar1, n: int, rng: Generator) -> TimeSeries:
    if n < 1:
        raise ValueError("n must be positive")
    eps = spec.innovation.sample(rng, spec.burn_in + n)
    x = lfilter([1.0], [1.0, -spec.phi], eps)
    return TimeSeries(x[spec.burn_in :])


def simulate_ma(spec: Ma, n: int, rng: Generator, innovations: np.ndarray | None = None) -> TimeSeries:
    """
    Finite moving average; ``q`` extra leading innovations replace a burn-in.

    ``innovations`` (length ``n + q``) may be supplied instead of drawing.
    """
    if n < 1:
        raise ValueError("n must be positive")
    psi = np.asarray(spec.coefficients)
    q = psi.size - 1
    eps = spec.innovation.sample(rng, n + q) if innovations is None else np.asarray(innovations, dtype=np.float64)
    if eps.shape != (n + q,):
        raise ValueError(f"need {n + q} innovations, got {eps.shape}")
    # accumulate in the fixed order j = 0..q so results do not depend on a convolution backend
    x = psi[0] * eps[q : q + n]
    for j in range(1, q + 1):
        x = x + psi[j] * eps[q - j : q - j + n]
    return TimeSeries(x)


def simulate(spec: ModelSpec, n: int, rng: Generator) -> TimeSeries:
    if isinstance(spec, Garch):
        return simulate_garch(spec, n, rng)
    if isinstance(spec, Ar1):
        return simulate_ar1(spec, n, rng)
    if isinstance(spec, Ma):
        return simulate_ma(spec, n, rng)
    raise TypeError(f"unknown model {spec!r}")


def linear_coefficients(spec: ModelSpec, tol: float = 1e-14) -> tuple[np.ndarray, float]:
    """
    MA(infinity) coefficients and innovation tail index of a linear model.

    AR(1) coefficients ``phi^j`` are truncated once ``|phi|^j < tol``.
    """
    if not isinstance(spec.innovation, SymmetrizedFrechet):
        raise ValueError("analytic extremograms need symmetrized Frechet innovations")
    alpha = spec.innovation.alpha
    if isinstance(spec, Ma):
        return np.asarray(spec.coefficients), alpha
    if isinstance(spec, Ar1):
        if spec.phi == 0:
            return np.array([1.0]), alpha
        q = int(math.ceil(math.log(tol) / math.log(abs(spec.phi))))
        return spec.phi ** np.arange(q + 1), alpha
    raise ValueError(f"{type(spec).__name__} is not a linear model")

