"""
Empirical processes of cluster functionals and their multiplier analogues.

A cluster functional maps a block of standardized observations (zeros for
non-extreme observations) to a real number, vanishes on all-zero blocks and
depends only on the block's core.  Blocks are never copied: functionals are
evaluated on views into the standardized series.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .core import BlockScheme, SeriesLike, as_series
from .errors import DegenerateNormalizationError

__all__ = [
    "BlockMaximum",
    "ClusterFunctional",
    "ProcessValue",
    "TailArraySum",
    "block_values",
    "bootstrap_process",
    "empirical_process",
    "multiplier_process",
    "standardize",
]

Centering = Union[str, float, np.ndarray]


class ClusterFunctional:
    """
    Base class; subclasses implement :meth:`evaluate` on one block.

    :meth:`block_values` may be overridden with a vectorized version.
    """

    def evaluate(self, block: np.ndarray) -> float:
        raise NotImplementedError

    def __call__(self, block: np.ndarray) -> float:
        return self.evaluate(np.asarray(block))

    def block_values(self, y: np.ndarray, scheme: BlockScheme) -> np.ndarray:
        return np.array([self.evaluate(y[rg.start : rg.stop]) for rg in scheme.ranges()], dtype=np.float64)


class TailArraySum(ClusterFunctional):
    """
    ``f(y_1, ..., y_r) = sum_i phi(y_i)`` with ``phi(0) = 0``.

    ``phi`` must accept an array of observations (scalar ``(r,)`` or vector
    ``(r, d)``) and return one value per observation.
    """

    def __init__(self, phi: Callable[[np.ndarray], np.ndarray]):
        self.phi = phi

    def evaluate(self, block: np.ndarray) -> float:
        block = np.asarray(block, dtype=np.float64)
        if block.shape[0] == 0:
            return 0.0
        return float(np.sum(self.phi(block)))

    def block_values(self, y: np.ndarray, scheme: BlockScheme) -> np.ndarray:
        return scheme.block_sums(np.asarray(self.phi(np.asarray(y)[: scheme.covered]), dtype=np.float64))

    def __add__(self, other: "TailArraySum") -> "TailArraySum":
        return TailArraySum(lambda y: self.phi(y) + other.phi(y))


class BlockMaximum(ClusterFunctional):
    """Largest max-norm within the block (0 on an all-zero block)."""

    def evaluate(self, block: np.ndarray) -> float:
        block = np.abs(np.asarray(block, dtype=np.float64))
        return float(block.max()) if block.size else 0.0


@dataclass(frozen=True)
class ProcessValue:
    """
    A process evaluated at one functional.

    ``degenerate`` is set when empirical centering meets a sample in which
    every block value is zero; ``value`` is then 0.
    """

    value: float
    normalization: float
    degenerate: bool = False


def standardize(series: SeriesLike, a: float, x_star: float) -> np.ndarray:
    """``X_i / a`` where it lies outside ``(-inf, x_star)^d``, else zero."""
    if not (a > 0 and x_star > 0):
        raise ValueError("a and x_star must be positive")
    y = as_series(series).values / a
    top = y if y.ndim == 1 else y.max(axis=1)
    out = np.zeros_like(y)
    keep = top >= x_star
    out[keep] = y[keep]
    return out


def block_values(y: np.ndarray, scheme: BlockScheme, f: ClusterFunctional) -> np.ndarray:
    """``f(Y_{n,j})`` for every block ``j``."""
    return f.block_values(np.asarray(y), scheme)


def _normalization(v_n: float, n: int) -> float:
    if not v_n > 0:
        raise DegenerateNormalizationError(f"v_n must be positive, got {v_n}")
    if v_n > 1:
        raise ValueError(f"v_n must not exceed 1, got {v_n}")
    return float(np.sqrt(n * v_n))


def _centered(fv: np.ndarray, centering: Centering) -> tuple[np.ndarray, bool]:
    if isinstance(centering, str):
        if centering != "empirical":
            raise ValueError(f"unknown centering {centering!r}")
        return fv - fv.mean(), not np.any(fv)
    c = np.broadcast_to(np.asarray(centering, dtype=np.float64), fv.shape)
    return fv - c, False


def empirical_process(
    y: np.ndarray, scheme: BlockScheme, f: ClusterFunctional, v_n: float, centering: Centering = "empirical"
) -> ProcessValue:
    """
    ``(n v_n)^{-1/2} sum_j (f(Y_j) - c_j)``.

    Parameters
    ----------
    y : ndarray
        Standardized series (see :func:`standardize`).
    scheme : BlockScheme
    f : ClusterFunctional
    v_n : float
        Exceedance probability in ``(0, 1]``.
    centering : {"empirical"} or float or ndarray
        Per-block expectations ``E f(Y_j)``, or ``"empirical"`` for the mean
        of the observed block values.
    """
    norm = _normalization(v_n, scheme.n)
    d, degenerate = _centered(block_values(y, scheme, f), centering)
    return ProcessValue(float(d.sum()) / norm, norm, degenerate)


def _check_xi(xi: np.ndarray, scheme: BlockScheme) -> np.ndarray:
    xi = np.asarray(xi, dtype=np.float64)
    if xi.shape != (scheme.block_count,):
        raise ValueError(f"need {scheme.block_count} multipliers, got shape {xi.shape}")
    return xi


def multiplier_process(
    y: np.ndarray, scheme: BlockScheme, f: ClusterFunctional, xi: np.ndarray, v_n: float, centering: Centering
) -> ProcessValue:
    """``(n v_n)^{-1/2} sum_j xi_j (f(Y_j) - c_j)`` with caller-supplied centering."""
    xi = _check_xi(xi, scheme)
    norm = _normalization(v_n, scheme.n)
    d, degenerate = _centered(block_values(y, scheme, f), centering)
    return ProcessValue(float(xi @ d) / norm, norm, degenerate)


def bootstrap_process(
    y: np.ndarray, scheme: BlockScheme, f: ClusterFunctional, xi: np.ndarray, v_n: float
) -> ProcessValue:
    """Multiplier process centred at the mean of the observed block values."""
    return multiplier_process(y, scheme, f, xi, v_n, "empirical")
