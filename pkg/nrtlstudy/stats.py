"""
Statistical kernels shared by estimation and the Monte Carlo harnesses.

* RngStream / sample_normal - reproducible Gaussian noise, one stream per replicate
* shapiro_wilk_w - W statistic of the Shapiro-Wilk test (Royston AS R94)
* t_quantile - Student's t inverse CDF, non-integer degrees of freedom allowed
* centered_discrepancy - centered L2 discrepancy (CD2) of a design in the unit cube
"""

from __future__ import annotations

import math
from typing import Sequence, Union

import numpy as np
from numpy.random import PCG64, Generator, SeedSequence
from scipy import stats
from scipy.stats import qmc

from .exceptions import DomainError

ArrayLike = Union[float, Sequence[float], np.ndarray]

_SEED_MASK = (1 << 64) - 1
SHAPIRO_WILK_MAX_N = 5000


class RngStream:
    """
    A Gaussian noise stream identified by (base_seed, replicate_index).

    The stream is seeded from the pair, not from a shared generator, so the
    draws for a replicate do not depend on which worker runs it or when.
    """

    def __init__(
        self, base_seed: int, replicate_index: int, fork_key: tuple[int, ...] = ()
    ):
        if replicate_index < 0:
            raise DomainError("replicate_index", replicate_index, "an integer >= 0")
        self.base_seed = base_seed & _SEED_MASK
        self.replicate_index = replicate_index
        self.fork_key = tuple(fork_key)
        entropy = [self.base_seed, replicate_index, *self.fork_key]
        self._generator = Generator(PCG64(SeedSequence(entropy)))
        self.draws = 0

    def __repr__(self) -> str:
        return (
            f"{self.__class__.__name__}({self.base_seed}, {self.replicate_index},"
            f" fork_key={self.fork_key!r}, draws={self.draws})"
        )

    def standard_normal(self, count: int) -> np.ndarray:
        values = self._generator.standard_normal(count)
        self.draws += count
        return values

    def fork(self, label: int) -> RngStream:
        """Return an independent child stream, keyed on the draw counter and label."""
        return RngStream(
            self.base_seed, self.replicate_index, self.fork_key + (self.draws, label)
        )


def sample_normal(
    stream: RngStream, mean: ArrayLike, std: ArrayLike, count: int
) -> np.ndarray:
    """
    Draw count normal values with the given mean and standard deviation.

    mean and std may be scalars or arrays of length count (per-observation
    noise). A zero std returns the mean exactly; draws are still consumed so
    the stream position does not depend on the noise level.
    """
    std_array = np.broadcast_to(np.asarray(std, dtype=float), (count,))
    if np.any(std_array < 0) or not np.all(np.isfinite(std_array)):
        raise DomainError("std", std, "finite values >= 0")
    mean_array = np.broadcast_to(np.asarray(mean, dtype=float), (count,))
    return mean_array + std_array * stream.standard_normal(count)


def shapiro_wilk_w(sample: Sequence[float] | np.ndarray) -> float:
    """Return the Shapiro-Wilk W statistic of a sample with 3 <= n <= 5000."""
    values = np.asarray(sample, dtype=float)
    n = values.size
    if n < 3 or n > SHAPIRO_WILK_MAX_N:
        raise DomainError("n", n, f"3 <= n <= {SHAPIRO_WILK_MAX_N}")
    if not np.all(np.isfinite(values)):
        raise DomainError("sample", "non-finite values", "finite values")
    if np.ptp(values) == 0.0:
        # A constant sample has zero range; AS R94 defines W = 1 here
        return 1.0
    return float(stats.shapiro(values).statistic)


def t_quantile(dof: float, p: float) -> float:
    """Inverse CDF of Student's t with (possibly non-integer) dof at probability p."""
    if not dof > 0 or not math.isfinite(dof):
        raise DomainError("dof", dof, "a finite value > 0")
    if not 0.0 < p < 1.0:
        raise DomainError("p", p, "a probability in (0, 1)")
    if p == 0.5:
        return 0.0
    return float(stats.t.ppf(p, dof))


def centered_discrepancy(points: Sequence[Sequence[float]] | np.ndarray) -> float:
    """
    Return the centered L2 discrepancy CD2 of an n x d point set in [0, 1]^d.

    The value is the square root of the CD2^2 expression (scipy's "CD" method
    returns the squared form).
    """
    design = np.atleast_2d(np.asarray(points, dtype=float))
    if design.size == 0:
        raise DomainError("points", "empty", "at least one point")
    if not np.all(np.isfinite(design)) or design.min() < 0.0 or design.max() > 1.0:
        raise DomainError("points", "outside the unit hypercube", "coordinates in [0, 1]")
    squared = float(qmc.discrepancy(design, method="CD", iterative=False))
    return math.sqrt(max(squared, 0.0))
