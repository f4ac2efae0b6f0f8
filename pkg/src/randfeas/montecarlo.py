"""Monte-Carlo estimates of order statistics and trimmed sums.

Draws are taken in fixed-size batches; batch ``b`` uses ``seed.spawn(b)``, so
the estimate does not depend on how batches are spread across workers.  Batch
results are merged with the usual pairwise (Chan et al.) update of means and
co-moments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .bounds import approx_factor
from .errors import DenominatorNearZero, ParameterOutOfRange
from .instances import DistributionSpec, Seed, as_seed

BATCH_SIZE = 20_000
MIN_SAMPLES = 1_000
DENOMINATOR_Z = 5.0


@dataclass(frozen=True)
class SampleEstimate:
    mean: float
    std_error: float
    n_samples: int

    def __post_init__(self):
        if self.n_samples < 2:
            raise ParameterOutOfRange(f"need at least 2 samples, got {self.n_samples}")

    @classmethod
    def from_samples(cls, values: Sequence[float]) -> SampleEstimate:
        arr = np.asarray(values, dtype=float)
        n = arr.size
        if n < 2:
            raise ParameterOutOfRange(f"need at least 2 samples, got {n}")
        return cls(float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(n)), n)

    @property
    def variance(self) -> float:
        """Sample variance of the underlying draws."""
        return self.std_error**2 * self.n_samples


def pool_estimates(estimates: Iterable[SampleEstimate]) -> SampleEstimate:
    """Combine estimates of the same quantity from disjoint sample batches."""
    n = 0
    mean = 0.0
    m2 = 0.0
    for e in estimates:
        nb = e.n_samples
        mb = e.mean
        m2b = e.variance * (nb - 1)
        total = n + nb
        delta = mb - mean
        mean += delta * nb / total
        m2 += m2b + delta**2 * n * nb / total
        n = total
    if n < 2:
        raise ParameterOutOfRange("pooling needs at least 2 samples in total")
    return SampleEstimate(mean, math.sqrt(m2 / (n - 1) / n), n)


class _Moments:
    """Running mean vector and co-moment matrix over rows of observations."""

    def __init__(self, width: int):
        self.n = 0
        self.mean = np.zeros(width)
        self.comoment = np.zeros((width, width))

    def update(self, rows: np.ndarray) -> None:
        nb = rows.shape[0]
        mb = rows.mean(axis=0)
        centred = rows - mb
        cb = centred.T @ centred
        total = self.n + nb
        delta = mb - self.mean
        self.comoment += cb + np.outer(delta, delta) * (self.n * nb / total)
        self.mean += delta * (nb / total)
        self.n = total

    def estimate(self, col: int) -> SampleEstimate:
        var = self.comoment[col, col] / (self.n - 1)
        return SampleEstimate(float(self.mean[col]), math.sqrt(var / self.n), self.n)

    def covariance_of_means(self, a: int, b: int) -> float:
        return float(self.comoment[a, b] / (self.n - 1) / self.n)


def sample_sorted_statistics(
    dist: DistributionSpec,
    k: int,
    n_samples: int,
    seed: Seed | int,
    columns: Callable[[np.ndarray], np.ndarray],
    batch_size: int = BATCH_SIZE,
) -> _Moments:
    """Draw ``n_samples`` sorted vectors of ``k`` i.i.d. values and accumulate
    the moments of ``columns(sorted_batch)`` (shape ``(batch, c)``)."""
    if n_samples < 2:
        raise ParameterOutOfRange(f"need at least 2 samples, got {n_samples}")
    seed = as_seed(seed)
    acc = None
    done = 0
    batch = 0
    while done < n_samples:
        size = min(batch_size, n_samples - done)
        x = dist.sample(seed.spawn(batch).rng(), (size, k))
        x.sort(axis=1)
        rows = np.asarray(columns(x), dtype=float)
        if acc is None:
            acc = _Moments(rows.shape[1])
        acc.update(rows)
        done += size
        batch += 1
    return acc


def _check_ranks(k: int, ranks: Iterable[int]) -> list[int]:
    ranks = sorted(set(int(r) for r in ranks))
    if not ranks or ranks[0] < 1 or ranks[-1] > k:
        raise ParameterOutOfRange(f"ranks must lie in 1..{k}, got {ranks}")
    return ranks


def estimate_order_stat(
    dist: DistributionSpec,
    k: int,
    ranks: Iterable[int],
    n_samples: int,
    seed: Seed | int,
) -> dict[int, SampleEstimate]:
    """Estimate E[X_(r:k)] for each requested rank ``r`` (1-based)."""
    if n_samples < MIN_SAMPLES:
        raise ParameterOutOfRange(f"n_samples must be >= {MIN_SAMPLES}, got {n_samples}")
    ranks = _check_ranks(k, ranks)
    idx = np.array(ranks) - 1
    acc = sample_sorted_statistics(dist, k, n_samples, seed, lambda x: x[:, idx])
    return {r: acc.estimate(i) for i, r in enumerate(ranks)}


@dataclass(frozen=True)
class TrimmedSums:
    y_star: SampleEstimate
    y: SampleEstimate
    covariance: float  # covariance of the two sample means (same draws)


def estimate_trimmed_sums(
    dist: DistributionSpec,
    k: int,
    m: int,
    ell: int,
    n_samples: int,
    seed: Seed | int,
) -> TrimmedSums:
    """Estimate E[Y*] (sum of the ``m`` smallest) and E[Y] (sum of the
    ``ell`` largest) from the same draws."""
    if n_samples < MIN_SAMPLES:
        raise ParameterOutOfRange(f"n_samples must be >= {MIN_SAMPLES}, got {n_samples}")
    if not (1 <= m <= k and 1 <= ell <= k):
        raise ParameterOutOfRange(f"need 1 <= m, ell <= k, got m={m}, ell={ell}, k={k}")

    def cols(x):
        return np.column_stack([x[:, :m].sum(axis=1), x[:, k - ell:].sum(axis=1)])

    acc = sample_sorted_statistics(dist, k, n_samples, seed, cols)
    return TrimmedSums(acc.estimate(0), acc.estimate(1), acc.covariance_of_means(0, 1))


def empirical_approx_factor(y_star: SampleEstimate, y: SampleEstimate) -> float:
    """Plug the two sample means into ``1 + |(Y - Y*) / Y*|``."""
    if not abs(y_star.mean) > DENOMINATOR_Z * y_star.std_error:
        raise DenominatorNearZero(
            f"|E[Y*]| = {abs(y_star.mean)!r} is within {DENOMINATOR_Z} standard errors of zero")
    return approx_factor(y.mean, y_star.mean)


def approx_factor_std_error(y_star: SampleEstimate, y: SampleEstimate, covariance: float = 0.0) -> float:
    """Delta-method standard error of :func:`empirical_approx_factor`."""
    d = y.mean - y_star.mean
    s = math.copysign(1.0, d) if d != 0 else 0.0
    ys = y_star.mean
    grad_y = s / abs(ys)
    grad_ys = -s / abs(ys) - abs(d) * math.copysign(1.0, ys) / ys**2
    var = (grad_y * y.std_error) ** 2 + (grad_ys * y_star.std_error) ** 2 + 2 * grad_y * grad_ys * covariance
    return math.sqrt(max(var, 0.0))
