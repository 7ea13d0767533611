"""
Sample statistics shared by the sampler checks and the weak-error estimators.
"""
import math
from typing import Tuple

import numpy as np
from scipy import stats

from ..exceptions import ParameterDomainError


def _nonempty(sample, name: str) -> np.ndarray:
    arr = np.asarray(sample, dtype=float).ravel()
    if arr.size == 0:
        raise ParameterDomainError(name, 0, "nonempty sample")
    return arr


def empirical_cf(sample, xi: float) -> Tuple[complex, float]:
    """
    Empirical characteristic function mean(exp(i xi X)) and the standard
    error of its modulus-one summands (real and imaginary parts pooled).
    """
    x = _nonempty(sample, "sample")
    phase = xi * x
    re, im = np.cos(phase), np.sin(phase)
    n = x.size
    if n < 2:
        return complex(re.mean(), im.mean()), math.inf
    se = math.sqrt((re.var(ddof=1) + im.var(ddof=1)) / n)
    return complex(re.mean(), im.mean()), se


def ks_two_sample(sample_a, sample_b) -> Tuple[float, float]:
    """Two-sample Kolmogorov-Smirnov statistic and p-value"""
    a = _nonempty(sample_a, "sample_a")
    b = _nonempty(sample_b, "sample_b")
    result = stats.ks_2samp(a, b)
    return float(result.statistic), float(result.pvalue)


def wasserstein1(sample_a, sample_b) -> float:
    """
    Empirical 1-Wasserstein distance; for equal sizes this is the mean
    absolute difference of the sorted samples.
    """
    a = _nonempty(sample_a, "sample_a")
    b = _nonempty(sample_b, "sample_b")
    if a.size == b.size:
        return float(np.mean(np.abs(np.sort(a) - np.sort(b))))
    return float(stats.wasserstein_distance(a, b))


def pooled_moments(values: np.ndarray) -> Tuple[int, float, float]:
    """(count, sum, sum of squares) for shard-wise merging"""
    values = np.asarray(values, dtype=float)
    return int(values.size), float(values.sum()), float(np.dot(values, values))


def merge_moments(parts) -> Tuple[float, float, int]:
    """Mean, standard error and count from (count, sum, sumsq) parts in the given order"""
    n = s = ss = 0.0
    for count, total, squares in parts:
        n += count
        s += total
        ss += squares
    n = int(n)
    if n == 0:
        raise ParameterDomainError("values", 0, "nonempty sample")
    mean = s / n
    if n < 2:
        return mean, math.inf, n
    var = max(ss - n * mean * mean, 0.0) / (n - 1)
    return mean, math.sqrt(var / n), n
