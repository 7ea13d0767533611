"""
Weak Error - Monte Carlo gap E f(X^alpha_T) - E f(X_T), its regression against
(2 - alpha), the closed-form absolute-moment oracle and marginal-law distances.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, special, stats

from ..exceptions import (
    InsufficientDataError,
    ParameterDomainError,
    PreconditionError,
    QuadratureAccuracyError,
)
from ..models.schemas import (
    DEFAULT_SEED,
    CoefficientField,
    CylindricalNoiseSpec,
    DistanceMetric,
    IncrementSamplerMode,
    Pairing,
    RngStreamKey,
    TestFunction,
    TimeGrid,
    WeakErrorPoint,
    WeakErrorReport,
    check_alpha,
    check_positive,
)
from . import statistics
from .rng import STREAM_ROLES, derive_key, generator_for
from .sde_solver import simulate_diffusion_ensemble, simulate_jump_ensemble

logger = logging.getLogger(__name__)

MIN_PATHS = 100
MIN_REGRESSION_POINTS = 3
CSV_COLUMNS = ("alpha", "estimate", "std_error", "n_paths", "h", "divergence_fraction")

# E|B_1| for the variance-2 limit law
LIMIT_ABS_MOMENT = 2.0 / math.sqrt(math.pi)


def _shard_sizes(n_paths: int, shard_size: int) -> List[int]:
    full, rest = divmod(n_paths, shard_size)
    return [shard_size] * full + ([rest] if rest else [])


def _run_shard(
    index: int,
    size: int,
    coeffs: CoefficientField,
    noise: CylindricalNoiseSpec,
    f: TestFunction,
    grid: TimeGrid,
    x0: np.ndarray,
    mode: IncrementSamplerMode,
    key: RngStreamKey,
    pairing: Pairing,
    taming: bool,
) -> Dict[str, tuple]:
    shard_key = derive_key(key, index)
    if pairing is Pairing.COMMON:
        jump_key = diffusion_key = shard_key
    else:
        jump_key, diffusion_key = derive_key(shard_key, 0), derive_key(shard_key, 1)

    jump = simulate_jump_ensemble(coeffs, noise, grid, x0, mode, jump_key, size, taming=taming)
    diffusion = simulate_diffusion_ensemble(coeffs, grid, x0, diffusion_key, size)
    fa = f.eval(jump.terminal)
    fb = f.eval(diffusion.terminal)
    ok_a, ok_b = ~jump.diverged, ~diffusion.diverged

    if pairing is Pairing.COMMON:
        both = ok_a & ok_b
        parts = {"diff": statistics.pooled_moments(fa[both] - fb[both])}
    else:
        parts = {
            "alpha": statistics.pooled_moments(fa[ok_a]),
            "limit": statistics.pooled_moments(fb[ok_b]),
        }
    parts["diverged"] = (int(jump.diverged.sum()), int(diffusion.diverged.sum()))
    logger.debug("shard %d done (%d paths)", index, size)
    return parts


def estimate_weak_error(
    coeffs: CoefficientField,
    noise: CylindricalNoiseSpec,
    f: TestFunction,
    grid: TimeGrid,
    n_paths: int,
    mode: IncrementSamplerMode,
    key: RngStreamKey,
    x0=None,
    pairing: Pairing = Pairing.INDEPENDENT,
    taming: bool = False,
    shard_size: int = 10_000,
    workers: int = 1,
) -> WeakErrorPoint:
    """
    Estimate E f(X^alpha_T) - E f(X_T) from two ensembles with the same grid.

    With independent pairing the ensembles use disjoint child streams and the
    standard error combines both sample variances. With common pairing both
    schemes share each shard's stream, so the estimate is the mean of per-path
    differences. Shards use keys derived from (key, shard index) and merge in
    shard order, so the result does not depend on the number of workers.

    Args:
        coeffs: Coefficients of both SDEs
        noise: Stable noise of the jump SDE
        f: Bounded test function
        grid: Shared time grid
        n_paths: Paths per ensemble, >= 100
        mode: Increment sampler of the jump scheme
        key: Parent stream of the shards
        x0: Start point; zeros when None
        pairing: common or independent random numbers
        taming: Tame the drift of the jump scheme
        shard_size: Paths per shard
        workers: Threads running shards

    Returns:
        WeakErrorPoint; flagged invalid when too many paths diverged

    Raises:
        PreconditionError: f is unbounded
    """
    if not f.bounded:
        raise PreconditionError("weak-error estimation needs a bounded test function")
    if n_paths < MIN_PATHS:
        raise ParameterDomainError("n_paths", n_paths, f"[{MIN_PATHS}, inf)")
    if shard_size < 1 or workers < 1:
        raise ParameterDomainError("shard_size/workers", (shard_size, workers), "[1, inf)")
    pairing = Pairing(pairing)
    x0 = np.zeros(coeffs.dimension) if x0 is None else np.broadcast_to(
        np.asarray(x0, dtype=float), (coeffs.dimension,)
    ).copy()

    sizes = _shard_sizes(n_paths, shard_size)

    def task(item):
        index, size = item
        return _run_shard(index, size, coeffs, noise, f, grid, x0, mode, key, pairing, taming)

    if workers == 1:
        parts = [task(item) for item in enumerate(sizes)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            # map keeps submission order
            parts = list(pool.map(task, enumerate(sizes)))

    diverged_alpha = sum(p["diverged"][0] for p in parts)
    diverged_limit = sum(p["diverged"][1] for p in parts)
    divergence_fraction = max(diverged_alpha, diverged_limit) / n_paths

    if pairing is Pairing.COMMON:
        estimate, std_error, _ = statistics.merge_moments(p["diff"] for p in parts)
    else:
        mean_a, se_a, _ = statistics.merge_moments(p["alpha"] for p in parts)
        mean_b, se_b, _ = statistics.merge_moments(p["limit"] for p in parts)
        estimate = mean_a - mean_b
        std_error = math.sqrt(se_a * se_a + se_b * se_b)

    point = WeakErrorPoint(
        alpha_value=noise.alpha,
        estimate=estimate,
        std_error=std_error,
        n_paths=n_paths,
        h=grid.h,
        divergence_fraction=min(divergence_fraction, 1.0),
    )
    if not point.valid:
        logger.warning(
            "alpha=%.4g: divergence fraction %.2e exceeds the validity limit; point flagged",
            noise.alpha, divergence_fraction,
        )
    logger.info("alpha=%.4g weak error %.6g +/- %.2g", noise.alpha, estimate, std_error)
    return point


def fit_rate(alphas, errors) -> Tuple[float, float]:
    """Slope and intercept of log|error| against log(2 - alpha)"""
    alphas = np.asarray(alphas, dtype=float)
    errors = np.abs(np.asarray(errors, dtype=float))
    if alphas.size < MIN_REGRESSION_POINTS or np.any(errors == 0.0):
        raise InsufficientDataError(
            f"rate fit needs {MIN_REGRESSION_POINTS} nonzero errors, got {errors.size}"
        )
    fit = stats.linregress(np.log(2.0 - alphas), np.log(errors))
    return float(fit.slope), float(fit.intercept)


def rate_regression(
    points: Sequence[WeakErrorPoint],
    n_bootstrap: int = 1000,
    key: Optional[RngStreamKey] = None,
    confidence: float = 0.95,
) -> WeakErrorReport:
    """
    Least-squares fit of log|estimate| on log(2 - alpha) over the valid,
    significant points, with a parametric bootstrap interval for the slope
    (estimates redrawn as Normal(estimate, std_error)).

    Args:
        points: Weak-error points; invalid and noise-dominated ones are skipped
        n_bootstrap: Bootstrap draws
        key: Bootstrap stream; the default seed when None
        confidence: Two-sided level of the slope interval

    Returns:
        WeakErrorReport with every point and the alphas used in the fit

    Raises:
        InsufficientDataError: fewer than 3 usable points with distinct alpha
    """
    points = list(points)
    usable = [p for p in points if p.valid and p.significant and p.alpha_value < 2.0]
    if len({p.alpha_value for p in usable}) < MIN_REGRESSION_POINTS:
        raise InsufficientDataError(
            f"{len(usable)} usable point(s); rate regression needs {MIN_REGRESSION_POINTS} "
            "valid points with |estimate| > 3 std_error and distinct alpha"
        )

    alphas = np.array([p.alpha_value for p in usable])
    est = np.array([p.estimate for p in usable])
    se = np.array([p.std_error for p in usable])
    slope, intercept = fit_rate(alphas, est)
    x = np.log(2.0 - alphas)

    if np.all(se == 0.0):
        ci = (slope, slope)
    else:
        rng = generator_for(key or RngStreamKey(seed=DEFAULT_SEED, stream_id=STREAM_ROLES["bootstrap"]))
        draws = est + se * rng.standard_normal((n_bootstrap, est.size))
        y = np.log(np.maximum(np.abs(draws), np.finfo(float).tiny))
        xc = x - x.mean()
        slopes = (y - y.mean(axis=1, keepdims=True)) @ xc / (xc @ xc)
        tail = 50.0 * (1.0 - confidence)
        lo, hi = np.percentile(slopes, [tail, 100.0 - tail])
        ci = (float(lo), float(hi))

    logger.info("rate slope %.4f (CI %.4f..%.4f) over %d points", slope, ci[0], ci[1], len(usable))
    return WeakErrorReport(
        points=points,
        slope=slope,
        intercept=intercept,
        slope_ci=ci,
        used_alphas=[p.alpha_value for p in usable],
    )


def abs_moment_denominator(cut: float = 10.0, tol: float = 1e-11) -> float:
    """
    int_0^inf sin(u)^2 / u^2 du.

    [0, cut] by adaptive quadrature; the tail is 1/(2 cut) minus half the
    Fourier integral of cos(2u)/u^2 over [cut, inf).
    """
    head, err_head = integrate.quad(lambda u: np.sinc(u / math.pi) ** 2, 0.0, cut,
                                    limit=200, epsabs=tol / 10.0, epsrel=1e-13)
    fourier, err_tail = integrate.quad(lambda u: u ** -2.0, cut, math.inf,
                                       weight="cos", wvar=2.0, epsabs=tol / 10.0)
    error = err_head + 0.5 * err_tail
    value = head + 1.0 / (2.0 * cut) - 0.5 * fourier
    if error > tol:
        raise QuadratureAccuracyError(value, error, tol, what="sin^2/u^2 integral")
    return value


def exact_abs_moment_stable(alpha: float, t: float) -> float:
    """E|L_t| = Gamma(1 - 1/alpha) / (pi/2) * sqrt(t) for the symmetric law"""
    alpha = check_alpha(alpha)
    t = check_positive(t, "t")
    return special.gamma(1.0 - 1.0 / alpha) / (math.pi / 2.0) * math.sqrt(t)


def example41_constant() -> float:
    """(gamma_EM + 2 ln 2) / (2 sqrt(pi)), about 0.553910"""
    return (np.euler_gamma + 2.0 * math.log(2.0)) / (2.0 * math.sqrt(math.pi))


def example41_table(alphas: Iterable[float], t: float = 1.0) -> List[Dict[str, float]]:
    """Rows alpha, exact_error, ratio_to_2_minus_alpha for the absolute-moment gap"""
    rows = []
    limit = LIMIT_ABS_MOMENT * math.sqrt(t)
    for a in alphas:
        error = abs(exact_abs_moment_stable(a, t) - limit)
        rows.append({"alpha": float(a), "exact_error": error, "ratio_to_2_minus_alpha": error / (2.0 - a)})
    return rows


def distributional_distance(sample_a, sample_b, metric: DistanceMetric = DistanceMetric.KS) -> float:
    """Two-sample KS statistic or empirical 1-Wasserstein distance"""
    metric = DistanceMetric(metric)
    if metric is DistanceMetric.KS:
        return statistics.ks_two_sample(sample_a, sample_b)[0]
    return statistics.wasserstein1(sample_a, sample_b)


def point_record(point: WeakErrorPoint) -> Dict[str, float]:
    """One result row of a weak-error point, keyed by CSV_COLUMNS"""
    return dict(zip(CSV_COLUMNS, (point.alpha_value, point.estimate, point.std_error, point.n_paths,
                                  point.h, point.divergence_fraction)))
