"""
ExperimentRunner - Orchestrates the named experiments and writes their results.

Every experiment delegates the numerics to the engines and returns an
ExperimentResult (rows for CSV, a summary for JSON, named acceptance checks).
The runner owns file naming, the manifest and the worker count.
"""
import csv
import json
import logging
import math
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .config import resolve_output_dir
from .engines import coefficients, generator_calculus, levy_measure, stable_sampler, statistics, weak_error
from .engines.rng import STREAM_ROLES, derive_key
from .engines.sde_solver import ensemble_sup_moment, simulate_diffusion_ensemble, simulate_jump_ensemble
from .exceptions import AcceptanceFailure, InsufficientDataError, SimulationError
from .models.schemas import (
    AcceptanceCheck,
    CoefficientPreset,
    DistanceMetric,
    ExperimentConfig,
    ExperimentName,
    ExperimentResult,
    IncrementSamplerMode,
    Region,
    RngStreamKey,
    RunManifest,
    SamplerMode,
    TimeGrid,
    WeakErrorPoint,
)

logger = logging.getLogger(__name__)

# alpha grids used when the config does not set alpha_grid
DEFAULT_GRIDS: Dict[ExperimentName, Tuple[float, ...]] = {
    ExperimentName.LEMMA22_SUITE: (1.51, 1.6, 1.75, 1.9, 1.99),
    ExperimentName.SAMPLER_VALIDATION: (1.6, 1.9),
    ExperimentName.GENERATOR_RATE: (1.9, 1.95, 1.99, 1.995),
    ExperimentName.SDE_WEAK_RATE: (1.7, 1.8, 1.9, 1.95),
    ExperimentName.EXAMPLE41: (1.9, 1.95, 1.99, 1.995, 1.999),
    ExperimentName.KOLMOGOROV_RESIDUAL: (1.9,),
    ExperimentName.WEAK_CONVERGENCE: (1.6, 1.8, 1.9, 1.95),
    ExperimentName.SUP_MOMENT: (1.6, 1.8, 1.9, 1.95),
}

DESCRIPTIONS: Dict[ExperimentName, str] = {
    ExperimentName.LEMMA22_SUITE: "closed-form vs quadrature Levy-measure moments and alpha -> 2 limits",
    ExperimentName.SAMPLER_VALIDATION: "exact transform vs decomposition (KS) and characteristic function check",
    ExperimentName.GENERATOR_RATE: "deterministic generator gap for a plane wave, rate against 2 - alpha",
    ExperimentName.SDE_WEAK_RATE: "Monte Carlo weak error of the SDE across alpha and its rate",
    ExperimentName.EXAMPLE41: "closed-form absolute-moment gap of the pure stable process",
    ExperimentName.KOLMOGOROV_RESIDUAL: "Monte Carlo residual of the backward Kolmogorov equation",
    ExperimentName.WEAK_CONVERGENCE: "KS and Wasserstein-1 distance of terminal laws across alpha",
    ExperimentName.SUP_MOMENT: "E sup |X|^theta of the jump SDE across alpha",
}

SMOKE_PATHS = 2_000
SMOKE_STEPS = 64
SMOKE_SHARD = 1_000
SMOKE_BOOTSTRAP = 200

# gap is identically zero for the symmetric unit-scale plane wave at |xi| = 1
GENERATOR_RATE_FREQUENCY = 2.0
KOLMOGOROV_STEPS = 64
DISTANCE_SAMPLE = 10_000
SAMPLER_CHECK_BETAS = (0.0, 0.5, -0.9)
SAMPLER_CHECK_DT = 0.01
SAMPLER_CHECK_XI = (0.5, 1.0, 2.0)

# per-experiment values for keys the config file leaves unset
EXPERIMENT_DEFAULTS: Dict[ExperimentName, Dict[str, Any]] = {
    ExperimentName.GENERATOR_RATE: {
        "coefficients": CoefficientPreset.PURE_NOISE,
        "frequency": GENERATOR_RATE_FREQUENCY,
    },
    ExperimentName.KOLMOGOROV_RESIDUAL: {
        "coefficients": CoefficientPreset.PURE_NOISE,
        "n_steps": KOLMOGOROV_STEPS,
    },
}


def resolve_defaults(config: ExperimentConfig) -> ExperimentConfig:
    """
    Fill the experiment-specific defaults into the keys the user did not set.

    Args:
        config: Validated configuration; model_fields_set marks the explicit keys

    Returns:
        Configuration holding the values the experiment actually uses
    """
    explicit = config.model_fields_set
    updates: Dict[str, Any] = {}
    if "alpha_grid" not in explicit:
        updates["alpha_grid"] = DEFAULT_GRIDS[config.experiment]
    for key, value in EXPERIMENT_DEFAULTS.get(config.experiment, {}).items():
        if key not in explicit:
            updates[key] = value
    return config.model_copy(update=updates) if updates else config


def _monotone_decreasing(values: Sequence[float]) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))


class ResultBuilder:
    """Collects rows, summary and checks into an ExperimentResult"""

    def __init__(self, experiment: ExperimentName, enforce_monte_carlo: bool = True):
        self._model = ExperimentResult(experiment=experiment)
        self.enforce_monte_carlo = enforce_monte_carlo

    @property
    def model(self) -> ExperimentResult:
        return self._model

    def row(self, **values) -> None:
        self._model.rows.append(values)

    def check(self, name: str, passed: bool, detail: str = "", monte_carlo: bool = False) -> None:
        enforced = self.enforce_monte_carlo or not monte_carlo
        self._model.checks.append(
            AcceptanceCheck(name=name, passed=bool(passed), detail=detail, enforced=enforced)
        )
        if not passed:
            level = logging.WARNING if enforced else logging.INFO
            logger.log(level, "check %s failed: %s", name, detail)


class ExperimentRunner:
    """
    Runs one configured experiment.

    The registry maps each ExperimentName to a method returning an
    ExperimentResult builder; run() adds file output and the manifest.
    """

    def __init__(
        self,
        config: ExperimentConfig,
        output_dir: Optional[Path] = None,
        workers: Optional[int] = None,
        smoke: bool = False,
        on_progress: Optional[Callable[[str], None]] = None,
    ):
        """
        Initialize the runner.

        Args:
            config: Validated experiment configuration
            output_dir: Result directory flag (highest precedence)
            workers: Worker-thread override
            smoke: Cap paths, steps, shards and bootstrap draws; Monte Carlo
                checks are recorded but not enforced
            on_progress: Callback receiving short progress messages
        """
        resolved = resolve_defaults(config)
        updates: Dict[str, Any] = {}
        if workers is not None:
            updates["workers"] = workers
        if smoke:
            updates.update(
                n_paths=min(resolved.n_paths, SMOKE_PATHS),
                n_steps=min(resolved.n_steps, SMOKE_STEPS),
                shard_size=min(resolved.shard_size, SMOKE_SHARD),
                n_bootstrap=min(resolved.n_bootstrap, SMOKE_BOOTSTRAP),
            )
        self.config = resolved.model_copy(update=updates) if updates else resolved
        self.output_dir = resolve_output_dir(self.config, output_dir)
        self.smoke = smoke
        self.failure_path: Optional[Path] = None
        self._progress = on_progress or (lambda message: None)
        self.registry: Dict[ExperimentName, Callable[[], ResultBuilder]] = {
            ExperimentName.LEMMA22_SUITE: self._lemma22_suite,
            ExperimentName.SAMPLER_VALIDATION: self._sampler_validation,
            ExperimentName.GENERATOR_RATE: self._generator_rate,
            ExperimentName.SDE_WEAK_RATE: self._sde_weak_rate,
            ExperimentName.EXAMPLE41: self._example41,
            ExperimentName.KOLMOGOROV_RESIDUAL: self._kolmogorov_residual,
            ExperimentName.WEAK_CONVERGENCE: self._weak_convergence,
            ExperimentName.SUP_MOMENT: self._sup_moment,
        }

    # ------------------------------------------------------------------
    # helpers
    # ------------------------------------------------------------------

    @property
    def alpha_grid(self) -> Tuple[float, ...]:
        return self.config.alpha_grid

    @property
    def base_key(self) -> RngStreamKey:
        return RngStreamKey(seed=self.config.seed, stream_id=STREAM_ROLES["experiment"])

    def _coeffs(self):
        return coefficients.build_coefficients(self.config.coefficients, self.config.dimension)

    def _test_function(self):
        c = self.config
        return coefficients.build_test_function(c.test_function, c.dimension, c.frequency)

    def _x0(self) -> np.ndarray:
        return np.full(self.config.dimension, self.config.x0)

    def _mode(self) -> IncrementSamplerMode:
        return IncrementSamplerMode(mode=self.config.sampler, delta=self.config.delta)

    def _grid(self) -> TimeGrid:
        return TimeGrid(horizon_T=self.config.T, n_steps=self.config.n_steps)

    # ------------------------------------------------------------------
    # experiments
    # ------------------------------------------------------------------

    def _lemma22_suite(self) -> ResultBuilder:
        result = ResultBuilder(ExperimentName.LEMMA22_SUITE)
        worst = 0.0
        for alpha in self.alpha_grid:
            spec = levy_measure.make_measure(alpha, 0.0)
            self._progress(f"alpha={alpha}")
            for delta in (0.1, 0.5, 1.0):
                exact = levy_measure.truncated_second_moment(spec, delta)
                quad, err = levy_measure.quadrature_moment(spec, delta, 2.0, Region.INNER)
                dev = abs(quad - exact) / abs(exact)
                worst = max(worst, dev)
                result.row(alpha=alpha, delta=delta, quantity="truncated_second_moment", vartheta=2.0,
                           closed_form=exact, quadrature=quad, error_bound=err, rel_deviation=dev)
                for vartheta in (0.0, 1.0, alpha - 0.01):
                    exact = levy_measure.tail_moment(spec, delta, vartheta)
                    quad, err = levy_measure.quadrature_moment(spec, delta, vartheta, Region.OUTER)
                    dev = abs(quad - exact) / abs(exact)
                    worst = max(worst, dev)
                    result.row(alpha=alpha, delta=delta, quantity="tail_moment", vartheta=vartheta,
                               closed_form=exact, quadrature=quad, error_bound=err, rel_deviation=dev)
        result.check("moments_match_quadrature", worst <= 1e-8, f"max relative deviation {worst:.3g}")

        limits = {}
        for alpha, bound in ((1.99, 0.05), (1.999, 0.005)):
            m2 = levy_measure.truncated_second_moment(levy_measure.make_measure(alpha, 0.0), 1.0)
            limits[str(alpha)] = m2
            result.check(f"second_moment_limit_{alpha}", abs(m2 - 2.0) <= bound, f"|{m2:.6g} - 2| vs {bound}")
        tail = levy_measure.tail_moment(levy_measure.make_measure(1.99, 0.0), 1.0, 1.0)
        result.check("tail_moment_limit_1.99", tail <= 0.05, f"tail moment {tail:.6g}")
        result.model.summary.update(
            max_rel_deviation=worst, truncated_second_moment_delta1=limits, tail_moment_delta1_order1=tail
        )
        return result

    def _sampler_validation(self) -> ResultBuilder:
        result = ResultBuilder(ExperimentName.SAMPLER_VALIDATION, enforce_monte_carlo=not self.smoke)
        n = min(self.config.n_paths, DISTANCE_SAMPLE)
        dt = SAMPLER_CHECK_DT
        cells = [(a, b) for a in self.alpha_grid for b in SAMPLER_CHECK_BETAS]
        level = 0.01 / len(cells)
        for index, (alpha, beta) in enumerate(cells):
            self._progress(f"alpha={alpha} beta={beta}")
            spec = levy_measure.make_measure(alpha, beta)
            cell_key = derive_key(self.base_key, index)
            exact = stable_sampler.sample_increment(spec, dt, derive_key(cell_key, 0), size=n).value
            mode = IncrementSamplerMode(mode=SamplerMode.DECOMPOSITION, delta=dt ** (1.0 / alpha))
            decomposed = stable_sampler.sample_decomposed_increment(
                spec, dt, mode, derive_key(cell_key, 1), size=n
            ).value
            ks_stat, p_value = statistics.ks_two_sample(exact, decomposed)
            result.row(alpha=alpha, beta=beta, test="ks", xi="", statistic=ks_stat, p_value=p_value,
                       deviation="", std_error="")
            result.check(f"ks_{alpha}_{beta}", p_value > level,
                         f"p={p_value:.3g} vs Bonferroni level {level:.3g}", monte_carlo=True)
            for xi in SAMPLER_CHECK_XI:
                ecf, se = statistics.empirical_cf(exact, xi)
                target = complex(np.exp(levy_measure.characteristic_exponent(spec, xi) * dt))
                deviation = abs(ecf - target)
                result.row(alpha=alpha, beta=beta, test="ecf", xi=xi, statistic=deviation, p_value="",
                           deviation=deviation, std_error=se)
                result.check(f"ecf_{alpha}_{beta}_{xi}", deviation <= 4.0 * se,
                             f"|ecf - target|={deviation:.3g}, 4 SE={4 * se:.3g}", monte_carlo=True)
        result.model.summary.update(n_samples=n, dt=dt, bonferroni_level=level)
        return result

    def _generator_rate(self) -> ResultBuilder:
        result = ResultBuilder(ExperimentName.GENERATOR_RATE)
        c = self.config
        coeffs, f = self._coeffs(), self._test_function()
        x = self._x0()
        alphas, gaps = [], []
        for alpha in self.alpha_grid:
            self._progress(f"alpha={alpha}")
            noise = levy_measure.make_cylindrical_noise(alpha, c.betas())
            report = generator_calculus.generator_gap(coeffs, noise, f, x, c.delta_split, c.tol)
            alphas.append(alpha)
            gaps.append(report.gap)
            result.row(alpha=alpha, alpha_value=report.alpha_value, limit_value=report.limit_value,
                       gap=report.gap, ratio_to_2_minus_alpha=report.gap / (2.0 - alpha),
                       quadrature_error_bound=report.quadrature_error_bound,
                       small_jump_term=report.small_jump_term, band_term=report.band_term,
                       large_jump_term=report.large_jump_term, drift_term=report.drift_term)
        try:
            slope, intercept = weak_error.fit_rate(alphas, gaps)
            result.check("gap_rate_slope", 0.9 <= slope <= 1.1, f"slope {slope:.4f} vs [0.9, 1.1]")
        except InsufficientDataError as exc:
            slope = intercept = math.nan
            result.check("gap_rate_slope", False, str(exc))
        result.model.summary.update(slope=slope, intercept=intercept, frequency=c.frequency,
                                    coefficients=coeffs.name, x=x.tolist())
        return result

    def _sde_weak_rate(self) -> ResultBuilder:
        result = ResultBuilder(ExperimentName.SDE_WEAK_RATE, enforce_monte_carlo=not self.smoke)
        c = self.config
        coeffs, f, grid = self._coeffs(), self._test_function(), self._grid()
        key = RngStreamKey(seed=c.seed, stream_id=STREAM_ROLES["jump"])
        points: List[WeakErrorPoint] = []
        for alpha in self.alpha_grid:
            self._progress(f"alpha={alpha}")
            noise = levy_measure.make_cylindrical_noise(alpha, c.betas())
            point = weak_error.estimate_weak_error(
                coeffs, noise, f, grid, c.n_paths, self._mode(), key, x0=self._x0(),
                pairing=c.pairing, taming=c.taming, shard_size=c.shard_size, workers=c.workers,
            )
            points.append(point)
            result.row(**weak_error.point_record(point))

        result.check("points_valid", all(p.valid for p in points),
                     f"divergence fractions {[p.divergence_fraction for p in points]}")
        magnitudes = [abs(p.estimate) for p in points]
        result.check("estimates_decrease", _monotone_decreasing(magnitudes),
                     f"|estimate| along grid {magnitudes}", monte_carlo=True)
        try:
            report = weak_error.rate_regression(
                points, c.n_bootstrap, RngStreamKey(seed=c.seed, stream_id=STREAM_ROLES["bootstrap"])
            )
            result.check("weak_rate_slope", 0.7 <= report.slope <= 1.3,
                         f"slope {report.slope:.4f} vs [0.7, 1.3]", monte_carlo=True)
            result.model.summary.update(report.model_dump(mode="json"))
        except InsufficientDataError as exc:
            result.check("weak_rate_slope", False, str(exc), monte_carlo=True)
            result.model.summary["points"] = [p.model_dump(mode="json") for p in points]
        return result

    def _example41(self) -> ResultBuilder:
        result = ResultBuilder(ExperimentName.EXAMPLE41)
        rows = weak_error.example41_table(self.alpha_grid)
        for row in rows:
            result.row(**row)
        constant = weak_error.example41_constant()
        final = weak_error.example41_table([1.999])[0]["ratio_to_2_minus_alpha"]
        result.check("ratio_at_1.999", abs(final / constant - 1.0) <= 0.01,
                     f"ratio {final:.6f} vs constant {constant:.6f}")
        slope, intercept = weak_error.fit_rate([r["alpha"] for r in rows], [r["exact_error"] for r in rows])
        result.check("optimality_slope", 0.97 <= slope <= 1.03, f"slope {slope:.4f} vs [0.97, 1.03]")
        denominator = weak_error.abs_moment_denominator()
        result.check("sin2_integral", abs(denominator - math.pi / 2.0) <= 1e-10,
                     f"{denominator!r} vs pi/2")
        result.model.summary.update(
            constant=constant, final_ratio_1_999=final, slope=slope, intercept=intercept,
            abs_moment_denominator=denominator,
        )
        return result

    def _kolmogorov_residual(self) -> ResultBuilder:
        result = ResultBuilder(ExperimentName.KOLMOGOROV_RESIDUAL, enforce_monte_carlo=not self.smoke)
        c = self.config
        coeffs, f, grid = self._coeffs(), self._test_function(), self._grid()
        x = np.full(c.dimension, c.x)
        key = RngStreamKey(seed=c.seed, stream_id=STREAM_ROLES["diffusion"])
        self._progress(f"t={c.t} x={c.x}")
        estimate = generator_calculus.kolmogorov_residual(coeffs, f, c.t, x, grid, c.n_paths, key, c.fd_step)
        oracle = None
        if c.dimension == 1 and f.wave is not None:
            oracle = generator_calculus.cosine_value_function(c.coefficients, c.frequency, c.T - c.t, c.x)
        result.row(t=c.t, x=c.x, residual=estimate.residual, std_error=estimate.std_error,
                   u_value=estimate.u_value, u_oracle=oracle if oracle is not None else "",
                   time_derivative=estimate.time_derivative, generator_value=estimate.generator_value,
                   n_paths=estimate.n_paths, inconclusive=estimate.inconclusive)
        result.check("residual_within_3se", abs(estimate.residual) <= 3.0 * estimate.std_error,
                     f"{estimate.residual:.4g} vs 3 SE {3 * estimate.std_error:.4g}", monte_carlo=True)
        result.check("std_error_small", estimate.std_error <= 0.01,
                     f"std error {estimate.std_error:.4g}", monte_carlo=True)
        result.check("conclusive", not estimate.inconclusive, monte_carlo=True)
        result.model.summary.update(estimate.model_dump(mode="json"), u_oracle=oracle, n_steps=grid.n_steps,
                                    coefficients=coeffs.name)
        return result

    def _weak_convergence(self) -> ResultBuilder:
        result = ResultBuilder(ExperimentName.WEAK_CONVERGENCE, enforce_monte_carlo=not self.smoke)
        c = self.config
        coeffs, grid = self._coeffs(), self._grid()
        n = min(c.n_paths, DISTANCE_SAMPLE)
        key = RngStreamKey(seed=c.seed, stream_id=STREAM_ROLES["jump"])
        limit = simulate_diffusion_ensemble(coeffs, grid, self._x0(), key, n).finite_terminal()[:, 0]
        w1 = []
        for alpha in self.alpha_grid:
            self._progress(f"alpha={alpha}")
            noise = levy_measure.make_cylindrical_noise(alpha, c.betas())
            ensemble = simulate_jump_ensemble(coeffs, noise, grid, self._x0(), self._mode(), key, n, c.taming)
            sample = ensemble.finite_terminal()[:, 0]
            ks = weak_error.distributional_distance(sample, limit, DistanceMetric.KS)
            wasserstein = weak_error.distributional_distance(sample, limit, DistanceMetric.WASSERSTEIN1)
            w1.append(wasserstein)
            result.row(alpha=alpha, ks=ks, wasserstein1=wasserstein, n_samples=n,
                       divergence_fraction=ensemble.divergence_fraction)
        result.check("wasserstein_decreasing", _monotone_decreasing(w1), f"W1 along grid {w1}",
                     monte_carlo=True)
        result.check("wasserstein_final_below_0.05", w1[-1] < 0.05, f"W1 {w1[-1]:.4g}", monte_carlo=True)
        result.model.summary.update(n_samples=n, wasserstein1=w1)
        return result

    def _sup_moment(self) -> ResultBuilder:
        result = ResultBuilder(ExperimentName.SUP_MOMENT, enforce_monte_carlo=not self.smoke)
        c = self.config
        coeffs, grid = self._coeffs(), self._grid()
        key = RngStreamKey(seed=c.seed, stream_id=STREAM_ROLES["jump"])
        limit_value = ensemble_sup_moment(
            simulate_diffusion_ensemble(coeffs, grid, self._x0(), key, c.n_paths), c.theta
        )
        values = []
        for alpha in self.alpha_grid:
            self._progress(f"alpha={alpha}")
            noise = levy_measure.make_cylindrical_noise(alpha, c.betas())
            ensemble = simulate_jump_ensemble(
                coeffs, noise, grid, self._x0(), self._mode(), key, c.n_paths, c.taming
            )
            value = ensemble_sup_moment(ensemble, c.theta)
            values.append(value)
            result.row(alpha=alpha, theta=c.theta, sup_moment=value, limit_sup_moment=limit_value,
                       divergence_fraction=ensemble.divergence_fraction)
            result.check(f"valid_{alpha}", ensemble.divergence_fraction <= 1e-3 and math.isfinite(value),
                         f"divergence {ensemble.divergence_fraction:.2e}, value {value:.4g}")
        result.model.summary.update(theta=c.theta, sup_moments=values, limit_sup_moment=limit_value)
        return result

    # ------------------------------------------------------------------
    # run
    # ------------------------------------------------------------------

    def execute(self) -> ResultBuilder:
        experiment = self.config.experiment
        logger.info("running %s (seed %d, workers %d)", experiment.value, self.config.seed, self.config.workers)
        return self.registry[experiment]()

    def config_echo(self) -> Dict[str, Any]:
        """Resolved configuration as written to the manifest and failure record"""
        echo = self.config.model_dump(mode="json")
        echo["output_dir"] = str(self.output_dir)
        echo["smoke"] = self.smoke
        return echo

    def _stem(self, started: datetime) -> str:
        return f"{self.config.experiment.value}-{self.config.seed}-{started.strftime('%Y%m%dT%H%M%SZ')}"

    def write_failure_record(self, exc: SimulationError, started: datetime, wall_time: float) -> Path:
        """
        Write <experiment>-<seed>-<timestamp>.failure.json for a run that raised.

        Args:
            exc: The error that stopped the run
            started: UTC start time of the run
            wall_time: Seconds spent before the error

        Returns:
            Path of the failure record
        """
        details = {
            key: value if isinstance(value, (str, int, float, bool, type(None))) else repr(value)
            for key, value in vars(exc).items()
        }
        record = {
            "experiment": self.config.experiment.value,
            "seed": self.config.seed,
            "status": "error",
            "category": exc.category,
            "error_type": type(exc).__name__,
            "message": str(exc),
            "details": details,
            "config_echo": self.config_echo(),
            "library_version": __version__,
            "started_at": started.isoformat(),
            "wall_time": wall_time,
        }
        self.output_dir.mkdir(parents=True, exist_ok=True)
        path = write_json(record, self.output_dir / f"{self._stem(started)}.failure.json")
        logger.error("%s error in %s: %s (record %s)", exc.category, record["experiment"], exc, path)
        return path

    def run(self) -> RunManifest:
        """
        Run the experiment and write <experiment>-<seed>-<timestamp>.{csv,json,manifest.json}.

        Returns:
            The run manifest

        Raises:
            SimulationError: re-raised after a failure record is written
        """
        started = datetime.now(timezone.utc)
        clock = time.perf_counter()
        try:
            result = self.execute().model
        except SimulationError as exc:
            self.failure_path = self.write_failure_record(exc, started, time.perf_counter() - clock)
            raise

        self.output_dir.mkdir(parents=True, exist_ok=True)
        stem = self._stem(started)
        files = {
            "csv": str(write_rows_csv(result.rows, self.output_dir / f"{stem}.csv")),
            "json": str(write_json(
                {"experiment": result.experiment.value, "summary": result.summary,
                 "checks": [ch.model_dump(mode="json") for ch in result.checks]},
                self.output_dir / f"{stem}.json",
            )),
        }
        manifest_path = self.output_dir / f"{stem}.manifest.json"
        files["manifest"] = str(manifest_path)

        manifest = RunManifest(
            config_echo=self.config_echo(),
            library_version=__version__,
            wall_time=time.perf_counter() - clock,
            started_at=started.isoformat(),
            result_files=files,
            seed=self.config.seed,
            passed=result.passed,
            failed_checks=result.failed_checks(),
        )
        write_json(manifest.model_dump(mode="json"), manifest_path)
        logger.info("wrote %s", ", ".join(files.values()))
        return manifest


def write_rows_csv(rows: List[Dict], path: Path) -> Path:
    with Path(path).open("w", encoding="utf-8", newline="") as handle:
        if rows:
            writer = csv.DictWriter(handle, fieldnames=list(rows[0].keys()), lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return Path(path)


def write_json(payload: Dict, path: Path) -> Path:
    with Path(path).open("w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True, allow_nan=True)
        handle.write("\n")
    return Path(path)


def run(
    config: ExperimentConfig,
    output_dir: Optional[Path] = None,
    workers: Optional[int] = None,
    smoke: bool = False,
    strict: bool = True,
) -> RunManifest:
    """
    Run one experiment end to end.

    Raises:
        AcceptanceFailure: strict and an enforced check failed (files and
            manifest are written first)
    """
    manifest = ExperimentRunner(config, output_dir, workers, smoke).run()
    if strict and not manifest.passed:
        raise AcceptanceFailure(manifest.failed_checks)
    return manifest
