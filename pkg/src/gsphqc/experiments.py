"""Multi-trial experiment harness: learning curves, sweeps, threshold crossings.

Trial ``r`` (1-based) always uses ``numpy.random.default_rng(r)`` for its
noise, so a curve depends only on the configuration and the trial count,
never on how trials are scheduled across worker processes.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import partial
from typing import Optional, Sequence

import numpy as np

from .algorithms import AlgorithmSpec, ChangeSchedule, StepSwitch, run_filter
from .analysis import mean_step_bound, weighted_operator
from .errors import ConfigError, InputError
from .graph import (GeoPoint, SamplingSet, SpectralBasis, bandlimit_project, build_knn_graph,
                    build_sampling_set, select_frequency_set, spectral_decompose)
from .metrics import DB_FLOOR, linear_to_db, msd_db  # noqa: F401  (msd_db re-exported)

log = logging.getLogger(__name__)

STEADY_FRACTION = 0.1
CROSSING_FACTOR = 1.03


@dataclass
class Scenario:
    """Everything a trial needs besides the algorithm and the seed."""

    basis: SpectralBasis
    ds: SamplingSet
    truth: np.ndarray
    points: Optional[list] = None
    node_ids: Optional[list] = None
    series: Optional[np.ndarray] = None  # (N, T) station measurements, csv source only


def synthetic_points(node_count: int, seed: int, lat_range=(-30.0, -5.0), lon_range=(-60.0, -35.0)):
    """Uniformly scattered stations in a latitude/longitude box."""
    rng = np.random.default_rng(int(seed))
    lat = rng.uniform(lat_range[0], lat_range[1], node_count)
    lon = rng.uniform(lon_range[0], lon_range[1], node_count)
    return [GeoPoint(a, b) for a, b in zip(lat, lon)]


def synthetic_signal(basis: SpectralBasis, F_count: int, amplitude: float, seed: int):
    """Random bandlimited signal on the ``F_count`` largest-eigenvalue frequencies.

    Returns the basis restricted to the signal's support and the signal.
    """
    rng = np.random.default_rng(int(seed))
    s = amplitude * rng.standard_normal(F_count)
    x = basis.eigenvectors[:, :F_count] @ s
    return select_frequency_set(basis, x, F_count), x


def build_scenario(config) -> Scenario:
    """Graph, frequency set, sampling set and true signal for a configuration."""
    g = config.graph
    if g.source == "synthetic":
        points = synthetic_points(g.node_count, g.seed, *g.box())
        node_ids = [str(i) for i in range(len(points))]
        basis = spectral_decompose(build_knn_graph(points, config.K, config.theta))
        basis, truth = synthetic_signal(basis, config.F_count, config.signal.amplitude, config.signal.seed)
        series = None
    else:
        from .datasets import load_station_csv

        data = load_station_csv(config.data_path)
        snap = g.snapshot or 0
        if snap >= data.series_length:
            raise ConfigError(f"snapshot {snap} outside the dataset's {data.series_length} columns")
        points, node_ids, series = list(data.points), list(data.station_ids), data.values
        basis = spectral_decompose(build_knn_graph(points, config.K, config.theta))
        reference = data.snapshot(snap)
        basis = select_frequency_set(basis, reference, config.F_count)
        truth = bandlimit_project(basis, reference)
        log.info("bandlimiting kept %.4f of the snapshot energy",
                 float(truth @ truth) / max(float(reference @ reference), 1e-300))
    if config.sample_count > basis.node_count:
        raise ConfigError(f"sample_count={config.sample_count} exceeds the {basis.node_count} stations")
    ds = build_sampling_set(basis, config.sample_count, config.sampling.strategy, config.sampling.seed)
    if config.initial_estimate is not None and len(config.initial_estimate) != basis.node_count:
        raise ConfigError(f"initial_estimate has {len(config.initial_estimate)} entries, "
                          f"expected {basis.node_count}")
    return Scenario(basis, ds, truth, points, node_ids, series)


@dataclass
class LearningCurve:
    msd_mean_linear: np.ndarray
    msd_std_linear: np.ndarray
    msd_mean_db: np.ndarray
    band_lower_db: np.ndarray
    band_upper_db: np.ndarray
    trial_count: int = 1

    @classmethod
    def from_trials(cls, msd: np.ndarray) -> "LearningCurve":
        """Aggregate a (trials, iterations) matrix of linear MSD values.

        The band is mean +/- std in the linear domain, converted to dB
        afterwards; a non-positive lower edge is clamped to the dB floor.
        """
        msd = np.atleast_2d(np.asarray(msd, dtype=float))
        n = msd.shape[0]
        with np.errstate(over="ignore", invalid="ignore"):
            mean = msd.mean(axis=0)
            std = msd.std(axis=0, ddof=1) if n > 1 else np.zeros_like(mean)
        return cls(mean, std, linear_to_db(mean), linear_to_db(mean - std), linear_to_db(mean + std), n)

    @property
    def iterations(self) -> int:
        return self.msd_mean_linear.shape[0]


@dataclass(frozen=True)
class ThresholdCrossing:
    threshold_db: float
    first_iteration: Optional[int]
    rule: str = "absolute"


def apply_change_schedule(truth, iteration: int, schedule: Optional[ChangeSchedule]):
    """The true signal in force at ``iteration``."""
    return truth if schedule is None else schedule.truth_at(truth, iteration)


def _trial(scenario, noise, spec, iterations, change_schedule, step_switch, x0, seed):
    return run_filter(scenario.truth, noise, scenario.ds, scenario.basis, spec, iterations, seed,
                      change_schedule=change_schedule, step_switch=step_switch, x0=x0,
                      keep_estimates=False).msd


def run_trial_matrix(scenario: Scenario, noise, spec: AlgorithmSpec, iterations: int, trials: int,
                     change_schedule=None, step_switch=None, x0=None, workers: int = 1,
                     trial_order: Optional[Sequence[int]] = None) -> np.ndarray:
    """Linear MSD of every trial, as a (trials, iterations) matrix ordered by trial index.

    ``trial_order`` permutes the execution order (a permutation of
    ``1..trials``); results are always stored by trial index.
    """
    if trials < 1:
        raise InputError(f"trials must be >= 1, got {trials}")
    order = list(range(1, trials + 1)) if trial_order is None else [int(t) for t in trial_order]
    if sorted(order) != list(range(1, trials + 1)):
        raise InputError("trial_order must be a permutation of 1..trials")
    fn = partial(_trial, scenario, noise, spec, iterations, change_schedule, step_switch, x0)
    out = np.empty((trials, iterations))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for seed, row in zip(order, pool.map(fn, order)):
                out[seed - 1] = row
    else:
        for seed in order:
            out[seed - 1] = fn(seed)
    return out


def run_trials(config, scenario: Optional[Scenario] = None, workers: Optional[int] = None,
               trial_order=None) -> dict:
    """Learning curve for every configured algorithm, keyed by algorithm name."""
    scenario = scenario or build_scenario(config)
    workers = config.worker_count if workers is None else workers
    x0 = None if config.initial_estimate is None else np.asarray(config.initial_estimate, dtype=float)
    curves = {}
    for spec in config.algorithms:
        m = run_trial_matrix(scenario, config.noise, spec, config.iterations, config.trials,
                             config.change_schedule, config.step_switch, x0, workers, trial_order)
        curves[spec.name] = LearningCurve.from_trials(m)
    return curves


def step_switch_run(config, scenario: Optional[Scenario] = None, algorithm: Optional[str] = None,
                    workers: Optional[int] = None) -> LearningCurve:
    """Curve of one algorithm whose step becomes ``k / lambda_max`` after the switch point."""
    sw = config.step_switch
    if sw is None:
        raise ConfigError("step_switch_run needs a step_switch block")
    if not 0 <= sw.start < config.iterations:
        raise ConfigError(f"step_switch.start={sw.start} must lie in [0, iterations)")
    specs = [s for s in config.algorithms if algorithm is None or s.name == algorithm]
    if not specs:
        raise ConfigError(f"no algorithm named {algorithm!r}")
    sub = replace(config, algorithms=[specs[0]])
    return run_trials(sub, scenario, workers)[specs[0].name]


def first_crossing(curve: LearningCurve, threshold_db: float, rule: str = "absolute") -> ThresholdCrossing:
    """First iteration whose mean MSD (dB) is strictly below ``threshold_db``."""
    idx = np.flatnonzero(curve.msd_mean_db < threshold_db)
    return ThresholdCrossing(float(threshold_db), int(idx[0]) if idx.size else None, rule)


def steady_state_level(curve: LearningCurve, fraction: float = STEADY_FRACTION) -> float:
    """Mean linear MSD over the final ``fraction`` of iterations."""
    n = max(1, int(math.ceil(fraction * curve.iterations)))
    return float(np.mean(curve.msd_mean_linear[-n:]))


def steady_state_threshold_db(curve: LearningCurve, factor: float = CROSSING_FACTOR,
                              fraction: float = STEADY_FRACTION) -> float:
    return linear_to_db(factor * steady_state_level(curve, fraction))


def crossing_from_steady_state(curve: LearningCurve, factor: float = CROSSING_FACTOR,
                               fraction: float = STEADY_FRACTION) -> ThresholdCrossing:
    thr = steady_state_threshold_db(curve, factor, fraction)
    return first_crossing(curve, thr, rule=f"{factor:g} x steady state (last {fraction:.0%})")


def step_bound_at_convergence(scenario: Scenario, spec: AlgorithmSpec) -> float:
    """Mean-stability step bound with unit weights (errors near zero).

    NLMS is normalised so its effective operator is the identity.
    """
    if spec.kind == "NLMS":
        return 2.0
    return mean_step_bound(weighted_operator(scenario.basis, scenario.ds))


@dataclass(frozen=True)
class SweepPoint:
    tau: Optional[float]
    mu: float
    steady_state_linear: Optional[float]
    steady_state_db: Optional[float]
    unstable: bool
    crossing: Optional[int]
    reason: str = ""


def assess_stability(curve: LearningCurve, initial_msd: float, mu: float, bound: float):
    """Return (unstable, reason) for a finished curve."""
    if not np.all(np.isfinite(curve.msd_mean_linear)):
        return True, "non-finite MSD"
    if mu >= bound:
        return True, f"mu={mu:g} >= converged mean-stability bound {bound:.6g}"
    if steady_state_level(curve) >= initial_msd:
        return True, "steady state not below the initial error"
    return False, ""


def parameter_sweep(config, taus: Optional[Sequence[float]] = None, mus: Optional[Sequence[float]] = None,
                    algorithm: Optional[str] = None, scenario: Optional[Scenario] = None,
                    workers: Optional[int] = None) -> list:
    """Steady-state MSD over a (tau, mu) grid for one algorithm.

    Grids default to the config's ``sweep`` block; a missing grid keeps the
    algorithm's own value.  Unstable points carry ``None`` for the MSD.
    """
    sw = config.sweep
    taus = list(taus if taus is not None else (sw.tau if sw and sw.tau else []))
    mus = list(mus if mus is not None else (sw.mu if sw and sw.mu else []))
    algorithm = algorithm or (sw.algorithm if sw else None)
    specs = [s for s in config.algorithms if algorithm is None or s.name == algorithm]
    if not specs:
        raise ConfigError(f"no algorithm named {algorithm!r} to sweep")
    base = specs[0]
    taus = taus or [base.tau]
    mus = mus or [base.mu]
    if taus != [base.tau] and base.kind != "HQC":
        raise ConfigError("a tau grid only applies to HQC")
    scenario = scenario or build_scenario(config)
    x0 = np.zeros_like(scenario.truth) if config.initial_estimate is None else np.asarray(config.initial_estimate)
    initial = float(np.sum((x0 - scenario.truth) ** 2))
    points = []
    for tau in taus:
        for mu in mus:
            spec = AlgorithmSpec(base.kind, mu, tau, base.alpha, base.lam, base.name)
            curve = run_trials(replace(config, algorithms=[spec]), scenario, workers)[base.name]
            unstable, why = assess_stability(curve, initial, mu, step_bound_at_convergence(scenario, spec))
            if unstable:
                points.append(SweepPoint(tau, mu, None, None, True, None, why))
                continue
            lvl = steady_state_level(curve)
            points.append(SweepPoint(tau, mu, lvl, linear_to_db(lvl), False,
                                     crossing_from_steady_state(curve).first_iteration))
    return points


def curve_summary(curve: LearningCurve) -> dict:
    lvl = steady_state_level(curve)
    cr = crossing_from_steady_state(curve)
    return {
        "trials": curve.trial_count,
        "iterations": curve.iterations,
        "steady_state_linear": lvl,
        "steady_state_db": linear_to_db(lvl),
        "final_msd_db": float(curve.msd_mean_db[-1]),
        "crossing_threshold_db": cr.threshold_db,
        "crossing_iteration": cr.first_iteration,
        "crossing_rule": cr.rule,
    }


def predict_series(config, scenario: Optional[Scenario] = None) -> dict:
    """Track a station time series: ``iterations_per_step`` noisy updates per time step.

    Returns ``{name: estimates}`` with estimates of shape (N, T), one column
    per time step, taken after the last update of that step.  Noise for the
    whole run is drawn up front from ``default_rng(predict.seed)``.
    """
    if config.predict is None:
        raise ConfigError("predict needs a 'predict' block")
    scenario = scenario or build_scenario(config)
    if scenario.series is None:
        raise ConfigError("predict needs a csv graph source with a time series")
    from .algorithms import Updater

    series = scenario.series
    N, T = series.shape
    k = config.predict.iterations_per_step
    out = {}
    for spec in config.algorithms:
        upd = Updater(scenario.basis, scenario.ds, spec)
        rng = np.random.default_rng(config.predict.seed)
        w = config.noise.sample((T * k, N), rng)
        x = np.zeros(N) if config.initial_estimate is None else np.asarray(config.initial_estimate, dtype=float)
        est = np.empty((N, T))
        for t in range(T):
            for j in range(k):
                x, _, _ = upd.step(x, series[:, t] + w[t * k + j])
            est[:, t] = x
        out[spec.name] = est
    return out
