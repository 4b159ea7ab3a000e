"""
NOMA Access Sim - Experiment Runner
Sweeps over lambda and replications, dispatched to the worker pool in a fixed order
"""

from dataclasses import dataclass, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog
from scipy import stats

from noma_access.access.simulator import ExperimentResult, Scheme, SimConfig, run_experiment
from noma_access.benchmark.oracle import BenchmarkResult, benchmark_scheme_A, benchmark_scheme_B
from noma_access.errors import CapacityError
from noma_access.harness.config import ExperimentSpec
from noma_access.phy.calibration import CalibrationResult, calibrate_noise
from noma_access.phy.channel import cluster_marginals, outcome_distribution
from noma_access.pool import map_ordered
from noma_access.rng import STREAM_CALIBRATION, substream

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class SweepTask:
    arrival_prob: float
    replication: int
    config: SimConfig


def sweep_tasks(spec: ExperimentSpec, **overrides) -> List[SweepTask]:
    """One task per (lambda, replication), sorted by lambda then replication"""

    seeds = spec.replication_seeds()
    return [
        SweepTask(arrival_prob, rep, spec.sim_config(arrival_prob, master_seed=seeds[rep], **overrides))
        for arrival_prob in sorted(spec.lambda_values)
        for rep in range(spec.replications)
    ]


def _run_task(task: SweepTask) -> ExperimentResult:
    run_id = f"sim-l{task.arrival_prob:g}-r{task.replication}-{task.config.fingerprint()[:8]}"
    return run_experiment(task.config, run_id=run_id)


def run_sweep(tasks: Sequence[SweepTask], workers: int = 1) -> List[ExperimentResult]:
    return map_ordered(_run_task, list(tasks), workers)


def simulate_row(task: SweepTask, result: ExperimentResult) -> Dict[str, Any]:
    """Results CSV row: identification, the four metrics, then the attempt statistics"""

    row: Dict[str, Any] = {
        'lambda': task.arrival_prob,
        'scheme': task.config.scheme.value,
        'reward': task.config.reward_kind.value,
    }
    row.update(result.report.as_row())
    row['frames'] = result.report.frames
    row['master_seed'] = task.config.master_seed
    row.update(result.report.extra_row())
    return row


# Benchmarks

def run_benchmarks(spec: ExperimentSpec, workers: int = 1) -> List[Tuple[str, BenchmarkResult]]:
    """Per lambda, the requested scheme benchmarks; grid points go to the pool"""

    results: List[Tuple[str, BenchmarkResult]] = []
    for arrival_prob in sorted(spec.lambda_values):
        base = spec.sim_config(arrival_prob, lambda_switch_frame=None, lambda_after=None)
        for name in spec.benchmark_schemes:
            if name == 'A':
                result = benchmark_scheme_A(base, spec.benchmark_grid, workers=workers)
            else:
                result = benchmark_scheme_B(
                    base, spec.benchmark_grid, workers=workers, clairvoyant_seeds=spec.clairvoyant_seeds
                )
            results.append((name, result))
    return results


def benchmark_row(name: str, result: BenchmarkResult) -> Dict[str, Any]:
    row = result.as_row()
    row['scheme'] = result.scheme.value if name == 'B' else name
    row['stderr'] = result.stderr
    row['infeasible'] = result.infeasible
    return row


# PHY table

def _phy_row_task(args: Tuple[ExperimentSpec, int, int]) -> List[Dict[str, Any]]:
    spec, n1, n2 = args
    rng = substream(spec.master_seed, STREAM_CALIBRATION, 'phy-table', n1, n2)
    distribution = outcome_distribution(n1, n2, spec.phy, spec.clusters[:2], spec.phy_table_samples, rng)
    rows = []
    for cluster in range(2):
        marginals = cluster_marginals(distribution, cluster)
        row: Dict[str, Any] = {'n1': n1, 'n2': n2, 'cluster': cluster + 1}
        row.update({f'S{u}': p for u, p in enumerate(marginals)})
        rows.append(row)
    return rows


def run_phy_table(spec: ExperimentSpec, workers: int = 1) -> List[Dict[str, Any]]:
    """Monte-Carlo marginals S0..S3 of both clusters for every (n1, n2) up to n_max"""

    cells = [
        (spec, n1, n2)
        for n1 in range(spec.phy_table_n_max + 1)
        for n2 in range(spec.phy_table_n_max + 1)
    ]
    logger.info("Starting PHY table", cells=len(cells), samples=spec.phy_table_samples)
    return [row for rows in map_ordered(_phy_row_task, cells, workers) for row in rows]


# Convergence

@dataclass
class ConvergenceSeries:
    frames: List[int]
    throughput: List[float]
    stderr: List[float]
    replications: int
    wac_level: Optional[float] = None

    def rows(self) -> List[Dict[str, Any]]:
        return [
            {'frame': frame, 'throughput': value, 'stderr': error, 'replications': self.replications}
            for frame, value, error in zip(self.frames, self.throughput, self.stderr)
        ]


def windowed(trace: np.ndarray, window: int) -> np.ndarray:
    """Mean successes per frame over consecutive windows; a trailing partial window is dropped"""

    count = len(trace) // window
    if count == 0:
        return np.zeros(0)
    return trace[:count * window].reshape(count, window).mean(axis=1)


def gain_frame(series: ConvergenceSeries, fraction: float = 0.9, tail: float = 0.1) -> Optional[int]:
    """First window end where the gain over WAC reaches `fraction` of its final value"""

    if series.wac_level is None or not series.throughput:
        return None
    tail_count = max(1, int(len(series.throughput) * tail))
    final = float(np.mean(series.throughput[-tail_count:]))
    target = series.wac_level + fraction * (final - series.wac_level)
    for frame, value in zip(series.frames, series.throughput):
        if value >= target:
            return frame
    return None


def run_convergence(spec: ExperimentSpec, arrival_prob: float, workers: int = 1) -> ConvergenceSeries:
    """Windowed system throughput averaged over replications, with a WAC reference level"""

    window = spec.convergence_window
    tasks = [
        SweepTask(arrival_prob, rep, spec.sim_config(arrival_prob, master_seed=seed, trace=True))
        for rep, seed in enumerate(spec.replication_seeds())
    ]
    results = run_sweep(tasks, workers)

    curves = np.vstack([windowed(result.trace, window) for result in results])
    mean = curves.mean(axis=0)
    if len(results) > 1:
        error = np.asarray(stats.sem(curves, axis=0, ddof=1))
    else:
        error = np.zeros_like(mean)

    series = ConvergenceSeries(
        frames=[(k + 1) * window for k in range(curves.shape[1])],
        throughput=mean.tolist(),
        stderr=error.tolist(),
        replications=len(results),
    )

    # WAC is stationary, so a short run gives its level
    reference = replace(
        tasks[0].config,
        scheme=Scheme.WAC,
        trace=False,
        frames=min(spec.frames, 20 * window),
        lambda_switch_frame=None,
        lambda_after=None,
    )
    try:
        series.wac_level = run_experiment(reference, run_id='convergence-wac').report.gamma_s
    except CapacityError as e:
        logger.warning("WAC reference skipped", error=str(e))

    logger.info(
        "Convergence series computed",
        arrival_prob=arrival_prob,
        windows=len(series.frames),
        wac_level=series.wac_level,
        gain_frame=gain_frame(series),
    )
    return series


# Calibration

def run_calibration(spec: ExperimentSpec) -> CalibrationResult:
    rng = substream(spec.master_seed, STREAM_CALIBRATION, 'noise')
    return calibrate_noise(
        spec.phy, spec.clusters, rng, target=spec.calibration_target, samples=spec.calibration_samples
    )


def phy_section(result: CalibrationResult) -> Dict[str, Any]:
    phy = result.phy
    return {
        'phy': {
            'tx_power': phy.tx_power,
            'sinr_threshold_db': phy.sinr_threshold_db,
            'shadow_std_db': phy.shadow_std_db,
            'receiver_sensitivity_dbm': phy.receiver_sensitivity_dbm,
            'noise_psd_dbm_hz': phy.noise_psd_dbm_hz,
            'bandwidth_hz': float(f"{phy.bandwidth_hz:.6g}"),
            'antenna_count': phy.antenna_count,
            'bs_height': phy.bs_height,
            'shadow_coherence': phy.shadow_coherence,
        }
    }
