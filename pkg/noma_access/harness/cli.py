"""
NOMA Access Sim - Command Line
Subcommands simulate, benchmark, phy-table, convergence and calibrate

Every cmd_* returns a result dict with `status`, `run_id` and the written
paths; main() maps library errors to exit codes (2 config, 3 capacity).
"""

import argparse
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import structlog
import yaml
from dotenv import load_dotenv

from noma_access import __version__
from noma_access.agent.snapshot import save_snapshot
from noma_access.errors import ConfigError, NomaSimError
from noma_access.harness import output
from noma_access.harness.config import ExperimentSpec, cli_overrides, load_spec
from noma_access.harness.plotting import plot_convergence, plot_throughput_vs_lambda
from noma_access.harness.runner import (
    benchmark_row,
    gain_frame,
    phy_section,
    run_benchmarks,
    run_calibration,
    run_convergence,
    run_phy_table,
    run_sweep,
    simulate_row,
    sweep_tasks,
)
from noma_access.logging_config import configure_logging
from noma_access.pool import resolve_workers

logger = structlog.get_logger(__name__)


def make_run_id(command: str, spec: ExperimentSpec) -> str:
    return f"{command}-{spec.spec_sha256[:12]}-{spec.master_seed}"


def cmd_simulate(spec: ExperimentSpec, workers: int = 1) -> Dict[str, Any]:
    """One results row per (lambda, replication); throughput-vs-lambda SVG alongside"""

    run_id = make_run_id('simulate', spec)
    logger.info("Starting simulate", run_id=run_id, lambdas=len(spec.lambda_values), replications=spec.replications)

    tasks = sweep_tasks(spec)
    results = run_sweep(tasks, workers)
    rows = [simulate_row(task, result) for task, result in zip(tasks, results)]

    result: Dict[str, Any] = {'status': 'success', 'run_id': run_id, 'rows': len(rows)}
    result['csv'] = str(output.write_csv(
        rows, spec.output_path, spec.spec_sha256, spec.replication_seeds(), leading=output.SIMULATE_COLUMNS
    ))

    if spec.plot:
        lambdas = sorted(spec.lambda_values)
        series = {'system': [_mean_over(rows, lam, 'gamma_s') for lam in lambdas]}
        for c in range(len(spec.clusters)):
            series[f'cluster {c + 1}'] = [_mean_over(rows, lam, f'gamma_{c + 1}') for lam in lambdas]
        svg = output.sibling(spec.output_path, 'throughput', '.svg')
        result['svg'] = str(plot_throughput_vs_lambda(
            lambdas, series, svg, title=f"{{{spec.network_label}}} scheme {spec.scheme.value}"
        ))

    if spec.snapshot_path is not None:
        snapshots: List[str] = []
        for task, run in zip(tasks, results):
            if run.policy is None:
                continue
            path = spec.snapshot_path
            if len(tasks) > 1:
                path = output.sibling(path, f"l{task.arrival_prob:g}_r{task.replication}")
            snapshots.append(str(save_snapshot(run.policy, path)))
        result['snapshots'] = snapshots

    logger.info("Simulate completed", run_id=run_id, rows=len(rows))
    return result


def _mean_over(rows: Sequence[Dict[str, Any]], arrival_prob: float, key: str) -> float:
    values = [row[key] for row in rows if row['lambda'] == arrival_prob]
    return sum(values) / len(values)


def cmd_benchmark(spec: ExperimentSpec, workers: int = 1) -> Dict[str, Any]:
    """Exhaustive-search upper bound per lambda and scheme"""

    run_id = make_run_id('benchmark', spec)
    if len(spec.clusters) != 2:
        raise ConfigError('network.devices_per_cluster', "the benchmark is defined for two clusters")

    logger.info("Starting benchmark", run_id=run_id, schemes=list(spec.benchmark_schemes))
    rows = [benchmark_row(name, result) for name, result in run_benchmarks(spec, workers)]
    path = output.write_csv(
        rows, spec.output_path, spec.spec_sha256, [spec.master_seed], leading=output.BENCHMARK_COLUMNS
    )
    logger.info("Benchmark completed", run_id=run_id, rows=len(rows))
    return {'status': 'success', 'run_id': run_id, 'rows': len(rows), 'csv': str(path)}


def cmd_phy_table(spec: ExperimentSpec, workers: int = 1) -> Dict[str, Any]:
    """Monte-Carlo reproduction of the detection table in physical mode"""

    run_id = make_run_id('phy-table', spec)
    if len(spec.clusters) < 2:
        raise ConfigError('network.devices_per_cluster', "the PHY table needs two clusters")

    rows = run_phy_table(spec, workers)
    path = output.write_csv(
        rows, spec.output_path, spec.spec_sha256, [spec.master_seed], leading=output.PHY_TABLE_COLUMNS
    )
    logger.info("PHY table completed", run_id=run_id, rows=len(rows))
    return {'status': 'success', 'run_id': run_id, 'rows': len(rows), 'csv': str(path)}


def cmd_convergence(spec: ExperimentSpec, workers: int = 1) -> Dict[str, Any]:
    """Windowed throughput against frame index for every configured lambda"""

    run_id = make_run_id('convergence', spec)
    if spec.frames < spec.convergence_window:
        raise ConfigError(
            'metrics.convergence_window',
            f"window {spec.convergence_window} is longer than the run ({spec.frames} frames)",
        )

    rows: List[Dict[str, Any]] = []
    svgs: List[str] = []
    gains: Dict[float, Optional[int]] = {}
    for arrival_prob in sorted(spec.lambda_values):
        series = run_convergence(spec, arrival_prob, workers)
        gains[arrival_prob] = gain_frame(series)
        for row in series.rows():
            rows.append({'lambda': arrival_prob, **row})
        if spec.plot:
            reference = {'WAC': series.wac_level} if series.wac_level is not None else None
            svg = output.sibling(spec.output_path, f"convergence_l{arrival_prob:g}", '.svg')
            svgs.append(str(plot_convergence(
                series.frames, series.throughput, svg, reference=reference,
                title=f"{{{spec.network_label}}} scheme {spec.scheme.value}, lambda={arrival_prob:g}",
            )))

    path = output.write_csv(
        rows, spec.output_path, spec.spec_sha256, spec.replication_seeds(),
        leading=['lambda'] + output.CONVERGENCE_COLUMNS,
    )
    logger.info("Convergence completed", run_id=run_id, points=len(rows), gain_frames=gains)
    return {
        'status': 'success', 'run_id': run_id, 'rows': len(rows), 'csv': str(path), 'svg': svgs, 'gain_frames': gains,
    }


def cmd_calibrate(spec: ExperimentSpec, workers: int = 1) -> Dict[str, Any]:
    """Write the calibrated phy section as YAML next to the output path"""

    run_id = make_run_id('calibrate', spec)
    result = run_calibration(spec)

    path = spec.output_path.with_suffix('.yaml')
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w') as handle:
        handle.write(f"# spec_sha256={spec.spec_sha256} master_seeds={spec.master_seed}\n")
        handle.write(f"# target={result.target:.6g} attained={result.attained:.6g} reachable={result.reachable}\n")
        yaml.safe_dump(phy_section(result), handle, sort_keys=False)

    if not result.reachable:
        logger.warning("Calibration target not reachable", run_id=run_id, attained=result.attained)
    return {
        'status': 'success',
        'run_id': run_id,
        'yaml': str(path),
        'bandwidth_hz': result.phy.bandwidth_hz,
        'attained': result.attained,
        'reachable': result.reachable,
    }


COMMANDS = {
    'simulate': cmd_simulate,
    'benchmark': cmd_benchmark,
    'phy-table': cmd_phy_table,
    'convergence': cmd_convergence,
    'calibrate': cmd_calibrate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='noma-sim',
        description='Clustered NOMA uplink random access with a policy-gradient base station agent',
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    subparsers = parser.add_subparsers(dest='command', required=True)

    for name in COMMANDS:
        sub = subparsers.add_parser(name, help=COMMANDS[name].__doc__.splitlines()[0])
        sub.add_argument('--config', type=Path, help='YAML experiment configuration')
        sub.add_argument('--out', help='output CSV path')
        sub.add_argument('--seed', type=int, help='master seed (unsigned 64-bit)')
        sub.add_argument('--frames', type=int, help='frames per run')
        sub.add_argument('--workers', type=int, default=1, help='worker processes (NOMA_SIM_WORKERS overrides)')
        sub.add_argument('--verbose', action='store_true', help='debug logging')
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    configure_logging(level='DEBUG' if args.verbose else None)

    try:
        spec = load_spec(args.config, cli_overrides(seed=args.seed, frames=args.frames, out=args.out))
        result = COMMANDS[args.command](spec, resolve_workers(args.workers))
    except NomaSimError as e:
        logger.error("Command failed", command=args.command, error=str(e), exit_code=e.exit_code)
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code

    print(result.get('csv') or result.get('yaml'))
    return 0


if __name__ == '__main__':
    sys.exit(main())
