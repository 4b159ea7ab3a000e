"""
NOMA Access Sim - Cold Start Demo Scenario
A freshly started agent on {4;8+8} learns its way above wide access control,
then re-adapts when the arrival probability jumps
"""

from datetime import datetime, timezone
from typing import Any, Dict

import structlog

from noma_access.access.simulator import Scheme, run_experiment
from noma_access.harness.cli import make_run_id
from noma_access.harness.config import load_spec
from noma_access.harness.runner import windowed
from noma_access.logging_config import configure_logging

logger = structlog.get_logger(__name__)


class ColdStartScenario:
    """Scheme B from cold start; lambda jumps at switch_frame"""

    def __init__(self, frames: int = 4_000_000, switch_frame: int = 2_000_000, window: int = 10_000,
                 master_seed: int = 2024, lambda_before: float = 0.2, lambda_after: float = 0.6):
        if not 0 < switch_frame < frames:
            raise ValueError(f"switch_frame must fall inside the run, got {switch_frame} of {frames}")
        self.frames = frames
        self.switch_frame = switch_frame
        self.window = window
        self.lambda_before = lambda_before
        self.lambda_after = lambda_after
        self.spec = load_spec(overrides={
            'network': {'preset': '4;8+8'},
            'access': {'scheme': 'B'},
            'experiment': {
                'frames': frames,
                'master_seed': master_seed,
                'lambda_switch_frame': switch_frame,
                'lambda_after': lambda_after,
            },
            'metrics': {'convergence_window': window},
        })
        self.correlation_id = make_run_id('cold-start-demo', self.spec)

    def run_scenario(self) -> Dict[str, Any]:
        logger.info("Starting cold start scenario", correlation_id=self.correlation_id)

        scenario_result: Dict[str, Any] = {
            'scenario': 'cold_start',
            'correlation_id': self.correlation_id,
            'network': self.spec.network_label,
            'timestamp': datetime.now(timezone.utc).isoformat(),
            'steps': [],
            'status': 'success',
        }

        try:
            for step in (self.train_agent, self.measure_reference, self.compare_phases):
                outcome = step(scenario_result)
                scenario_result['steps'].append(outcome)
                if outcome['status'] != 'success':
                    raise RuntimeError(f"{outcome['step']} failed: {outcome.get('error')}")
            logger.info("Cold start scenario completed", correlation_id=self.correlation_id)
        except Exception as e:
            logger.error("Cold start scenario failed", correlation_id=self.correlation_id, error=str(e))
            scenario_result['status'] = 'failed'
            scenario_result['error'] = str(e)

        return scenario_result

    def train_agent(self, scenario_result: Dict[str, Any]) -> Dict[str, Any]:
        config = self.spec.sim_config(self.lambda_before, trace=True, warmup_fraction=0.0)
        result = run_experiment(config, run_id=self.correlation_id)
        curve = windowed(result.trace, self.window)
        scenario_result['curve'] = curve.tolist()
        return {
            'step': 'train_agent',
            'status': 'success',
            'details': {'windows': len(curve), 'first_window': float(curve[0]), 'last_window': float(curve[-1])},
        }

    def measure_reference(self, scenario_result: Dict[str, Any]) -> Dict[str, Any]:
        levels = {}
        for arrival_prob in (self.lambda_before, self.lambda_after):
            config = self.spec.sim_config(
                arrival_prob, scheme=Scheme.WAC, frames=20 * self.window,
                lambda_switch_frame=None, lambda_after=None,
            )
            levels[arrival_prob] = run_experiment(config).report.gamma_s
        scenario_result['wac_levels'] = levels
        return {'step': 'measure_reference', 'status': 'success', 'details': {'wac_levels': levels}}

    def compare_phases(self, scenario_result: Dict[str, Any]) -> Dict[str, Any]:
        curve = scenario_result['curve']
        switch = max(1, min(len(curve) - 1, self.switch_frame // self.window))
        tail = max(1, min(switch, len(curve) - switch) // 5)
        before = sum(curve[switch - tail:switch]) / tail
        after = sum(curve[-tail:]) / tail
        levels = scenario_result['wac_levels']
        details = {
            'settled_before_switch': before,
            'settled_after_switch': after,
            'gain_before': before - levels[self.lambda_before],
            'gain_after': after - levels[self.lambda_after],
        }
        status = 'success' if details['gain_after'] >= 0 else 'degraded'
        return {'step': 'compare_phases', 'status': status, 'details': details}


def main():
    configure_logging()
    print("NOMA Access Sim - Cold Start Demo Scenario")
    print("=" * 60)

    scenario = ColdStartScenario()
    try:
        result = scenario.run_scenario()
        print(f"\nStatus: {result['status']}")
        print(f"Correlation ID: {result['correlation_id']}")
        for step in result['steps']:
            print(f"  {step['step']}: {step['status']} {step['details']}")
        if result['status'] != 'success':
            print(f"\nScenario failed: {result.get('error', 'Unknown error')}")
    except KeyboardInterrupt:
        print("\nDemo interrupted by user")


if __name__ == "__main__":
    main()
