"""
NOMA Access Sim - Fairness Demo Scenario
Throughput-greedy reward against the Jain-weighted reward on the same network
"""

from datetime import datetime, timezone
from typing import Any, Dict

import structlog

from noma_access.access.simulator import run_experiment
from noma_access.agent.policy_gradient import RewardKind
from noma_access.harness.cli import make_run_id
from noma_access.harness.config import load_spec
from noma_access.logging_config import configure_logging

logger = structlog.get_logger(__name__)


class FairnessScenario:
    """R1 vs R2 under full load, where the far cluster starves first"""

    def __init__(self, frames: int = 400_000, arrival_prob: float = 1.0, master_seed: int = 7):
        self.arrival_prob = arrival_prob
        self.spec = load_spec(overrides={
            'network': {'preset': '4;8+8'},
            'experiment': {'frames': frames, 'master_seed': master_seed},
        })
        self.correlation_id = make_run_id('fairness-demo', self.spec)

    def run_scenario(self) -> Dict[str, Any]:
        logger.info("Starting fairness scenario", correlation_id=self.correlation_id)

        scenario_result: Dict[str, Any] = {
            'scenario': 'fairness',
            'correlation_id': self.correlation_id,
            'network': self.spec.network_label,
            'timestamp': datetime.now(timezone.utc).isoformat(),
            'steps': [],
            'status': 'success',
        }

        try:
            reports = {}
            for kind in (RewardKind.R1, RewardKind.R2):
                step = self.train(kind)
                scenario_result['steps'].append(step)
                reports[kind.value] = step['details']
            scenario_result['steps'].append(self.compare(reports))
            logger.info("Fairness scenario completed", correlation_id=self.correlation_id)
        except Exception as e:
            logger.error("Fairness scenario failed", correlation_id=self.correlation_id, error=str(e))
            scenario_result['status'] = 'failed'
            scenario_result['error'] = str(e)

        return scenario_result

    def train(self, kind: RewardKind) -> Dict[str, Any]:
        config = self.spec.sim_config(self.arrival_prob, reward_kind=kind)
        report = run_experiment(config, run_id=f"{self.correlation_id}-{kind.value}").report
        return {
            'step': f'train_{kind.value}',
            'status': 'success',
            'details': {
                'gamma_s': report.gamma_s,
                'gammas': report.gammas,
                'jain_hat': report.jain_hat,
                'mean_access_probs': report.mean_access_probs,
            },
        }

    @staticmethod
    def compare(reports: Dict[str, Dict[str, Any]]) -> Dict[str, Any]:
        r1, r2 = reports['R1'], reports['R2']
        return {
            'step': 'compare',
            'status': 'success' if r2['jain_hat'] >= r1['jain_hat'] else 'degraded',
            'details': {
                'jain_gain': r2['jain_hat'] - r1['jain_hat'],
                'throughput_cost': r1['gamma_s'] - r2['gamma_s'],
            },
        }


def main():
    configure_logging()
    print("NOMA Access Sim - Fairness Demo Scenario")
    print("=" * 60)

    result = FairnessScenario().run_scenario()
    print(f"\nStatus: {result['status']}")
    for step in result['steps']:
        print(f"  {step['step']}: {step['status']} {step['details']}")
    if result['status'] == 'failed':
        print(f"\nScenario failed: {result.get('error', 'Unknown error')}")


if __name__ == "__main__":
    main()
