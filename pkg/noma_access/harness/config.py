"""
NOMA Access Sim - Experiment Configuration
YAML experiment specs: defaults < file < CLI flags, validated against a JSON schema
"""

import copy
import hashlib
import json
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import structlog
import yaml
from jsonschema import Draft7Validator

from noma_access.access.simulator import AgentConfig, DetectionMode, Scheme, SimConfig
from noma_access.agent.policy_gradient import RewardKind
from noma_access.benchmark.oracle import BenchmarkGrid, access_grid
from noma_access.errors import ConfigError
from noma_access.metrics.performance import EnergyParams
from noma_access.phy.channel import ClusterGeometry, PhyConfig
from noma_access.phy.detection_table import TableOverflow
from noma_access.rng import STREAM_REPLICATION, derive_seed

logger = structlog.get_logger(__name__)

NETWORK_PRESETS = {
    '4;8+8': (4, [8, 8]),
    '8;16+16': (8, [16, 16]),
    '16;32+32': (16, [32, 32]),
}

DEFAULT_CONFIG: Dict[str, Any] = {
    'network': {
        'preset': None,
        'slot_count': 4,
        'devices_per_cluster': [8, 8],
        'center_distances': [450.0, 900.0],
        'radius': 25.0,
    },
    'phy': {
        'tx_power': 200.0,
        'sinr_threshold_db': 10.0,
        'shadow_std_db': 8.0,
        'receiver_sensitivity_dbm': -104.0,
        'noise_psd_dbm_hz': -174.0,
        'bandwidth_hz': 180000.0,
        'antenna_count': 1,
        'bs_height': 30.0,
        'shadow_coherence': 'per_transmission',
    },
    'access': {
        'scheme': 'A',
        'detection_mode': 'physical',
        'table_overflow': 'error',
        'lambda_values': [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
    },
    'agent': {
        'reward': 'R1',
        'update_interval': 1,
        'sigma': 0.1,
        'epsilon': 0.5,
        'alpha_theta': 0.001,
        'alpha_phi': 0.01,
        'alpha_omega': 0.001,
        'candidate_seeds': 10,
        'learning': True,
        'warm_start': None,
    },
    'metrics': {
        'warmup_fraction': 0.5,
        'convergence_window': 10000,
        'energy': {
            'slot_duration': 0.020,
            'packet_size': 128,
            'ack_size': 16,
            'data_rate': 60000.0,
            'tx_power': 0.200,
            'rx_current': 0.035,
            'idle_current': 2.7e-6,
            'voltage': 3.7,
        },
    },
    'benchmark': {
        'grid_step': 0.05,
        'eval_frames': 20000,
        'max_grid_points': 10000,
        'clairvoyant_seeds': False,
        'schemes': ['A', 'B'],
    },
    'experiment': {
        'frames': 200000,
        'master_seed': 0,
        'replications': 1,
        'lambda_switch_frame': None,
        'lambda_after': None,
        'phy_table': {'n_max': 3, 'samples': 100000},
        'calibration': {'samples': 100000, 'target': 0.837},
    },
    'output': {
        'path': 'results/results.csv',
        'snapshot': None,
        'plot': True,
    },
}

_NUMBER = {'type': 'number'}
_POSITIVE = {'type': 'number', 'exclusiveMinimum': 0}
_POSITIVE_INT = {'type': 'integer', 'minimum': 1}
_PROBABILITY = {'type': 'number', 'minimum': 0, 'maximum': 1}


def _section(properties: Dict[str, Any]) -> Dict[str, Any]:
    return {'type': 'object', 'properties': properties, 'additionalProperties': False}


CONFIG_SCHEMA: Dict[str, Any] = _section({
    'network': _section({
        'preset': {'type': ['string', 'null']},
        'slot_count': _POSITIVE_INT,
        'devices_per_cluster': {'type': 'array', 'items': _POSITIVE_INT, 'minItems': 1},
        'center_distances': {'type': 'array', 'items': _POSITIVE, 'minItems': 1},
        'radius': {'type': 'number', 'minimum': 0},
    }),
    'phy': _section({
        'tx_power': _POSITIVE,
        'sinr_threshold_db': _NUMBER,
        'shadow_std_db': {'type': 'number', 'minimum': 0},
        'receiver_sensitivity_dbm': {'type': ['number', 'null']},
        'noise_psd_dbm_hz': _NUMBER,
        'bandwidth_hz': _POSITIVE,
        'antenna_count': _POSITIVE_INT,
        'bs_height': {'type': 'number', 'minimum': 0},
        'shadow_coherence': {'enum': ['per_transmission', 'per_device']},
    }),
    'access': _section({
        'scheme': {'enum': [scheme.value for scheme in Scheme]},
        'detection_mode': {'enum': [mode.value for mode in DetectionMode]},
        'table_overflow': {'enum': [policy.value for policy in TableOverflow]},
        'lambda_values': {'type': 'array', 'items': _PROBABILITY, 'minItems': 1},
    }),
    'agent': _section({
        'reward': {'enum': [kind.value for kind in RewardKind]},
        'update_interval': _POSITIVE_INT,
        'sigma': _POSITIVE,
        'epsilon': _PROBABILITY,
        'alpha_theta': _POSITIVE,
        'alpha_phi': _POSITIVE,
        'alpha_omega': _POSITIVE,
        'candidate_seeds': _POSITIVE_INT,
        'learning': {'type': 'boolean'},
        'warm_start': {'type': ['string', 'null']},
    }),
    'metrics': _section({
        'warmup_fraction': {'type': 'number', 'minimum': 0, 'exclusiveMaximum': 1},
        'convergence_window': _POSITIVE_INT,
        'energy': _section({
            'slot_duration': _POSITIVE,
            'packet_size': _POSITIVE_INT,
            'ack_size': _POSITIVE_INT,
            'data_rate': _POSITIVE,
            'tx_power': _POSITIVE,
            'rx_current': _POSITIVE,
            'idle_current': {'type': 'number', 'minimum': 0},
            'voltage': _POSITIVE,
        }),
    }),
    'benchmark': _section({
        'grid_step': {'type': 'number', 'exclusiveMinimum': 0, 'maximum': 0.9},
        'eval_frames': _POSITIVE_INT,
        'max_grid_points': _POSITIVE_INT,
        'clairvoyant_seeds': {'type': 'boolean'},
        'schemes': {'type': 'array', 'items': {'enum': ['A', 'B']}, 'minItems': 1},
    }),
    'experiment': _section({
        'frames': {'type': 'integer', 'minimum': 0},
        'master_seed': {'type': 'integer', 'minimum': 0, 'maximum': 2 ** 64 - 1},
        'replications': _POSITIVE_INT,
        'lambda_switch_frame': {'type': ['integer', 'null'], 'minimum': 0},
        'lambda_after': {'anyOf': [_PROBABILITY, {'type': 'null'}]},
        'phy_table': _section({
            'n_max': {'type': 'integer', 'minimum': 0, 'maximum': 3},
            'samples': {'type': 'integer', 'minimum': 10000},
        }),
        'calibration': _section({
            'samples': _POSITIVE_INT,
            'target': {'type': 'number', 'exclusiveMinimum': 0, 'exclusiveMaximum': 1},
        }),
    }),
    'output': _section({
        'path': {'type': 'string', 'minLength': 1},
        'snapshot': {'type': ['string', 'null']},
        'plot': {'type': 'boolean'},
    }),
})


def _dotted(path) -> str:
    dotted = ''
    for part in path:
        if isinstance(part, int):
            dotted += f'[{part}]'
        else:
            dotted += f'.{part}' if dotted else str(part)
    return dotted or '<root>'


def validate_config(config: Dict[str, Any]) -> None:
    """Raise ConfigError naming the first schema violation"""

    errors = sorted(Draft7Validator(CONFIG_SCHEMA).iter_errors(config), key=lambda e: list(map(str, e.path)))
    if errors:
        error = errors[0]
        raise ConfigError(_dotted(error.path), error.message)


def deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def parse_preset(preset: str) -> Tuple[int, List[int]]:
    """'L;N1+N2' into slot count and devices per cluster"""

    if preset in NETWORK_PRESETS:
        slot_count, devices = NETWORK_PRESETS[preset]
        return slot_count, list(devices)
    match = re.fullmatch(r'\{?\s*(\d+)\s*;\s*(\d+(?:\s*\+\s*\d+)*)\s*\}?', preset)
    if not match:
        raise ConfigError('network.preset', f"expected 'L;N1+N2', got {preset!r}")
    return int(match.group(1)), [int(n) for n in match.group(2).split('+')]


def read_yaml(path: Union[str, Path]) -> Dict[str, Any]:
    path = Path(path)
    if not path.exists():
        raise ConfigError('--config', f"file not found: {path}")
    try:
        with open(path) as handle:
            loaded = yaml.safe_load(handle)
    except yaml.YAMLError as e:
        raise ConfigError('--config', f"invalid YAML in {path}: {e}") from e
    if loaded is None:
        return {}
    if not isinstance(loaded, dict):
        raise ConfigError('<root>', "configuration must be a mapping of sections")
    return loaded


@dataclass(frozen=True)
class ExperimentSpec:
    """Validated experiment description; everything a command needs"""

    slot_count: int
    clusters: Tuple[ClusterGeometry, ...]
    phy: PhyConfig
    energy: EnergyParams
    agent: AgentConfig
    scheme: Scheme
    reward_kind: RewardKind
    detection_mode: DetectionMode
    table_overflow: TableOverflow
    lambda_values: Tuple[float, ...]
    update_interval: int
    candidate_count: int
    frames: int
    master_seed: int
    replications: int
    warmup_fraction: float
    convergence_window: int
    lambda_switch_frame: Optional[int]
    lambda_after: Optional[float]
    benchmark_grid: BenchmarkGrid
    benchmark_schemes: Tuple[str, ...]
    clairvoyant_seeds: bool
    phy_table_n_max: int
    phy_table_samples: int
    calibration_samples: int
    calibration_target: float
    output_path: Path
    snapshot_path: Optional[Path]
    plot: bool
    spec_sha256: str

    @property
    def network_label(self) -> str:
        return f"{self.slot_count};" + '+'.join(str(c.device_count) for c in self.clusters)

    def replication_seeds(self) -> List[int]:
        """Master seed of every replication, derived from the configured seed"""
        return [derive_seed(self.master_seed, STREAM_REPLICATION, rep) for rep in range(self.replications)]

    def sim_config(self, arrival_prob: float, master_seed: Optional[int] = None, **overrides) -> SimConfig:
        config = SimConfig(
            slot_count=self.slot_count,
            clusters=self.clusters,
            arrival_prob=arrival_prob,
            scheme=self.scheme,
            reward_kind=self.reward_kind,
            update_interval=self.update_interval,
            frames=self.frames,
            master_seed=self.master_seed if master_seed is None else master_seed,
            detection_mode=self.detection_mode,
            table_overflow=self.table_overflow,
            phy=self.phy,
            energy=self.energy,
            agent=self.agent,
            candidate_count=self.candidate_count,
            warmup_fraction=self.warmup_fraction,
            lambda_switch_frame=self.lambda_switch_frame,
            lambda_after=self.lambda_after,
        )
        return replace(config, **overrides) if overrides else config


def config_sha256(config: Dict[str, Any]) -> str:
    return hashlib.sha256(json.dumps(config, sort_keys=True).encode()).hexdigest()


def build_spec(config: Dict[str, Any]) -> ExperimentSpec:
    """Turn a merged, schema-valid configuration dict into an ExperimentSpec"""

    network = config['network']
    slot_count = network['slot_count']
    devices = list(network['devices_per_cluster'])
    if network.get('preset'):
        slot_count, devices = parse_preset(network['preset'])

    distances = network['center_distances']
    if len(distances) < len(devices):
        raise ConfigError(
            'network.center_distances', f"{len(devices)} clusters need {len(devices)} distances, got {len(distances)}"
        )

    try:
        clusters = tuple(
            ClusterGeometry(center_distance=float(distances[c]), device_count=count, radius=float(network['radius']))
            for c, count in enumerate(devices)
        )
    except ValueError as e:
        raise ConfigError('network', str(e)) from e

    try:
        phy = PhyConfig(**config['phy'])
    except ValueError as e:
        raise ConfigError('phy', str(e)) from e

    try:
        energy = EnergyParams(**config['metrics']['energy'])
    except ValueError as e:
        raise ConfigError('metrics.energy', str(e)) from e

    agent_section = config['agent']
    agent = AgentConfig(
        sigma=agent_section['sigma'],
        epsilon=agent_section['epsilon'],
        alpha_theta=agent_section['alpha_theta'],
        alpha_phi=agent_section['alpha_phi'],
        alpha_omega=agent_section['alpha_omega'],
        learning=agent_section['learning'],
        warm_start=agent_section['warm_start'],
    )

    bench = config['benchmark']
    experiment = config['experiment']
    if (experiment['lambda_switch_frame'] is None) != (experiment['lambda_after'] is None):
        raise ConfigError('experiment.lambda_after', "lambda_switch_frame and lambda_after go together")

    output = config['output']
    spec = ExperimentSpec(
        slot_count=slot_count,
        clusters=clusters,
        phy=phy,
        energy=energy,
        agent=agent,
        scheme=Scheme(config['access']['scheme']),
        reward_kind=RewardKind(agent_section['reward']),
        detection_mode=DetectionMode(config['access']['detection_mode']),
        table_overflow=TableOverflow(config['access']['table_overflow']),
        lambda_values=tuple(float(v) for v in config['access']['lambda_values']),
        update_interval=agent_section['update_interval'],
        candidate_count=agent_section['candidate_seeds'],
        frames=experiment['frames'],
        master_seed=experiment['master_seed'],
        replications=experiment['replications'],
        warmup_fraction=config['metrics']['warmup_fraction'],
        convergence_window=config['metrics']['convergence_window'],
        lambda_switch_frame=experiment['lambda_switch_frame'],
        lambda_after=experiment['lambda_after'],
        benchmark_grid=BenchmarkGrid(
            access_prob_values=access_grid(bench['grid_step']),
            eval_frames=bench['eval_frames'],
            max_grid_points=bench['max_grid_points'],
        ),
        benchmark_schemes=tuple(bench['schemes']),
        clairvoyant_seeds=bench['clairvoyant_seeds'],
        phy_table_n_max=experiment['phy_table']['n_max'],
        phy_table_samples=experiment['phy_table']['samples'],
        calibration_samples=experiment['calibration']['samples'],
        calibration_target=experiment['calibration']['target'],
        output_path=Path(output['path']),
        snapshot_path=Path(output['snapshot']) if output['snapshot'] else None,
        plot=output['plot'],
        spec_sha256=config_sha256(config),
    )

    # Cross-field checks live on SimConfig; build the config of the first lambda
    spec.sim_config(spec.lambda_values[0])
    return spec


def load_spec(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> ExperimentSpec:
    """defaults < YAML file < overrides (already nested by section)"""

    config = copy.deepcopy(DEFAULT_CONFIG)
    if path is not None:
        config = deep_merge(config, read_yaml(path))
    if overrides:
        config = deep_merge(config, overrides)

    validate_config(config)
    spec = build_spec(config)
    logger.debug("Experiment spec loaded", path=str(path) if path else None, spec_sha256=spec.spec_sha256)
    return spec


def cli_overrides(
    seed: Optional[int] = None,
    frames: Optional[int] = None,
    out: Optional[str] = None,
) -> Dict[str, Any]:
    """Nest the CLI flags into config sections"""

    overrides: Dict[str, Any] = {}
    if seed is not None:
        overrides.setdefault('experiment', {})['master_seed'] = seed
    if frames is not None:
        overrides.setdefault('experiment', {})['frames'] = frames
    if out is not None:
        overrides.setdefault('output', {})['path'] = out
    return overrides
