"""
NOMA Access Sim - Policy Snapshots
Flat CSV layout of a PolicyState for warm starts and convergence studies

One row per state index:
    state, omega, theta_1 .. theta_C, phi_<cluster>_<j> for every SCF cluster and seed j
Cluster numbers in column names are 1-based. Candidate seed values are stored
in the comment header so a snapshot cannot be applied to a different seed set.
"""

from pathlib import Path
from typing import Dict, List, Union

import pandas as pd
import structlog

from noma_access.agent.policy_gradient import PolicyState
from noma_access.errors import PolicyError

logger = structlog.get_logger(__name__)

PathLike = Union[str, Path]


def snapshot_frame(policy: PolicyState) -> pd.DataFrame:
    columns: Dict[str, List[float]] = {
        'state': list(range(policy.state_count)),
        'omega': policy.omega.tolist(),
    }
    for cluster in range(policy.cluster_count):
        columns[f'theta_{cluster + 1}'] = policy.theta[cluster].tolist()
    for cluster in policy.scf_clusters:
        matrix = policy.phi[cluster]
        for j in range(matrix.shape[1]):
            columns[f'phi_{cluster + 1}_{j}'] = matrix[:, j].tolist()
    return pd.DataFrame(columns)


def save_snapshot(policy: PolicyState, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    seed_header = ';'.join(
        f"{cluster + 1}:" + ','.join(str(seed.value) for seed in policy.seed_candidates.get(cluster, []))
        for cluster in policy.scf_clusters
    )
    with open(path, 'w', newline='') as handle:
        handle.write(f"# seeds={seed_header}\n")
        # repr-exact floats so a warm start resumes bit-for-bit
        snapshot_frame(policy).to_csv(handle, index=False, float_format='%.17g')

    logger.info("Policy snapshot saved", path=str(path), states=policy.state_count)
    return path


def _read_seed_header(path: Path) -> Dict[int, List[int]]:
    with open(path) as handle:
        first = handle.readline().strip()
    if not first.startswith('# seeds='):
        raise PolicyError(f"{path}: missing '# seeds=' header")
    body = first[len('# seeds='):]
    seeds: Dict[int, List[int]] = {}
    if body:
        for part in body.split(';'):
            cluster, values = part.split(':')
            seeds[int(cluster) - 1] = [int(v) for v in values.split(',') if v]
    return seeds


def load_snapshot(path: PathLike, policy: PolicyState) -> PolicyState:
    """Overwrite the parameters of a freshly built policy with a saved snapshot"""

    path = Path(path)
    if not path.exists():
        raise PolicyError(f"snapshot not found: {path}")

    frame = pd.read_csv(path, comment='#', float_precision='round_trip')
    if len(frame) != policy.state_count:
        raise PolicyError(f"{path}: snapshot has {len(frame)} states, policy expects {policy.state_count}")

    saved_seeds = _read_seed_header(path)
    for cluster in policy.scf_clusters:
        expected = [seed.value for seed in policy.seed_candidates.get(cluster, [])]
        if saved_seeds.get(cluster) != expected:
            raise PolicyError(f"{path}: candidate seeds of cluster {cluster + 1} differ from the configured ones")

    try:
        policy.omega[:] = frame['omega'].to_numpy(dtype=float)
        for cluster in range(policy.cluster_count):
            policy.theta[cluster, :] = frame[f'theta_{cluster + 1}'].to_numpy(dtype=float)
        for cluster in policy.scf_clusters:
            matrix = policy.phi[cluster]
            for j in range(matrix.shape[1]):
                matrix[:, j] = frame[f'phi_{cluster + 1}_{j}'].to_numpy(dtype=float)
    except KeyError as e:
        raise PolicyError(f"{path}: missing column {e}") from e

    if not policy.is_finite():
        raise PolicyError(f"{path}: snapshot contains non-finite parameters")

    logger.info("Policy snapshot loaded", path=str(path), states=policy.state_count)
    return policy
