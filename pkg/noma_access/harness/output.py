"""
NOMA Access Sim - Result Files
CSV emission with a reproducibility header
"""

from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import pandas as pd
import structlog

logger = structlog.get_logger(__name__)

FLOAT_FORMAT = '%.6g'

SIMULATE_COLUMNS = [
    'lambda', 'scheme', 'reward', 'gamma_s', 'gamma_1', 'gamma_2', 'jain_hat',
    'delay_1', 'delay_2', 'energy_1_mJ', 'energy_2_mJ', 'frames', 'master_seed',
]
BENCHMARK_COLUMNS = ['lambda', 'scheme', 'best_a1', 'best_a2', 'best_seed', 'throughput']
PHY_TABLE_COLUMNS = ['n1', 'n2', 'cluster', 'S0', 'S1', 'S2', 'S3']
CONVERGENCE_COLUMNS = ['frame', 'throughput', 'stderr', 'replications']


def metadata_line(spec_sha256: str, master_seeds: Iterable[int]) -> str:
    seeds = ','.join(str(seed) for seed in master_seeds)
    return f"# spec_sha256={spec_sha256} master_seeds={seeds}\n"


def ordered_columns(rows: Sequence[Dict[str, Any]], leading: Sequence[str]) -> List[str]:
    """Leading columns first (those present), then the rest in first-seen order"""

    seen: List[str] = []
    for row in rows:
        for key in row:
            if key not in seen:
                seen.append(key)
    head = [column for column in leading if column in seen]
    return head + [column for column in seen if column not in head]


def write_csv(
    rows: Sequence[Dict[str, Any]],
    path: Union[str, Path],
    spec_sha256: str,
    master_seeds: Iterable[int],
    leading: Optional[Sequence[str]] = None,
) -> Path:
    """One metadata comment line, a header and the rows; floats at 6 significant digits"""

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    columns = ordered_columns(rows, leading or [])
    frame = pd.DataFrame(list(rows), columns=columns)
    with open(path, 'w', newline='') as handle:
        handle.write(metadata_line(spec_sha256, master_seeds))
        frame.to_csv(handle, index=False, float_format=FLOAT_FORMAT, na_rep='', lineterminator='\n')

    logger.info("CSV written", path=str(path), rows=len(frame))
    return path


def read_csv(path: Union[str, Path]) -> pd.DataFrame:
    return pd.read_csv(path, comment='#')


def sibling(path: Union[str, Path], suffix: str, extension: Optional[str] = None) -> Path:
    """results.csv -> results_<suffix>.<ext>"""

    path = Path(path)
    return path.with_name(f"{path.stem}_{suffix}{extension or path.suffix}")
