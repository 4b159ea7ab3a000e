"""
NOMA Access Sim - Worker Pool
Ordered fan-out of independent runs over processes
"""

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

import structlog

logger = structlog.get_logger(__name__)

T = TypeVar('T')
R = TypeVar('R')


def resolve_workers(requested: Optional[int] = None) -> int:
    """NOMA_SIM_WORKERS wins over the flag; default 1"""

    env_value = os.environ.get('NOMA_SIM_WORKERS')
    if env_value:
        try:
            return max(1, int(env_value))
        except ValueError:
            logger.warning("Ignoring non-integer NOMA_SIM_WORKERS", value=env_value)
    return max(1, requested or 1)


def map_ordered(fn: Callable[[T], R], items: Sequence[T], workers: int = 1) -> List[R]:
    """fn over items; results come back in input order whatever the completion order"""

    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]

    logger.debug("Dispatching to worker pool", workers=workers, tasks=len(items))
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as executor:
        return list(executor.map(fn, items))
