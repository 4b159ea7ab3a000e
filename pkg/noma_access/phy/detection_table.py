"""
NOMA Access Sim - Detection Table
Published per-cluster success marginals for up to three transmissions per cluster
"""

from enum import Enum
from typing import Dict, Tuple

from noma_access.errors import TableModeOverflowError

TABLE_MAX_PER_CLUSTER = 3


class TableOverflow(Enum):
    """What a lookup does with more than three transmissions from one cluster"""
    ERROR = 'error'
    SATURATE = 'saturate'  # read the three-transmission row, surplus packets fail

# (n1, n2) -> ((S0..S3 for C1), (S0..S3 for C2))
DETECTION_TABLE: Dict[Tuple[int, int], Tuple[Tuple[float, ...], Tuple[float, ...]]] = {
    (0, 0): ((1.0, 0.0, 0.0, 0.0), (1.0, 0.0, 0.0, 0.0)),
    (0, 1): ((1.0, 0.0, 0.0, 0.0), (0.567, 0.433, 0.0, 0.0)),
    (0, 2): ((1.0, 0.0, 0.0, 0.0), (0.477, 0.490, 0.033, 0.0)),
    (0, 3): ((1.0, 0.0, 0.0, 0.0), (0.521, 0.424, 0.055, 0.0)),
    (1, 0): ((0.163, 0.837, 0.0, 0.0), (1.0, 0.0, 0.0, 0.0)),
    (1, 1): ((0.401, 0.599, 0.0, 0.0), (0.804, 0.196, 0.0, 0.0)),
    (1, 2): ((0.564, 0.436, 0.0, 0.0), (0.766, 0.227, 0.007, 0.0)),
    (1, 3): ((0.675, 0.325, 0.0, 0.0), (0.788, 0.200, 0.012, 0.0)),
    (2, 0): ((0.606, 0.274, 0.120, 0.0), (1.0, 0.0, 0.0, 0.0)),
    (2, 1): ((0.677, 0.249, 0.074, 0.0), (0.941, 0.059, 0.0, 0.0)),
    (2, 2): ((0.734, 0.220, 0.046, 0.0), (0.929, 0.070, 0.001, 0.0)),
    (2, 3): ((0.780, 0.191, 0.029, 0.0), (0.935, 0.062, 0.003, 0.0)),
    (3, 0): ((0.741, 0.167, 0.079, 0.013), (1.0, 0.0, 0.0, 0.0)),
    (3, 1): ((0.779, 0.164, 0.049, 0.008), (0.984, 0.016, 0.0, 0.0)),
    (3, 2): ((0.810, 0.155, 0.031, 0.004), (0.980, 0.020, 0.0, 0.0)),
    (3, 3): ((0.836, 0.143, 0.019, 0.002), (0.981, 0.019, 0.0, 0.0)),
}


def table_row(n1: int, n2: int) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
    """Marginals for one slot; raises outside the published range"""

    row = DETECTION_TABLE.get((n1, n2))
    if row is None:
        raise TableModeOverflowError((n1, n2))
    return row


def table_counts(n1: int, n2: int, overflow: TableOverflow) -> Tuple[int, int]:
    """Per-cluster counts used for the lookup"""
    if overflow is TableOverflow.SATURATE:
        return min(n1, TABLE_MAX_PER_CLUSTER), min(n2, TABLE_MAX_PER_CLUSTER)
    return n1, n2


def draw_successes(marginals: Tuple[float, ...], u: float) -> int:
    """Inverse-CDF draw of a success count from one marginal"""

    cumulative = 0.0
    for successes, probability in enumerate(marginals):
        cumulative += probability
        if u < cumulative:
            return successes
    # Rounding leaves the top of [0, 1) uncovered; give it to the last non-zero entry
    for successes in range(len(marginals) - 1, -1, -1):
        if marginals[successes] > 0:
            return successes
    return 0


def table_draw(
    n1: int,
    n2: int,
    u1: float,
    u2: float,
    overflow: TableOverflow = TableOverflow.ERROR,
) -> Tuple[int, int]:
    """Per-cluster success counts, clusters drawn independently"""

    c1, c2 = table_row(*table_counts(n1, n2, overflow))
    return draw_successes(c1, u1), draw_successes(c2, u2)


def expected_successes(n1: int, n2: int, overflow: TableOverflow = TableOverflow.ERROR) -> Tuple[float, float]:
    """Mean successes per cluster for one slot"""

    c1, c2 = table_row(*table_counts(n1, n2, overflow))
    return (
        sum(u * p for u, p in enumerate(c1)),
        sum(u * p for u, p in enumerate(c2)),
    )
