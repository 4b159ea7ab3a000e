"""
NOMA Access Sim - Errors
Exception hierarchy shared by the simulator, the agent and the CLI
"""

from typing import Optional, Tuple


class NomaSimError(Exception):
    """Base class for all simulator errors"""

    exit_code = 1


class ConfigError(NomaSimError):
    """Invalid configuration; names the offending field"""

    exit_code = 2

    def __init__(self, field: str, message: str):
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}")


class CapacityError(NomaSimError):
    """A run exceeded a capacity the model can represent"""

    exit_code = 3


class TableModeOverflowError(CapacityError):
    """Slot concurrency outside the published detection table"""

    def __init__(self, counts: Tuple[int, ...]):
        self.counts = counts
        super().__init__(
            f"table mode covers at most 3 transmissions per cluster per slot, got {counts}; "
            f"use access.detection_mode: physical"
        )


class GridBudgetError(CapacityError):
    """Benchmark grid larger than the configured budget"""

    def __init__(self, required: int, budget: int):
        self.required = required
        self.budget = budget
        super().__init__(
            f"benchmark grid needs {required} evaluations, budget is {budget}; "
            f"raise benchmark.max_grid_points or coarsen the grid"
        )


class PolicyError(NomaSimError):
    """Corrupted action record or malformed policy snapshot"""


class MetricsError(NomaSimError):
    """Metric undefined for the accumulated data"""

    def __init__(self, message: str, metric: Optional[str] = None):
        self.metric = metric
        super().__init__(message)
