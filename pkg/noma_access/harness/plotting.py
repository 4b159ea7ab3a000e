"""
NOMA Access Sim - Plots
Line charts of throughput against load and against time, written as SVG
"""

from pathlib import Path
from typing import Dict, Optional, Sequence, Union

import matplotlib

matplotlib.use('Agg')

import matplotlib.pyplot as plt  # noqa: E402
import structlog  # noqa: E402

logger = structlog.get_logger(__name__)

# Stable element ids and no timestamp, so identical data renders identical bytes
matplotlib.rcParams['svg.hashsalt'] = 'noma-access'
SVG_METADATA = {'Date': None}


def _save(figure, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    figure.tight_layout()
    figure.savefig(path, format='svg', metadata=SVG_METADATA)
    plt.close(figure)
    logger.info("Plot written", path=str(path))
    return path


def plot_throughput_vs_lambda(
    lambdas: Sequence[float],
    series: Dict[str, Sequence[float]],
    path: Union[str, Path],
    title: str = 'Throughput vs arrival probability',
) -> Path:
    """One line per named series (system and per-cluster throughput)"""

    figure, axes = plt.subplots(figsize=(6, 3.5))
    for label, values in series.items():
        axes.plot(lambdas, values, marker='o', label=label)
    axes.set_xlabel('Arrival probability')
    axes.set_ylabel('Packets per frame')
    axes.set_title(title)
    axes.grid(True, alpha=0.3)
    axes.legend()
    return _save(figure, path)


def plot_convergence(
    frames: Sequence[int],
    throughput: Sequence[float],
    path: Union[str, Path],
    reference: Optional[Dict[str, float]] = None,
    title: str = 'Windowed system throughput',
) -> Path:
    figure, axes = plt.subplots(figsize=(6, 3.5))
    axes.plot(frames, throughput, label='agent')
    for label, value in (reference or {}).items():
        axes.axhline(value, linestyle='--', linewidth=1, label=label)
    axes.set_xlabel('Frame')
    axes.set_ylabel('Packets per frame')
    axes.set_title(title)
    axes.grid(True, alpha=0.3)
    axes.legend()
    return _save(figure, path)
