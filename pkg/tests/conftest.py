"""
Shared fixtures for the NOMA access simulator tests
"""

import numpy as np
import pytest

from noma_access.access.simulator import DetectionMode, Scheme, SimConfig
from noma_access.phy.channel import ClusterGeometry, PhyConfig


@pytest.fixture
def phy():
    return PhyConfig()


@pytest.fixture
def geometries():
    return (ClusterGeometry(450.0, 8), ClusterGeometry(900.0, 8))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def small_network():
    """{4;8+8} in physical mode with short runs"""

    def build(**overrides):
        params = dict(
            slot_count=4,
            clusters=(ClusterGeometry(450.0, 8), ClusterGeometry(900.0, 8)),
            arrival_prob=0.5,
            scheme=Scheme.A,
            frames=400,
            master_seed=7,
        )
        params.update(overrides)
        return SimConfig(**params)

    return build


@pytest.fixture
def table_network():
    """Tiny always-backlogged table-mode cell"""

    def build(devices=(1,), slot_count=1, **overrides):
        params = dict(
            slot_count=slot_count,
            clusters=tuple(ClusterGeometry(450.0 * (c + 1), n) for c, n in enumerate(devices)),
            arrival_prob=1.0,
            scheme=Scheme.WAC,
            detection_mode=DetectionMode.TABLE,
            frames=1000,
            master_seed=3,
        )
        params.update(overrides)
        return SimConfig(**params)

    return build
