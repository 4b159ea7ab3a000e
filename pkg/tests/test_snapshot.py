"""
Tests for policy snapshots used by warm starts
"""

import numpy as np
import pytest

from noma_access.access.slot_hash import HashSeed
from noma_access.agent.policy_gradient import PolicyState
from noma_access.agent.snapshot import load_snapshot, save_snapshot, snapshot_frame
from noma_access.errors import PolicyError

SEEDS = {0: [HashSeed(3), HashSeed(2 ** 64 - 1)]}


@pytest.fixture
def trained():
    policy = PolicyState.cold_start(2, 4, SEEDS)
    policy.theta[:] = np.arange(8, dtype=float).reshape(2, 4) / 7.0
    policy.phi[0][:] = np.linspace(-1.0, 1.0, 8).reshape(4, 2)
    policy.omega[:] = [0.1, 0.2, 1.0 / 3.0, -2.5]
    return policy


def test_frame_layout(trained):
    frame = snapshot_frame(trained)
    assert list(frame.columns) == ['state', 'omega', 'theta_1', 'theta_2', 'phi_1_0', 'phi_1_1']
    assert len(frame) == 4


def test_warm_start_restores_parameters_exactly(tmp_path, trained):
    path = save_snapshot(trained, tmp_path / 'policy.csv')
    fresh = load_snapshot(path, PolicyState.cold_start(2, 4, SEEDS))
    assert np.array_equal(fresh.theta, trained.theta)
    assert np.array_equal(fresh.omega, trained.omega)
    assert np.array_equal(fresh.phi[0], trained.phi[0])


def test_seed_set_mismatch_rejected(tmp_path, trained):
    path = save_snapshot(trained, tmp_path / 'policy.csv')
    other = PolicyState.cold_start(2, 4, {0: [HashSeed(3), HashSeed(4)]})
    with pytest.raises(PolicyError, match='candidate seeds'):
        load_snapshot(path, other)


def test_state_count_mismatch_rejected(tmp_path, trained):
    path = save_snapshot(trained, tmp_path / 'policy.csv')
    with pytest.raises(PolicyError, match='states'):
        load_snapshot(path, PolicyState.cold_start(2, 5, SEEDS))


def test_missing_file(tmp_path):
    with pytest.raises(PolicyError, match='not found'):
        load_snapshot(tmp_path / 'absent.csv', PolicyState.cold_start(1, 2))


def test_non_finite_values_rejected(tmp_path, trained):
    trained.omega[1] = np.inf
    path = save_snapshot(trained, tmp_path / 'policy.csv')
    with pytest.raises(PolicyError, match='non-finite'):
        load_snapshot(path, PolicyState.cold_start(2, 4, SEEDS))
