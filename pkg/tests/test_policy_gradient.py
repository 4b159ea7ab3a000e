"""
Tests for the actor-critic agent
"""

import math

import numpy as np
import pytest

from noma_access.access.slot_hash import HashSeed
from noma_access.agent.policy_gradient import (
    ACCESS_HIGH,
    ACCESS_LOW,
    ActionBundle,
    PolicyGradientAgent,
    PolicyState,
    RewardKind,
    access_log_density,
    access_logit,
    access_score,
    agent_step,
    jain_index,
    reward,
    sample_access_prob,
    sample_actions,
    sample_seed,
    seed_log_prob,
    seed_probabilities,
    seed_score,
    td_error,
    transform_access,
)
from noma_access.errors import PolicyError

SEEDS = {0: [HashSeed(11), HashSeed(22)]}


def traced_policy():
    """Two clusters, three states, two candidate seeds on cluster 1, non-trivial parameters"""

    policy = PolicyState.cold_start(
        2, 3, SEEDS, sigma=0.2, epsilon=0.5, alpha_theta=0.01, alpha_phi=0.05, alpha_omega=0.02,
    )
    policy.theta[:] = [[0.3, -0.1, 0.2], [-0.4, 0.5, 0.0]]
    policy.phi[0][:] = [[0.1, -0.2], [0.0, 0.4], [0.3, 0.3]]
    policy.omega[:] = [0.7, 1.1, -0.3]
    return policy


class TestAccessTransform:
    def test_values(self):
        assert transform_access(1.0) == pytest.approx(0.55)
        assert transform_access(0.0) == ACCESS_LOW
        assert transform_access(math.inf) == ACCESS_HIGH

    def test_logit_inverts_transform(self):
        for a in (0.2, 0.55, 0.9):
            assert transform_access(math.exp(access_logit(a))) == pytest.approx(a, rel=1e-12)

    def test_logit_rejects_boundary(self):
        with pytest.raises(PolicyError):
            access_logit(0.1)
        with pytest.raises(PolicyError):
            access_logit(1.0)

    def test_samples_stay_in_open_interval(self, rng):
        policy = PolicyState.cold_start(1, 1)
        for mean in (-800.0, 0.0, 800.0):
            policy.theta[0, 0] = mean
            a = sample_access_prob(policy, 0, 0, rng)
            assert 0.1 < a < 1.0

    def test_cold_start_median(self, rng):
        policy = PolicyState.cold_start(1, 1)
        samples = [sample_access_prob(policy, 0, 0, rng) for _ in range(100_000)]
        assert np.median(samples) == pytest.approx(0.55, abs=0.005)


class TestScores:
    def test_access_score_matches_finite_differences(self):
        rng = np.random.default_rng(1)
        h = 1e-6
        for _ in range(10):
            a = rng.uniform(0.15, 0.95)
            mean = rng.normal()
            sigma = rng.uniform(0.05, 0.5)
            numeric = (access_log_density(a, mean + h, sigma) - access_log_density(a, mean - h, sigma)) / (2 * h)
            assert access_score(a, mean, sigma) == pytest.approx(numeric, rel=1e-5, abs=1e-9)

    def test_seed_score_matches_finite_differences(self):
        rng = np.random.default_rng(2)
        h = 1e-6
        for _ in range(10):
            preferences = rng.normal(size=4)
            j = int(rng.integers(4))
            analytic = seed_score(preferences, j)
            for k in range(4):
                step = np.zeros(4)
                step[k] = h
                numeric = (seed_log_prob(preferences + step, j) - seed_log_prob(preferences - step, j)) / (2 * h)
                assert analytic[k] == pytest.approx(numeric, rel=1e-5, abs=1e-9)

    def test_seed_probabilities_sum_to_one(self):
        policy = traced_policy()
        assert seed_probabilities(policy, 0, 1).sum() == pytest.approx(1.0)

    def test_sample_seed_follows_softmax(self):
        policy = traced_policy()
        policy.phi[0][1] = np.array([math.log(3.0), 0.0])
        rng = np.random.default_rng(5)
        draws = [sample_seed(policy, 0, 1, rng) for _ in range(4000)]
        assert set(draws) <= {0, 1}
        assert np.mean(np.array(draws) == 0) == pytest.approx(0.75, abs=0.03)

    def test_sample_seed_rejects_cb_cluster(self):
        with pytest.raises(PolicyError):
            sample_seed(traced_policy(), 1, 0, np.random.default_rng(0))


class TestRewards:
    def test_r1_is_the_total(self):
        assert reward(RewardKind.R1, [3, 1]) == 4.0

    def test_r2_weights_by_jain(self):
        assert reward(RewardKind.R2, [2, 2]) == 4.0
        assert reward(RewardKind.R2, [4, 0]) == 2.0
        assert reward(RewardKind.R2, [0, 0]) == 0.0

    def test_jain_of_zeros(self):
        assert jain_index([0, 0]) == 0.0

    def test_negative_counts_rejected(self):
        with pytest.raises(PolicyError):
            reward(RewardKind.R1, [1, -1])


class TestAgentStep:
    def test_hand_traced_step(self, rng):
        policy = traced_policy()
        prev = ActionBundle(access_probs=(0.5, 0.3), seed_indices={0: 1}, seeds={0: SEEDS[0][1]})
        s, successes = 0, [1, 1]

        # Independent evaluation of the update chain
        s_next = 2
        r = 2.0
        delta = r + 0.5 * (-0.3) - 0.7
        theta = [
            0.3 + 0.01 * delta * (math.log(0.4 / 0.5) - 0.3) / 0.04,
            -0.4 + 0.01 * delta * (math.log(0.2 / 0.7) + 0.4) / 0.04,
        ]
        z = math.exp(0.1) + math.exp(-0.2)
        tau = [math.exp(0.1) / z, math.exp(-0.2) / z]
        phi = [0.1 + 0.05 * delta * (0 - tau[0]), -0.2 + 0.05 * delta * (1 - tau[1])]
        omega = 0.7 + 0.02 * delta

        record = agent_step(policy, s, prev, successes, rng)

        assert record.state == s_next
        assert record.reward == r
        assert record.delta == pytest.approx(delta, rel=1e-12)
        assert policy.theta[0, 0] == pytest.approx(theta[0], rel=1e-12)
        assert policy.theta[1, 0] == pytest.approx(theta[1], rel=1e-12)
        assert policy.phi[0][0, 0] == pytest.approx(phi[0], rel=1e-12)
        assert policy.phi[0][0, 1] == pytest.approx(phi[1], rel=1e-12)
        assert policy.omega[0] == pytest.approx(omega, rel=1e-12)
        # Other states untouched
        assert policy.omega[1:].tolist() == [1.1, -0.3]
        assert policy.theta[:, 1:].tolist() == [[-0.1, 0.2], [0.5, 0.0]]

    def test_td_error(self):
        policy = traced_policy()
        assert td_error(policy, 1, 0, 2.0) == pytest.approx(2.0 + 0.5 * 0.7 - 1.1)

    def test_state_out_of_range(self):
        with pytest.raises(PolicyError):
            td_error(traced_policy(), 0, 3, 1.0)

    def test_interval_reward_and_last_frame_state(self, rng):
        policy = traced_policy()
        prev = ActionBundle(access_probs=(0.5, 0.5), seed_indices={0: 0}, seeds={0: SEEDS[0][0]})
        record = agent_step(policy, 0, prev, [3, 2], rng, last_frame_successes=[1, 0])
        assert record.reward == 5.0
        assert record.state == 1

    def test_frozen_policy_does_not_move(self, rng):
        policy = traced_policy()
        before = policy.copy()
        prev = ActionBundle(access_probs=(0.5, 0.3), seed_indices={0: 1}, seeds={0: SEEDS[0][1]})
        agent_step(policy, 0, prev, [1, 1], rng, learning=False)
        assert np.array_equal(policy.theta, before.theta)
        assert np.array_equal(policy.omega, before.omega)
        assert np.array_equal(policy.phi[0], before.phi[0])

    def test_actions_respect_ranges(self, rng):
        actions = sample_actions(traced_policy(), 2, rng)
        assert all(0.1 < a < 1.0 for a in actions.access_probs)
        assert actions.seed_indices[0] in (0, 1)
        assert actions.seeds[0] == SEEDS[0][actions.seed_indices[0]]


class TestAgent:
    def test_steps_advance_state(self, rng):
        agent = PolicyGradientAgent(PolicyState.cold_start(2, 5, SEEDS), rng)
        assert agent.state == 0
        agent.step([2, 1])
        assert agent.state == 3
        assert agent.steps == 1
        assert agent.policy.is_finite()

    def test_hyper_parameter_validation(self):
        with pytest.raises(PolicyError):
            PolicyState.cold_start(1, 2, sigma=0.0)
        with pytest.raises(PolicyError):
            PolicyState.cold_start(1, 2, epsilon=1.5)

    def test_action_bundle_range(self):
        with pytest.raises(PolicyError):
            ActionBundle(access_probs=(0.05,))
