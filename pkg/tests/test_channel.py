"""
Tests for channel sampling and SIC detection
"""

import math

import numpy as np
import pytest

from noma_access.phy.channel import (
    ClusterGeometry,
    PhyConfig,
    TransmissionSignal,
    cluster_marginals,
    device_distance,
    outcome_distribution,
    path_loss_db,
    sample_received_power,
    sample_received_powers,
    sic_detect,
)


class TestGeometry:
    def test_distance_at_cluster_center(self):
        assert device_distance(ClusterGeometry(450.0, 1), (0.0, 0.0), 30.0) == pytest.approx(451.0, abs=0.01)

    def test_distance_without_height(self):
        assert device_distance(ClusterGeometry(900.0, 1), (0.0, 0.0), 0.0) == 900.0

    def test_offset_toward_base_station(self):
        distance = device_distance(ClusterGeometry(450.0, 1), (-25.0, 0.0), 30.0)
        assert distance == pytest.approx(math.sqrt(425.0 ** 2 + 30.0 ** 2))
        assert distance == pytest.approx(426.06, abs=0.01)

    def test_cluster_validation(self):
        with pytest.raises(ValueError):
            ClusterGeometry(20.0, 4, radius=25.0)
        with pytest.raises(ValueError):
            ClusterGeometry(450.0, 0)


class TestPathLoss:
    @pytest.mark.parametrize('distance, expected', [(1000.0, 128.0), (450.0, 114.96), (900.0, 126.28)])
    def test_values(self, distance, expected):
        assert path_loss_db(distance) == pytest.approx(expected, abs=0.01)

    def test_rejects_non_positive_distance(self):
        with pytest.raises(ValueError):
            path_loss_db(0.0)

    def test_monotone(self):
        assert path_loss_db(500.0) < path_loss_db(600.0) < path_loss_db(5000.0)


class TestReceivedPower:
    def test_forced_terms(self, phy, rng):
        power = sample_received_power(phy, 1000.0, rng, shadow_db=0.0, fading_gain=1.0)
        assert power == pytest.approx(200.0 * 10 ** -12.8, rel=1e-12)
        assert power == pytest.approx(3.17e-11, rel=1e-3)

    @pytest.mark.parametrize('antennas', [1, 2])
    def test_fading_mean_equals_antenna_count(self, rng, antennas):
        phy = PhyConfig(antenna_count=antennas)
        distances = np.full(1_000_000, 450.0)
        powers = sample_received_powers(phy, distances, rng, shadow_db=np.zeros(distances.shape))
        expected = phy.tx_power * 10 ** (-path_loss_db(450.0) / 10) * antennas
        assert powers.mean() == pytest.approx(expected, rel=0.01)

    def test_batch_powers_are_positive(self, rng):
        phy = PhyConfig(shadow_std_db=0.0)
        powers = sample_received_powers(phy, np.array([450.0, 900.0]), rng)
        assert np.all(powers > 0)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            PhyConfig(tx_power=0)
        with pytest.raises(ValueError):
            PhyConfig(antenna_count=0)
        with pytest.raises(ValueError):
            PhyConfig(shadow_coherence='per_frame')

    def test_noise_power(self, phy):
        assert phy.noise_power_dbm == pytest.approx(-174.0 + 10 * math.log10(180000.0))


class TestSicDetect:
    phy = PhyConfig(sinr_threshold_db=10.0, receiver_sensitivity_dbm=None)

    def signals(self, *powers):
        return [TransmissionSignal(device_id=k + 1, cluster_index=0, received_power=p) for k, p in enumerate(powers)]

    def test_empty_slot(self):
        result = sic_detect([], self.phy, noise_power_mw=0.1)
        assert result.decoded == [] and result.failed == []

    def test_both_decoded_strongest_first(self):
        result = sic_detect(self.signals(1.0, 100.0), self.phy, noise_power_mw=0.1)
        assert result.decoded == [2, 1]
        assert result.failed == []

    def test_strong_interference_fails_all(self):
        result = sic_detect(self.signals(10.0, 9.0), self.phy, noise_power_mw=0.1)
        assert result.decoded == []
        assert sorted(result.failed) == [1, 2]

    def test_stops_at_first_failure(self):
        # 1000 clears 1000/(9+8+0.1); 9 then faces 8 and fails, so 8 is never tried
        result = sic_detect(self.signals(1000.0, 9.0, 8.0), self.phy, noise_power_mw=0.1)
        assert result.decoded == [1]
        assert result.failed == [2, 3]

    def test_ties_broken_by_id(self):
        signals = [TransmissionSignal(5, 0, 50.0), TransmissionSignal(2, 1, 50.0)]
        result = sic_detect(signals, self.phy, noise_power_mw=0.1)
        assert result.failed == [2, 5]

    def test_sensitivity_floor(self):
        phy = PhyConfig(receiver_sensitivity_dbm=-104.0)
        weak = TransmissionSignal(1, 0, 10 ** (-105 / 10))
        result = sic_detect([weak], phy, noise_power_mw=1e-30)
        assert result.decoded == []
        assert result.failed == [1]

    def test_partition(self, phy, rng):
        powers = sample_received_powers(phy, np.array([450.0, 460.0, 900.0, 910.0]), rng)
        signals = [TransmissionSignal(k, k // 2, float(p)) for k, p in enumerate(powers)]
        result = sic_detect(signals, phy)
        assert set(result.decoded).isdisjoint(result.failed)
        assert sorted(result.decoded + result.failed) == [0, 1, 2, 3]


class TestOutcomeDistribution:
    def test_no_transmissions(self, phy, geometries, rng):
        assert outcome_distribution(0, 0, phy, geometries, 10, rng) == {(0, 0): 1.0}

    def test_structure(self, phy, geometries, rng):
        distribution = outcome_distribution(2, 1, phy, geometries, 2000, rng)
        assert sum(distribution.values()) == pytest.approx(1.0)
        for u1, u2 in distribution:
            assert u1 <= 2 and u2 <= 1

        c1 = cluster_marginals(distribution, 0)
        c2 = cluster_marginals(distribution, 1)
        assert sum(c1) == pytest.approx(1.0)
        assert sum(c2) == pytest.approx(1.0)
        assert c1[3] == 0.0 and c2[2] == 0.0

    def test_lone_near_cluster_beats_far_cluster(self, phy, geometries, rng):
        near = cluster_marginals(outcome_distribution(1, 0, phy, geometries, 5000, rng), 0)
        far = cluster_marginals(outcome_distribution(0, 1, phy, geometries, 5000, rng), 1)
        assert near[1] >= far[1]

    def test_rejects_zero_samples(self, phy, geometries, rng):
        with pytest.raises(ValueError):
            outcome_distribution(1, 0, phy, geometries, 0, rng)

    @pytest.mark.slow
    @pytest.mark.parametrize('n2', [1, 2, 3])
    def test_far_failures_grow_with_near_load(self, phy, geometries, rng, n2):
        samples = 100_000
        zero_far = [
            cluster_marginals(outcome_distribution(n1, n2, phy, geometries, samples, rng), 1)[0]
            for n1 in range(4)
        ]
        for lighter, heavier in zip(zero_far, zero_far[1:]):
            tolerance = 3 * math.sqrt((lighter * (1 - lighter) + heavier * (1 - heavier)) / samples)
            assert heavier >= lighter - tolerance
