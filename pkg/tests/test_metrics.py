"""
Tests for throughput, fairness, delay and energy
"""

import pytest

from noma_access.errors import MetricsError
from noma_access.metrics.performance import (
    EnergyParams,
    MetricsAccumulator,
    MetricsReport,
    access_delay,
    build_report,
    check_throughput_ceiling,
    energy_per_success,
    jain_fairness,
    mean_energy,
    throughput,
    throughput_stderr,
)


class TestEnergy:
    def test_single_attempt_no_idle(self):
        assert energy_per_success(EnergyParams(), 1, 0, 4) == pytest.approx(3.69, abs=0.005)

    def test_retransmission_and_deferral(self):
        assert energy_per_success(EnergyParams(), 2, 1, 4) == pytest.approx(7.10, abs=0.005)

    def test_derived_powers_and_times(self):
        params = EnergyParams()
        assert params.rx_power == pytest.approx(0.1295)
        assert params.tx_time == pytest.approx(1024 / 60000)
        assert params.rx_time == pytest.approx(128 / 60000)

    def test_requires_an_attempt(self):
        with pytest.raises(MetricsError):
            energy_per_success(EnergyParams(), 0, 0, 4)

    def test_parameters_must_be_positive(self):
        with pytest.raises(ValueError):
            EnergyParams(voltage=0)

    def test_mean_energy_is_energy_of_means(self):
        acc = MetricsAccumulator(cluster_count=1, slot_count=4)
        acc.record_ack(0, delay=1, attempts=1, idle=0)
        acc.record_ack(0, delay=3, attempts=3, idle=2)
        params = EnergyParams()
        expected = (energy_per_success(params, 1, 0, 4) + energy_per_success(params, 3, 2, 4)) / 2
        assert mean_energy(acc, params)[0] == pytest.approx(expected)


class TestThroughput:
    def test_division(self):
        acc = MetricsAccumulator(cluster_count=2, slot_count=4)
        for _ in range(500):
            acc.record_frame([2, 0], [1.0, 1.0])
        gammas, gamma_s = throughput(acc)
        assert gammas == [2.0, 0.0]
        assert gamma_s == 2.0

    def test_zero_successes(self):
        acc = MetricsAccumulator(cluster_count=2, slot_count=4)
        acc.record_frame([0, 0], [0.5, 0.5])
        assert throughput(acc) == ([0.0, 0.0], 0.0)
        assert throughput_stderr(acc) == 0.0

    def test_zero_frames(self):
        with pytest.raises(MetricsError):
            throughput(MetricsAccumulator(cluster_count=2, slot_count=4))

    def test_stderr_of_alternating_frames(self):
        acc = MetricsAccumulator(cluster_count=1, slot_count=4)
        for k in range(100):
            acc.record_frame([2 * (k % 2)], [1.0])
        # sample variance 100/99, standard error sqrt(variance / 100)
        assert throughput_stderr(acc) == pytest.approx((100 / 99 / 100) ** 0.5)

    def test_ceiling(self):
        check_throughput_ceiling(20.0, 4, 5)
        with pytest.raises(MetricsError):
            check_throughput_ceiling(20.5, 4, 5)


class TestFairness:
    @pytest.mark.parametrize('gammas, expected', [([1.0, 1.0], 1.0), ([1.0, 0.0], 0.5), ([0.0, 0.0], 1.0)])
    def test_values(self, gammas, expected):
        assert jain_fairness(gammas) == pytest.approx(expected)

    def test_bounds(self):
        value = jain_fairness([3.0, 1.0, 0.5])
        assert 1 / 3 <= value <= 1.0


class TestDelay:
    def test_mean_delay(self):
        acc = MetricsAccumulator(cluster_count=2, slot_count=4)
        acc.record_ack(0, delay=1, attempts=1, idle=0)
        acc.record_ack(0, delay=4, attempts=2, idle=2)
        assert access_delay(acc) == [2.5, None]

    def test_delay_at_least_one_frame(self):
        acc = MetricsAccumulator(cluster_count=1, slot_count=4)
        with pytest.raises(MetricsError):
            acc.record_ack(0, delay=0, attempts=1, idle=0)


class TestReport:
    def test_merge_matches_single_accumulator(self):
        combined = MetricsAccumulator(cluster_count=2, slot_count=4)
        first = MetricsAccumulator(cluster_count=2, slot_count=4)
        second = MetricsAccumulator(cluster_count=2, slot_count=4)
        for k, target in enumerate([first, first, second]):
            for acc in (target, combined):
                acc.record_frame([k, 1], [0.5, 0.7])
                acc.record_ack(1, delay=k + 1, attempts=1, idle=k)
        assert first.merge(second) == combined

    def test_merge_rejects_other_networks(self):
        with pytest.raises(MetricsError):
            MetricsAccumulator(2, 4).merge(MetricsAccumulator(2, 8))

    def test_rows(self):
        acc = MetricsAccumulator(cluster_count=2, slot_count=4)
        acc.record_frame([1, 1], [0.4, 0.6])
        acc.record_ack(0, delay=1, attempts=1, idle=0)
        acc.record_ack(1, delay=2, attempts=2, idle=1)
        report = build_report(acc, EnergyParams(), max_decodable_per_slot=5)

        row = report.as_row()
        assert list(row) == [
            'gamma_s', 'gamma_1', 'gamma_2', 'jain_hat', 'delay_1', 'delay_2', 'energy_1_mJ', 'energy_2_mJ',
        ]
        assert row['gamma_s'] == 2.0
        assert row['energy_2_mJ'] > row['energy_1_mJ']

        extra = report.extra_row()
        assert extra['attempts_2'] == 2.0
        assert extra['mean_a_1'] == pytest.approx(0.4)

    def test_empty_window(self):
        report = build_report(MetricsAccumulator(cluster_count=2, slot_count=4), EnergyParams())
        assert report == MetricsReport.empty(2)
