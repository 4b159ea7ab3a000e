"""
NOMA Access Sim - Performance Metrics
Throughput, throughput fairness, access delay and per-device energy
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import structlog

from noma_access.errors import MetricsError

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class EnergyParams:
    """Radio energy model of an IoT device"""

    slot_duration: float = 0.020  # s
    packet_size: int = 128  # bytes
    ack_size: int = 16  # bytes
    data_rate: float = 60000.0  # bit/s
    tx_power: float = 0.200  # W
    rx_current: float = 0.035  # A
    idle_current: float = 2.7e-6  # A
    voltage: float = 3.7  # V

    def __post_init__(self):
        for name in ('slot_duration', 'packet_size', 'ack_size', 'data_rate', 'tx_power', 'rx_current', 'voltage'):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.idle_current < 0:
            raise ValueError("idle_current must be >= 0")

    @property
    def rx_power(self) -> float:
        return self.rx_current * self.voltage

    @property
    def idle_power(self) -> float:
        return self.idle_current * self.voltage

    @property
    def tx_time(self) -> float:
        return self.packet_size * 8 / self.data_rate

    @property
    def rx_time(self) -> float:
        return self.ack_size * 8 / self.data_rate


def energy_per_success(params: EnergyParams, n_tot: float, n_idle: float, slot_count: int) -> float:
    """E = P_tx T_tx N_tot + P_rx T_rx + P_idle T_slot L N_idle, in millijoules"""

    if n_tot < 1:
        raise MetricsError("energy needs at least one transmission attempt", metric='energy')
    joules = (
        params.tx_power * params.tx_time * n_tot
        + params.rx_power * params.rx_time
        + params.idle_power * params.slot_duration * slot_count * n_idle
    )
    return joules * 1000.0


@dataclass
class MetricsAccumulator:
    """Running aggregates over the measurement window

    Delay, attempts and deferrals are kept as per-cluster sums over ACKed
    packets; energy is linear in attempts and deferrals, so the mean energy
    follows from their means exactly.
    """

    cluster_count: int
    slot_count: int
    frames: int = 0
    successes: List[int] = field(default_factory=list)
    acked: List[int] = field(default_factory=list)
    delay_sum: List[int] = field(default_factory=list)
    delay_sq_sum: List[int] = field(default_factory=list)
    attempts_sum: List[int] = field(default_factory=list)
    idle_sum: List[int] = field(default_factory=list)
    access_prob_sum: List[float] = field(default_factory=list)
    frame_sq_sum: int = 0

    def __post_init__(self):
        for name in ('successes', 'acked', 'delay_sum', 'delay_sq_sum', 'attempts_sum', 'idle_sum'):
            if not getattr(self, name):
                setattr(self, name, [0] * self.cluster_count)
        if not self.access_prob_sum:
            self.access_prob_sum = [0.0] * self.cluster_count

    def record_frame(self, cluster_successes: Sequence[int], access_probs: Sequence[float]) -> None:
        self.frames += 1
        total = 0
        for cluster, count in enumerate(cluster_successes):
            self.successes[cluster] += count
            self.access_prob_sum[cluster] += access_probs[cluster]
            total += count
        self.frame_sq_sum += total * total

    def record_ack(self, cluster: int, delay: int, attempts: int, idle: int) -> None:
        if delay < 1:
            raise MetricsError(f"delay of an ACKed packet must be >= 1 frame, got {delay}", metric='delay')
        self.acked[cluster] += 1
        self.delay_sum[cluster] += delay
        self.delay_sq_sum[cluster] += delay * delay
        self.attempts_sum[cluster] += attempts
        self.idle_sum[cluster] += idle

    def merge(self, other: 'MetricsAccumulator') -> 'MetricsAccumulator':
        """Associative combination of two runs of the same network"""

        if (other.cluster_count, other.slot_count) != (self.cluster_count, self.slot_count):
            raise MetricsError("cannot merge accumulators of different networks")

        def add(a, b):
            return [x + y for x, y in zip(a, b)]

        return MetricsAccumulator(
            cluster_count=self.cluster_count,
            slot_count=self.slot_count,
            frames=self.frames + other.frames,
            successes=add(self.successes, other.successes),
            acked=add(self.acked, other.acked),
            delay_sum=add(self.delay_sum, other.delay_sum),
            delay_sq_sum=add(self.delay_sq_sum, other.delay_sq_sum),
            attempts_sum=add(self.attempts_sum, other.attempts_sum),
            idle_sum=add(self.idle_sum, other.idle_sum),
            access_prob_sum=add(self.access_prob_sum, other.access_prob_sum),
            frame_sq_sum=self.frame_sq_sum + other.frame_sq_sum,
        )


def throughput(acc: MetricsAccumulator) -> Tuple[List[float], float]:
    """Per-cluster and system packets per frame"""

    if acc.frames < 1:
        raise MetricsError("throughput needs at least one measured frame", metric='throughput')
    gammas = [count / acc.frames for count in acc.successes]
    return gammas, math.fsum(gammas)


def throughput_stderr(acc: MetricsAccumulator) -> float:
    """Standard error of the per-frame system success count"""

    if acc.frames < 2:
        return 0.0
    mean = sum(acc.successes) / acc.frames
    variance = max(acc.frame_sq_sum / acc.frames - mean * mean, 0.0) * acc.frames / (acc.frames - 1)
    return math.sqrt(variance / acc.frames)


def jain_fairness(gammas: Sequence[float]) -> float:
    """Jain index over average cluster throughputs; 1 for the all-zero case"""

    squares = math.fsum(g * g for g in gammas)
    if squares == 0:
        return 1.0
    total = math.fsum(gammas)
    return min(total * total / (len(gammas) * squares), 1.0)


def access_delay(acc: MetricsAccumulator) -> List[Optional[float]]:
    """Mean frames from arrival to ACK per cluster; None without ACKed packets"""
    return [
        acc.delay_sum[c] / acc.acked[c] if acc.acked[c] else None
        for c in range(acc.cluster_count)
    ]


def mean_attempts(acc: MetricsAccumulator) -> List[Optional[float]]:
    return [
        acc.attempts_sum[c] / acc.acked[c] if acc.acked[c] else None
        for c in range(acc.cluster_count)
    ]


def mean_idle(acc: MetricsAccumulator) -> List[Optional[float]]:
    return [
        acc.idle_sum[c] / acc.acked[c] if acc.acked[c] else None
        for c in range(acc.cluster_count)
    ]


def mean_energy(acc: MetricsAccumulator, params: EnergyParams) -> List[Optional[float]]:
    """Mean mJ per ACKed packet per cluster"""

    energies: List[Optional[float]] = []
    for attempts, idle in zip(mean_attempts(acc), mean_idle(acc)):
        if attempts is None:
            energies.append(None)
        else:
            energies.append(energy_per_success(params, attempts, idle, acc.slot_count))
    return energies


def check_throughput_ceiling(gamma_s: float, slot_count: int, max_decodable_per_slot: int) -> None:
    """No run can decode more than L times the per-slot decoding capacity"""

    ceiling = slot_count * max_decodable_per_slot
    if gamma_s > ceiling + 1e-9:
        raise MetricsError(
            f"system throughput {gamma_s} exceeds the structural ceiling {ceiling}", metric='throughput'
        )


@dataclass
class MetricsReport:
    frames: int
    gammas: List[float]
    gamma_s: float
    gamma_s_stderr: float
    jain_hat: float
    delays: List[Optional[float]]
    energies_mj: List[Optional[float]]
    attempts: List[Optional[float]]
    idle: List[Optional[float]]
    mean_access_probs: List[float]

    @classmethod
    def empty(cls, cluster_count: int) -> 'MetricsReport':
        none: List[Optional[float]] = [None] * cluster_count
        return cls(
            frames=0,
            gammas=[0.0] * cluster_count,
            gamma_s=0.0,
            gamma_s_stderr=0.0,
            jain_hat=1.0,
            delays=list(none),
            energies_mj=list(none),
            attempts=list(none),
            idle=list(none),
            mean_access_probs=[0.0] * cluster_count,
        )

    def as_row(self) -> Dict[str, Any]:
        """Flat dict keyed by the 1-based column names of the results CSV"""

        row: Dict[str, Any] = {'gamma_s': self.gamma_s}
        for c, gamma in enumerate(self.gammas):
            row[f'gamma_{c + 1}'] = gamma
        row['jain_hat'] = self.jain_hat
        for c, delay in enumerate(self.delays):
            row[f'delay_{c + 1}'] = delay
        for c, energy in enumerate(self.energies_mj):
            row[f'energy_{c + 1}_mJ'] = energy
        return row

    def extra_row(self) -> Dict[str, Any]:
        row: Dict[str, Any] = {}
        for c in range(len(self.gammas)):
            row[f'attempts_{c + 1}'] = self.attempts[c]
            row[f'idle_{c + 1}'] = self.idle[c]
            row[f'mean_a_{c + 1}'] = self.mean_access_probs[c]
        row['gamma_s_stderr'] = self.gamma_s_stderr
        return row


def build_report(
    acc: MetricsAccumulator,
    params: EnergyParams,
    max_decodable_per_slot: Optional[int] = None,
) -> MetricsReport:
    if acc.frames == 0:
        return MetricsReport.empty(acc.cluster_count)

    gammas, gamma_s = throughput(acc)
    if max_decodable_per_slot is not None:
        check_throughput_ceiling(gamma_s, acc.slot_count, max_decodable_per_slot)

    return MetricsReport(
        frames=acc.frames,
        gammas=gammas,
        gamma_s=gamma_s,
        gamma_s_stderr=throughput_stderr(acc),
        jain_hat=jain_fairness(gammas),
        delays=access_delay(acc),
        energies_mj=mean_energy(acc, params),
        attempts=mean_attempts(acc),
        idle=mean_idle(acc),
        mean_access_probs=[total / acc.frames for total in acc.access_prob_sum],
    )
