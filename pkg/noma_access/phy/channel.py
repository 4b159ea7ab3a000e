"""
NOMA Access Sim - Channel Model
Path loss, shadowing, Rayleigh fading and SIC detection for one uplink slot
"""

import math
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog

logger = structlog.get_logger(__name__)

Position = Tuple[float, float]


def dbm_to_mw(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0)


@dataclass(frozen=True)
class PhyConfig:
    """Physical layer constants of the cell"""

    tx_power: float = 200.0  # mW
    sinr_threshold_db: float = 10.0
    shadow_std_db: float = 8.0
    receiver_sensitivity_dbm: Optional[float] = -104.0  # None disables the floor
    noise_psd_dbm_hz: float = -174.0
    bandwidth_hz: float = 180000.0
    antenna_count: int = 1
    bs_height: float = 30.0  # m
    shadow_coherence: str = 'per_transmission'

    def __post_init__(self):
        if self.tx_power <= 0:
            raise ValueError(f"tx_power must be > 0, got {self.tx_power}")
        if self.bandwidth_hz <= 0:
            raise ValueError(f"bandwidth_hz must be > 0, got {self.bandwidth_hz}")
        if self.antenna_count < 1:
            raise ValueError(f"antenna_count must be >= 1, got {self.antenna_count}")
        if not math.isfinite(self.sinr_threshold_db):
            raise ValueError("sinr_threshold_db must be finite")
        if self.shadow_coherence not in ('per_transmission', 'per_device'):
            raise ValueError(f"unknown shadow_coherence: {self.shadow_coherence}")

    @property
    def noise_power_dbm(self) -> float:
        return self.noise_psd_dbm_hz + 10.0 * math.log10(self.bandwidth_hz)

    @property
    def noise_power_mw(self) -> float:
        return dbm_to_mw(self.noise_power_dbm)

    @property
    def sinr_threshold_linear(self) -> float:
        return 10.0 ** (self.sinr_threshold_db / 10.0)

    @property
    def sensitivity_mw(self) -> float:
        if self.receiver_sensitivity_dbm is None:
            return 0.0
        return dbm_to_mw(self.receiver_sensitivity_dbm)

    def with_bandwidth(self, bandwidth_hz: float) -> 'PhyConfig':
        return replace(self, bandwidth_hz=bandwidth_hz)


@dataclass(frozen=True)
class ClusterGeometry:
    """Disc-shaped cluster at a fixed distance from the base station"""

    center_distance: float
    device_count: int
    radius: float = 25.0

    def __post_init__(self):
        if not self.center_distance > self.radius >= 0:
            raise ValueError(
                f"cluster needs center_distance > radius >= 0, got {self.center_distance}, {self.radius}"
            )
        if self.device_count < 1:
            raise ValueError(f"device_count must be >= 1, got {self.device_count}")


@dataclass(frozen=True)
class TransmissionSignal:
    device_id: int
    cluster_index: int
    received_power: float  # mW, linear

    def __post_init__(self):
        if self.received_power < 0:
            raise ValueError(f"received_power must be >= 0, got {self.received_power}")


@dataclass
class DetectionResult:
    """SIC outcome for one slot; decoded is in decode order"""

    decoded: List[int] = field(default_factory=list)
    failed: List[int] = field(default_factory=list)


def sample_device_position(geometry: ClusterGeometry, rng: np.random.Generator) -> Position:
    """Uniform planar offset inside the cluster disc"""

    radius = geometry.radius * math.sqrt(rng.random())
    angle = 2.0 * math.pi * rng.random()
    return (radius * math.cos(angle), radius * math.sin(angle))


def device_distance(geometry: ClusterGeometry, device_position: Position, bs_height: float) -> float:
    """3D distance from the BS antenna to a device

    The BS stands at the planar origin; the cluster center lies on the x axis at
    center_distance, so a negative x offset moves the device toward the BS.
    """

    dx, dy = device_position
    horizontal = math.hypot(geometry.center_distance + dx, dy)
    return math.sqrt(horizontal * horizontal + bs_height * bs_height)


def path_loss_db(distance: float) -> float:
    """128 + 37.6 log10(d), d in kilometers"""

    if distance <= 0:
        raise ValueError(f"distance must be > 0, got {distance}")
    return 128.0 + 37.6 * math.log10(distance / 1000.0)


def sample_received_power(
    phy: PhyConfig,
    distance: float,
    rng: np.random.Generator,
    shadow_db: Optional[float] = None,
    fading_gain: Optional[float] = None,
) -> float:
    """Received power in mW for one transmission

    Shadowing is log-normal with shadow_std_db; fading is |h|^2 summed over the
    BS antennas (Gamma(M, 1), Exponential(1) for M=1). Either term can be
    forced, which the per-device shadow mode and the tests rely on.
    """

    if shadow_db is None:
        shadow_db = rng.normal(0.0, phy.shadow_std_db) if phy.shadow_std_db > 0 else 0.0
    if fading_gain is None:
        fading_gain = rng.gamma(phy.antenna_count, 1.0)
    attenuation_db = path_loss_db(distance) + shadow_db
    return phy.tx_power * 10.0 ** (-attenuation_db / 10.0) * fading_gain


def sample_received_powers(
    phy: PhyConfig,
    distances: np.ndarray,
    rng: np.random.Generator,
    shadow_db: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Vectorized sample_received_power over a batch of transmissions"""

    distances = np.asarray(distances, dtype=float)
    if shadow_db is None:
        if phy.shadow_std_db > 0:
            shadow_db = rng.normal(0.0, phy.shadow_std_db, size=distances.shape)
        else:
            shadow_db = np.zeros(distances.shape)
    fading = rng.gamma(phy.antenna_count, 1.0, size=distances.shape)
    path_loss = 128.0 + 37.6 * np.log10(distances / 1000.0)
    return phy.tx_power * 10.0 ** (-(path_loss + shadow_db) / 10.0) * fading


def sic_detect(
    signals: Sequence[TransmissionSignal],
    phy: PhyConfig,
    noise_power_mw: Optional[float] = None,
) -> DetectionResult:
    """Successive interference cancellation over the signals of one slot

    Strongest first (ties by device id); a decoded signal is removed perfectly.
    The first signal that misses the SINR threshold or the sensitivity floor
    ends detection and every remaining signal fails.
    """

    if noise_power_mw is None:
        noise_power_mw = phy.noise_power_mw
    threshold = phy.sinr_threshold_linear
    sensitivity = phy.sensitivity_mw

    pending = sorted(signals, key=lambda s: (-s.received_power, s.device_id))
    result = DetectionResult()

    for index, signal in enumerate(pending):
        interference = math.fsum(s.received_power for s in pending[index + 1:])
        sinr = signal.received_power / (interference + noise_power_mw)
        if sinr >= threshold and signal.received_power >= sensitivity:
            result.decoded.append(signal.device_id)
            continue
        result.failed.extend(s.device_id for s in pending[index:])
        break

    return result


def outcome_distribution(
    n1: int,
    n2: int,
    phy: PhyConfig,
    geometries: Sequence[ClusterGeometry],
    samples: int,
    rng: np.random.Generator,
) -> Dict[Tuple[int, int], float]:
    """Monte-Carlo joint distribution of (C1 successes, C2 successes) in one slot

    Every realization places the transmitters afresh in their discs and draws
    new shadowing and fading.
    """

    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    if n1 + n2 == 0:
        return {(0, 0): 1.0}

    cluster_of = [0] * n1 + [1] * n2
    counts: Counter = Counter()

    for _ in range(samples):
        distances = []
        for cluster in cluster_of:
            position = sample_device_position(geometries[cluster], rng)
            distances.append(device_distance(geometries[cluster], position, phy.bs_height))
        powers = sample_received_powers(phy, np.array(distances), rng).tolist()

        signals = [TransmissionSignal(j, cluster_of[j], powers[j]) for j in range(len(powers))]
        detection = sic_detect(signals, phy)
        u1 = sum(1 for device_id in detection.decoded if cluster_of[device_id] == 0)
        counts[(u1, len(detection.decoded) - u1)] += 1

    logger.debug("Slot outcome distribution sampled", n1=n1, n2=n2, samples=samples, outcomes=len(counts))
    return {outcome: count / samples for outcome, count in sorted(counts.items())}


def cluster_marginals(
    distribution: Dict[Tuple[int, int], float], cluster: int, width: int = 4
) -> List[float]:
    """S_0..S_{width-1} for one cluster out of a joint outcome distribution"""

    marginals = [0.0] * width
    for outcome, probability in distribution.items():
        successes = outcome[cluster]
        if successes < width:
            marginals[successes] += probability
    return marginals
