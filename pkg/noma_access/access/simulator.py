"""
NOMA Access Sim - Access Simulator
Frame-by-frame uplink random access: arrivals, access control, slot selection,
per-slot detection, ACKs and retransmissions
"""

import hashlib
import json
from collections import deque
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Deque, Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog

from noma_access.access.slot_hash import (
    DEFAULT_CANDIDATE_COUNT,
    HashSeed,
    candidate_seeds,
    collision_minimal_seed,
    hash_slot,
    slot_map,
)
from noma_access.agent.policy_gradient import (
    ActionBundle,
    PolicyGradientAgent,
    PolicyState,
    RewardKind,
)
from noma_access.agent.snapshot import load_snapshot
from noma_access.errors import ConfigError
from noma_access.metrics.performance import (
    EnergyParams,
    MetricsAccumulator,
    MetricsReport,
    build_report,
)
from noma_access.phy.channel import (
    ClusterGeometry,
    PhyConfig,
    TransmissionSignal,
    device_distance,
    sample_device_position,
    sample_received_powers,
    sic_detect,
)
from noma_access.phy.detection_table import TableOverflow, table_draw
from noma_access.rng import (
    STREAM_AGENT,
    STREAM_CHANNEL,
    STREAM_DEVICE,
    STREAM_PLACEMENT,
    STREAM_SEEDS,
    UniformStream,
    derive_seed,
    substream,
)

logger = structlog.get_logger(__name__)


class Scheme(Enum):
    A = 'A'  # every cluster contention-based
    B = 'B'  # C1 semi-contention-free, the rest contention-based
    B_BOTH_SCF = 'B_both_SCF'  # every cluster semi-contention-free
    WAC = 'WAC'  # no access control, every cluster contention-based


class ClusterMode(Enum):
    CB = 'CB'
    SCF = 'SCF'


class DetectionMode(Enum):
    PHYSICAL = 'physical'
    TABLE = 'table'


class AccessDecision(Enum):
    ADT = 'ADT'
    ADD = 'ADD'


class FrameEvent(Enum):
    DEFERRED = 'deferred'
    FAILED = 'transmitted-failed'
    ACKED = 'transmitted-acked'


def cluster_modes(scheme: Scheme, cluster_count: int) -> Tuple[ClusterMode, ...]:
    if scheme is Scheme.B:
        return (ClusterMode.SCF,) + (ClusterMode.CB,) * (cluster_count - 1)
    if scheme is Scheme.B_BOTH_SCF:
        return (ClusterMode.SCF,) * cluster_count
    return (ClusterMode.CB,) * cluster_count


@dataclass(frozen=True)
class AgentConfig:
    sigma: float = 0.1
    epsilon: float = 0.5
    alpha_theta: float = 0.001
    alpha_phi: float = 0.01
    alpha_omega: float = 0.001
    learning: bool = True
    warm_start: Optional[str] = None

    def hyper(self) -> Dict[str, float]:
        return {
            'sigma': self.sigma,
            'epsilon': self.epsilon,
            'alpha_theta': self.alpha_theta,
            'alpha_phi': self.alpha_phi,
            'alpha_omega': self.alpha_omega,
        }


@dataclass(frozen=True)
class SimConfig:
    """Everything a run depends on; the run is a pure function of this record"""

    slot_count: int
    clusters: Tuple[ClusterGeometry, ...]
    arrival_prob: float
    scheme: Scheme = Scheme.A
    reward_kind: RewardKind = RewardKind.R1
    update_interval: int = 1
    frames: int = 1000
    master_seed: int = 0
    detection_mode: DetectionMode = DetectionMode.PHYSICAL
    table_overflow: TableOverflow = TableOverflow.ERROR
    phy: PhyConfig = field(default_factory=PhyConfig)
    energy: EnergyParams = field(default_factory=EnergyParams)
    agent: AgentConfig = field(default_factory=AgentConfig)
    candidate_count: int = DEFAULT_CANDIDATE_COUNT
    warmup_fraction: float = 0.5
    lambda_switch_frame: Optional[int] = None
    lambda_after: Optional[float] = None
    fixed_actions: Optional[ActionBundle] = None
    clairvoyant_seeds: bool = False
    trace: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.slot_count < 1:
            raise ConfigError('network.slot_count', f"must be >= 1, got {self.slot_count}")
        if not self.clusters:
            raise ConfigError('network.clusters', "at least one cluster is required")
        if not 0.0 <= self.arrival_prob <= 1.0:
            raise ConfigError('access.lambda', f"must be within [0, 1], got {self.arrival_prob}")
        if self.frames < 0:
            raise ConfigError('experiment.frames', f"must be >= 0, got {self.frames}")
        if self.update_interval < 1:
            raise ConfigError('agent.update_interval', f"must be >= 1, got {self.update_interval}")
        if not 0.0 <= self.warmup_fraction < 1.0:
            raise ConfigError('metrics.warmup_fraction', f"must be within [0, 1), got {self.warmup_fraction}")
        if self.candidate_count < 1:
            raise ConfigError('agent.candidate_seeds', f"must be >= 1, got {self.candidate_count}")
        if self.detection_mode is DetectionMode.TABLE and len(self.clusters) > 2:
            raise ConfigError('access.detection_mode', "table mode covers at most two clusters")
        if self.lambda_after is not None and not 0.0 <= self.lambda_after <= 1.0:
            raise ConfigError('experiment.lambda_after', f"must be within [0, 1], got {self.lambda_after}")
        if self.fixed_actions is not None and len(self.fixed_actions.access_probs) != len(self.clusters):
            raise ConfigError('benchmark.access_probs', "one access probability per cluster is required")

    @property
    def device_count(self) -> int:
        return sum(cluster.device_count for cluster in self.clusters)

    @property
    def state_count(self) -> int:
        return self.device_count + 1

    @property
    def modes(self) -> Tuple[ClusterMode, ...]:
        return cluster_modes(self.scheme, len(self.clusters))

    @property
    def scf_clusters(self) -> Tuple[int, ...]:
        return tuple(c for c, mode in enumerate(self.modes) if mode is ClusterMode.SCF)

    @property
    def warmup_frames(self) -> int:
        return int(self.frames * self.warmup_fraction)

    @property
    def max_decodable_per_slot(self) -> int:
        if self.detection_mode is DetectionMode.TABLE:
            return 5  # the table never decodes more than 3 from C1 and 2 from C2
        return self.device_count

    def fingerprint(self) -> str:
        """sha256 of the canonical JSON form"""

        def encode(value: Any) -> Any:
            if isinstance(value, Enum):
                return value.value
            if isinstance(value, HashSeed):
                return value.value
            raise TypeError(type(value))

        payload = asdict(self)
        return hashlib.sha256(json.dumps(payload, sort_keys=True, default=encode).encode()).hexdigest()


@dataclass
class Device:
    device_id: int
    cluster: int
    position: Tuple[float, float]
    distance: float
    stream: UniformStream
    shadow_db: float = 0.0
    queue: Deque[int] = field(default_factory=deque)  # arrival frames, FIFO
    attempts_current_head: int = 0
    idle_current_head: int = 0
    arrived: int = 0
    acked: int = 0

    @property
    def active(self) -> bool:
        return bool(self.queue)


@dataclass(frozen=True)
class AckRecord:
    device_id: int
    cluster: int
    delay: int
    attempts: int
    idle: int


@dataclass
class FrameOutcome:
    frame: int
    slots: List[List[int]]  # device ids per slot
    decoded: List[List[int]]  # decoded device ids per slot, in decode order
    successes: List[int]  # per cluster
    events: Dict[int, FrameEvent]
    acks: List[AckRecord]
    arrivals: int = 0


def arrivals(devices: Sequence[Device], arrival_prob: float, frame: int) -> int:
    """Bernoulli arrivals: each device enqueues one packet with probability lambda"""

    count = 0
    for device in devices:
        if device.stream.next() < arrival_prob:
            device.queue.append(frame)
            device.arrived += 1
            count += 1
    return count


def access_decision(device: Device, access_prob: float) -> AccessDecision:
    """ADT with probability a_i, memory-less across frames"""

    assert device.active, f"access decision requested for inactive device {device.device_id}"
    return AccessDecision.ADT if device.stream.next() <= access_prob else AccessDecision.ADD


def select_slot(
    device: Device,
    mode: ClusterMode,
    slot_count: int,
    seed: Optional[HashSeed] = None,
    slot_cache: Optional[Dict[int, int]] = None,
) -> int:
    """CB draws a uniform slot from the device stream; SCF hashes (seed, id)"""

    if mode is ClusterMode.CB:
        return device.stream.below(slot_count)
    if slot_cache is not None:
        return slot_cache[device.device_id]
    if seed is None:
        raise ConfigError('access.scheme', f"cluster {device.cluster} is SCF but no seed was broadcast")
    return hash_slot(seed, device.device_id, slot_count)


def scheme_candidate_seeds(config: SimConfig) -> Dict[int, List[HashSeed]]:
    """Candidate seed set of every SCF cluster, fixed for the whole run"""
    return {
        cluster: candidate_seeds(config.candidate_count, derive_seed(config.master_seed, STREAM_SEEDS, cluster))
        for cluster in config.scf_clusters
    }


class AccessSimulator:
    """One cell: devices, their streams, the channel stream and the candidate seeds"""

    def __init__(self, config: SimConfig):
        self.config = config
        self.frame = 0
        self.arrival_prob = config.arrival_prob
        self.modes = config.modes
        self.devices: List[Device] = []
        self.channel = UniformStream(substream(config.master_seed, STREAM_CHANNEL))

        device_id = 1
        for cluster, geometry in enumerate(config.clusters):
            for _ in range(geometry.device_count):
                placement = substream(config.master_seed, STREAM_PLACEMENT, device_id)
                position = sample_device_position(geometry, placement)
                shadow = 0.0
                if config.phy.shadow_coherence == 'per_device' and config.phy.shadow_std_db > 0:
                    shadow = float(placement.normal(0.0, config.phy.shadow_std_db))
                self.devices.append(Device(
                    device_id=device_id,
                    cluster=cluster,
                    position=position,
                    distance=device_distance(geometry, position, config.phy.bs_height),
                    stream=UniformStream(substream(config.master_seed, STREAM_DEVICE, device_id)),
                    shadow_db=shadow,
                ))
                device_id += 1

        self.cluster_ids: List[List[int]] = [
            [d.device_id for d in self.devices if d.cluster == c] for c in range(len(config.clusters))
        ]

        # Candidate seeds and their precomputed slot maps, fixed for the whole run
        self.seed_candidates = scheme_candidate_seeds(config)
        self.slot_maps: Dict[int, List[Dict[int, int]]] = {}
        for cluster, seeds in self.seed_candidates.items():
            self.slot_maps[cluster] = [slot_map(seed, self.cluster_ids[cluster], config.slot_count) for seed in seeds]

    def _slot_cache(self, cluster: int, actions: ActionBundle) -> Optional[Dict[int, int]]:
        if cluster not in self.slot_maps:
            return None
        index = actions.seed_indices.get(cluster)
        if index is not None:
            return self.slot_maps[cluster][index]
        seed = actions.seeds.get(cluster)
        if seed is None:
            raise ConfigError('access.scheme', f"cluster {cluster + 1} is SCF but no seed was broadcast")
        return slot_map(seed, self.cluster_ids[cluster], self.config.slot_count)

    def run_frame(self, actions: ActionBundle) -> FrameOutcome:
        config = self.config
        frame = self.frame
        slot_count = config.slot_count
        cluster_count = len(config.clusters)

        arrived = arrivals(self.devices, self.arrival_prob, frame)

        events: Dict[int, FrameEvent] = {}
        transmitters: List[Device] = []
        for device in self.devices:
            if not device.queue:
                continue
            if access_decision(device, actions.access_probs[device.cluster]) is AccessDecision.ADT:
                device.attempts_current_head += 1
                transmitters.append(device)
            else:
                device.idle_current_head += 1
                events[device.device_id] = FrameEvent.DEFERRED

        caches: Dict[int, Optional[Dict[int, int]]] = {}
        for cluster in range(cluster_count):
            if self.modes[cluster] is not ClusterMode.SCF:
                continue
            if config.clairvoyant_seeds:
                # BS knows the ADT ids: broadcast the collision-minimal candidate
                adt_ids = [d.device_id for d in transmitters if d.cluster == cluster]
                best = collision_minimal_seed(self.seed_candidates[cluster], adt_ids, slot_count)
                caches[cluster] = self.slot_maps[cluster][best]
            else:
                caches[cluster] = self._slot_cache(cluster, actions)

        slots: List[List[Device]] = [[] for _ in range(slot_count)]
        for device in transmitters:
            mode = self.modes[device.cluster]
            slot = select_slot(device, mode, slot_count, slot_cache=caches.get(device.cluster))
            slots[slot].append(device)

        if config.detection_mode is DetectionMode.TABLE:
            decoded = self._detect_table(slots)
        else:
            decoded = self._detect_physical(slots, transmitters)

        successes = [0] * cluster_count
        acks: List[AckRecord] = []
        by_id = {device.device_id: device for device in transmitters}
        for slot_decoded in decoded:
            for device_id in slot_decoded:
                device = by_id[device_id]
                arrival_frame = device.queue.popleft()
                acks.append(AckRecord(
                    device_id=device_id,
                    cluster=device.cluster,
                    delay=frame - arrival_frame + 1,
                    attempts=device.attempts_current_head,
                    idle=device.idle_current_head,
                ))
                device.attempts_current_head = 0
                device.idle_current_head = 0
                device.acked += 1
                successes[device.cluster] += 1
                events[device_id] = FrameEvent.ACKED
        for device in transmitters:
            events.setdefault(device.device_id, FrameEvent.FAILED)

        self.frame += 1
        return FrameOutcome(
            frame=frame,
            slots=[[d.device_id for d in slot] for slot in slots],
            decoded=decoded,
            successes=successes,
            events=events,
            acks=acks,
            arrivals=arrived,
        )

    def _detect_table(self, slots: List[List[Device]]) -> List[List[int]]:
        decoded: List[List[int]] = []
        for slot in slots:
            if not slot:
                decoded.append([])
                continue
            members: Tuple[List[Device], List[Device]] = ([], [])
            for device in slot:
                members[device.cluster].append(device)
            # Raises TableModeOverflowError past three transmissions per cluster unless saturating
            u1, u2 = table_draw(
                len(members[0]),
                len(members[1]),
                self.channel.next(),
                self.channel.next(),
                self.config.table_overflow,
            )
            winners: List[int] = []
            for cluster, wins in ((0, u1), (1, u2)):
                pool = list(members[cluster])
                # The table says how many succeed, not which; pick them uniformly
                for k in range(wins):
                    pick = k + self.channel.below(len(pool) - k)
                    pool[k], pool[pick] = pool[pick], pool[k]
                    winners.append(pool[k].device_id)
            decoded.append(winners)
        return decoded

    def _detect_physical(self, slots: List[List[Device]], transmitters: List[Device]) -> List[List[int]]:
        if not transmitters:
            return [[] for _ in slots]

        phy = self.config.phy
        order = [device for slot in slots for device in slot]
        distances = np.fromiter((d.distance for d in order), dtype=float, count=len(order))
        shadow = None
        if phy.shadow_coherence == 'per_device':
            shadow = np.fromiter((d.shadow_db for d in order), dtype=float, count=len(order))
        powers = sample_received_powers(phy, distances, self.channel.generator, shadow_db=shadow).tolist()

        decoded: List[List[int]] = []
        offset = 0
        for slot in slots:
            signals = [
                TransmissionSignal(device.device_id, device.cluster, powers[offset + k])
                for k, device in enumerate(slot)
            ]
            offset += len(slot)
            decoded.append(sic_detect(signals, phy).decoded if signals else [])
        return decoded

    def check_conservation(self) -> bool:
        """arrivals = ACKed + queued, per device"""
        return all(d.arrived == d.acked + len(d.queue) for d in self.devices)


@dataclass
class ExperimentResult:
    run_id: str
    config: SimConfig
    report: MetricsReport
    policy: Optional[PolicyState]
    trace: Optional[np.ndarray] = None
    frames_run: int = 0


def full_access_actions(cluster_count: int) -> ActionBundle:
    return ActionBundle(access_probs=(1.0,) * cluster_count)


def build_agent(config: SimConfig, simulator: AccessSimulator) -> PolicyGradientAgent:
    policy = PolicyState.cold_start(
        cluster_count=len(config.clusters),
        state_count=config.state_count,
        seed_candidates=simulator.seed_candidates,
        **config.agent.hyper(),
    )
    if config.agent.warm_start:
        load_snapshot(config.agent.warm_start, policy)
    return PolicyGradientAgent(
        policy,
        substream(config.master_seed, STREAM_AGENT),
        reward_kind=config.reward_kind,
        learning=config.agent.learning,
    )


def run_experiment(config: SimConfig, run_id: Optional[str] = None) -> ExperimentResult:
    """Run `frames` frames; the agent updates every K frames"""

    run_id = run_id or f"sim-{config.master_seed}-{config.fingerprint()[:8]}"
    cluster_count = len(config.clusters)

    logger.info(
        "Starting experiment",
        run_id=run_id,
        scheme=config.scheme.value,
        reward=config.reward_kind.value,
        arrival_prob=config.arrival_prob,
        frames=config.frames,
        detection_mode=config.detection_mode.value,
    )

    simulator = AccessSimulator(config)
    accumulator = MetricsAccumulator(cluster_count=cluster_count, slot_count=config.slot_count)
    trace = np.zeros(config.frames, dtype=np.int32) if config.trace else None

    agent: Optional[PolicyGradientAgent] = None
    if config.scheme is Scheme.WAC:
        actions = full_access_actions(cluster_count)
    elif config.fixed_actions is not None:
        actions = config.fixed_actions
    else:
        agent = build_agent(config, simulator)
        actions = agent.actions

    warmup = config.warmup_frames
    interval = [0] * cluster_count
    for frame in range(config.frames):
        if config.lambda_switch_frame is not None and frame == config.lambda_switch_frame:
            simulator.arrival_prob = config.lambda_after
            logger.info("Arrival probability switched", run_id=run_id, frame=frame, arrival_prob=config.lambda_after)

        outcome = simulator.run_frame(actions)

        if frame >= warmup:
            accumulator.record_frame(outcome.successes, actions.access_probs)
            for ack in outcome.acks:
                accumulator.record_ack(ack.cluster, ack.delay, ack.attempts, ack.idle)
        if trace is not None:
            trace[frame] = sum(outcome.successes)

        if agent is not None:
            for c in range(cluster_count):
                interval[c] += outcome.successes[c]
            if (frame + 1) % config.update_interval == 0:
                actions = agent.step(interval, outcome.successes)
                interval = [0] * cluster_count

    report = build_report(accumulator, config.energy, config.max_decodable_per_slot)

    logger.info(
        "Experiment completed",
        run_id=run_id,
        gamma_s=round(report.gamma_s, 6),
        jain_hat=round(report.jain_hat, 6),
        conserved=simulator.check_conservation(),
    )

    return ExperimentResult(
        run_id=run_id,
        config=config,
        report=report,
        policy=agent.policy.copy() if agent is not None else None,
        trace=trace,
        frames_run=config.frames,
    )
