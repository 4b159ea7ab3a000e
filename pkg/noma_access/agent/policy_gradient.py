"""
NOMA Access Sim - Policy Gradient Agent
Base-station actor-critic learning per-cluster access probabilities and hash seeds

State s is the number of successes the BS observed in the preceding frame.
Per cluster i the agent keeps
  theta_i[s]     mean of the log-normal access probability policy
  phi_i[s, j]    soft-max preference for candidate seed j (SCF clusters only)
and a shared tabular critic omega[s].
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog

from noma_access.access.slot_hash import HashSeed
from noma_access.errors import PolicyError

logger = structlog.get_logger(__name__)

ACCESS_FLOOR = 0.1
# Open interval (0.1, 1) in floating point
ACCESS_LOW = math.nextafter(ACCESS_FLOOR, 1.0)
ACCESS_HIGH = math.nextafter(1.0, 0.0)


class RewardKind(Enum):
    R1 = 'R1'  # total successes
    R2 = 'R2'  # total successes times instantaneous Jain index


@dataclass
class PolicyState:
    """All learnable parameters plus the PG hyper-parameters"""

    theta: np.ndarray  # (clusters, n)
    phi: Dict[int, np.ndarray]  # SCF cluster -> (n, q)
    omega: np.ndarray  # (n,)
    seed_candidates: Dict[int, List[HashSeed]] = field(default_factory=dict)
    sigma: float = 0.1
    epsilon: float = 0.5
    alpha_theta: float = 0.001
    alpha_phi: float = 0.01
    alpha_omega: float = 0.001

    def __post_init__(self):
        if self.sigma <= 0:
            raise PolicyError(f"sigma must be > 0, got {self.sigma}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise PolicyError(f"epsilon must be within [0, 1], got {self.epsilon}")
        for name in ('alpha_theta', 'alpha_phi', 'alpha_omega'):
            if getattr(self, name) <= 0:
                raise PolicyError(f"{name} must be > 0")

    @classmethod
    def cold_start(
        cls,
        cluster_count: int,
        state_count: int,
        seed_candidates: Optional[Dict[int, List[HashSeed]]] = None,
        **hyper,
    ) -> 'PolicyState':
        """theta = 0, phi = 0, omega = 0"""

        seed_candidates = seed_candidates or {}
        return cls(
            theta=np.zeros((cluster_count, state_count)),
            phi={cluster: np.zeros((state_count, len(seeds))) for cluster, seeds in seed_candidates.items()},
            omega=np.zeros(state_count),
            seed_candidates=dict(seed_candidates),
            **hyper,
        )

    @property
    def cluster_count(self) -> int:
        return self.theta.shape[0]

    @property
    def state_count(self) -> int:
        return self.omega.shape[0]

    @property
    def scf_clusters(self) -> Tuple[int, ...]:
        return tuple(sorted(self.phi))

    def is_finite(self) -> bool:
        return bool(
            np.all(np.isfinite(self.theta))
            and np.all(np.isfinite(self.omega))
            and all(np.all(np.isfinite(row)) for row in self.phi.values())
        )

    def copy(self) -> 'PolicyState':
        return PolicyState(
            theta=self.theta.copy(),
            phi={cluster: matrix.copy() for cluster, matrix in self.phi.items()},
            omega=self.omega.copy(),
            seed_candidates={cluster: list(seeds) for cluster, seeds in self.seed_candidates.items()},
            sigma=self.sigma,
            epsilon=self.epsilon,
            alpha_theta=self.alpha_theta,
            alpha_phi=self.alpha_phi,
            alpha_omega=self.alpha_omega,
        )


@dataclass(frozen=True)
class ActionBundle:
    """Per-cluster access probabilities and per-SCF-cluster seeds broadcast for a frame"""

    access_probs: Tuple[float, ...]
    seed_indices: Dict[int, int] = field(default_factory=dict)
    seeds: Dict[int, HashSeed] = field(default_factory=dict)

    def __post_init__(self):
        for a in self.access_probs:
            if not ACCESS_FLOOR <= a <= 1.0:
                raise PolicyError(f"access probability {a} outside [0.1, 1]")


def _check_state(policy: PolicyState, s: int) -> None:
    if not 0 <= s < policy.state_count:
        raise PolicyError(f"state {s} outside [0, {policy.state_count - 1}]")


# Access probability policy

def transform_access(a_prime: float) -> float:
    """a = (0.1 + a') / (1 + a'), clamped into the open interval (0.1, 1)"""

    if math.isinf(a_prime):
        return ACCESS_HIGH
    a = (ACCESS_FLOOR + a_prime) / (1.0 + a_prime)
    return min(max(a, ACCESS_LOW), ACCESS_HIGH)


def access_logit(a: float) -> float:
    """log a' recovered from an access probability"""

    if not ACCESS_FLOOR < a < 1.0:
        raise PolicyError(f"access probability {a} outside (0.1, 1): corrupted action record")
    return math.log((a - ACCESS_FLOOR) / (1.0 - a))


def sample_access_prob(policy: PolicyState, cluster: int, s: int, rng: np.random.Generator) -> float:
    """Draw log a' ~ N(theta_i[s], sigma^2) and map it into (0.1, 1)"""

    _check_state(policy, s)
    log_a_prime = policy.theta[cluster, s] + policy.sigma * rng.standard_normal()
    # exp overflows above ~709; the transform saturates long before that
    a_prime = math.exp(min(log_a_prime, 700.0))
    return transform_access(a_prime)


def access_log_density(a: float, mean: float, sigma: float) -> float:
    """log pi(a | mean), including the Jacobian of the access transform"""

    x = access_logit(a)
    log_normal = -0.5 * ((x - mean) / sigma) ** 2 - math.log(sigma * math.sqrt(2.0 * math.pi))
    log_jacobian = math.log(1.0 / (a - ACCESS_FLOOR) + 1.0 / (1.0 - a))
    return log_normal + log_jacobian


def access_score(a: float, mean: float, sigma: float) -> float:
    """d log pi / d mean = (log a' - mean) / sigma^2"""
    return (access_logit(a) - mean) / (sigma * sigma)


# Seed policy

def softmax(preferences: np.ndarray) -> np.ndarray:
    shifted = np.exp(preferences - np.max(preferences))
    return shifted / shifted.sum()


def seed_probabilities(policy: PolicyState, cluster: int, s: int) -> np.ndarray:
    _check_state(policy, s)
    return softmax(policy.phi[cluster][s])


def sample_seed(policy: PolicyState, cluster: int, s: int, rng: np.random.Generator) -> int:
    """Draw a candidate seed index from the soft-max over phi_i[s]"""

    if cluster not in policy.phi:
        raise PolicyError(f"cluster {cluster} does not operate in SCF mode")
    probabilities = seed_probabilities(policy, cluster, s)
    u = rng.random()
    index = int(np.searchsorted(np.cumsum(probabilities), u, side='right'))
    return min(index, len(probabilities) - 1)


def seed_log_prob(preferences: np.ndarray, j: int) -> float:
    shifted = preferences - np.max(preferences)
    return float(shifted[j] - math.log(np.exp(shifted).sum()))


def seed_score(preferences: np.ndarray, j: int) -> np.ndarray:
    """d log tau(j) / d preferences = onehot(j) - tau"""

    score = -softmax(preferences)
    score[j] += 1.0
    return score


# Critic and updates

def td_error(policy: PolicyState, s: int, s_next: int, r: float) -> float:
    """delta = r + epsilon * omega[s_next] - omega[s]"""

    _check_state(policy, s)
    _check_state(policy, s_next)
    return r + policy.epsilon * policy.omega[s_next] - policy.omega[s]


def update_value(policy: PolicyState, s: int, delta: float) -> None:
    policy.omega[s] += policy.alpha_omega * delta


def update_access_policy(policy: PolicyState, cluster: int, s: int, a: float, delta: float) -> None:
    """theta_i[s] += alpha_theta * delta * (log a' - theta_i[s]) / sigma^2"""

    score = access_score(a, policy.theta[cluster, s], policy.sigma)
    policy.theta[cluster, s] += policy.alpha_theta * delta * score


def update_seed_policy(policy: PolicyState, cluster: int, s: int, chosen: int, delta: float) -> None:
    """phi_i[s, :] += alpha_phi * delta * (onehot(chosen) - tau)"""

    row = policy.phi[cluster][s]
    if not 0 <= chosen < row.shape[0]:
        raise PolicyError(f"seed index {chosen} outside [0, {row.shape[0] - 1}]")
    row += policy.alpha_phi * delta * seed_score(row, chosen)


# Rewards

def jain_index(values: Sequence[float]) -> float:
    """Instantaneous Jain index; 0 when every value is 0"""

    total = sum(values)
    squares = sum(v * v for v in values)
    if squares == 0:
        return 0.0
    return total * total / (len(values) * squares)


def reward(kind: RewardKind, successes: Sequence[int]) -> float:
    if any(count < 0 for count in successes):
        raise PolicyError(f"negative success count in {successes}")
    total = float(sum(successes))
    if kind is RewardKind.R1:
        return total
    return total * jain_index(successes)


# Per-interval step

def sample_actions(policy: PolicyState, s: int, rng: np.random.Generator) -> ActionBundle:
    access = tuple(sample_access_prob(policy, cluster, s, rng) for cluster in range(policy.cluster_count))
    indices = {cluster: sample_seed(policy, cluster, s, rng) for cluster in policy.scf_clusters}
    seeds = {cluster: policy.seed_candidates[cluster][j] for cluster, j in indices.items()}
    return ActionBundle(access_probs=access, seed_indices=indices, seeds=seeds)


@dataclass
class StepRecord:
    actions: ActionBundle
    state: int
    reward: float
    delta: float


def agent_step(
    policy: PolicyState,
    prev_state: int,
    prev_actions: ActionBundle,
    successes: Sequence[int],
    rng: np.random.Generator,
    reward_kind: RewardKind = RewardKind.R1,
    last_frame_successes: Optional[Sequence[int]] = None,
    learning: bool = True,
) -> StepRecord:
    """One update of the actor-critic chain, then the next broadcast

    successes are the per-cluster counts summed over the update interval; the
    next state is the total of the interval's last frame (the same counts when
    the interval is one frame).
    """

    last = successes if last_frame_successes is None else last_frame_successes
    s_next = int(sum(last))
    r = reward(reward_kind, successes)
    delta = td_error(policy, prev_state, s_next, r)

    if learning:
        for cluster, a in enumerate(prev_actions.access_probs):
            update_access_policy(policy, cluster, prev_state, a, delta)
        for cluster, chosen in prev_actions.seed_indices.items():
            update_seed_policy(policy, cluster, prev_state, chosen, delta)
        update_value(policy, prev_state, delta)

    return StepRecord(actions=sample_actions(policy, s_next, rng), state=s_next, reward=r, delta=delta)


class PolicyGradientAgent:
    """Stateful wrapper running the step chain from a cold (or warm) start"""

    def __init__(
        self,
        policy: PolicyState,
        rng: np.random.Generator,
        reward_kind: RewardKind = RewardKind.R1,
        learning: bool = True,
    ):
        self.policy = policy
        self.rng = rng
        self.reward_kind = reward_kind
        self.learning = learning
        self.state = 0
        self.actions = sample_actions(policy, self.state, rng)
        self.steps = 0
        self.last_delta = 0.0

    def step(self, successes: Sequence[int], last_frame_successes: Optional[Sequence[int]] = None) -> ActionBundle:
        record = agent_step(
            self.policy,
            self.state,
            self.actions,
            successes,
            self.rng,
            reward_kind=self.reward_kind,
            last_frame_successes=last_frame_successes,
            learning=self.learning,
        )
        self.state = record.state
        self.actions = record.actions
        self.last_delta = record.delta
        self.steps += 1
        if self.steps % 100000 == 0:
            logger.debug(
                "Agent progress",
                steps=self.steps,
                state=self.state,
                access_probs=[round(a, 4) for a in self.actions.access_probs],
            )
        return self.actions
