"""
NOMA Access Sim - Slot Hash
Semi-contention-free slot selection executed by devices

The mixer is the SplitMix64 finalizer, normative for every party that has to
agree on the device-to-slot mapping (base station, devices, external firmware):

    z = x + 0x9E3779B97F4A7C15            (mod 2^64)
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z = z ^ (z >> 31)

    slot = mix64(seed + id) mod L          (0-based)

Golden vector: mix64(1) = 0x910A2DEC89025CC1, so seed=0, id=1, L=4 -> slot 1.
"""

from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence

from scipy import stats

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX_MUL_1 = 0xBF58476D1CE4E5B9
MIX_MUL_2 = 0x94D049BB133111EB

DEFAULT_CANDIDATE_COUNT = 10


def u64(x: int) -> int:
    """Force an integer into the unsigned 64-bit domain"""
    return x & MASK64


def mix64(x: int) -> int:
    """SplitMix64 finalizer (increment included)"""

    z = u64(x + GOLDEN_GAMMA)
    z = u64((z ^ (z >> 30)) * MIX_MUL_1)
    z = u64((z ^ (z >> 27)) * MIX_MUL_2)
    return z ^ (z >> 31)


@dataclass(frozen=True)
class HashSeed:
    """Seed broadcast by the base station to an SCF cluster"""

    value: int

    def __post_init__(self):
        if not 0 <= self.value <= MASK64:
            raise ValueError(f"hash seed must be an unsigned 64-bit integer, got {self.value}")


def hash_slot(seed: HashSeed, device_id: int, slot_count: int) -> int:
    """Slot in [0, slot_count - 1] for a device under the given seed"""

    if slot_count < 1:
        raise ValueError(f"slot_count must be >= 1, got {slot_count}")
    return mix64(u64(seed.value + device_id)) % slot_count


def candidate_seeds(q: int, master_seed: int) -> List[HashSeed]:
    """q distinct seeds drawn deterministically from master_seed"""

    if q < 1:
        raise ValueError(f"candidate seed count must be >= 1, got {q}")

    seeds: List[HashSeed] = []
    seen = set()
    state = u64(master_seed)
    while len(seeds) < q:
        state = u64(state + GOLDEN_GAMMA)
        value = mix64(state)
        if value in seen:
            continue
        seen.add(value)
        seeds.append(HashSeed(value))
    return seeds


def slot_map(seed: HashSeed, device_ids: Iterable[int], slot_count: int) -> Dict[int, int]:
    """Device id -> slot for every id under one seed"""
    return {device_id: hash_slot(seed, device_id, slot_count) for device_id in device_ids}


def collision_count(seed: HashSeed, device_ids: Sequence[int], slot_count: int) -> int:
    """Number of devices whose slot is shared with at least one other device"""

    if len(set(device_ids)) != len(device_ids):
        raise ValueError("device ids must be distinct")

    occupancy = Counter(hash_slot(seed, device_id, slot_count) for device_id in device_ids)
    return sum(count for count in occupancy.values() if count > 1)


def collision_minimal_seed(seeds: Sequence[HashSeed], device_ids: Sequence[int], slot_count: int) -> int:
    """Index of the candidate seed with the fewest collisions (lowest index on ties)"""

    best_index = 0
    best_collisions = None
    for index, seed in enumerate(seeds):
        collisions = collision_count(seed, device_ids, slot_count)
        if best_collisions is None or collisions < best_collisions:
            best_index, best_collisions = index, collisions
    return best_index


def slot_uniformity(seed: HashSeed, device_ids: Iterable[int], slot_count: int) -> Dict[str, float]:
    """Chi-square goodness of fit of the slot histogram against uniform"""

    histogram = [0] * slot_count
    for device_id in device_ids:
        histogram[hash_slot(seed, device_id, slot_count)] += 1

    result = stats.chisquare(histogram)
    return {
        'statistic': float(result.statistic),
        'p_value': float(result.pvalue),
        'samples': float(sum(histogram)),
    }
