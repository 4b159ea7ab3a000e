"""
NOMA Access Sim - Random Streams
Named substreams fanned out from one master seed

Every random entity (device, channel, agent, calibration) owns a stream whose
seed is mix64-chained from the master seed and the entity's label, so adding
devices never perturbs the draws of the others.
"""

from typing import Union

import numpy as np

from noma_access.access.slot_hash import mix64, u64

# Stream labels
STREAM_DEVICE = 1
STREAM_CHANNEL = 2
STREAM_AGENT = 3
STREAM_PLACEMENT = 4
STREAM_SEEDS = 5
STREAM_REPLICATION = 6
STREAM_CALIBRATION = 7

Label = Union[int, str]


def _label_value(label: Label) -> int:
    if isinstance(label, int):
        return u64(label)
    value = 0
    for byte in label.encode('utf-8'):
        value = mix64(value ^ byte)
    return value


def derive_seed(master_seed: int, *labels: Label) -> int:
    """Substream seed for the given label path"""

    state = mix64(u64(master_seed))
    for label in labels:
        state = mix64(state ^ _label_value(label))
    return state


def substream(master_seed: int, *labels: Label) -> np.random.Generator:
    """Independent numpy Generator for the given label path"""
    return np.random.Generator(np.random.PCG64(derive_seed(master_seed, *labels)))


class UniformStream:
    """Buffered U[0,1) draws from one substream

    The simulator draws a handful of scalars per device per frame; pulling them
    one at a time out of a block keeps the inner loop in plain floats.
    """

    def __init__(self, generator: np.random.Generator, block: int = 4096):
        self._generator = generator
        self._block = block
        self._buffer = generator.random(block).tolist()
        self._index = 0

    def next(self) -> float:
        if self._index == self._block:
            self._buffer = self._generator.random(self._block).tolist()
            self._index = 0
        value = self._buffer[self._index]
        self._index += 1
        return value

    def below(self, n: int) -> int:
        """Uniform integer in [0, n - 1]"""
        return min(int(self.next() * n), n - 1)

    @property
    def generator(self) -> np.random.Generator:
        return self._generator
