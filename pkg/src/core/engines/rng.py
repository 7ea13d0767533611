"""
Counter-based random streams.

A stream is addressed by an RngStreamKey. The key is hashed through numpy's
SeedSequence into a Philox key, so (seed, stream_id, draw index) fully
determines every value. Child streams for components, time steps and
Monte Carlo shards are derived by hashing the parent stream_id with an index
path, never by advancing shared state.
"""
from typing import Tuple

import numpy as np

from ..models.schemas import RngStreamKey

STREAM_ROLES = {
    # keeps alpha, Brownian and bootstrap families apart under one seed
    "jump": 1,
    "diffusion": 2,
    "bootstrap": 3,
    "experiment": 4,
}


def derive_key(key: RngStreamKey, *path: int) -> RngStreamKey:
    """Child stream for the index path (e.g. step, component)."""
    if not path:
        return key
    seq = np.random.SeedSequence(entropy=[key.seed, key.stream_id, len(path), *map(int, path)])
    child_id = int(seq.generate_state(1, dtype=np.uint64)[0])
    return RngStreamKey(seed=key.seed, stream_id=child_id)


def generator_for(key: RngStreamKey) -> np.random.Generator:
    """A fresh Generator positioned at draw index 0 of the stream."""
    seq = np.random.SeedSequence(entropy=key.seed, spawn_key=(key.stream_id,))
    return np.random.Generator(np.random.Philox(seq))


def uniform_pair(key: RngStreamKey, size=None) -> Tuple[np.ndarray, np.ndarray]:
    """
    The two uniforms every stable or Gaussian draw starts from.

    V is uniform on (-pi/2, pi/2) and W is standard exponential. Sharing this
    layout between the stable transform and the Gaussian draw is what makes
    common-random-number coupling across alpha possible.
    """
    rng = generator_for(key)
    u = rng.random(size=size)
    v = np.pi * (u - 0.5)
    w = rng.standard_exponential(size=size)
    return v, w
