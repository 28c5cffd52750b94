"""Named random streams derived from one master seed.

Every stochastic component draws from its own stream so that, e.g., changing
the number of training episodes never perturbs instance generation. Streams
are derived by hashing the master seed together with a path of names, which
is stable across platforms and process boundaries.
"""

from __future__ import annotations

import hashlib

import numpy as np


def stream_seed(master_seed: int, *names: object) -> int:
    """64-bit child seed for the named stream under master_seed."""
    label = f"{master_seed}/" + "/".join(str(n) for n in names)
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def stream_rng(master_seed: int, *names: object) -> np.random.Generator:
    return np.random.default_rng(stream_seed(master_seed, *names))
