"""Per-replication random streams.

Every replication owns a counter-based Philox stream keyed by
(master seed, stream tag, replication index), so the draws a replication sees
do not depend on how replications are spread over workers.
"""
import zlib
from typing import Iterator

import numpy as np

RandomStream = np.random.Generator


def stream_tag(name: str) -> int:
    """Stable 32-bit tag for a named stream family."""
    return zlib.crc32(name.encode("utf-8"))


def replication_stream(master_seed: int, replication: int, tag: str = "replication") -> RandomStream:
    if master_seed < 0 or master_seed >= 2**64:
        raise ValueError(f"Master seed must be a 64-bit unsigned integer, got {master_seed}")
    if replication < 0:
        raise ValueError(f"Replication index must be nonnegative, got {replication}")
    sequence = np.random.SeedSequence([master_seed, stream_tag(tag), replication])
    return np.random.Generator(np.random.Philox(sequence))


def replication_streams(master_seed: int, count: int, tag: str = "replication") -> Iterator[RandomStream]:
    for replication in range(count):
        yield replication_stream(master_seed, replication, tag)
