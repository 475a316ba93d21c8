"""
Counter-based random streams.

Every chunk of trials gets its own Philox generator keyed by
(seed, stream) with the chunk index in the top counter word, so a chunk's
draws depend only on (seed, stream, chunk) and never on which worker
produced it or in which order. Source, Alice's instrument and Bob's
instrument use separate streams.
"""
import numpy as np

from src.errors import ConfigError

STREAM_SOURCE = 0
STREAM_INSTRUMENT_A = 1
STREAM_INSTRUMENT_B = 2
STREAM_BEAM = 3

_U64 = 1 << 64


def check_seed(seed: int) -> int:
    if isinstance(seed, bool) or int(seed) != seed or not 0 <= int(seed) < _U64:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return int(seed)


def chunk_generator(seed: int, stream: int, chunk: int) -> np.random.Generator:
    key = (stream << 64) | check_seed(seed)
    return np.random.Generator(np.random.Philox(key=key, counter=chunk << 192))


def derive_seed(seed: int, *path: int) -> int:
    """Child seed for a sub-task (grid point, restart, context) of a seeded run."""
    sequence = np.random.SeedSequence([check_seed(seed), *path])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def chunk_bounds(n: int, chunk_size: int):
    for index, start in enumerate(range(0, n, chunk_size)):
        yield index, start, min(start + chunk_size, n)
