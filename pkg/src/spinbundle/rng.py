"""Counter-based random streams.

Every stream is a Philox generator whose key holds the user seed and a
domain tag, and whose counter holds the (component, ell) block index. A block
therefore produces the same numbers no matter which other blocks are drawn,
in which order, or on which thread.
"""

import numpy as np

from .errors import InvalidArgument

SEED_LIMIT = 2**64

# domain tags, one per kind of sampled quantity
COEFFICIENTS = 0
BALL = 1


def check_seed(seed):
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise InvalidArgument(f"seed must be an integer, got {type(seed).__name__}")
    seed = int(seed)
    if not 0 <= seed < SEED_LIMIT:
        raise InvalidArgument(f"seed must lie in [0, 2**64), got {seed}")
    return seed


def block_stream(seed, domain, component, ell):
    """Generator for the block keyed by (seed, domain, component, ell)."""
    seed = check_seed(seed)
    key = np.array([seed, domain], dtype=np.uint64)
    # the low two counter words are left for Philox to advance inside a block
    counter = np.array([0, 0, ell, component], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))
