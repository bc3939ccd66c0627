"""Seedable random streams usable both from Python and from numba kernels.

The generator is xoshiro256** (period 2**256 - 1), seeded by expanding a
64-bit seed through splitmix64.  Streams for batch work are obtained with
:func:`derive`, which mixes ``(seed, index)`` through the splitmix64
finalizer so that sample ``k`` of a batch never depends on how the batch was
split across workers.

Exact output streams belong to this particular generator; only the distributions
of the derived draws are part of the public contract.
"""

import numpy as np
from numba import njit

_MASK64 = (1 << 64) - 1

_U_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_U_M1 = np.uint64(0xBF58476D1CE4E5B9)
_U_M2 = np.uint64(0x94D049BB133111EB)
_U_5 = np.uint64(5)
_U_9 = np.uint64(9)
_S7 = np.uint64(7)
_S11 = np.uint64(11)
_S17 = np.uint64(17)
_S27 = np.uint64(27)
_S30 = np.uint64(30)
_S31 = np.uint64(31)
_S45 = np.uint64(45)
_U64 = np.uint64(64)
_ONE = np.uint64(1)
_TWO_M53 = 1.0 / 9007199254740992.0


@njit(cache=True, nogil=True)
def mix64(x):
    """splitmix64 finalizer on a uint64."""
    z = x
    z = (z ^ (z >> _S30)) * _U_M1
    z = (z ^ (z >> _S27)) * _U_M2
    return z ^ (z >> _S31)


@njit(cache=True, nogil=True)
def seed_state(seed, state):
    """Fill a 4-word xoshiro state from a uint64 seed via splitmix64."""
    x = seed
    for k in range(4):
        x = x + _U_GOLDEN
        state[k] = mix64(x)


@njit(cache=True, nogil=True)
def derive_seed(seed, index):
    return mix64(seed ^ mix64(index * _U_GOLDEN + _U_M2))


@njit(cache=True, nogil=True)
def _rotl(x, k):
    return (x << k) | (x >> (_U64 - k))


@njit(cache=True, nogil=True)
def next_u64(state):
    s0 = state[0]
    s1 = state[1]
    s2 = state[2]
    s3 = state[3]
    result = _rotl(s1 * _U_5, _S7) * _U_9
    t = s1 << _S17
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = _rotl(s3, _S45)
    state[0] = s0
    state[1] = s1
    state[2] = s2
    state[3] = s3
    return result


@njit(cache=True, nogil=True)
def next_uniform(state):
    """Uniform double in [0, 1) built from the top 53 bits."""
    return float(next_u64(state) >> _S11) * _TWO_M53


@njit(cache=True, nogil=True)
def next_below(state, m):
    """Uniform integer in [0, m) by bitmask rejection (no modulo bias)."""
    if m <= 1:
        return 0
    bound = np.uint64(m - 1)
    shift = np.uint64(0)
    while (bound >> shift) > _ONE:
        shift += _ONE
    # bits = shift + 1 significant bits are needed to cover m - 1
    drop = _U64 - (shift + _ONE)
    while True:
        x = next_u64(state) >> drop
        if x <= bound:
            return np.int64(x)


@njit(cache=True, nogil=True)
def draw_choices(state, theta, steps, out):
    """Draw one weighted choice per step.

    At a step with ``m = steps[t]`` ordinary options, choice 0 is taken with
    probability theta/(theta+m) and each of the choices 1..m with
    probability 1/(theta+m).
    """
    for t in range(steps.shape[0]):
        m = steps[t]
        if m == 0:
            out[t] = 0
        elif next_uniform(state) * (theta + m) < theta:
            out[t] = 0
        else:
            out[t] = 1 + next_below(state, m)


def _as_u64(value):
    return np.uint64(int(value) & _MASK64)


def derive(seed, index):
    """Deterministic 64-bit seed for stream ``index`` of a batch seeded by ``seed``."""
    return int(derive_seed(_as_u64(seed), _as_u64(index)))


class RandomStream:
    """A seeded xoshiro256** stream.

    Identical seeds give identical draw sequences.  A stream is meant to be
    owned by one thread at a time.
    """

    def __init__(self, seed=0):
        self.seed = int(seed) & _MASK64
        self.state = np.empty(4, dtype=np.uint64)
        seed_state(np.uint64(self.seed), self.state)

    @classmethod
    def derived(cls, seed, index):
        return cls(derive(seed, index))

    def next_u64(self) -> int:
        return int(next_u64(self.state))

    def uniform(self) -> float:
        return float(next_uniform(self.state))

    def below(self, m: int) -> int:
        """Uniform integer in ``range(m)``."""
        if m < 1:
            raise ValueError("range must be non-empty")
        return int(next_below(self.state, m))

    def choices(self, steps, theta: float) -> np.ndarray:
        steps = np.ascontiguousarray(steps, dtype=np.int64)
        out = np.empty(steps.shape[0], dtype=np.int64)
        draw_choices(self.state, float(theta), steps, out)
        return out

    def __repr__(self):
        return f"RandomStream(seed={self.seed})"
