"""Linear-time samplers for the Ewens and record-biased distributions.

Every sampler is split in two halves:

* a *choice vector*: one draw per step, where choice 0 is the
  "theta-weighted" branch (new cycle, record, leftmost slot, new sequence)
  taken with probability theta/(theta+m), and choices 1..m are the m
  ordinary branches, each with probability 1/(theta+m);
* a deterministic *build* kernel turning the choice vector into a word.

``step_sizes(kind, n)`` gives the m of each step.  Random sampling draws the
choices from a :class:`~rbperm.rng.RandomStream`; the exact oracle feeds the
same build kernels with every possible choice vector instead.
"""

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

from .core import (
    Permutation,
    count_descents,
    count_inversions,
    count_records,
    foata_word,
)
from .rng import RandomStream, derive_seed, draw_choices, seed_state


class NonPositiveTheta(ValueError):
    pass


@dataclass(frozen=True)
class RecordBias:
    """How theta depends on the size n.

    ``mode`` is ``"fixed"`` (theta = value), ``"linear"`` (theta = value * n)
    or ``"power"`` (theta = n ** value).
    """

    mode: str
    value: float

    def __post_init__(self):
        if self.mode not in ("fixed", "linear", "power"):
            raise ValueError(f"unknown bias mode {self.mode!r}")
        if not (self.value > 0 and math.isfinite(self.value)):
            raise NonPositiveTheta(f"bias parameter must be positive and finite, got {self.value}")

    @classmethod
    def fixed(cls, theta):
        return cls("fixed", float(theta))

    @classmethod
    def linear(cls, lam):
        return cls("linear", float(lam))

    @classmethod
    def power(cls, exponent):
        return cls("power", float(exponent))

    @classmethod
    def parse(cls, text: str) -> "RecordBias":
        """Parse ``fixed:<x>``, ``linear:<lambda>`` or ``power:<e>``."""
        mode, sep, value = text.partition(":")
        if not sep:
            raise ValueError(f"theta setting {text!r} is not of the form mode:value")
        try:
            v = float(value)
        except ValueError:
            raise ValueError(f"bad number in theta setting {text!r}") from None
        return cls(mode.strip(), v)

    def __str__(self):
        return f"{self.mode}:{self.value:g}"


def resolve_theta(bias: RecordBias, n: int) -> float:
    if n < 1:
        raise ValueError("n must be at least 1")
    if bias.mode == "fixed":
        theta = bias.value
    elif bias.mode == "linear":
        theta = bias.value * n
    else:
        try:
            theta = float(n) ** bias.value
        except OverflowError:
            theta = math.inf
    if not (theta > 0 and math.isfinite(theta)):
        raise NonPositiveTheta(f"resolved theta {theta} for {bias} at n={n}")
    return theta


class SamplerKind(enum.Enum):
    SLOTS = "slots"
    SEQUENCES = "sequences"
    DIAGRAM = "diagram"
    FOATA = "foata"


# kernel codes; EWENS is not a record-biased sampler but shares the machinery
_EWENS, _SLOTS, _SEQUENCES, _DIAGRAM, _FOATA = 0, 1, 2, 3, 4
_CODES = {
    "ewens": _EWENS,
    SamplerKind.SLOTS: _SLOTS,
    SamplerKind.SEQUENCES: _SEQUENCES,
    SamplerKind.DIAGRAM: _DIAGRAM,
    SamplerKind.FOATA: _FOATA,
}


def _code(kind):
    if isinstance(kind, str) and kind != "ewens":
        kind = SamplerKind(kind)
    return _CODES[kind]


@njit(cache=True, nogil=True)
def _fill_steps(code, n, out):
    if code == _SLOTS:
        for t in range(n):
            out[t] = n - 1 - t
    elif code == _SEQUENCES:
        # first step must open a sequence; then n-1, n-2, ..., 1 values remain
        for t in range(n):
            out[t] = 0 if t == 0 else n - t
    else:
        for t in range(n):
            out[t] = t


def step_sizes(kind, n: int) -> np.ndarray:
    """Number m of ordinary branches at each of the n steps of a sampler."""
    out = np.empty(n, dtype=np.int64)
    _fill_steps(_code(kind), n, out)
    return out


@njit(cache=True, nogil=True)
def build_ewens(choices, out):
    """Chinese restaurant process; out receives sigma as a word.

    Choice 0 at step i makes i a fixed point; choice j >= 1 inserts i just
    before j in j's cycle.
    """
    n = choices.shape[0]
    pre = np.empty(n + 1, dtype=np.int64)
    for i in range(1, n + 1):
        c = choices[i - 1]
        if c == 0:
            out[i - 1] = i
            pre[i] = i
        else:
            p = pre[c]
            out[p - 1] = i
            pre[i] = p
            out[i - 1] = c
            pre[c] = i


@njit(cache=True, nogil=True)
def build_slots(choices, out):
    """Place 1..n into empty slots.

    L (nxt/prv) is the doubly linked list of empty slots in increasing order,
    cell k holding slot k; ``a[:size]`` lists the empty slots except the
    leftmost one, and ``inv_a`` locates a slot inside ``a``.  Choice 0 fills
    the leftmost empty slot, choice k fills ``a[k-1]``.
    """
    n = choices.shape[0]
    nxt = np.empty(n + 2, dtype=np.int64)
    prv = np.empty(n + 2, dtype=np.int64)
    for k in range(n + 2):
        nxt[k] = k + 1
        prv[k] = k - 1
    a = np.empty(max(n - 1, 1), dtype=np.int64)
    inv_a = np.empty(n + 1, dtype=np.int64)
    size = n - 1
    for k in range(size):
        a[k] = k + 2
        inv_a[k + 2] = k
    for i in range(1, n + 1):
        c = choices[i - 1]
        if c == 0:
            pos = nxt[0]
            new_min = nxt[pos]
            if new_min <= n:
                k = inv_a[new_min]
                last = a[size - 1]
                a[k] = last
                inv_a[last] = k
                size -= 1
        else:
            k = c - 1
            pos = a[k]
            last = a[size - 1]
            a[k] = last
            inv_a[last] = k
            size -= 1
        nx = nxt[pos]
        pv = prv[pos]
        nxt[pv] = nx
        prv[nx] = pv
        out[pos - 1] = i


@njit(cache=True, nogil=True)
def build_sequences(choices, out):
    """Sequences of values built from right to left.

    Choice 0 opens a new sequence (to the left of the previous ones) headed
    by the largest remaining value; choice k appends ``a[k-1]`` to the open
    sequence.  Here ``a`` holds every remaining value, the maximum included,
    and the linked list L over values gives the maximum in O(1).
    """
    n = choices.shape[0]
    nxt = np.empty(n + 2, dtype=np.int64)
    prv = np.empty(n + 2, dtype=np.int64)
    for k in range(n + 2):
        nxt[k] = k + 1
        prv[k] = k - 1
    a = np.empty(max(n, 1), dtype=np.int64)
    inv_a = np.empty(n + 1, dtype=np.int64)
    size = n
    for k in range(n):
        a[k] = k + 1
        inv_a[k + 1] = k
    placed = np.empty(n, dtype=np.int64)
    starts = np.empty(n + 1, dtype=np.int64)
    nseq = 0
    for t in range(n):
        c = choices[t]
        if c == 0:
            v = prv[n + 1]
            k = inv_a[v]
            starts[nseq] = t
            nseq += 1
        else:
            k = c - 1
            v = a[k]
        last = a[size - 1]
        a[k] = last
        inv_a[last] = k
        size -= 1
        nx = nxt[v]
        pv = prv[v]
        nxt[pv] = nx
        prv[nx] = pv
        placed[t] = v
    starts[nseq] = n
    # flatten: last created sequence is leftmost
    k = 0
    for s in range(nseq - 1, -1, -1):
        for t in range(starts[s], starts[s + 1]):
            out[k] = placed[t]
            k += 1


@njit(cache=True, nogil=True)
def build_diagram(choices, out):
    """Insert columns left to right into a list ordered by decreasing height.

    Choice 0 puts the new point on top; choice j puts it just below the
    point of column j.  Reading the list from the bottom gives sigma^-1,
    which is inverted in the final pass.
    """
    n = choices.shape[0]
    nxt = np.empty(n + 1, dtype=np.int64)
    nxt[0] = -1
    for i in range(1, n + 1):
        c = choices[i - 1]
        nxt[i] = nxt[c]
        nxt[c] = i
    h = n
    col = nxt[0]
    while col != -1:
        out[col - 1] = h
        h -= 1
        col = nxt[col]


@njit(cache=True, nogil=True)
def build_word(code, choices, out, scratch):
    if code == _EWENS:
        build_ewens(choices, out)
    elif code == _SLOTS:
        build_slots(choices, out)
    elif code == _SEQUENCES:
        build_sequences(choices, out)
    elif code == _DIAGRAM:
        build_diagram(choices, out)
    else:
        build_ewens(choices, scratch)
        foata_word(scratch, out)


def build(kind, choices) -> Permutation:
    """Word produced by a sampler for an explicit choice vector."""
    choices = np.ascontiguousarray(choices, dtype=np.int64)
    n = choices.shape[0]
    out = np.empty(n, dtype=np.int64)
    build_word(_code(kind), choices, out, np.empty(n, dtype=np.int64))
    return Permutation._trusted(out)


def _check(n, theta):
    if n < 0:
        raise ValueError("n must be non-negative")
    if not (theta > 0 and math.isfinite(theta)):
        raise NonPositiveTheta(f"theta must be positive and finite, got {theta}")


def _sample(kind, n, theta, stream):
    _check(n, theta)
    return build(kind, stream.choices(step_sizes(kind, n), theta))


def sample_ewens(n: int, theta: float, stream: RandomStream) -> Permutation:
    """Ewens permutation: probability theta**cyc / theta^(n)."""
    return _sample("ewens", n, theta, stream)


def sample_slots(n: int, theta: float, stream: RandomStream) -> Permutation:
    return _sample(SamplerKind.SLOTS, n, theta, stream)


def sample_sequences(n: int, theta: float, stream: RandomStream) -> Permutation:
    return _sample(SamplerKind.SEQUENCES, n, theta, stream)


def sample_diagram(n: int, theta: float, stream: RandomStream) -> Permutation:
    return _sample(SamplerKind.DIAGRAM, n, theta, stream)


def sample_foata(n: int, theta: float, stream: RandomStream) -> Permutation:
    """Foata image of an Ewens permutation."""
    return _sample(SamplerKind.FOATA, n, theta, stream)


def sample(kind, n: int, theta: float, stream: RandomStream) -> Permutation:
    return _sample(kind, n, theta, stream)


@njit(cache=True, nogil=True)
def _batch_words(code, n, theta, seed, start, out):
    steps = np.empty(n, dtype=np.int64)
    _fill_steps(code, n, steps)
    choices = np.empty(n, dtype=np.int64)
    scratch = np.empty(n, dtype=np.int64)
    state = np.empty(4, dtype=np.uint64)
    for r in range(out.shape[0]):
        seed_state(derive_seed(seed, np.uint64(start + r)), state)
        draw_choices(state, theta, steps, choices)
        build_word(code, choices, out[r], scratch)


# columns of the statistics table returned by batch_statistics
STAT_COLUMNS = ("records", "descents", "inversions", "first_value")


@njit(cache=True, nogil=True)
def _batch_stats(code, n, theta, seed, start, with_inv, out):
    steps = np.empty(n, dtype=np.int64)
    _fill_steps(code, n, steps)
    choices = np.empty(n, dtype=np.int64)
    scratch = np.empty(n, dtype=np.int64)
    word = np.empty(n, dtype=np.int64)
    state = np.empty(4, dtype=np.uint64)
    for r in range(out.shape[0]):
        seed_state(derive_seed(seed, np.uint64(start + r)), state)
        draw_choices(state, theta, steps, choices)
        build_word(code, choices, word, scratch)
        out[r, 0] = count_records(word)
        out[r, 1] = count_descents(word)
        out[r, 2] = count_inversions(word) if with_inv else -1
        out[r, 3] = word[0] if n > 0 else 0


@njit(cache=True, nogil=True)
def _batch_heatmap(code, n, theta, seed, start, stop, counts):
    steps = np.empty(n, dtype=np.int64)
    _fill_steps(code, n, steps)
    choices = np.empty(n, dtype=np.int64)
    scratch = np.empty(n, dtype=np.int64)
    word = np.empty(n, dtype=np.int64)
    state = np.empty(4, dtype=np.uint64)
    for r in range(start, stop):
        seed_state(derive_seed(seed, np.uint64(r)), state)
        draw_choices(state, theta, steps, choices)
        build_word(code, choices, word, scratch)
        for i in range(n):
            counts[i, word[i] - 1] += 1


def _u64(seed):
    return np.uint64(int(seed) & ((1 << 64) - 1))


def _chunks(count, chunk):
    return [(s, min(s + chunk, count)) for s in range(0, count, chunk)]


def _run_chunks(fn, bounds, workers):
    if workers is None or workers <= 1 or len(bounds) <= 1:
        for b in bounds:
            fn(*b)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda b: fn(*b), bounds))


def _resolve(bias, n):
    if isinstance(bias, RecordBias):
        return resolve_theta(bias, n) if n >= 1 else 1.0
    theta = float(bias)
    _check(n, theta)
    return theta


def batch_words(kind, n: int, bias, count: int, seed: int, workers=None, chunk=4096) -> np.ndarray:
    """``count`` sampled words as a (count, n) int64 array.

    Row k is generated from the stream ``derive(seed, k)``, so the result
    depends only on the arguments, never on ``workers`` or ``chunk``.
    ``bias`` is a :class:`RecordBias` or a plain theta.
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    theta = _resolve(bias, n)
    code = _code(kind)
    out = np.empty((count, n), dtype=np.int64)
    s = _u64(seed)

    def work(a, b):
        _batch_words(code, n, theta, s, a, out[a:b])

    _run_chunks(work, _chunks(count, chunk), workers)
    return out


def batch_sample(kind, n: int, bias, count: int, seed: int, workers=None):
    """``count`` permutations; sample k uses the stream ``derive(seed, k)``."""
    return [Permutation._trusted(row) for row in batch_words(kind, n, bias, count, seed, workers)]


def batch_statistics(kind, n: int, bias, count: int, seed: int, workers=None, chunk=4096,
                     inversions=True) -> np.ndarray:
    """Statistics of ``count`` samples without storing the permutations.

    Returns a (count, 4) int64 array with columns :data:`STAT_COLUMNS`;
    row k matches ``statistics(batch_sample(...)[k])``.  Counting inversions
    costs O(n log n) per sample; with ``inversions=False`` that column is -1.
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    theta = _resolve(bias, n)
    code = _code(kind)
    out = np.empty((count, 4), dtype=np.int64)
    s = _u64(seed)

    def work(a, b):
        _batch_stats(code, n, theta, s, a, bool(inversions), out[a:b])

    _run_chunks(work, _chunks(count, chunk), workers)
    return out


def batch_heatmap(kind, n: int, bias, count: int, seed: int, workers=None, chunk=4096) -> np.ndarray:
    """(n, n) matrix whose entry [i-1, j-1] counts samples with sigma(i) = j."""
    if count < 0:
        raise ValueError("count must be non-negative")
    theta = _resolve(bias, n)
    code = _code(kind)
    s = _u64(seed)
    bounds = _chunks(count, chunk)
    parts = [np.zeros((n, n), dtype=np.int64) for _ in bounds]

    def work(k):
        a, b = bounds[k]
        _batch_heatmap(code, n, theta, s, a, b, parts[k])

    _run_chunks(work, [(k,) for k in range(len(bounds))], workers)
    total = np.zeros((n, n), dtype=np.int64)
    for part in parts:
        total += part
    return total
