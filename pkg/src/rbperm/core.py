"""Permutations as words, their cycles, scalar statistics and Foata's bijection.

All public semantics are 1-based: a permutation of size n is the word
``sigma(1) ... sigma(n)`` over the values 1..n.  Internally the word is a
read-only int64 numpy array, so position ``i`` lives at index ``i - 1``.
"""

from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np
from numba import njit


class PermutationError(ValueError):
    pass


class NotABijection(PermutationError):
    pass


class NotAPartition(PermutationError):
    pass


class EmptyPermutation(PermutationError):
    pass


class PositionOutOfRange(PermutationError):
    pass


def _freeze(arr):
    arr.flags.writeable = False
    return arr


class Permutation:
    """An immutable permutation of {1, ..., n} stored as its word."""

    __slots__ = ("_word", "_hash")

    def __init__(self, values: Iterable[int] = ()):
        arr = np.array(list(values) if not isinstance(values, np.ndarray) else values)
        if arr.ndim != 1:
            raise NotABijection("a permutation word must be one-dimensional")
        if arr.size and not np.issubdtype(arr.dtype, np.integer):
            if not np.all(np.equal(np.mod(arr, 1), 0)):
                raise NotABijection("permutation values must be integers")
        arr = arr.astype(np.int64)
        n = arr.shape[0]
        if n:
            if arr.min() < 1 or arr.max() > n:
                raise NotABijection(f"values must lie in 1..{n}")
            if np.any(np.bincount(arr, minlength=n + 1)[1:] != 1):
                raise NotABijection("each value of 1..n must appear exactly once")
        self._word = _freeze(arr)
        self._hash = None

    @classmethod
    def _trusted(cls, arr: np.ndarray) -> "Permutation":
        # skips validation; only for words produced by this package's kernels
        p = object.__new__(cls)
        p._word = _freeze(np.ascontiguousarray(arr, dtype=np.int64))
        p._hash = None
        return p

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls._trusted(np.arange(1, n + 1, dtype=np.int64))

    @property
    def word(self) -> np.ndarray:
        return self._word

    @property
    def n(self) -> int:
        return self._word.shape[0]

    def __len__(self):
        return self._word.shape[0]

    def __call__(self, i: int) -> int:
        """sigma(i) for 1 <= i <= n."""
        if not 1 <= i <= self.n:
            raise PositionOutOfRange(f"position {i} outside 1..{self.n}")
        return int(self._word[i - 1])

    def __iter__(self):
        return iter(self._word.tolist())

    def tolist(self):
        return self._word.tolist()

    def __eq__(self, other):
        if not isinstance(other, Permutation):
            return NotImplemented
        return np.array_equal(self._word, other._word)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._word.tobytes())
        return self._hash

    def __repr__(self):
        if self.n > 20:
            head = ", ".join(map(str, self._word[:10].tolist()))
            return f"Permutation([{head}, ...], n={self.n})"
        return f"Permutation({self._word.tolist()})"

    def to_text(self) -> str:
        """One-line text form, e.g. ``"6 3 2 1 7 4 5"``."""
        return " ".join(map(str, self._word.tolist()))

    @classmethod
    def parse(cls, line: str) -> "Permutation":
        return cls(int(tok) for tok in line.split())


def from_word(values: Iterable[int]) -> Permutation:
    return Permutation(values)


def reverse(p: Permutation) -> Permutation:
    return Permutation._trusted(p.word[::-1].copy())


def inverse(p: Permutation) -> Permutation:
    out = np.empty(p.n, dtype=np.int64)
    out[p.word - 1] = np.arange(1, p.n + 1)
    return Permutation._trusted(out)


Cycles = Tuple[Tuple[int, ...], ...]


def _max_first(cycle: Sequence[int]) -> Tuple[int, ...]:
    k = max(range(len(cycle)), key=cycle.__getitem__)
    return tuple(cycle[k:]) + tuple(cycle[:k])


def canonical_cycles(cycles: Iterable[Sequence[int]]) -> Cycles:
    """Each cycle rotated to start at its maximum, cycles sorted by that maximum."""
    return tuple(sorted((_max_first(list(c)) for c in cycles if len(c)), key=lambda c: c[0]))


def to_cycles(p: Permutation) -> Cycles:
    """Cycle decomposition, in canonical order (see :func:`canonical_cycles`)."""
    w = p.word
    seen = np.zeros(p.n + 1, dtype=bool)
    cycles = []
    for start in range(1, p.n + 1):
        if seen[start]:
            continue
        cyc = []
        i = start
        while not seen[i]:
            seen[i] = True
            cyc.append(i)
            i = int(w[i - 1])
        cycles.append(cyc)
    return canonical_cycles(cycles)


def from_cycles(cycles: Iterable[Sequence[int]]) -> Permutation:
    cycles = [list(c) for c in cycles]
    elems = [x for c in cycles for x in c]
    n = len(elems)
    if sorted(elems) != list(range(1, n + 1)):
        raise NotAPartition("cycles must partition 1..n with no repeated element")
    out = np.empty(n, dtype=np.int64)
    for c in cycles:
        for k, x in enumerate(c):
            out[x - 1] = c[(k + 1) % len(c)]
    return Permutation._trusted(out)


@dataclass(frozen=True)
class StatSummary:
    records: int
    descents: int
    inversions: int
    cycles: int
    first_value: int
    weak_exceedances: int
    anti_exceedances: int


@njit(cache=True, nogil=True)
def count_records(word):
    best = 0
    rec = 0
    for v in word:
        if v > best:
            best = v
            rec += 1
    return rec


@njit(cache=True, nogil=True)
def count_descents(word):
    d = 0
    for k in range(1, word.shape[0]):
        if word[k - 1] > word[k]:
            d += 1
    return d


@njit(cache=True, nogil=True)
def _inv_profile_into(word, tree, out):
    # Fenwick tree over values: out[j] = #{i < j : w[i] > w[j]}, O(n log n)
    n = word.shape[0]
    for k in range(n + 1):
        tree[k] = 0
    for j in range(n):
        v = word[j]
        smaller = 0
        i = v
        while i > 0:
            smaller += tree[i]
            i -= i & (-i)
        out[j] = j - smaller
        i = v
        while i <= n:
            tree[i] += 1
            i += i & (-i)


@njit(cache=True, nogil=True)
def count_inversions(word):
    n = word.shape[0]
    tree = np.empty(n + 1, dtype=np.int64)
    prof = np.empty(n, dtype=np.int64)
    _inv_profile_into(word, tree, prof)
    return prof.sum()


@njit(cache=True, nogil=True)
def count_cycles(word):
    n = word.shape[0]
    seen = np.zeros(n + 1, dtype=np.bool_)
    c = 0
    for s in range(1, n + 1):
        if not seen[s]:
            c += 1
            i = s
            while not seen[i]:
                seen[i] = True
                i = word[i - 1]
    return c


def statistics(p: Permutation) -> StatSummary:
    """All scalar statistics of a non-empty permutation.

    Inversions are counted with a Fenwick tree in O(n log n).
    """
    if p.n == 0:
        raise EmptyPermutation("statistics are undefined for the empty permutation")
    w = p.word
    weak = int(np.count_nonzero(w >= np.arange(1, p.n + 1)))
    return StatSummary(
        records=int(count_records(w)),
        descents=int(count_descents(w)),
        inversions=int(count_inversions(w)),
        cycles=int(count_cycles(w)),
        first_value=int(w[0]),
        weak_exceedances=weak,
        anti_exceedances=p.n - weak,
    )


def inv_profile(p: Permutation) -> np.ndarray:
    """``out[j-1] = inv_j(sigma)``, the number of inversions ending at position j."""
    tree = np.empty(p.n + 1, dtype=np.int64)
    out = np.empty(p.n, dtype=np.int64)
    _inv_profile_into(p.word, tree, out)
    return out


def lmax(p: Permutation, i: int) -> int:
    """Largest of the first i values."""
    if not 1 <= i <= p.n:
        raise PositionOutOfRange(f"position {i} outside 1..{p.n}")
    return int(p.word[:i].max())


def prefix_maxima(p: Permutation) -> np.ndarray:
    """``lmax(p, i)`` for every i, as an array."""
    return np.maximum.accumulate(p.word)


@njit(cache=True, nogil=True)
def foata_word(sigma, out):
    """Write cycles from their maxima, by increasing maximum; linear time."""
    n = sigma.shape[0]
    is_max = np.zeros(n + 1, dtype=np.bool_)
    seen = np.zeros(n + 1, dtype=np.bool_)
    for s in range(1, n + 1):
        if seen[s]:
            continue
        best = s
        i = s
        while not seen[i]:
            seen[i] = True
            if i > best:
                best = i
            i = sigma[i - 1]
        is_max[best] = True
    k = 0
    for v in range(1, n + 1):
        if is_max[v]:
            i = v
            while True:
                out[k] = i
                k += 1
                i = sigma[i - 1]
                if i == v:
                    break


@njit(cache=True, nogil=True)
def foata_inverse_word(word, out):
    """Cut the word before each record; each block is a cycle."""
    n = word.shape[0]
    best = 0
    start = 0
    for k in range(n + 1):
        if k == n or word[k] > best:
            if k > 0:
                # close block word[start:k]
                for t in range(start, k - 1):
                    out[word[t] - 1] = word[t + 1]
                out[word[k - 1] - 1] = word[start]
            if k < n:
                best = word[k]
                start = k


def foata(p: Permutation) -> Permutation:
    out = np.empty(p.n, dtype=np.int64)
    foata_word(p.word, out)
    return Permutation._trusted(out)


def foata_inverse(p: Permutation) -> Permutation:
    out = np.empty(p.n, dtype=np.int64)
    foata_inverse_word(p.word, out)
    return Permutation._trusted(out)


def read_permutations(lines: Iterable[str]):
    """Parse the one-permutation-per-line text format; blank lines are skipped."""
    for line in lines:
        if line.strip():
            yield Permutation.parse(line)


def format_permutations(perms: Iterable[Permutation]) -> str:
    return "".join(p.to_text() + "\n" for p in perms)
