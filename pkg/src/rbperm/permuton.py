"""Permutons: empirical ones built from permutations, and the limit shape for theta = lam * n.

The limit permuton has two parts.  A singular part lives on the curve
``y = f(x) = x (lam + 1) / (lam + x)`` with density ``lam / (lam + x)`` in x.
A diffuse part has Lebesgue density ``1 / (lam + 1)`` on the region strictly
below the curve.  Integrating both over a corner rectangle gives

    M(a, b) = x* + b (a - x*) / (lam + 1),   x* = min(a, f^{-1}(b)),

which is what :func:`limit_mass_corner` returns.
"""

import math

import numpy as np
from numba import njit

from .analytic import DomainError
from .core import EmptyPermutation, Permutation, PositionOutOfRange
from .rng import RandomStream, next_uniform

# Above this size the (n+1)^2 prefix table is not materialized; corner counts
# are answered directly from the word instead.
TABLE_MAX_N = 2048


class EmpiricalPermuton:
    """Mass of the permuton of a permutation on grid corner rectangles.

    ``prefix(i, j)`` is the number of k <= i with sigma(k) <= j, so the mass
    of ``[0, i/n] x [0, j/n]`` is ``prefix(i, j) / n``.
    """

    def __init__(self, p: Permutation, table_max_n: int = TABLE_MAX_N):
        if p.n == 0:
            raise EmptyPermutation("the empty permutation has no permuton")
        self.n = p.n
        self.word = p.word
        self._table = None
        if self.n <= table_max_n:
            grid = np.zeros((self.n + 1, self.n + 1), dtype=np.int64)
            grid[np.arange(1, self.n + 1), self.word] = 1
            self._table = grid.cumsum(axis=0).cumsum(axis=1)
            self._table.flags.writeable = False

    @property
    def has_table(self) -> bool:
        return self._table is not None

    @property
    def table(self) -> np.ndarray:
        """The full prefix table; only available up to the size cap."""
        if self._table is None:
            raise ValueError(f"no materialized table for n={self.n}; use prefix(i, j)")
        return self._table

    def prefix(self, i: int, j: int) -> int:
        if not (0 <= i <= self.n and 0 <= j <= self.n):
            raise PositionOutOfRange(f"grid index ({i}, {j}) outside 0..{self.n}")
        if self._table is not None:
            return int(self._table[i, j])
        return int(np.count_nonzero(self.word[:i] <= j))

    def mass(self, i: int, j: int) -> float:
        return self.prefix(i, j) / self.n


def empirical_from_perm(p: Permutation) -> EmpiricalPermuton:
    return EmpiricalPermuton(p)


def _check_lam(lam):
    if not (lam > 0 and math.isfinite(lam)):
        raise DomainError(f"lambda must be positive and finite, got {lam}")


def _check_unit(name, x):
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {x}")


def f_lambda(lam: float, x: float) -> float:
    """The limit record curve x (lam + 1) / (lam + x)."""
    _check_lam(lam)
    _check_unit("x", x)
    return x * (lam + 1) / (lam + x)


def f_lambda_inv(lam: float, y: float) -> float:
    _check_lam(lam)
    _check_unit("y", y)
    return lam * y / (1 + lam - y)


@njit(cache=True, nogil=True)
def _corner(lam, a, b):
    xs = lam * b / (1.0 + lam - b)
    if a < xs:
        xs = a
    return xs + b * (a - xs) / (lam + 1.0)


def limit_mass_corner(lam: float, a: float, b: float) -> float:
    """Mass of ``[0, a] x [0, b]`` under the limit permuton."""
    _check_lam(lam)
    _check_unit("a", a)
    _check_unit("b", b)
    return float(_corner(lam, a, b))


def limit_mass_rect(lam: float, a1: float, a2: float, b1: float, b2: float) -> float:
    """Mass of ``[a1, a2] x [b1, b2]`` by inclusion-exclusion over corners."""
    _check_lam(lam)
    for name, v in (("a1", a1), ("a2", a2), ("b1", b1), ("b2", b2)):
        _check_unit(name, v)
    if a1 > a2 or b1 > b2:
        raise DomainError("rectangle corners must satisfy a1 <= a2 and b1 <= b2")
    m = _corner(lam, a2, b2) - _corner(lam, a1, b2) - _corner(lam, a2, b1) + _corner(lam, a1, b1)
    return float(max(m, 0.0))


@njit(cache=True, nogil=True)
def _grid_distance(word, lam):
    # row[j] = #{k <= i : word[k-1] <= j}, updated one position at a time
    n = word.shape[0]
    row = np.zeros(n + 1, dtype=np.int64)
    best = 0.0
    for i in range(n + 1):
        if i > 0:
            for j in range(word[i - 1], n + 1):
                row[j] += 1
        a = i / n
        for j in range(n + 1):
            d = abs(row[j] / n - _corner(lam, a, j / n))
            if d > best:
                best = d
    return best


def distance_grid(p, lam: float) -> float:
    """Largest discrepancy between the permuton of ``p`` and the limit permuton
    over all corner rectangles ``[0, i/n] x [0, j/n]``.

    O(n^2) time and O(n) memory; accepts a Permutation or EmpiricalPermuton.
    """
    _check_lam(lam)
    if p.n == 0:
        raise EmptyPermutation("the empty permutation has no permuton")
    return float(_grid_distance(np.ascontiguousarray(p.word, dtype=np.int64), float(lam)))


def _xlogx(x):
    return 0.0 if x == 0 else x * math.log(x)


def log_F_xy(lam: float, x: float, y: float) -> float:
    _check_lam(lam)
    if not 0.0 < x < y < 1.0:
        raise DomainError(f"need 0 < x < y < 1, got x={x}, y={y}")
    return (
        _xlogx(y) + _xlogx(1 - x) + _xlogx(lam + x) + _xlogx(lam + 1 - y)
        - _xlogx(x) - _xlogx(y - x) - _xlogx(1 - y) - _xlogx(lam) - _xlogx(lam + 1)
    )


def F_xy(lam: float, x: float, y: float) -> float:
    """Exponential rate of P(lmax(sigma, xn) = yn) when theta = lam * n.

    Equal to 1 on the limit curve and below 1 elsewhere.
    """
    return math.exp(log_F_xy(lam, x, y))


@njit(cache=True, nogil=True)
def _limit_point(lam, p_curve, state):
    if next_uniform(state) < p_curve:
        u = next_uniform(state)
        x = lam * ((1.0 + 1.0 / lam) ** u - 1.0)
        return x, x * (lam + 1.0) / (lam + x)
    while True:
        x = next_uniform(state)
        y = next_uniform(state)
        if y < x * (lam + 1.0) / (lam + x):
            return x, y


@njit(cache=True, nogil=True)
def _limit_points(lam, p_curve, state, out):
    for k in range(out.shape[0]):
        x, y = _limit_point(lam, p_curve, state)
        out[k, 0] = x
        out[k, 1] = y


def curve_mass(lam: float) -> float:
    """Total mass carried by the curve, lam * log(1 + 1/lam)."""
    _check_lam(lam)
    return lam * math.log1p(1.0 / lam)


def sample_limit_point(lam: float, stream: RandomStream):
    """One point ``(x, y)`` drawn from the limit permuton."""
    x, y = _limit_point(float(lam), curve_mass(lam), stream.state)
    return float(x), float(y)


def sample_limit_points(lam: float, count: int, stream: RandomStream) -> np.ndarray:
    """``count`` draws as a (count, 2) array."""
    out = np.empty((count, 2))
    _limit_points(float(lam), curve_mass(lam), stream.state, out)
    return out
