"""Closed forms for record-biased permutations of size n with parameter theta.

Everything here is exact (up to floating point) except
:func:`asymptotic_expectation`, which returns first-order equivalents per
regime of theta.  Products of rising factorials and factorials are formed in
log space and only final probabilities are exponentiated.
"""

import enum
import math
from dataclasses import dataclass
from typing import Union

import numpy as np


class DomainError(ValueError):
    pass


class SupportTooLarge(ValueError):
    pass


class UnsupportedCell(KeyError):
    pass


class StatisticId(enum.Enum):
    RECORDS = "records"
    DESCENTS = "descents"
    INVERSIONS = "inversions"
    FIRST_VALUE = "first"


def _positive(name, x):
    if not (x > 0 and math.isfinite(x)):
        raise DomainError(f"{name} must be positive and finite, got {x}")


# ---------------------------------------------------------------------------
# digamma and rising factorials

_PSI_ROOT_HI = 1.4616321449683622
_PSI_ROOT_LO = 9.549995429965697e-17
# (-1)**(k+1) * zeta(k+1, root), k = 1..15: Taylor coefficients at the root
_PSI_ROOT_TAYLOR = (
    0.9676722454476212, -0.4427631689835921, 0.258499760955651,
    -0.16394270544240652, 0.10782405069126237, -0.07219956125645471,
    0.04880428816414311, -0.03316112647484736, 0.022597648232218104,
    -0.01542476590494896, 0.010538791616612175, -0.007204534386356869,
    0.004926781395729853, -0.003369801655439328, 0.002305126326734928,
)
# B_2k / (2k), k = 1..7
_PSI_TAIL = (
    1.0 / 12, -1.0 / 120, 1.0 / 252, -1.0 / 240, 1.0 / 132, -691.0 / 32760, 1.0 / 12,
)
_PSI_SHIFT = 10.0


def digamma(x: float) -> float:
    """Psi(x) = Gamma'(x)/Gamma(x) for x > 0.

    The argument is shifted above 10 with Psi(x) = Psi(x+1) - 1/x and the
    asymptotic series is summed to the x**-14 term.  Near the positive root
    a Taylor series is used so that the relative error stays small there.
    """
    x = float(x)
    if not x > 0:
        raise DomainError(f"digamma needs x > 0, got {x}")
    if math.isinf(x):
        return math.inf
    d = (x - _PSI_ROOT_HI) - _PSI_ROOT_LO
    if abs(d) < 0.1:
        acc = 0.0
        for c in reversed(_PSI_ROOT_TAYLOR):
            acc = acc * d + c
        return acc * d
    shift = 0.0
    while x < _PSI_SHIFT:
        shift += 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    tail = 0.0
    for c in reversed(_PSI_TAIL):
        tail = tail * inv2 + c
    return math.log(x) - 0.5 / x - tail * inv2 - shift


def digamma_difference(x: float, n: int) -> float:
    """Psi(x+n) - Psi(x) = sum_{i<n} 1/(x+i).

    Short sums are added directly.  Otherwise the asymptotic series of both
    terms is subtracted term by term, with the leading logs combined through
    log1p, so the result keeps its relative accuracy even when n << x.
    """
    _positive("x", x)
    if n < 0:
        raise DomainError("n must be non-negative")
    if n <= 64:
        return math.fsum(1.0 / (x + i) for i in range(n))
    head = []
    while x < _PSI_SHIFT and n > 0:
        head.append(1.0 / x)
        x += 1.0
        n -= 1
    y = x + n
    tail = [math.log1p(n / x), n / (2.0 * x * y)]
    px, py = 1.0 / (x * x), 1.0 / (y * y)
    ix, iy = px, py
    for c in _PSI_TAIL:
        tail.append(c * (ix - iy))
        ix *= px
        iy *= py
    return math.fsum(head) + math.fsum(tail)


def log_rising_factorial(x: float, n: int) -> float:
    """log of x^(n) = x (x+1) ... (x+n-1); zero when n = 0."""
    _positive("x", x)
    if n < 0:
        raise DomainError("n must be non-negative")
    if n <= 32:
        return math.fsum(math.log(x + k) for k in range(n))
    return math.lgamma(x + n) - math.lgamma(x)


def rising_factorial(x: float, n: int) -> float:
    return math.exp(log_rising_factorial(x, n))


def _log_factorial(k):
    return math.lgamma(k + 1)


# ---------------------------------------------------------------------------
# marginal probabilities


def prob_record_at(theta: float, i: int) -> float:
    _positive("theta", theta)
    if i < 1:
        raise DomainError("positions start at 1")
    return theta / (theta + (i - 1))


def prob_descent_at(theta: float, i: int) -> float:
    """P(sigma(i-1) > sigma(i)) for 2 <= i."""
    _positive("theta", theta)
    if i < 2:
        raise DomainError("descent positions start at 2")
    return (i - 1) * (2 * theta + (i - 2)) / (2 * (theta + (i - 1)) * (theta + (i - 2)))


def prob_invj(theta: float, j: int, k: int) -> float:
    """P(inv_j = k), the law of the number of inversions ending at j."""
    _positive("theta", theta)
    if j < 1 or not 0 <= k <= j - 1:
        raise DomainError(f"need j >= 1 and 0 <= k <= j-1, got j={j}, k={k}")
    return (theta if k == 0 else 1.0) / (theta + (j - 1))


def prob_first_value(theta: float, n: int, k: int) -> float:
    """P(sigma(1) = k)."""
    _positive("theta", theta)
    if not 1 <= k <= n:
        raise DomainError(f"need 1 <= k <= n, got k={k}, n={n}")
    log_p = (
        _log_factorial(n - 1)
        + log_rising_factorial(theta, n - k)
        + math.log(theta)
        - _log_factorial(n - k)
        - log_rising_factorial(theta, n)
    )
    return math.exp(log_p)


def log_prob_lmax(theta: float, n: int, i: int, j: int) -> float:
    """log P(lmax(sigma, i) = j); -inf when j < i."""
    _positive("theta", theta)
    if not (1 <= i <= n and 1 <= j <= n):
        raise DomainError(f"need 1 <= i, j <= n, got i={i}, j={j}, n={n}")
    if j < i:
        return -math.inf
    # (i/j) C(j, i) = C(j-1, i-1) and C(n-i, j-i) (j-i)! = (n-i)!/(n-j)!
    return (
        log_rising_factorial(theta, i)
        + log_rising_factorial(theta, n - j)
        - log_rising_factorial(theta, n)
        + _log_factorial(j - 1) - _log_factorial(i - 1) - _log_factorial(j - i)
        + _log_factorial(n - i) - _log_factorial(n - j)
    )


def prob_lmax(theta: float, n: int, i: int, j: int) -> float:
    """P(lmax(sigma, i) = j), the law of the largest of the first i values."""
    return math.exp(log_prob_lmax(theta, n, i, j))


# ---------------------------------------------------------------------------
# moments


_DIRECT_SUM_MAX_N = 10**7


def expected_value(stat: StatisticId, theta: float, n: int) -> float:
    _positive("theta", theta)
    if n < 1:
        raise DomainError("n must be at least 1")
    stat = StatisticId(stat)
    if stat is StatisticId.RECORDS:
        return theta * digamma_difference(theta, n)
    if stat is StatisticId.DESCENTS:
        return n * (n - 1) / (2 * (theta + n - 1))
    if stat is StatisticId.INVERSIONS:
        if theta >= n and n <= _DIRECT_SUM_MAX_N:
            # the closed form cancels badly once theta dominates n; add E[inv_j] directly
            j = np.arange(1, n + 1, dtype=float)
            return math.fsum(j * (j - 1) / (2 * (theta + (j - 1))))
        return n * (n + 1 - 2 * theta) / 4 + theta * (theta - 1) / 2 * digamma_difference(theta, n)
    return (theta + n) / (theta + 1)


def variance_records(theta: float, n: int) -> float:
    """Exact variance of the number of records (independent indicators)."""
    _positive("theta", theta)
    return math.fsum(theta * (i - 1) / (theta + (i - 1)) ** 2 for i in range(1, n + 1))


def variance_invj(theta: float, j: int) -> float:
    _positive("theta", theta)
    if j < 1:
        raise DomainError("j must be at least 1")
    return j * (j - 1) * (j * j + (4 * theta - 3) * j + 2 - 2 * theta) / (12 * (theta + (j - 1)) ** 2)


def variance_inversions(theta: float, n: int) -> float:
    """Var(inv); the inv_j are independent, so their variances add."""
    _positive("theta", theta)
    return math.fsum(variance_invj(theta, j) for j in range(1, n + 1))


def exact_pmf_records(theta: float, n: int) -> np.ndarray:
    """``pmf[k] = P(rec = k)`` for k = 0..n (``pmf[0]`` is 0 for n >= 1).

    Records at distinct positions are independent events with probabilities
    theta/(theta+i-1); the pmf is the coefficient list of their product of
    Bernoulli generating polynomials.
    """
    _positive("theta", theta)
    pmf = np.zeros(n + 1)
    pmf[0] = 1.0
    for i in range(1, n + 1):
        p = theta / (theta + (i - 1))
        pmf[1:i + 1] = pmf[1:i + 1] * (1 - p) + pmf[0:i] * p
        pmf[0] *= 1 - p
    return pmf


INVERSIONS_PMF_MAX_N = 2000


def exact_pmf_inversions(theta: float, n: int, max_n: int = INVERSIONS_PMF_MAX_N) -> np.ndarray:
    """``pmf[k] = P(inv = k)`` for k = 0..n(n-1)/2.

    The pmf is the convolution of the independent laws of inv_1..inv_n; each
    convolution with a (theta, 1, ..., 1) kernel is a sliding window sum.
    """
    _positive("theta", theta)
    if n > max_n:
        raise SupportTooLarge(f"inversions pmf capped at n={max_n}, got n={n}")
    top = n * (n - 1) // 2
    pmf = np.zeros(top + 1)
    pmf[0] = 1.0
    size = 1
    for j in range(2, n + 1):
        new_size = size + j - 1
        csum = np.concatenate(([0.0], np.cumsum(pmf[:size])))
        k = np.arange(new_size)
        # sum_{t=1}^{j-1} pmf[k - t] = csum[k] - csum[max(k - j + 1, 0)], with pmf = 0 past size
        window = csum[np.minimum(k, size)] - csum[np.clip(k - j + 1, 0, size)]
        head = np.zeros(new_size)
        head[:size] = pmf[:size]
        pmf[:new_size] = (theta * head + window) / (theta + (j - 1))
        size = new_size
    return pmf


def eulerian_numbers(r: int) -> list:
    """``[a(r,0), ..., a(r,r-1)]``: permutations of size r by number of descents."""
    if r < 1:
        raise DomainError("r must be at least 1")
    row = [1]
    for m in range(2, r + 1):
        prev = row + [0]
        row = [(k + 1) * prev[k] + (m - k) * (prev[k - 1] if k else 0) for k in range(m)]
    return row


def first_value_moment(theta: float, n: int, r: int) -> float:
    """E[sigma(1)**r] for 1 <= r <= n-1, via the Eulerian-number expansion."""
    _positive("theta", theta)
    if not 1 <= r <= n - 1:
        raise DomainError(f"need 1 <= r <= n-1, got r={r}, n={n}")
    a = eulerian_numbers(r)
    base = _log_factorial(n - 1) + math.log(theta) - log_rising_factorial(theta, n)
    terms = [
        math.exp(base + math.log(a[j - 1]) + log_rising_factorial(theta + r + 1, n - j) - _log_factorial(n - j))
        for j in range(1, r + 1)
    ]
    return math.fsum(terms)


def beta_moment(theta: float, r: int) -> float:
    """r-th moment of Beta(1, theta): r! / (theta+1)^(r)."""
    return math.exp(_log_factorial(r) - log_rising_factorial(theta + 1, r))


# ---------------------------------------------------------------------------
# regimes of theta


@dataclass(frozen=True)
class Uniform:
    pass


@dataclass(frozen=True)
class FixedTheta:
    theta: float

    def __post_init__(self):
        _positive("theta", self.theta)


@dataclass(frozen=True)
class Sublinear:
    eps: float

    def __post_init__(self):
        if not 0 < self.eps < 1:
            raise DomainError("sublinear regime needs 0 < eps < 1")


@dataclass(frozen=True)
class Linear:
    lam: float

    def __post_init__(self):
        _positive("lambda", self.lam)


@dataclass(frozen=True)
class Superlinear:
    delta: float

    def __post_init__(self):
        if not self.delta > 1:
            raise DomainError("superlinear regime needs delta > 1")


Regime = Union[Uniform, FixedTheta, Sublinear, Linear, Superlinear]


def regime_theta(regime: Regime, n: int) -> float:
    if isinstance(regime, Uniform):
        return 1.0
    if isinstance(regime, FixedTheta):
        return regime.theta
    if isinstance(regime, Sublinear):
        return float(n) ** regime.eps
    if isinstance(regime, Linear):
        return regime.lam * n
    if isinstance(regime, Superlinear):
        return float(n) ** regime.delta
    raise UnsupportedCell(f"unknown regime {regime!r}")


def inversion_shape(lam: float) -> float:
    """1 - 2 lam + 2 lam^2 log(1 + 1/lam)."""
    return 1 - 2 * lam + 2 * lam * lam * math.log1p(1 / lam)


def asymptotic_expectation(stat: StatisticId, regime: Regime, n: int) -> float:
    """First-order equivalent of E[stat] as n grows, per regime of theta."""
    if n < 2:
        raise DomainError("n must be at least 2")
    stat = StatisticId(stat)
    log_n = math.log(n)
    R, D, I, F = StatisticId.RECORDS, StatisticId.DESCENTS, StatisticId.INVERSIONS, StatisticId.FIRST_VALUE
    if isinstance(regime, Uniform):
        cells = {R: log_n, D: n / 2, I: n * n / 4, F: n / 2}
    elif isinstance(regime, FixedTheta):
        t = regime.theta
        cells = {R: t * log_n, D: n / 2, I: n * n / 4, F: n / (t + 1)}
    elif isinstance(regime, Sublinear):
        e = regime.eps
        cells = {R: (1 - e) * n ** e * log_n, D: n / 2, I: n * n / 4, F: n ** (1 - e)}
    elif isinstance(regime, Linear):
        lam = regime.lam
        cells = {
            R: lam * math.log1p(1 / lam) * n,
            D: n / (2 * (lam + 1)),
            I: n * n / 4 * inversion_shape(lam),
            F: (lam + 1) / lam,
        }
    elif isinstance(regime, Superlinear):
        d = regime.delta
        cells = {R: float(n), D: n ** (2 - d) / 2, I: n ** (3 - d) / 6, F: 1.0}
    else:
        raise UnsupportedCell(f"no table entry for regime {regime!r}")
    if stat not in cells:
        raise UnsupportedCell(f"no table entry for {stat} under {regime!r}")
    return cells[stat]


# ---------------------------------------------------------------------------
# reference limit distributions


@dataclass(frozen=True)
class StandardNormal:
    def cdf(self, x):
        return 0.5 * math.erfc(-x / math.sqrt(2.0))


@dataclass(frozen=True)
class BetaOneTheta:
    theta: float

    def __post_init__(self):
        _positive("theta", self.theta)

    def cdf(self, x):
        if x <= 0:
            return 0.0
        if x >= 1:
            return 1.0
        return -math.expm1(self.theta * math.log1p(-x))


ReferenceDistribution = Union[StandardNormal, BetaOneTheta]


def reference_cdf(dist: ReferenceDistribution, x: float) -> float:
    return dist.cdf(float(x))
