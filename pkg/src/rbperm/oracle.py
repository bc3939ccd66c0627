"""Exhaustive ground truth for small n.

Every permutation of size n <= 8 is enumerated and weighted directly, and
statistics are recomputed here with plain numpy rather than through the
kernels in :mod:`rbperm.core`, so the two can check each other.
Sampler laws are obtained by walking every branch of a sampler's decision
tree through the production build code (:func:`rbperm.samplers.build`).
"""

import enum
import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, Hashable, List, Union

import numpy as np

from . import analytic, core, samplers
from .analytic import StatisticId
from .core import Permutation

MAX_N = 8
TREE_MAX_N = 6


class NTooLarge(ValueError):
    pass


class EmptyInput(ValueError):
    pass


class Weight(enum.Enum):
    RECORDS = "records"
    CYCLES = "cycles"


@dataclass(frozen=True)
class ExactLaw:
    """A finite law: outcome -> probability."""

    support: Dict[Hashable, float] = field(default_factory=dict)

    def prob(self, outcome) -> float:
        return self.support.get(outcome, 0.0)

    def total(self) -> float:
        return math.fsum(self.support.values())

    def mean(self) -> float:
        return math.fsum(float(k) * p for k, p in self.support.items())

    def variance(self) -> float:
        m = self.mean()
        return math.fsum((float(k) - m) ** 2 * p for k, p in self.support.items())

    def __len__(self):
        return len(self.support)


# A sampler's exact law; same shape as ExactLaw with permutations as outcomes.
DecisionTreeLaw = ExactLaw


def _check_n(n, cap):
    if n < 1:
        raise ValueError("n must be at least 1")
    if n > cap:
        raise NTooLarge(f"exhaustive enumeration is capped at n={cap}, got n={n}")


@dataclass(frozen=True)
class _Table:
    words: np.ndarray  # (n!, n), lexicographic order
    stats: Dict[str, np.ndarray]
    inv_profile: np.ndarray  # (n!, n)
    prefix_max: np.ndarray  # (n!, n)


def _cycle_counts(words):
    n = words.shape[1]
    out = np.zeros(words.shape[0], dtype=np.int64)
    for r, w in enumerate(words):
        seen = [False] * (n + 1)
        for s in range(1, n + 1):
            if not seen[s]:
                out[r] += 1
                i = s
                while not seen[i]:
                    seen[i] = True
                    i = w[i - 1]
    return out


@lru_cache(maxsize=None)
def _table(n: int) -> _Table:
    words = np.array(list(itertools.permutations(range(1, n + 1))), dtype=np.int64)
    pmax = np.maximum.accumulate(words, axis=1)
    prof = np.zeros_like(words)
    for j in range(n):
        prof[:, j] = (words[:, :j] > words[:, j:j + 1]).sum(axis=1)
    positions = np.arange(1, n + 1)
    anti = (words < positions).sum(axis=1)
    stats = {
        "records": (words == pmax).sum(axis=1),
        "descents": (words[:, :-1] > words[:, 1:]).sum(axis=1),
        "inversions": prof.sum(axis=1),
        "first": words[:, 0].copy(),
        "cycles": _cycle_counts(words),
        "anti_exceedances": anti,
    }
    for a in (words, pmax, prof, *stats.values()):
        a.flags.writeable = False
    return _Table(words, stats, prof, pmax)


def _weights(n, theta, weight):
    t = _table(n)
    key = Weight(weight).value
    return float(theta) ** t.stats[key].astype(float)


def total_weight(n: int, theta: float, weight=Weight.RECORDS) -> float:
    """Sum over all permutations of theta**rec (or theta**cyc)."""
    _check_n(n, MAX_N)
    return math.fsum(_weights(n, theta, weight))


def _probabilities(n, theta, weight):
    w = _weights(n, theta, weight)
    return w / math.fsum(w)


def exact_distribution(n: int, theta: float, weight=Weight.RECORDS) -> ExactLaw:
    """The law proportional to theta**rec (or theta**cyc) on all of S_n."""
    _check_n(n, MAX_N)
    if not theta > 0:
        raise analytic.DomainError("theta must be positive")
    p = _probabilities(n, theta, weight)
    words = _table(n).words
    return ExactLaw({Permutation._trusted(words[k].copy()): float(p[k]) for k in range(len(p))})


def _stat_key(stat):
    return StatisticId(stat).value


def exact_statistic_pmf(n: int, theta: float, stat: StatisticId) -> ExactLaw:
    """Law of a statistic under the record-biased distribution."""
    _check_n(n, MAX_N)
    p = _probabilities(n, theta, Weight.RECORDS)
    values = _table(n).stats[_stat_key(stat)]
    out: Dict[int, List[float]] = {}
    for v, q in zip(values.tolist(), p.tolist()):
        out.setdefault(v, []).append(q)
    return ExactLaw({v: math.fsum(qs) for v, qs in sorted(out.items())})


def _marginal(n, theta, mask):
    p = _probabilities(n, theta, Weight.RECORDS)
    return math.fsum(p[mask])


def oracle_record_at(n, theta, i):
    t = _table(n)
    return _marginal(n, theta, t.words[:, i - 1] == t.prefix_max[:, i - 1])


def oracle_descent_at(n, theta, i):
    t = _table(n)
    return _marginal(n, theta, t.words[:, i - 2] > t.words[:, i - 1])


def oracle_invj(n, theta, j, k):
    return _marginal(n, theta, _table(n).inv_profile[:, j - 1] == k)


def oracle_lmax(n, theta, i, j):
    return _marginal(n, theta, _table(n).prefix_max[:, i - 1] == j)


def oracle_first_moment(n, theta, r):
    p = _probabilities(n, theta, Weight.RECORDS)
    return math.fsum(p * _table(n).stats["first"].astype(float) ** r)


def sampler_tree_law(kind, n: int, theta: float) -> DecisionTreeLaw:
    """Exact output law of a sampler, by walking every branch of its tree.

    At a step offering ``m`` ordinary options, branch 0 has probability
    theta/(theta+m) and each other branch 1/(theta+m); a leaf's mass is the
    product along its path, credited to the permutation that the shipped
    build routine produces from that choice vector.
    """
    _check_n(n, TREE_MAX_N)
    theta = float(theta)
    steps = samplers.step_sizes(kind, n).tolist()
    branches = []
    for m in steps:
        if m == 0:
            branches.append([(0, 1.0)])
        else:
            branches.append([(0, theta / (theta + m))] + [(c, 1.0 / (theta + m)) for c in range(1, m + 1)])
    acc: Dict[Permutation, List[float]] = {}
    for path in itertools.product(*branches):
        choices = np.array([c for c, _ in path], dtype=np.int64)
        prob = math.prod(q for _, q in path)
        acc.setdefault(samplers.build(kind, choices), []).append(prob)
    return ExactLaw({p: math.fsum(qs) for p, qs in acc.items()})


def tv_distance(a: ExactLaw, b: ExactLaw) -> float:
    keys = set(a.support) | set(b.support)
    return 0.5 * math.fsum(abs(a.prob(k) - b.prob(k)) for k in keys)


def _stat_value(p: Permutation, stat: StatisticId) -> int:
    s = core.statistics(p)
    return {
        StatisticId.RECORDS: s.records,
        StatisticId.DESCENTS: s.descents,
        StatisticId.INVERSIONS: s.inversions,
        StatisticId.FIRST_VALUE: s.first_value,
    }[StatisticId(stat)]


def histogram_from_values(values) -> ExactLaw:
    """Normalized frequencies of integer values."""
    arr = np.asarray(values, dtype=np.int64).ravel()
    if arr.size == 0:
        raise EmptyInput("cannot build a histogram from no samples")
    vals, counts = np.unique(arr, return_counts=True)
    return ExactLaw({int(v): c / arr.size for v, c in zip(vals.tolist(), counts.tolist())})


def empirical_histogram(samples, stat: StatisticId) -> ExactLaw:
    """Frequencies of a statistic over a collection of permutations."""
    return histogram_from_values([_stat_value(p, stat) for p in samples])


CdfLike = Union[analytic.StandardNormal, analytic.BetaOneTheta, Callable[[float], float]]


def ks_statistic(samples, cdf: CdfLike) -> float:
    """Two-sided Kolmogorov-Smirnov distance between samples and a CDF."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    if x.size == 0:
        raise EmptyInput("KS statistic needs at least one sample")
    f = cdf.cdf if hasattr(cdf, "cdf") else cdf
    ref = np.array([f(float(v)) for v in x])
    k = np.arange(1, x.size + 1)
    d_plus = np.max(k / x.size - ref)
    d_minus = np.max(ref - (k - 1) / x.size)
    return float(max(d_plus, d_minus))


# ---------------------------------------------------------------------------
# full check, used by the `verify` command


def _close(a, b, rel, absolute=1e-15):
    return abs(a - b) <= max(rel * max(abs(a), abs(b)), absolute)


def verify(max_n: int = 7, thetas=(0.5, 1.0, 2.0), tree_max_n: int = TREE_MAX_N) -> List[str]:
    """Run every exhaustive check; returns a list of failure messages.

    Closed forms are looked up on :mod:`rbperm.analytic` at call time.
    """
    _check_n(max_n, MAX_N)
    fails: List[str] = []

    def expect(ok, msg):
        if not ok:
            fails.append(msg)

    for theta in thetas:
        for n in range(1, max_n + 1):
            tag = f"n={n} theta={theta}"
            tw = total_weight(n, theta)
            expect(_close(tw, analytic.rising_factorial(theta, n), 1e-12), f"normalization {tag}: {tw}")

            rec = exact_distribution(n, theta, Weight.RECORDS)
            cyc = exact_distribution(n, theta, Weight.CYCLES)
            for p, q in cyc.support.items():
                r = rec.prob(core.foata(p))
                if not _close(q, r, 1e-12):
                    expect(False, f"foata pushforward {tag} at {p.tolist()}: {q} vs {r}")
                    break

            for i in range(1, n + 1):
                expect(_close(analytic.prob_record_at(theta, i), oracle_record_at(n, theta, i), 1e-12),
                       f"record probability {tag} i={i}")
                if i >= 2:
                    expect(_close(analytic.prob_descent_at(theta, i), oracle_descent_at(n, theta, i), 1e-12),
                           f"descent probability {tag} i={i}")
                for k in range(i):
                    expect(_close(analytic.prob_invj(theta, i, k), oracle_invj(n, theta, i, k), 1e-12),
                           f"inv_j law {tag} j={i} k={k}")
                for j in range(1, n + 1):
                    expect(_close(analytic.prob_lmax(theta, n, i, j), oracle_lmax(n, theta, i, j), 1e-12),
                           f"lmax law {tag} i={i} j={j}")
            for k in range(1, n + 1):
                expect(_close(analytic.prob_first_value(theta, n, k), oracle_lmax(n, theta, 1, k), 1e-12),
                       f"first value law {tag} k={k}")
            for r in range(1, n):
                expect(_close(analytic.first_value_moment(theta, n, r), oracle_first_moment(n, theta, r), 1e-12),
                       f"first value moment {tag} r={r}")

            for stat in StatisticId:
                law = exact_statistic_pmf(n, theta, stat)
                expect(_close(analytic.expected_value(stat, theta, n), law.mean(), 1e-10),
                       f"expectation of {stat.value} {tag}")
            rec_law = exact_statistic_pmf(n, theta, StatisticId.RECORDS)
            pmf = analytic.exact_pmf_records(theta, n)
            expect(all(_close(pmf[k], rec_law.prob(k), 1e-12) for k in range(n + 1)), f"records pmf {tag}")
            inv_law = exact_statistic_pmf(n, theta, StatisticId.INVERSIONS)
            pmf = analytic.exact_pmf_inversions(theta, n)
            expect(all(_close(pmf[k], inv_law.prob(k), 1e-12) for k in range(len(pmf))), f"inversions pmf {tag}")
            expect(_close(analytic.variance_inversions(theta, n), inv_law.variance(), 1e-10),
                   f"inversions variance {tag}")

            if n <= tree_max_n:
                for kind in samplers.SamplerKind:
                    tree = sampler_tree_law(kind, n, theta)
                    bad = [p for p, q in rec.support.items() if not _close(q, tree.prob(p), 1e-12)]
                    expect(len(tree) == len(rec) and not bad, f"{kind.value} sampler law {tag}")
    return fails
