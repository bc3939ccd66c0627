import math

import mpmath
import numpy as np
import pytest
import scipy.special
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from rbperm import analytic as A
from rbperm.analytic import DomainError, StatisticId

R, D, I, F = StatisticId.RECORDS, StatisticId.DESCENTS, StatisticId.INVERSIONS, StatisticId.FIRST_VALUE


# --- digamma ----------------------------------------------------------------


def mp_digamma(x):
    with mpmath.workdps(40):
        return float(mpmath.digamma(mpmath.mpf(x)))


GRID = sorted(set(np.concatenate([np.geomspace(1e-3, 1e8, 400), np.linspace(1.3, 1.6, 301)]).tolist()))


def test_digamma_relative_accuracy_on_grid():
    worst = max(abs(A.digamma(x) - mp_digamma(x)) / abs(mp_digamma(x)) for x in GRID)
    assert worst <= 1e-12


def test_digamma_near_positive_root():
    root = 1.4616321449683622
    for d in [1e-15, 1e-12, 1e-9, 1e-6, 1e-3, 0.05, 0.099, 0.1, 0.101]:
        for x in (root - d, root + d):
            want = mp_digamma(x)
            assert abs(A.digamma(x) - want) <= 1e-12 * abs(want)


@given(st.floats(1e-3, 1e6))
@settings(max_examples=300)
def test_digamma_matches_scipy(x):
    want = scipy.special.digamma(x)
    assert abs(A.digamma(x) - want) <= 2e-12 * max(abs(want), 1.0)


def test_digamma_at_one():
    assert A.digamma(1.0) == pytest.approx(-0.5772156649015329, rel=1e-15)


@pytest.mark.parametrize("x", [0.5, 1.0, 7.3])
def test_digamma_recurrence(x):
    assert A.digamma(x + 1) - A.digamma(x) == pytest.approx(1 / x, abs=1e-13)


def test_digamma_difference_identity():
    assert A.digamma(7) - A.digamma(2) == pytest.approx(sum(1 / (2 + i) for i in range(5)), rel=1e-14)
    assert A.digamma_difference(2.0, 5) == pytest.approx(sum(1 / (2 + i) for i in range(5)), rel=1e-15)
    assert A.digamma_difference(0.7, 1000) == pytest.approx(A.digamma(1000.7) - A.digamma(0.7), rel=1e-13)


@pytest.mark.parametrize("x", [0.0, -1.0, float("nan")])
def test_digamma_domain(x):
    with pytest.raises(DomainError):
        A.digamma(x)


# --- rising factorial -------------------------------------------------------


def test_log_rising_factorial_examples():
    assert A.log_rising_factorial(3.7, 0) == 0
    assert A.log_rising_factorial(1, 5) == pytest.approx(math.log(120), rel=1e-15)
    assert A.log_rising_factorial(2, 3) == pytest.approx(math.log(24), rel=1e-15)
    with pytest.raises(DomainError):
        A.log_rising_factorial(0, 3)


@given(st.floats(0.01, 1e4), st.integers(0, 400))
def test_log_rising_factorial_against_mpmath(x, n):
    with mpmath.workdps(30):
        want = float(mpmath.log(mpmath.rf(x, n))) if n else 0.0
    assert A.log_rising_factorial(x, n) == pytest.approx(want, rel=1e-12, abs=1e-12)


# --- marginal laws ----------------------------------------------------------


def test_record_examples():
    assert A.prob_record_at(3.3, 1) == 1
    assert A.prob_record_at(1, 7) == pytest.approx(1 / 7)
    assert A.prob_record_at(2, 3) == 0.5
    with pytest.raises(DomainError):
        A.prob_record_at(2, 0)


def test_descent_examples():
    for i in range(2, 20):
        assert A.prob_descent_at(1, i) == pytest.approx(0.5, rel=1e-15)
    assert A.prob_descent_at(2.5, 2) == pytest.approx(1 / 3.5, rel=1e-15)
    # weights over S_3 at theta=2: 132, 231, 321 carry 4 + 4 + 2 out of 24
    assert A.prob_descent_at(2, 3) == pytest.approx(5 / 12, rel=1e-15)
    with pytest.raises(DomainError):
        A.prob_descent_at(2, 1)


def test_invj_examples():
    assert A.prob_invj(0.4, 1, 0) == 1
    assert A.prob_invj(1, 5, 3) == pytest.approx(1 / 5)
    assert A.prob_invj(2, 3, 0) == 0.5
    assert A.prob_invj(2, 3, 1) == 0.25
    with pytest.raises(DomainError):
        A.prob_invj(2, 3, 3)


def test_first_value_examples():
    for k in (1, 2, 3):
        assert A.prob_first_value(1, 3, k) == pytest.approx(1 / 3, rel=1e-14)
    assert A.prob_first_value(2, 2, 1) == pytest.approx(2 / 3, rel=1e-14)
    assert math.fsum(A.prob_first_value(2.5, 50, k) for k in range(1, 51)) == pytest.approx(1, abs=1e-12)
    with pytest.raises(DomainError):
        A.prob_first_value(2, 3, 4)


def test_lmax_examples():
    for j in range(1, 8):
        assert A.prob_lmax(1.7, 7, 1, j) == pytest.approx(A.prob_first_value(1.7, 7, j), rel=1e-13)
    assert A.prob_lmax(1, 3, 1, 2) == pytest.approx(1 / 3, rel=1e-14)
    assert math.fsum(A.prob_lmax(2, 7, 4, j) for j in range(1, 8)) == pytest.approx(1, abs=1e-12)
    assert A.prob_lmax(2, 7, 4, 3) == 0


@given(st.floats(0.05, 50), st.integers(1, 300), st.data())
@settings(max_examples=60)
def test_lmax_normalized(theta, n, data):
    i = data.draw(st.integers(1, n))
    assert math.fsum(A.prob_lmax(theta, n, i, j) for j in range(i, n + 1)) == pytest.approx(1, abs=1e-11)


@given(st.floats(0.05, 50), st.integers(1, 200))
@settings(max_examples=60)
def test_marginals_sum_to_expectations(theta, n):
    assert math.fsum(A.prob_record_at(theta, i) for i in range(1, n + 1)) == pytest.approx(
        A.expected_value(R, theta, n), rel=1e-12)
    assert math.fsum(A.prob_descent_at(theta, i) for i in range(2, n + 1)) == pytest.approx(
        A.expected_value(D, theta, n), rel=1e-10, abs=1e-10)
    inv = math.fsum(k * A.prob_invj(theta, j, k) for j in range(1, n + 1) for k in range(j))
    assert inv == pytest.approx(A.expected_value(I, theta, n), rel=1e-10, abs=1e-10)


# --- expectations and variances ---------------------------------------------


def test_expectation_examples():
    assert A.expected_value(R, 1, 3) == pytest.approx(11 / 6, rel=1e-15)
    assert A.expected_value(D, 2, 3) == pytest.approx(0.75, rel=1e-15)
    assert A.expected_value(R, 2, 3) == pytest.approx(13 / 6, rel=1e-15)
    assert A.expected_value(I, 2, 3) == pytest.approx(13 / 12, rel=1e-14)
    assert A.expected_value(F, 2, 3) == pytest.approx(5 / 3, rel=1e-15)
    assert A.expected_value(F, 3, 100) == 103 / 4
    assert A.expected_value("first", 3, 100) == 103 / 4
    with pytest.raises(DomainError):
        A.expected_value(R, 2, 0)


def test_variance_examples():
    assert A.variance_invj(3.1, 1) == 0
    # uniform S_3: inversion counts 0,1,1,2,2,3 give E[X^2] - E[X]^2 = 19/6 - 9/4
    assert A.variance_inversions(1, 3) == pytest.approx(11 / 12, rel=1e-14)
    assert 0.95 <= A.variance_inversions(2, 10**4) / (1e12 / 36) <= 1.05


def test_records_pmf_example():
    pmf = A.exact_pmf_records(1, 3)
    assert pmf.tolist() == pytest.approx([0, 1 / 3, 1 / 2, 1 / 6], abs=1e-15)


def test_inversions_pmf_example():
    assert A.exact_pmf_inversions(1, 3).tolist() == pytest.approx([1 / 6, 2 / 6, 2 / 6, 1 / 6], abs=1e-15)
    with pytest.raises(A.SupportTooLarge):
        A.exact_pmf_inversions(1, 2001)
    assert len(A.exact_pmf_inversions(1, 5, max_n=5)) == 11


@given(st.floats(0.1, 20), st.integers(1, 120))
@settings(max_examples=40, deadline=None)
def test_pmf_moments(theta, n):
    rec = A.exact_pmf_records(theta, n)
    k = np.arange(n + 1)
    assert rec.sum() == pytest.approx(1, abs=1e-12)
    assert (k * rec).sum() == pytest.approx(A.expected_value(R, theta, n), rel=1e-10)
    var = ((k - (k * rec).sum()) ** 2 * rec).sum()
    assert var == pytest.approx(A.variance_records(theta, n), rel=1e-9, abs=1e-12)
    inv = A.exact_pmf_inversions(theta, n)
    k = np.arange(inv.size)
    mean = (k * inv).sum()
    assert inv.sum() == pytest.approx(1, abs=1e-12)
    assert mean == pytest.approx(A.expected_value(I, theta, n), rel=1e-10, abs=1e-10)
    assert ((k - mean) ** 2 * inv).sum() == pytest.approx(A.variance_inversions(theta, n), rel=1e-9, abs=1e-10)


def test_eulerian_numbers():
    assert A.eulerian_numbers(1) == [1]
    assert A.eulerian_numbers(3) == [1, 4, 1]
    assert A.eulerian_numbers(4) == [1, 11, 11, 1]
    assert sum(A.eulerian_numbers(6)) == 720


def test_first_value_moments():
    assert A.first_value_moment(2, 10, 1) == pytest.approx(12 / 3, rel=1e-12)
    direct = math.fsum(k * k * A.prob_first_value(2, 6, k) for k in range(1, 7))
    assert A.first_value_moment(2, 6, 2) == pytest.approx(direct, rel=1e-12)
    assert A.first_value_moment(2, 10**6, 3) / 1e18 == pytest.approx(0.1, abs=1e-3)
    assert A.beta_moment(2, 3) == pytest.approx(0.1, rel=1e-14)
    with pytest.raises(DomainError):
        A.first_value_moment(2, 5, 5)


# --- asymptotic table -------------------------------------------------------


def test_asymptotic_examples():
    assert A.asymptotic_expectation(D, A.Uniform(), 1000) == 500
    assert A.asymptotic_expectation(R, A.Linear(1), 1000) == pytest.approx(1000 * math.log(2), rel=1e-15)
    assert A.asymptotic_expectation(F, A.Superlinear(1.5), 1000) == 1
    assert A.inversion_shape(1) == pytest.approx(-1 + 2 * math.log(2), rel=1e-15)


def test_regime_validation():
    with pytest.raises(DomainError):
        A.Sublinear(1.0)
    with pytest.raises(DomainError):
        A.Superlinear(1.0)
    with pytest.raises(DomainError):
        A.Linear(0)
    with pytest.raises(A.UnsupportedCell):
        A.asymptotic_expectation(R, object(), 100)
    assert A.regime_theta(A.Linear(0.5), 100) == 50
    assert A.regime_theta(A.Sublinear(0.5), 10**4) == pytest.approx(100)


# --- reference distributions -------------------------------------------------


def test_reference_cdfs():
    assert A.reference_cdf(A.StandardNormal(), 0) == 0.5
    for x in np.linspace(-8, 8, 161):
        assert abs(A.reference_cdf(A.StandardNormal(), x) - scipy.stats.norm.cdf(x)) <= 1e-10
    for x in np.linspace(0, 1, 11):
        assert A.reference_cdf(A.BetaOneTheta(1), x) == pytest.approx(x, abs=1e-15)
    assert A.reference_cdf(A.BetaOneTheta(2), 0.5) == pytest.approx(0.75, rel=1e-15)
    assert A.reference_cdf(A.BetaOneTheta(2), -1) == 0
    assert A.reference_cdf(A.BetaOneTheta(2), 3) == 1
    assert A.reference_cdf(A.BetaOneTheta(3.5), 0.3) == pytest.approx(scipy.stats.beta(1, 3.5).cdf(0.3), rel=1e-13)


@pytest.mark.parametrize("x", [1e-3, 0.5, 3.0, 9.99, 55.0, 1e4, 3.16e7, 1e15])
@pytest.mark.parametrize("n", [65, 1000, 10**5, 10**7])
def test_digamma_difference_against_mpmath(x, n):
    with mpmath.workdps(50):
        want = float(mpmath.digamma(mpmath.mpf(x) + n) - mpmath.digamma(mpmath.mpf(x)))
    assert A.digamma_difference(x, n) == pytest.approx(want, rel=1e-13)


@pytest.mark.parametrize("theta", [50.0, 1e3, 1e6, 1e9])
def test_inversion_mean_when_theta_dominates(theta):
    n = 40
    direct = math.fsum(j * (j - 1) / (2 * (theta + j - 1)) for j in range(1, n + 1))
    assert A.expected_value(I, theta, n) == pytest.approx(direct, rel=1e-13)
    if theta <= 1e3:
        closed = n * (n + 1 - 2 * theta) / 4 + theta * (theta - 1) / 2 * A.digamma_difference(theta, n)
        assert A.expected_value(I, theta, n) == pytest.approx(closed, rel=1e-9)
