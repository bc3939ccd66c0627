import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rbperm import samplers
from rbperm.core import Permutation, statistics
from rbperm.oracle import sampler_tree_law
from rbperm.rng import RandomStream
from rbperm.samplers import NonPositiveTheta, RecordBias, SamplerKind

KINDS = list(SamplerKind)


def target_law(n, theta, weight="records"):
    w = {}
    for word in itertools.permutations(range(1, n + 1)):
        p = Permutation(word)
        s = statistics(p)
        w[p] = theta ** (s.records if weight == "records" else s.cycles)
    total = math.fsum(w.values())
    return {p: v / total for p, v in w.items()}


# --- bias resolution --------------------------------------------------------


def test_resolve_theta_examples():
    assert samplers.resolve_theta(RecordBias.fixed(2), 100) == 2
    assert samplers.resolve_theta(RecordBias.linear(0.2), 500) == pytest.approx(100, rel=1e-15)
    assert samplers.resolve_theta(RecordBias.power(0.5), 10000) == pytest.approx(100, rel=1e-15)


def test_bias_validation():
    with pytest.raises(NonPositiveTheta):
        RecordBias.fixed(0)
    with pytest.raises(NonPositiveTheta):
        RecordBias.fixed(float("inf"))
    with pytest.raises(ValueError):
        RecordBias.parse("cubic:2")
    with pytest.raises(ValueError):
        RecordBias.parse("fixed")
    with pytest.raises(NonPositiveTheta):
        samplers.resolve_theta(RecordBias.power(400), 10)
    assert RecordBias.parse("linear:0.2") == RecordBias.linear(0.2)


def test_step_branch_probabilities_sum_to_one():
    for theta in (0.3, 1.0, 2.0, 7.5):
        for m in range(0, 50):
            if m:
                assert math.isclose(theta / (theta + m) + m * (1 / (theta + m)), 1.0, rel_tol=1e-15)


# --- exactness by tree enumeration ------------------------------------------


@pytest.mark.parametrize("kind", KINDS + ["ewens"])
@pytest.mark.parametrize("theta", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("n", range(1, 7))
def test_tree_law_is_target_law(kind, theta, n):
    tree = sampler_tree_law(kind, n, theta)
    want = target_law(n, theta, "cycles" if kind == "ewens" else "records")
    assert set(tree.support) == set(want)
    for p, q in want.items():
        assert tree.prob(p) == pytest.approx(q, rel=1e-12)


def test_slots_two_element_law():
    law = sampler_tree_law(SamplerKind.SLOTS, 2, 2.0)
    assert law.prob(Permutation([1, 2])) == pytest.approx(2 / 3, rel=1e-15)
    assert law.prob(Permutation([2, 1])) == pytest.approx(1 / 3, rel=1e-15)


def test_foata_sampler_identity_probability():
    law = sampler_tree_law(SamplerKind.FOATA, 3, 2.0)
    assert law.prob(Permutation([1, 2, 3])) == pytest.approx(8 / 24, rel=1e-15)


# --- single samples ---------------------------------------------------------


@pytest.mark.parametrize("kind", KINDS + ["ewens"])
def test_small_sizes(kind):
    s = RandomStream(1)
    assert samplers.sample(kind, 0, 2.0, s).n == 0
    for _ in range(5):
        assert samplers.sample(kind, 1, 2.0, s).tolist() == [1]


@pytest.mark.parametrize("kind", KINDS)
@given(n=st.integers(1, 300), theta=st.floats(0.01, 1e6), seed=st.integers(0, 2**64 - 1))
@settings(max_examples=40, deadline=None)
def test_samples_are_permutations(kind, n, theta, seed):
    p = samplers.sample(kind, n, theta, RandomStream(seed))
    assert sorted(p.tolist()) == list(range(1, n + 1))


@pytest.mark.parametrize("kind", KINDS)
@given(n=st.integers(1, 40), seed=st.integers(0, 2**64 - 1))
@settings(max_examples=30, deadline=None)
def test_build_is_deterministic_in_choices(kind, n, seed):
    s = RandomStream(seed)
    choices = s.choices(samplers.step_sizes(kind, n), 1.7)
    assert samplers.build(kind, choices) == samplers.build(kind, choices.copy())


def test_huge_theta_gives_identity_and_tiny_theta_starts_with_max():
    s = RandomStream(0)
    for kind in KINDS:
        assert samplers.sample(kind, 50, 1e300, s) == Permutation.identity(50)
        assert samplers.sample(kind, 50, 1e-300, s)(1) == 50


@pytest.mark.parametrize("kind", [SamplerKind.SLOTS, SamplerKind.DIAGRAM])
def test_uniform_at_theta_one(kind):
    words = samplers.batch_words(kind, 3, 1.0, 60000, 17)
    _, counts = np.unique(words, axis=0, return_counts=True)
    assert len(counts) == 6
    assert np.all(np.abs(counts / 60000 - 1 / 6) < 0.01)


@pytest.mark.parametrize("kind", KINDS)
def test_record_marginals(kind):
    n, theta, count = 12, 2.0, 40000
    words = samplers.batch_words(kind, n, theta, count, 5)
    is_record = words == np.maximum.accumulate(words, axis=1)
    for i in range(1, n + 1):
        p = theta / (theta + i - 1)
        sd = math.sqrt(p * (1 - p) / count)
        assert abs(is_record[:, i - 1].mean() - p) < 4.5 * sd + 1e-12


# --- batches ----------------------------------------------------------------


def test_batch_count_zero():
    assert samplers.batch_sample(SamplerKind.SLOTS, 5, RecordBias.fixed(2), 0, 1) == []


@pytest.mark.parametrize("kind", KINDS)
def test_batch_independent_of_workers_and_chunks(kind):
    a = samplers.batch_words(kind, 40, RecordBias.fixed(3), 500, 99)
    b = samplers.batch_words(kind, 40, RecordBias.fixed(3), 500, 99, workers=4, chunk=7)
    assert a.tobytes() == b.tobytes()
    h1 = samplers.batch_heatmap(kind, 10, 2.0, 300, 4)
    h2 = samplers.batch_heatmap(kind, 10, 2.0, 300, 4, workers=3, chunk=11)
    assert np.array_equal(h1, h2)


def test_batch_rows_match_derived_streams():
    words = samplers.batch_words(SamplerKind.DIAGRAM, 9, 2.0, 5, 123)
    for k in range(5):
        p = samplers.sample(SamplerKind.DIAGRAM, 9, 2.0, RandomStream.derived(123, k))
        assert p.tolist() == words[k].tolist()


def test_batch_statistics_match_statistics():
    perms = samplers.batch_sample(SamplerKind.SEQUENCES, 30, RecordBias.fixed(2), 50, 8)
    table = samplers.batch_statistics(SamplerKind.SEQUENCES, 30, RecordBias.fixed(2), 50, 8, workers=2, chunk=9)
    for p, row in zip(perms, table):
        s = statistics(p)
        assert row.tolist() == [s.records, s.descents, s.inversions, s.first_value]
    quick = samplers.batch_statistics(SamplerKind.SEQUENCES, 30, 2.0, 50, 8, inversions=False)
    assert np.all(quick[:, 2] == -1)
    assert np.array_equal(quick[:, [0, 1, 3]], table[:, [0, 1, 3]])


def test_heatmap_rows_and_columns_sum_to_count():
    h = samplers.batch_heatmap(SamplerKind.SLOTS, 8, 3.0, 1000, 2)
    assert np.all(h.sum(axis=0) == 1000) and np.all(h.sum(axis=1) == 1000)


def test_identity_frequency_million_draws():
    words = samplers.batch_words(SamplerKind.SLOTS, 3, RecordBias.fixed(2), 10**6, 42)
    freq = np.mean(np.all(words == [1, 2, 3], axis=1))
    assert abs(freq - 1 / 3) < 0.002
