"""Sampling and exact analysis of record-biased random permutations.

A record-biased permutation of size n with parameter theta > 0 is drawn with
probability proportional to theta ** rec(sigma), where rec counts the
left-to-right maxima of the word.
"""

from .analytic import (
    BetaOneTheta,
    DomainError,
    FixedTheta,
    Linear,
    StandardNormal,
    StatisticId,
    Sublinear,
    Superlinear,
    Uniform,
    asymptotic_expectation,
    digamma,
    expected_value,
    log_rising_factorial,
    reference_cdf,
)
from .core import (
    Permutation,
    PermutationError,
    foata,
    foata_inverse,
    from_cycles,
    statistics,
    to_cycles,
)
from .permuton import EmpiricalPermuton, distance_grid, limit_mass_corner
from .rng import RandomStream, derive
from .samplers import (
    RecordBias,
    SamplerKind,
    batch_heatmap,
    batch_sample,
    batch_statistics,
    batch_words,
    resolve_theta,
    sample,
)

__version__ = "0.1.0"
