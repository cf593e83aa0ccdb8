"""Simulation lab for convergence modes of random variables.

Exact series checks where closed forms exist, seeded Monte Carlo diagnostics
where they do not, and a machine-verified implication matrix between the
convergence modes built on summable tail, moment and distribution-distance
series.
"""

__version__ = "0.1.0"

from .rng import RngStream, make_rng_stream
from .distributions import DistributionSpec, Family
from .models import PathSample, SequenceModel, parse_model, sample_path

__all__ = [
    "__version__",
    "RngStream",
    "make_rng_stream",
    "DistributionSpec",
    "Family",
    "PathSample",
    "SequenceModel",
    "parse_model",
    "sample_path",
]
