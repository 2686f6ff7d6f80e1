"""Rate-distortion-cost tradeoffs for source coding with action-dependent side information."""

__version__ = "0.1.0"

from sivending.info import (
    CostVector,
    DistortionMatrix,
    JointDist,
    ProbVector,
    StochasticKernel,
    bernoulli_rd,
    binary_entropy,
    conditional_mutual_information,
    entropy,
    factorize,
    mutual_information,
)
from sivending.problem import ProblemSpec, GaussianSpec

__all__ = [
    "CostVector",
    "DistortionMatrix",
    "GaussianSpec",
    "JointDist",
    "ProbVector",
    "ProblemSpec",
    "StochasticKernel",
    "bernoulli_rd",
    "binary_entropy",
    "conditional_mutual_information",
    "entropy",
    "factorize",
    "mutual_information",
]
