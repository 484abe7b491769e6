"""Densities of primes with a prescribed Frobenius element.

Exact predictions come from finite group computations (``density``); the
empirical side enumerates primes of explicit abelian and symmetric number
fields (``fields``, ``primes``) and estimates the same quantities
(``estimator``).
"""
from .density import (
    AllPrimes,
    Chebotarev,
    Complement,
    Congruence,
    Fiber,
    Intersect,
    MinusFinite,
    NoPrimes,
    Tower,
    Union,
    predict_density,
)
from .estimator import DensityEstimate, Schedule, delta_x_counting, delta_x_weighted, verify
from .fields import AbelianScenario, PrimeRecord, SnScenario
from .primes import PrimeWindow, sieve, stream

__version__ = "0.1.0"

__all__ = [
    "AbelianScenario",
    "AllPrimes",
    "Chebotarev",
    "Complement",
    "Congruence",
    "DensityEstimate",
    "Fiber",
    "Intersect",
    "MinusFinite",
    "NoPrimes",
    "PrimeRecord",
    "PrimeWindow",
    "Schedule",
    "SnScenario",
    "Tower",
    "Union",
    "delta_x_counting",
    "delta_x_weighted",
    "predict_density",
    "sieve",
    "stream",
    "verify",
]
