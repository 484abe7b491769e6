"""Empirical x-densities over real primes.

Every prime of the middle field ``K`` that the estimators see sits above a
rational prime ``p``; the primes of ``K`` over ``p`` are grouped into slots.
A slot is an element ``y`` of ``G`` (a representative of an ``H``-class in
the fiber over ``x``) together with how many primes of ``K`` over ``p`` it
holds, their norm exponent and the exponent used for the cutoff.  Sets are
evaluated slot by slot, so each estimate is a ratio of exact prime counts or
of weighted sums reduced with ``math.fsum``.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

import numpy as np

from . import density
from .errors import BadInput, EmptyDenominator, InvariantBreach, SBelowAbscissa
from .fields import Scenario
from .groups import fiber_h_classes
from .primes import classify_range

DEFAULT_EPSILONS = (0.2, 0.1, 0.05, 0.025)
DEFAULT_CUTOFFS = (10**5, 10**6, 5 * 10**6, 10**7)

SCHEDULE_NOTE = (
    "weighted entries use s = 1/d + eps at increasing cutoffs X as a stand-in "
    "for the limit s -> 1/d; the counting estimate is the headline value"
)


def default_threads() -> int:
    return os.cpu_count() or 1


@dataclass(frozen=True)
class Schedule:
    pairs: tuple

    def __post_init__(self):
        if not self.pairs:
            raise BadInput("empty schedule")
        eps = [float(e) for e, _ in self.pairs]
        xs = [int(x) for _, x in self.pairs]
        if any(e <= 0 for e in eps):
            raise BadInput("schedule epsilons must be positive")
        if any(a <= b for a, b in zip(eps, eps[1:])):
            raise BadInput("schedule epsilons must strictly decrease")
        if any(a >= b for a, b in zip(xs, xs[1:])):
            raise BadInput("schedule cutoffs must strictly increase")
        object.__setattr__(self, "pairs", tuple(zip(eps, xs)))

    @classmethod
    def default(cls, X: int | None = None) -> "Schedule":
        """The standard schedule, its cutoffs rescaled so the last one equals ``X``."""
        if X is None or X == DEFAULT_CUTOFFS[-1]:
            return cls(tuple(zip(DEFAULT_EPSILONS, DEFAULT_CUTOFFS)))
        scale = X / DEFAULT_CUTOFFS[-1]
        xs = [max(2, round(c * scale)) for c in DEFAULT_CUTOFFS]
        xs[-1] = X
        pairs = [(e, c) for e, c in zip(DEFAULT_EPSILONS, xs)]
        kept = [pairs[-1]]
        for e, c in reversed(pairs[:-1]):
            if c < kept[0][1]:
                kept.insert(0, (e, c))
        return cls(tuple(kept))

    @property
    def max_cutoff(self) -> int:
        return self.pairs[-1][1]


@dataclass(frozen=True)
class DensityEstimate:
    value: float
    estimator: str
    s: float | None
    X: int
    numer_count: int
    denom_count: int
    numer_weight: float | None = None
    denom_weight: float | None = None

    def __post_init__(self):
        if self.denom_count <= 0:
            raise EmptyDenominator("no primes in the denominator")
        if not 0.0 <= self.value <= 1.0:
            raise InvariantBreach(f"estimate {self.value} outside [0, 1]")

    @property
    def stderr_proxy(self) -> float:
        v = self.value
        return math.sqrt(v * (1.0 - v) / self.denom_count)


# ---------------------------------------------------------------------------
# Slots


@dataclass(frozen=True)
class Slot:
    element: Any
    gclass: int
    count: int
    norm_exp: int
    cut_exp: int = 1


def fiber_slots(scenario: Scenario, x) -> list[Slot]:
    """One slot per ``H``-class in the fiber over ``x``."""
    scenario.Q.require(x)
    d = scenario.Q.element_order(x)
    out = []
    for C in fiber_h_classes(scenario.pi, x).classes:
        y = min(C, key=scenario.G.index)
        count = density.primes_per_class(scenario.pi, y)
        if count.denominator != 1:
            raise InvariantBreach(f"non-integral prime count {count} for {y!r}")
        out.append(Slot(y, scenario.class_index[y], int(count), d))
    return out


def base_slots(scenario: Scenario, x, base: frozenset) -> list[Slot]:
    """Slots for the denominator taken over the fixed field of ``base`` (a subgroup of ``Q``).

    A rational prime with Frobenius ``z`` in ``Q`` has residue degree ``f``
    (the order of ``z`` modulo ``base``) in that field; the primes of ``K``
    above it have Frobenius ``z**f`` over it and norm ``p**ord(z)``.  They are
    counted when ``p**f <= X``.  Abelian towers only.
    """
    G, Q, pi = scenario.G, scenario.Q, scenario.pi
    if not G.is_abelian():
        raise BadInput("a base field other than Q is supported for abelian scenarios only")
    if not Q.is_subgroup(base):
        raise BadInput("base must be a subgroup of Gal(K/Q)")
    if x not in base:
        raise BadInput("x must lie in the group of K over the base field")
    out = []
    for y in G.elements:
        z = pi(y)
        f, zf = 1, z
        while zf not in base:
            zf = Q.mul(zf, z)
            f += 1
        if zf != x:
            continue
        ordz = Q.element_order(z)
        out.append(Slot(y, scenario.class_index[y], len(Q) // ordz, ordz, f))
    return out


# ---------------------------------------------------------------------------
# Prime tables


def _classified(scenario: Scenario, X: int, threads: int) -> tuple[np.ndarray, np.ndarray]:
    cache = scenario.__dict__.setdefault("_classified_cache", {})
    for hi, (ps, cl) in cache.items():
        if hi >= X:
            k = int(np.searchsorted(ps, X, side="right"))
            return ps[:k], cl[:k]
    ps, cl = classify_range(scenario, 2, int(X), threads)
    cache.clear()
    cache[int(X)] = (ps, cl)
    return ps, cl


@dataclass
class _Rows:
    primes: np.ndarray
    counts: np.ndarray
    norm_exp: np.ndarray
    member: np.ndarray


def _gather(scenario: Scenario, S, slots: Sequence[Slot], X: int, threads: int) -> _Rows:
    primes, cls = _classified(scenario, X, threads)
    parts = []
    for slot in slots:
        ps = primes[cls == slot.gclass]
        if slot.cut_exp > 1:
            ps = ps[ps <= _iroot(X, slot.cut_exp)]
        mem = S.member(scenario, slot.element, ps)
        parts.append((ps, np.full(ps.shape, slot.count, dtype=np.int64),
                      np.full(ps.shape, slot.norm_exp, dtype=np.int64), mem))
    if not parts:
        e = np.zeros(0, dtype=np.int64)
        return _Rows(e, e, e, np.zeros(0, dtype=bool))
    return _Rows(*(np.concatenate(col) for col in zip(*parts)))


def _iroot(X: int, k: int) -> int:
    r = int(round(X ** (1.0 / k)))
    while r**k > X:
        r -= 1
    while (r + 1) ** k <= X:
        r += 1
    return r


def _weights(rows: _Rows, s: float) -> np.ndarray:
    return rows.counts * np.power(rows.primes.astype(np.float64), -rows.norm_exp * s)


def _slots(scenario: Scenario, x, base) -> list[Slot]:
    return fiber_slots(scenario, x) if base is None else base_slots(scenario, x, frozenset(base))


def _order(scenario: Scenario, x) -> int:
    return scenario.Q.element_order(x)


def _check_s(s: float, d: int) -> None:
    if not s > 1.0 / d:
        raise SBelowAbscissa(f"s = {s} must exceed 1/d = {1.0 / d}")


# ---------------------------------------------------------------------------
# Estimators


def weighted_partial(scenario: Scenario, S, x, s: float, X: int, *, base=None, threads: int = 1) -> float:
    """Sum of ``N(P)^-s`` over primes ``P`` of ``K`` in ``S ∩ P^x`` above ``p <= X``."""
    _check_s(s, _order(scenario, x))
    if X < 2:
        raise BadInput("cutoff must be at least 2")
    rows = _gather(scenario, S, _slots(scenario, x, base), X, threads)
    return math.fsum(_weights(rows, s)[rows.member])


def _weighted_estimate(rows: _Rows, s: float, X: int) -> DensityEstimate:
    keep = rows.primes <= X
    w = _weights(rows, s)[keep]
    mem = rows.member[keep]
    num = math.fsum(w[mem])
    den = math.fsum(w)
    if den <= 0:
        raise EmptyDenominator(f"no primes of P^x below {X}")
    counts = rows.counts[keep]
    return DensityEstimate(num / den, "weighted", s, X,
                           int(counts[mem].sum()), int(counts.sum()), num, den)


def delta_x_weighted(scenario: Scenario, S, x, schedule: Schedule | None = None, *,
                     base=None, threads: int = 1) -> list[DensityEstimate]:
    """Weighted ratios along the schedule; the last entry is the headline."""
    schedule = schedule or Schedule.default()
    d = _order(scenario, x)
    rows = _gather(scenario, S, _slots(scenario, x, base), schedule.max_cutoff, threads)
    out = []
    for eps, X in schedule.pairs:
        s = 1.0 / d + eps
        _check_s(s, d)
        out.append(_weighted_estimate(rows, s, X))
    return out


def delta_x_counting(scenario: Scenario, S, x, X: int, *, base=None, threads: int = 1) -> DensityEstimate:
    """Share of primes of ``P^x`` (counted with multiplicity) that lie in ``S``."""
    if X < 2:
        raise BadInput("cutoff must be at least 2")
    rows = _gather(scenario, S, _slots(scenario, x, base), X, threads)
    den = int(rows.counts.sum())
    if den == 0:
        raise EmptyDenominator(f"no primes of P^x below {X}")
    num = int(rows.counts[rows.member].sum())
    return DensityEstimate(num / den, "counting", None, X, num, den)


def divergence_probe(scenario: Scenario, x, X_list: Sequence[int], *, threads: int = 1) -> list[float]:
    """Weighted sum over all of ``P^x`` at ``s = 1/d`` for each cutoff."""
    d = _order(scenario, x)
    rows = _gather(scenario, density.AllPrimes(), fiber_slots(scenario, x), max(X_list), threads)
    w = _weights(rows, 1.0 / d)
    return [math.fsum(w[rows.primes <= X]) for X in X_list]


@dataclass(frozen=True)
class LProbeRow:
    s: float
    log_product: complex
    model: float

    @property
    def difference(self) -> complex:
        return self.log_product - self.model


def l_product_probe(m: int, chi: Callable[[int], complex], x, s_list: Sequence[float], X: int,
                    *, threads: int = 1) -> list[LProbeRow]:
    """Log of the Euler product over ``P^x`` for ``K = Q(zeta_m)`` twisted by ``chi``.

    ``chi`` is a function on residues mod ``m``; a prime of ``K`` over ``p``
    gets ``chi(p)**d``.  The model column is ``(log(1/(s-1/d)) - log d)/d``.
    """
    from .fields import AbelianScenario

    sc = AbelianScenario(m)
    x = sc.quotient_element(x)
    d = _order(sc, x)
    rows = _gather(sc, density.AllPrimes(), fiber_slots(sc, x), X, threads)
    table = np.zeros(m, dtype=np.complex128)
    for r in range(m):
        if math.gcd(r, m) == 1:
            table[r] = complex(chi(r)) ** d
    twist = table[rows.primes % m]
    out = []
    for s in s_list:
        _check_s(s, d)
        u = twist * np.power(rows.primes.astype(np.float64), -d * s)
        terms = -rows.counts * np.log1p(-u)
        val = complex(math.fsum(terms.real), math.fsum(terms.imag))
        model = (math.log(1.0 / (s - 1.0 / d)) - math.log(d)) / d
        out.append(LProbeRow(float(s), val, model))
    return out


# ---------------------------------------------------------------------------
# Verification


@dataclass
class VerifyReport:
    passed: bool
    expected: Fraction
    tolerance: float
    counting: DensityEstimate
    weighted: list[DensityEstimate] = field(default_factory=list)

    def rows(self) -> list[tuple]:
        """TSV rows: estimator, s, X, numer, denom, value, expected, abs_err, pass."""
        exp = float(self.expected)
        out = []
        for e in self.weighted:
            err = abs(e.value - exp)
            out.append(("weighted", f"{e.s:.6f}", e.X, e.numer_count, e.denom_count,
                        f"{e.value:.6f}", f"{exp:.6f}", f"{err:.6f}",
                        _flag(err <= 2 * self.tolerance)))
        c = self.counting
        err = abs(c.value - exp)
        out.append(("counting", "-", c.X, c.numer_count, c.denom_count, f"{c.value:.6f}",
                    f"{exp:.6f}", f"{err:.6f}", _flag(err <= self.tolerance)))
        return out


def _flag(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


def verify(scenario: Scenario, S, x, expected, tolerance: float, X: int, *,
           schedule: Schedule | None = None, base=None, threads: int = 1) -> VerifyReport:
    """Counting estimate within ``tolerance`` and last weighted entry within twice that."""
    expected = Fraction(expected)
    schedule = schedule or Schedule.default(X)
    counting = delta_x_counting(scenario, S, x, X, base=base, threads=threads)
    weighted = delta_x_weighted(scenario, S, x, schedule, base=base, threads=threads)
    ok = (abs(counting.value - float(expected)) <= tolerance
          and abs(weighted[-1].value - float(expected)) <= 2 * tolerance)
    return VerifyReport(ok, expected, tolerance, counting, weighted)
