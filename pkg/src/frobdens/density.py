"""Exact density predictions from group data.

Everything here is rational arithmetic on enumerated groups.  A tower is
``G -> Q = G/H`` (``G`` the group of the top field over the base, ``H`` the
group of the top field over the middle field).  A set of primes of the middle
field that is described by Frobenius conditions compiles to an ``H``-stable
subset ``T`` of ``G``; its density with respect to ``x`` in ``Q`` is then
``|T ∩ pi^-1(x)| / |H|``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Mapping

import numpy as np

from .errors import (
    BadInput,
    ClassNotInFiber,
    ElementNotInGroup,
    HypothesisViolated,
    InvariantBreach,
    MissingDensity,
    NotPredictable,
    OutOfRange,
    TargetMismatch,
)
from .groups import (
    CharacterFn,
    FiniteGroup,
    GroupMorphism,
    direct_product,
    fiber_h_classes,
    fibered_product,
    inner_product,
    normal_closure,
    semidirect_tower,
)


# ---------------------------------------------------------------------------
# Towers


@dataclass(frozen=True)
class Tower:
    """Bare group data ``pi: G -> Q`` with kernel ``H``; no field attached."""

    G: FiniteGroup
    H: frozenset
    Q: FiniteGroup
    pi: GroupMorphism
    label: str = ""

    @classmethod
    def from_projection(cls, pi: GroupMorphism, label: str = "") -> "Tower":
        return cls(pi.source, pi.kernel(), pi.target, pi, label or pi.source.label)

    def congruence_elements(self, modulus: int, residues) -> frozenset:
        raise NotPredictable("congruence conditions need a field scenario")


def _require(G: FiniteGroup, *gs) -> None:
    for g in gs:
        if g not in G:
            raise ElementNotInGroup(f"{g!r} is not an element of {G.label}")


# ---------------------------------------------------------------------------
# Constants attached to elements


def prop32_density(pi: GroupMorphism, x, C: Iterable) -> Fraction:
    """Density of the primes whose lifts have Frobenius class ``C`` in the fiber over ``x``."""
    _require(pi.target, x)
    C = frozenset(C)
    if C not in fiber_h_classes(pi, x).classes:
        raise ClassNotInFiber(f"not an H-conjugacy class of the fiber over {x!r}")
    return Fraction(len(C), len(pi.kernel()))


def gamma_constant(pi: GroupMorphism, y) -> Fraction:
    """Number of primes of the top field over one prime of ``M_C`` with Frobenius ``y``."""
    G = pi.source
    _require(G, y)
    d = pi.target.element_order(pi(y))
    H = pi.kernel()
    return Fraction(len(G.centralizer(y, within=H)), len(G.cyclic_subgroup(G.power(y, d))))


def multiplicity_constant(G: FiniteGroup, x) -> Fraction:
    """Primes with Frobenius exactly ``x`` above one prime of the base."""
    _require(G, x)
    return Fraction(len(G.centralizer(x)), len(G.cyclic_subgroup(x)))


def beta_constant(pi: GroupMorphism, y) -> Fraction:
    G = pi.source
    _require(G, y)
    x = pi(y)
    return Fraction(
        len(G.centralizer(y)),
        len(pi.target.cyclic_subgroup(x)) * len(G.centralizer(y, within=pi.kernel())),
    )


def primes_per_class(pi: GroupMorphism, y) -> Fraction:
    """Primes of the middle field in ``M_C`` (``C`` the class of ``y``) above one rational prime.

    Valid for a rational prime whose Frobenius class in ``G`` contains ``y``.
    """
    G = pi.source
    d = pi.target.element_order(pi(y))
    return Fraction(
        len(G.centralizer(y)) * len(G.cyclic_subgroup(G.power(y, d))),
        len(G.cyclic_subgroup(y)) * len(G.centralizer(y, within=pi.kernel())),
    )


def cor34_pullback(delta, C, h_size: int) -> Fraction:
    """Density in the top field from the middle-field density of ``S ∩ M_C``.

    ``C`` may be the class itself or its size.
    """
    size = C if isinstance(C, int) else len(frozenset(C))
    delta = Fraction(delta)
    if size <= 0 or h_size <= 0 or size > h_size:
        raise BadInput("need 0 < |C| <= |H|")
    if delta < 0:
        raise OutOfRange(f"negative density {delta}")
    out = Fraction(h_size, size) * delta
    if out > 1:
        raise OutOfRange(f"pull-back {out} exceeds 1")
    return out


def cor35_chebotarev_pullback(pi_L: GroupMorphism, pi_M: GroupMorphism, x, sigma) -> Fraction:
    """Density of the lift of a Chebotarev set of ``M`` with respect to ``x`` in ``L``.

    ``pi_L: Gal(L/K) -> Gal(L∩M/K)`` and ``pi_M: Gal(M/K) -> Gal(L∩M/K)``.
    """
    if not pi_L.target.same_as(pi_M.target):
        raise TargetMismatch("the two projections land in different groups")
    if not (pi_L.is_surjective() and pi_M.is_surjective()):
        raise TargetMismatch("projections onto the common quotient must be surjective")
    GL, GM = pi_L.source, pi_M.source
    _require(GL, x)
    _require(GM, sigma)
    if pi_L(x) != pi_M(sigma):
        return Fraction(0)
    P, _, _ = fibered_product(pi_L, pi_M)
    joint = len(P.conjugacy_class((x, sigma)))
    index = len(GM) // len(pi_M.target)
    return Fraction(joint, index * len(GL.conjugacy_class(x)))


def sect56_closed_form(rho: GroupMorphism, sigma) -> Fraction:
    GM, Delta = rho.source, rho.target
    _require(GM, sigma)
    index = len(GM) // len(Delta)
    return Fraction(len(GM.conjugacy_class(sigma)), index * len(Delta.conjugacy_class(rho(sigma))))


def sect56_density(rho: GroupMorphism, Hi: FiniteGroup, sigma, x) -> Fraction:
    """Density of the Chebotarev set of ``sigma`` with respect to ``(rho(sigma), x)``.

    ``rho: Gal(M/K) -> Delta``; the second field has group ``Delta x Hi`` over
    ``K`` and meets ``M`` in the fixed field of ``ker rho``.  Computed through
    the fibered product and checked against the closed form.
    """
    Delta = rho.target
    if not rho.is_surjective():
        raise TargetMismatch("Gal(M/K) must surject onto Delta")
    _require(Hi, x)
    P, p1, _ = direct_product(Delta, Hi)
    to_delta = GroupMorphism(P, Delta, lambda g: g[0], check=False)
    value = cor35_chebotarev_pullback(to_delta, rho, (rho(sigma), x), sigma)
    closed = sect56_closed_form(rho, sigma)
    if value != closed:
        raise InvariantBreach(f"fibered-product value {value} differs from closed form {closed}")
    return value


# ---------------------------------------------------------------------------
# Set expressions


class SetExpr:
    """A set of primes of the middle field.

    ``elements(tower)`` gives the subset ``T`` of ``G`` it compiles to (or
    raises ``NotPredictable``).  ``member(tower, y, primes)`` decides, for
    rational primes whose lifts have Frobenius ``y``, whether the primes of
    the middle field above them lie in the set.
    """

    def elements(self, tower) -> frozenset:
        raise NotImplementedError

    def member(self, tower, y, primes: np.ndarray) -> np.ndarray:
        return np.full(len(primes), y in self.elements(tower), dtype=bool)

    def __or__(self, other: "SetExpr") -> "SetExpr":
        return Union((self, other))

    def __and__(self, other: "SetExpr") -> "SetExpr":
        return Intersect((self, other))

    def __invert__(self) -> "SetExpr":
        return Complement(self)


@dataclass(frozen=True)
class AllPrimes(SetExpr):
    def elements(self, tower) -> frozenset:
        return frozenset(tower.G.elements)


@dataclass(frozen=True)
class NoPrimes(SetExpr):
    def elements(self, tower) -> frozenset:
        return frozenset()


@dataclass(frozen=True)
class Chebotarev(SetExpr):
    """Frobenius condition at one level of the tower.

    ``level="L"``: the Frobenius over the middle field lies in the
    ``H``-classes of ``members`` (elements of ``H``).  ``level="K"``: the
    Frobenius over the base lies in ``members`` (elements of ``Q``).
    """

    level: str
    members: frozenset

    def elements(self, tower) -> frozenset:
        G, H, pi = tower.G, tower.H, tower.pi
        if self.level == "K":
            _require(tower.Q, *self.members)
            return frozenset(y for y in G.elements if pi(y) in self.members)
        if self.level != "L":
            raise BadInput(f"unknown level {self.level!r}")
        for h in self.members:
            if h not in H:
                raise ElementNotInGroup(f"{h!r} is not in Gal(L/K)")
        closed = {G.conj(k, h) for h in self.members for k in H}
        Q = tower.Q
        return frozenset(y for y in G.elements if G.power(y, Q.element_order(pi(y))) in closed)


@dataclass(frozen=True)
class Fiber(SetExpr):
    """Union of the sets ``M_C`` for the ``H``-classes of the given elements of ``G``."""

    members: frozenset

    def elements(self, tower) -> frozenset:
        _require(tower.G, *self.members)
        return frozenset(tower.G.conj(h, y) for y in self.members for h in tower.H)


@dataclass(frozen=True)
class Congruence(SetExpr):
    """Primes lying over rational ``p`` with ``p mod modulus`` in ``residues``."""

    modulus: int
    residues: frozenset

    def elements(self, tower) -> frozenset:
        return tower.congruence_elements(self.modulus, self.residues)

    def member(self, tower, y, primes: np.ndarray) -> np.ndarray:
        return np.isin(np.asarray(primes, dtype=np.int64) % self.modulus, sorted(self.residues))


@dataclass(frozen=True)
class Union(SetExpr):
    parts: tuple

    def elements(self, tower) -> frozenset:
        return frozenset().union(*(p.elements(tower) for p in self.parts))

    def member(self, tower, y, primes):
        out = np.zeros(len(primes), dtype=bool)
        for p in self.parts:
            out |= p.member(tower, y, primes)
        return out


@dataclass(frozen=True)
class Intersect(SetExpr):
    parts: tuple

    def elements(self, tower) -> frozenset:
        out = frozenset(tower.G.elements)
        for p in self.parts:
            out &= p.elements(tower)
        return out

    def member(self, tower, y, primes):
        out = np.ones(len(primes), dtype=bool)
        for p in self.parts:
            out &= p.member(tower, y, primes)
        return out


@dataclass(frozen=True)
class Complement(SetExpr):
    inner: SetExpr

    def elements(self, tower) -> frozenset:
        return frozenset(tower.G.elements) - self.inner.elements(tower)

    def member(self, tower, y, primes):
        return ~self.inner.member(tower, y, primes)


@dataclass(frozen=True)
class MinusFinite(SetExpr):
    """Drop the primes above finitely many rational primes; densities are unchanged."""

    inner: SetExpr
    primes: frozenset

    def elements(self, tower) -> frozenset:
        return self.inner.elements(tower)

    def member(self, tower, y, primes):
        drop = np.isin(np.asarray(primes, dtype=np.int64), sorted(self.primes))
        return self.inner.member(tower, y, primes) & ~drop


# ---------------------------------------------------------------------------
# Predictions


def predict_density(tower, S: SetExpr, x) -> Fraction:
    """Exact density of ``S`` with respect to ``x`` in ``Q``: sum of ``|C|/|H|`` over classes in ``S``."""
    _require(tower.Q, x)
    return _density_of_set(tower, S.elements(tower), x)


def _density_of_set(tower, T: frozenset, x) -> Fraction:
    total = Fraction(0)
    for C in fiber_h_classes(tower.pi, x).classes:
        if C <= T:
            total += prop32_density(tower.pi, x, C)
        elif C & T:
            raise InvariantBreach("compiled set is not a union of H-classes")
    return total


def characteristic_function(tower, S: SetExpr) -> CharacterFn:
    """``x -> density of S with respect to x`` on ``Q``."""
    return _class_fns(tower, S.elements(tower))[0]


def _class_fns(tower, T: frozenset) -> tuple:
    # both functions depend only on pi and T; memoized on the projection
    memo = tower.pi._class_fns
    if T not in memo:
        chi = CharacterFn(tower.Q, {x: _density_of_set(tower, T, x) for x in tower.Q.elements})
        memo[T] = (chi, _lift(tower, T))
    return memo[T]


def lifted_characteristic_function(tower, S: SetExpr) -> CharacterFn:
    """Characteristic function of the lifted set on ``G``, via the pull-back formula."""
    return _class_fns(tower, S.elements(tower))[1]


def _lift(tower, T: frozenset) -> CharacterFn:
    G, pi = tower.G, tower.pi
    h = len(tower.H)
    values = {}
    for x in tower.Q.elements:
        for C in fiber_h_classes(pi, x).classes:
            inside = prop32_density(pi, x, C) if C <= T else Fraction(0)
            v = cor34_pullback(inside, C, h)
            for y in C:
                values[y] = v
    return CharacterFn(G, values)


def psi_density_predict(psi: CharacterFn, per_x_densities: Mapping) -> Any:
    """Inner product of ``psi`` with the characteristic function given by ``per_x_densities``."""
    missing = [g for g in psi.group.elements if g not in per_x_densities]
    if missing:
        raise MissingDensity(f"no density given for {missing[0]!r}")
    chi = CharacterFn(psi.group, {g: per_x_densities[g] for g in psi.group.elements})
    return inner_product(psi, chi)


def classical_density(tower, S: SetExpr) -> Fraction:
    """Dirichlet density of ``S`` as a sum over the conjugacy classes of ``H`` itself."""
    T = S.elements(tower)
    Hgrp = tower.G.subgroup(tower.H, "H")
    total = Fraction(0)
    for C in Hgrp.conjugacy_classes():
        if C <= T:
            total += Fraction(len(C), len(Hgrp))
    return total


def inflation_identity_check(pi_or_tower, psi: CharacterFn, S: SetExpr) -> bool:
    """Whether the inflated weight on ``G`` sees the lifted set as ``psi`` sees ``S``."""
    tower = pi_or_tower if hasattr(pi_or_tower, "H") else Tower.from_projection(pi_or_tower)
    if not psi.group.same_as(tower.Q):
        raise BadInput("psi must live on the quotient group")
    lhs = inner_product(psi.inflate(tower.pi), lifted_characteristic_function(tower, S))
    rhs = inner_product(psi, characteristic_function(tower, S))
    if psi.exact:
        return lhs == rhs
    return abs(complex(lhs) - complex(rhs)) <= 1e-12


# ---------------------------------------------------------------------------
# Normal closure in the semidirect tower


def character_order(j: int, d: int) -> int:
    """Order of ``a -> exp(2 pi i j a / d)`` on ``Z/d``."""
    return d // math.gcd(j, d)


def lemma_normteiler_verify(d: int, p: int, chi_gen: int, level: int, psi_exp: int) -> bool:
    """Brute-force check that the normal closure of the section of ``ker psi`` is its full preimage.

    ``chi_gen`` is the image of ``1`` under the action character ``Z/d -> F_p^x``;
    ``psi`` is ``a -> exp(2 pi i psi_exp a / d)``.
    """
    tower = semidirect_tower(d, p, chi_gen, level)
    ord_chi = multiplicative_order(tower.chi_gen, p)
    ord_psi = character_order(psi_exp, d)
    if ord_psi >= ord_chi:
        raise HypothesisViolated(f"ord(psi) = {ord_psi} is not below ord(chi) = {ord_chi}")
    kernel = [a for a in range(d) if (psi_exp * a) % d == 0]
    closure = normal_closure(tower.group, [tower.section(a) for a in kernel])
    preimage = frozenset(g for g in tower.group.elements if g[0] in kernel)
    return closure == preimage


def multiplicative_order(c: int, p: int) -> int:
    if c % p == 0:
        raise BadInput(f"{c} is not a unit mod {p}")
    k, v = 1, c % p
    while v != 1:
        v = v * c % p
        k += 1
    return k


def injective_chi_generator(d: int, p: int) -> int | None:
    """Smallest element of exact order ``d`` in ``F_p^x``, or ``None``."""
    if (p - 1) % d:
        return None
    for c in range(1, p):
        if multiplicative_order(c, p) == d:
            return c
    return None
