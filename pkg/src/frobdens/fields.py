"""Explicit Galois extensions of Q with computable Frobenius data.

Two backends:

``AbelianScenario``
    ``L = Q(zeta_m)^V`` inside the cyclotomic field, with intermediate field
    ``K = Q(zeta_m)^U`` for subgroups ``V <= U <= (Z/m)^x``.  The Frobenius of
    an unramified ``p`` is the class of ``p mod m``.

``SnScenario``
    ``L`` is the splitting field of a monic integer polynomial whose Galois
    group is the full symmetric group, ``K = L^H`` for a normal ``H <= S_n``.
    Frobenius classes come from the degrees of the irreducible factors of
    ``f mod p``.

Both expose the same tower data: ``G = Gal(L/Q)``, ``H = Gal(L/K)``,
``Q = G/H = Gal(K/Q)`` and the projection ``pi``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Sequence

import numpy as np

from . import kernels
from .errors import (
    BadInput,
    DegreeMismatch,
    ElementNotInGroup,
    MalformedGenerator,
    NotFullSymmetric,
    NotNormal,
    NotPredictable,
    NotSquarefreeModP,
    Ramified,
)
from .groups import (
    FiniteGroup,
    GroupMorphism,
    cycle_type,
    perm_from_cycles,
    quotient,
    sign,
    symmetric_group,
    unit_group,
)

MAX_CONDUCTOR = 10**6
MAX_DEGREE = kernels.MAX_DEGREE


@dataclass(frozen=True)
class PrimeRecord:
    """Splitting data of one rational prime in the intermediate field ``K``.

    ``frob`` is the Frobenius in ``Gal(L/Q)``: an element for abelian
    scenarios, a cycle type for symmetric ones.  ``d``/``g``/``norm`` describe
    the primes of ``K`` over ``p`` and are ``None`` when ``p`` ramifies.
    """

    p: int
    frob: Any
    d: int | None
    g: int | None
    norm: int | None
    ramified: bool = False


# ---------------------------------------------------------------------------
# Polynomial arithmetic over Z and F_p (coefficient lists, lowest degree first)


def _trim(a: list) -> list:
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmod(a: list, b: list, p: int) -> list:
    a = _trim([c % p for c in a])
    inv = pow(b[-1], -1, p)
    db = len(b) - 1
    while len(a) - 1 >= db and a:
        c = a[-1] * inv % p
        shift = len(a) - 1 - db
        for j, bj in enumerate(b):
            a[shift + j] = (a[shift + j] - c * bj) % p
        _trim(a)
    return a


def _pdivmod(a: list, b: list, p: int) -> tuple[list, list]:
    a = _trim([c % p for c in a])
    inv = pow(b[-1], -1, p)
    db = len(b) - 1
    q = [0] * max(len(a) - db, 1)
    while a and len(a) - 1 >= db:
        c = a[-1] * inv % p
        shift = len(a) - 1 - db
        q[shift] = c
        for j, bj in enumerate(b):
            a[shift + j] = (a[shift + j] - c * bj) % p
        _trim(a)
    return _trim(q), a


def _pmul(a: list, b: list, p: int) -> list:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _trim(out)


def _pgcd(a: list, b: list, p: int) -> list:
    a, b = _trim([c % p for c in a]), _trim([c % p for c in b])
    while b:
        a, b = b, _pmod(a, b, p)
    if a:
        inv = pow(a[-1], -1, p)
        a = [c * inv % p for c in a]
    return a


def _ppowmod(base: list, e: int, mod: list, p: int) -> list:
    result = [1]
    base = _pmod(base, mod, p)
    while e:
        if e & 1:
            result = _pmod(_pmul(result, base, p), mod, p)
        base = _pmod(_pmul(base, base, p), mod, p)
        e >>= 1
    return result


def _psub(a: list, b: list, p: int) -> list:
    n = max(len(a), len(b))
    a = a + [0] * (n - len(a))
    b = b + [0] * (n - len(b))
    return _trim([(x - y) % p for x, y in zip(a, b)])


def _derivative(a: list) -> list:
    return [i * a[i] for i in range(1, len(a))]


def _bareiss_det(mat: list[list[int]]) -> int:
    """Exact integer determinant by fraction-free elimination."""
    a = [row[:] for row in mat]
    n = len(a)
    if n == 0:
        return 1
    sgn, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sgn = -sgn
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sgn * a[n - 1][n - 1]


def resultant(f: Sequence[int], g: Sequence[int]) -> int:
    """Resultant of two integer polynomials given highest degree first."""
    f, g = [int(c) for c in f], [int(c) for c in g]
    m, n = len(f) - 1, len(g) - 1
    size = m + n
    rows = []
    for i in range(n):
        rows.append([0] * i + f + [0] * (size - m - 1 - i))
    for i in range(m):
        rows.append([0] * i + g + [0] * (size - n - 1 - i))
    return _bareiss_det(rows)


def discriminant(f: Sequence[int]) -> int:
    """Discriminant of a monic integer polynomial (highest coefficient first)."""
    f = [int(c) for c in f]
    n = len(f) - 1
    if n < 2 or f[0] != 1:
        raise BadInput("discriminant needs a monic polynomial of degree >= 2")
    df = [c * (n - i) for i, c in enumerate(f[:-1])]
    sgn = -1 if (n * (n - 1) // 2) % 2 else 1
    return sgn * resultant(f, df)


# ---------------------------------------------------------------------------
# Frobenius oracles


def frobenius_abelian(m: int, p: int) -> int:
    if m % p == 0:
        raise Ramified(f"{p} divides the conductor {m}")
    return p % m


def cycle_type_sn(f: Sequence[int], p: int, disc: int | None = None) -> tuple:
    """Degrees of the irreducible factors of ``f mod p`` (sorted).

    ``f`` is monic, highest coefficient first.  Distinct-degree factorization:
    the product of the degree-``k`` factors is ``gcd(f, x^(p^k) - x)`` after the
    lower-degree factors have been divided out.
    """
    coeffs = [int(c) for c in f]
    if disc is None:
        disc = discriminant(coeffs)
    if disc % p == 0:
        raise Ramified(f"{p} divides disc(f) = {disc}")
    g = [c % p for c in reversed(coeffs)]
    if len(_pgcd(g, _derivative(g), p)) > 1:
        raise NotSquarefreeModP(f"f is not squarefree mod {p}")
    n = len(g) - 1
    x = [0, 1]
    h = x
    degrees: list[int] = []
    k = 1
    while len(g) - 1 >= 2 * k:
        h = _ppowmod(h, p, g, p)
        d = _pgcd(g, _psub(h, x, p), p)
        dd = len(d) - 1
        if dd > 0:
            degrees += [k] * (dd // k)
            g, _ = _pdivmod(g, d, p)
            h = _pmod(h, g, p)
        k += 1
    if len(g) - 1 > 0:
        degrees.append(len(g) - 1)
    if sum(degrees) != n:
        raise NotSquarefreeModP(f"degrees {degrees} do not add up to {n}")
    return tuple(sorted(degrees))


def frobenius_class_sn(ctype: Sequence[int], n: int, G: FiniteGroup | None = None) -> frozenset:
    """Conjugacy class of ``S_n`` with the given cycle type."""
    ctype = tuple(sorted(int(c) for c in ctype))
    if sum(ctype) != n or any(c < 1 for c in ctype):
        raise DegreeMismatch(f"cycle type {ctype} is not a partition of {n}")
    G = G if G is not None else _sym(n)
    return frozenset(g for g in G.elements if cycle_type(g) == ctype)


_SYM_CACHE: dict[int, FiniteGroup] = {}


def _sym(n: int) -> FiniteGroup:
    if n not in _SYM_CACHE:
        G = symmetric_group(n)
        # cycle type determines the class in S_n; skip the quadratic scan
        by_type: dict = {}
        for g in G.elements:
            by_type.setdefault(cycle_type(g), []).append(g)
        G._classes = [frozenset(v) for v in by_type.values()]
        _SYM_CACHE[n] = G
    return _SYM_CACHE[n]


def _unit_order_mod(p: int, m: int, subgroup: frozenset) -> int:
    """Smallest ``d >= 1`` with ``p^d mod m`` in ``subgroup`` (direct powering)."""
    r, d = p % m, 1
    y = r
    while y not in subgroup:
        y = y * r % m
        d += 1
        if d > m:
            raise MalformedGenerator("order search did not terminate")
    return d


def _divides_mask(n: int, primes: np.ndarray) -> np.ndarray:
    """``n % q == 0`` for each ``q < 2^30``, without overflowing int64."""
    q = np.asarray(primes, dtype=np.int64)
    n = abs(int(n))
    digits = []
    while n:
        digits.append(n & ((1 << 30) - 1))
        n >>= 30
    r = np.zeros_like(q)
    for dgt in reversed(digits):
        r = (r * (1 << 30) + dgt) % q
    return r == 0


# ---------------------------------------------------------------------------
# Scenarios


class Scenario:
    """Common tower interface; subclasses fill ``G``, ``H``, ``Q``, ``pi``."""

    G: FiniteGroup
    H: frozenset
    Q: FiniteGroup
    pi: GroupMorphism
    label: str

    @property
    def degree_K(self) -> int:
        return len(self.Q)

    @property
    def degree_L(self) -> int:
        return len(self.G)

    @cached_property
    def G_classes(self) -> list[frozenset]:
        return self.G.conjugacy_classes()

    @cached_property
    def class_index(self) -> dict:
        return {g: i for i, c in enumerate(self.G_classes) for g in c}

    def is_ramified(self, p: int) -> bool:
        raise NotImplementedError

    def ramified_mask(self, primes: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def classify(self, primes: np.ndarray) -> np.ndarray:
        """Index into ``G_classes`` of each prime's Frobenius; -1 when ramified."""
        raise NotImplementedError

    def element(self, spec) -> Any:
        """Parse an element spec into an element of ``G``."""
        raise NotImplementedError

    def quotient_element(self, spec) -> Any:
        """Parse an element spec into ``Q``; specs of ``G`` elements are projected."""
        return self.pi(self.element(spec))

    def record(self, p: int) -> PrimeRecord:
        raise NotImplementedError

    def congruence_elements(self, modulus: int, residues) -> frozenset:
        """Elements of ``G`` whose primes satisfy ``p mod modulus in residues``.

        Only possible when the congruence is decided by the Frobenius in ``G``.
        """
        raise NotPredictable(f"congruence conditions are not Chebotarev conditions in {self.label}")

    def describe(self) -> dict:
        raise NotImplementedError


class AbelianScenario(Scenario):
    """Subfields of ``Q(zeta_m)``: ``L`` fixed by ``V``, ``K`` fixed by ``U``."""

    def __init__(self, m: int, U: Sequence[int] = (), V: Sequence[int] = ()):
        m = int(m)
        if m < 3 or m > MAX_CONDUCTOR:
            raise BadInput(f"conductor must lie in [3, {MAX_CONDUCTOR}], got {m}")
        self.m = m
        self.units = unit_group(m)
        self.U_gens = tuple(int(u) % m for u in U)
        self.V_gens = tuple(int(v) % m for v in V)
        for u in self.U_gens + self.V_gens:
            if math.gcd(u, m) != 1:
                raise MalformedGenerator(f"{u} is not a unit mod {m}")
        self.U = self.units.generated_subgroup(self.U_gens)
        self.V = self.units.generated_subgroup(self.V_gens)
        if not self.V <= self.U:
            raise BadInput("V must be contained in U")
        self.G, self.piV = quotient(self.units, self.V, f"Gal(L/Q) (m={m})")
        self.H = frozenset(self.piV(u) for u in self.U)
        self.Q, self.pi = quotient(self.G, self.H, f"Gal(K/Q) (m={m})")
        self.label = f"Q(zeta_{m})^U, |U|={len(self.U)}, |V|={len(self.V)}"
        table = np.full(m, -1, dtype=np.int64)
        idx = self.class_index
        for r in range(m):
            if math.gcd(r, m) == 1:
                table[r] = idx[self.piV(r)]
        self._residue_class = table

    @cached_property
    def G_classes(self) -> list[frozenset]:
        # abelian: singletons in element order
        return [frozenset([g]) for g in self.G.elements]

    def is_ramified(self, p: int) -> bool:
        return self.m % p == 0

    def ramified_mask(self, primes: np.ndarray) -> np.ndarray:
        return self.m % np.asarray(primes, dtype=np.int64) == 0

    def classify(self, primes: np.ndarray) -> np.ndarray:
        return self._residue_class[np.asarray(primes, dtype=np.int64) % self.m]

    def element(self, spec) -> Any:
        if isinstance(spec, dict):
            return self._element_from_congruence(spec)
        try:
            r = int(spec) % self.m
        except (TypeError, ValueError):
            raise ElementNotInGroup(f"cannot read residue from {spec!r}") from None
        if math.gcd(r, self.m) != 1:
            raise ElementNotInGroup(f"{spec} is not a unit mod {self.m}")
        return self.piV(r)

    def _element_from_congruence(self, spec: dict):
        mod = int(spec.get("modulus", self.m))
        res = int(spec["residue"])
        if self.m % mod:
            raise ElementNotInGroup(f"modulus {mod} does not divide the conductor {self.m}")
        lifts = {self.piV(r) for r in range(res % mod, self.m, mod) if math.gcd(r, self.m) == 1}
        if len(lifts) != 1:
            raise ElementNotInGroup(f"{res} mod {mod} does not determine an element of Gal(L/Q)")
        return lifts.pop()

    def quotient_element(self, spec) -> Any:
        if isinstance(spec, dict):
            mod = int(spec.get("modulus", self.m))
            res = int(spec["residue"])
            if self.m % mod:
                raise ElementNotInGroup(f"modulus {mod} does not divide the conductor {self.m}")
            imgs = {self.pi(self.piV(r)) for r in range(res % mod, self.m, mod)
                    if math.gcd(r, self.m) == 1}
            if len(imgs) != 1:
                raise ElementNotInGroup(f"{res} mod {mod} does not determine an element of Gal(K/Q)")
            return imgs.pop()
        return self.pi(self.element(spec))

    def record(self, p: int, level: str = "K") -> PrimeRecord:
        """Splitting data of ``p`` in ``K`` (or in ``L`` with ``level="L"``)."""
        if self.is_ramified(p):
            return PrimeRecord(p, None, None, None, None, True)
        sub = self.U if level == "K" else self.V
        index = len(self.units) // len(sub)
        d = _unit_order_mod(p, self.m, sub)
        frob = self.pi(self.piV(p % self.m)) if level == "K" else self.piV(p % self.m)
        return PrimeRecord(p, frob, d, index // d, p**d)

    def congruence_elements(self, modulus: int, residues) -> frozenset:
        modulus = int(modulus)
        if modulus < 1 or self.m % modulus:
            raise NotPredictable(f"modulus {modulus} does not divide the conductor {self.m}")
        wanted = {int(r) % modulus for r in residues}
        images: dict = {}
        for r in range(self.m):
            if math.gcd(r, self.m) == 1:
                images.setdefault(self.piV(r), set()).add(r % modulus)
        out = set()
        for y, vals in images.items():
            if len(vals) != 1:
                raise NotPredictable(f"p mod {modulus} is not determined by the Frobenius in Gal(L/Q)")
            if vals <= wanted:
                out.add(y)
        return frozenset(out)

    def describe(self) -> dict:
        return {"type": "abelian", "m": self.m, "U": sorted(self.U), "V": sorted(self.V)}


_NAMED_NORMAL = ("trivial", "alternating", "full", "klein")


class SnScenario(Scenario):
    """Splitting field of a monic ``f`` with Galois group ``S_n``; ``K = L^H``."""

    def __init__(self, coeffs: Sequence[int], normal_subgroup: Any = "trivial", *, check_galois: bool = True):
        coeffs = [int(c) for c in coeffs]
        n = len(coeffs) - 1
        if n < 2 or n > MAX_DEGREE:
            raise BadInput(f"degree must lie in [2, {MAX_DEGREE}]")
        if coeffs[0] != 1:
            raise BadInput("polynomial must be monic")
        self.coeffs = tuple(coeffs)
        self.n = n
        self.disc = discriminant(coeffs)
        if self.disc == 0:
            raise BadInput("polynomial is not squarefree (zero discriminant)")
        self.G = _sym(n)
        self.H = self._normal_subgroup(normal_subgroup)
        self.Q, self.pi = quotient(self.G, self.H, f"S{n}/H{len(self.H)}")
        self._ctype_to_class = {cycle_type(next(iter(c))): i for i, c in enumerate(self.G_classes)}
        self.label = f"split({self._poly_str()}), |H|={len(self.H)}"
        if check_galois:
            self._check_full_symmetric()

    def _poly_str(self) -> str:
        n = self.n
        terms = []
        for i, c in enumerate(self.coeffs):
            e = n - i
            if c == 0:
                continue
            mon = "" if e == 0 else ("x" if e == 1 else f"x^{e}")
            coef = str(c) if (e == 0 or abs(c) != 1) else ("-" if c < 0 else "")
            terms.append(f"{coef}{mon}")
        return "+".join(terms).replace("+-", "-")

    def _normal_subgroup(self, spec) -> frozenset:
        G, n = self.G, self.n
        if isinstance(spec, str):
            if spec == "trivial":
                return frozenset([G.identity])
            if spec == "alternating":
                return frozenset(g for g in G.elements if sign(g) == 1)
            if spec == "full":
                return frozenset(G.elements)
            if spec == "klein" and n == 4:
                return frozenset(g for g in G.elements if cycle_type(g) in ((1, 1, 1, 1), (2, 2)))
            raise BadInput(f"unknown normal subgroup {spec!r} for S{n}; choose from {_NAMED_NORMAL}")
        gens = [perm_from_cycles(c, n) for c in spec]
        H = G.generated_subgroup(gens)
        if not G.is_normal(H):
            raise NotNormal("given subgroup is not normal in S_n")
        return H

    @cached_property
    def G_classes(self) -> list[frozenset]:
        return self.G.conjugacy_classes()

    def _check_full_symmetric(self) -> None:
        """Dedekind witnesses: an n-cycle, an (n-1)-cycle and a 'transposition type'.

        An n-cycle forces transitivity, an (n-1)-cycle double transitivity, and
        a cycle type with a single 2-cycle and otherwise odd cycles has a power
        that is a transposition; together they generate ``S_n``.
        """
        n = self.n
        need_n = (n,)
        need_n1 = tuple(sorted((1, n - 1))) if n > 2 else need_n
        seen: set = set()
        primes = kernels.sieve_segment(2, 100_000, kernels.base_primes(400))
        primes = primes[self.disc % primes != 0]
        counts = kernels.cycle_counts(primes, list(reversed(self.coeffs)))
        for row in counts:
            if row[0] < 0:
                continue
            seen.add(tuple(sorted(k for k in range(1, n + 1) for _ in range(row[k]))))
            transp = any(t.count(2) == 1 and all(c % 2 or c == 2 for c in t) for t in seen)
            if need_n in seen and need_n1 in seen and transp:
                return
        raise NotFullSymmetric(f"could not certify Gal({self._poly_str()}) = S{n} from primes < 1e5")

    def is_ramified(self, p: int) -> bool:
        return self.disc % p == 0

    def ramified_mask(self, primes: np.ndarray) -> np.ndarray:
        return _divides_mask(self.disc, primes)

    def classify(self, primes: np.ndarray) -> np.ndarray:
        primes = np.asarray(primes, dtype=np.int64)
        out = np.full(primes.shape[0], -1, dtype=np.int64)
        ram = self.ramified_mask(primes)
        good = np.flatnonzero(~ram)
        if good.size == 0:
            return out
        counts = kernels.cycle_counts(primes[good], list(reversed(self.coeffs)))
        if (counts[:, 0] < 0).any():
            bad = primes[good][counts[:, 0] < 0]
            raise NotSquarefreeModP(f"f not squarefree mod {bad[:5].tolist()} despite p not dividing disc")
        # encode each row of factor counts as an integer key
        n = self.n
        radix = (n + 1) ** np.arange(n, dtype=np.int64)
        keys = counts[:, 1:] @ radix
        lut = {}
        for t, ci in self._ctype_to_class.items():
            lut[sum(t.count(k) * (n + 1) ** (k - 1) for k in range(1, n + 1))] = ci
        uniq, inv = np.unique(keys, return_inverse=True)
        mapped = np.array([lut[int(u)] for u in uniq], dtype=np.int64)
        out[good] = mapped[inv]
        return out

    def element(self, spec) -> Any:
        if isinstance(spec, str) and spec in ("e", "identity", "1"):
            return self.G.identity
        try:
            return perm_from_cycles(spec, self.n)
        except (TypeError, ValueError, MalformedGenerator) as exc:
            raise ElementNotInGroup(f"cannot read permutation from {spec!r}: {exc}") from None

    def cycle_type(self, p: int) -> tuple:
        return cycle_type_sn(self.coeffs, p, self.disc)

    def frobenius_class(self, p: int) -> frozenset:
        return frobenius_class_sn(self.cycle_type(p), self.n, self.G)

    def record(self, p: int) -> PrimeRecord:
        if self.is_ramified(p):
            return PrimeRecord(p, None, None, None, None, True)
        ct = self.cycle_type(p)
        y = next(iter(self.G_classes[self._ctype_to_class[ct]]))
        d = self.Q.element_order(self.pi(y))
        return PrimeRecord(p, ct, d, len(self.Q) // d, p**d)

    def describe(self) -> dict:
        return {"type": "sn", "poly": list(self.coeffs), "H_order": len(self.H)}


def splitting_data_abelian(scenario: AbelianScenario, p: int) -> PrimeRecord:
    """``scenario.record(p)``, raising ``Ramified`` instead of flagging."""
    if scenario.is_ramified(p):
        raise Ramified(f"{p} divides the conductor {scenario.m}")
    return scenario.record(p)
