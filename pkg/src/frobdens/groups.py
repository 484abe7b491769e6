"""Exhaustively enumerated finite groups.

Groups are small (at most ``SIZE_CAP`` elements), so every algorithm here is
plain enumeration: no Schreier-Sims, no presentations.  Elements are hashable,
totally ordered encodings:

* permutations of ``range(n)`` as image tuples, composed right-to-left
  (``(a*b)(i) = a[b[i]]``);
* residue units as Python ints modulo ``m``;
* cyclic group elements as ints modulo ``d`` (additive);
* product and semidirect elements as tuples of the above.

``FiniteGroup.elements[0]`` is always the identity.
"""
from __future__ import annotations

import itertools
import math
import random
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Hashable, Iterable, Mapping, Sequence

from .errors import (
    ElementNotInGroup,
    GroupMismatch,
    MalformedGenerator,
    NotHomomorphism,
    NotNormal,
    SizeCapExceeded,
    TargetMismatch,
)

SIZE_CAP = 10_000
_EXHAUSTIVE_CHECK = 64
_RANDOM_TRIPLES = 10_000
SPOT_CHECK_SEED = 0

Element = Hashable


class FiniteGroup:
    """A finite group given by its full element list and a multiplication rule.

    Construction validates the group axioms: exhaustively when the group has
    at most 64 elements, otherwise on 10 000 random triples (seeded, so the
    check is reproducible).
    """

    def __init__(
        self,
        elements: Iterable[Element],
        op: Callable[[Element, Element], Element],
        identity: Element,
        label: str = "",
        *,
        check: bool = True,
    ):
        elements = list(elements)
        if len(elements) > SIZE_CAP:
            raise SizeCapExceeded(f"{label or 'group'} has {len(elements)} > {SIZE_CAP} elements")
        if identity in elements and elements[0] != identity:
            elements.remove(identity)
            elements.insert(0, identity)
        self.elements: tuple = tuple(elements)
        self.op = op
        self.identity = identity
        self.label = label
        self._index = {g: i for i, g in enumerate(self.elements)}
        if len(self._index) != len(self.elements):
            raise MalformedGenerator("duplicate element encodings")
        self._inv: dict = {}
        self._order: dict = {}
        self._classes: list[frozenset] | None = None
        if check:
            self._check_axioms()

    # -- basic protocol ---------------------------------------------------
    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, g) -> bool:
        try:
            return g in self._index
        except TypeError:
            return False

    def __repr__(self) -> str:
        return f"FiniteGroup({self.label or '?'}, order={len(self)})"

    def index(self, g) -> int:
        try:
            return self._index[g]
        except (KeyError, TypeError):
            raise ElementNotInGroup(f"{g!r} is not an element of {self.label or 'the group'}") from None

    def require(self, *gs) -> None:
        for g in gs:
            self.index(g)

    def mul(self, a, b):
        return self.op(a, b)

    def inv(self, a):
        try:
            return self._inv[a]
        except KeyError:
            pass
        self.require(a)
        # a^{-1} = a^{ord(a)-1}
        k = self.element_order(a)
        b = self.power(a, k - 1)
        self._inv[a] = b
        self._inv[b] = a
        return b

    def power(self, a, k: int):
        if k < 0:
            return self.power(self.inv(a), -k)
        result, base = self.identity, a
        while k:
            if k & 1:
                result = self.op(result, base)
            base = self.op(base, base)
            k >>= 1
        return result

    def conj(self, h, g):
        """Return ``h g h^{-1}``."""
        return self.op(self.op(h, g), self.inv(h))

    def element_order(self, g) -> int:
        if g in self._order:
            return self._order[g]
        self.require(g)
        k, y = 1, g
        while y != self.identity:
            y = self.op(y, g)
            k += 1
            if k > len(self):
                raise MalformedGenerator(f"element {g!r} has no finite order inside the group")
        self._order[g] = k
        return k

    def cyclic_subgroup(self, g) -> frozenset:
        self.require(g)
        out, y = [self.identity], g
        while y != self.identity:
            out.append(y)
            y = self.op(y, g)
        return frozenset(out)

    # -- conjugacy ----------------------------------------------------------
    def conjugacy_class(self, g, within: Iterable[Element] | None = None) -> frozenset:
        """``{h g h^-1}`` for ``h`` in the group (or in ``within``)."""
        self.require(g)
        conj_by = self.elements if within is None else within
        return frozenset(self.conj(h, g) for h in conj_by)

    def centralizer(self, g, within: Iterable[Element] | None = None) -> frozenset:
        self.require(g)
        pool = self.elements if within is None else within
        return frozenset(h for h in pool if self.op(h, g) == self.op(g, h))

    def conjugacy_classes(self) -> list[frozenset]:
        """All classes, ordered by the position of their first element."""
        if self._classes is None:
            seen: set = set()
            classes = []
            for g in self.elements:
                if g in seen:
                    continue
                c = self.conjugacy_class(g)
                seen |= c
                classes.append(c)
            self._classes = classes
        return list(self._classes)

    def is_abelian(self) -> bool:
        gens = self.elements
        return all(self.op(a, b) == self.op(b, a) for a, b in itertools.combinations(gens, 2))

    # -- subgroups ----------------------------------------------------------
    def generated_subgroup(self, gens: Iterable[Element]) -> frozenset:
        gens = list(gens)
        self.require(*gens)
        seen = {self.identity}
        queue = deque([self.identity])
        while queue:
            g = queue.popleft()
            for s in gens:
                h = self.op(g, s)
                if h not in seen:
                    seen.add(h)
                    queue.append(h)
        return frozenset(seen)

    def is_subgroup(self, subset: Iterable[Element]) -> bool:
        s = frozenset(subset)
        if self.identity not in s or not s <= set(self.elements):
            return False
        return all(self.op(a, b) in s for a in s for b in s)

    def is_normal(self, subset: Iterable[Element]) -> bool:
        s = frozenset(subset)
        return self.is_subgroup(s) and all(self.conj(g, h) in s for g in self.elements for h in s)

    def subgroup(self, subset: Iterable[Element], label: str = "") -> "FiniteGroup":
        s = frozenset(subset)
        if not self.is_subgroup(s):
            raise NotNormal(f"{sorted(s)!r} is not a subgroup of {self.label}")
        ordered = [g for g in self.elements if g in s]
        return FiniteGroup(ordered, self.op, self.identity, label or f"sub({self.label})", check=False)

    def same_as(self, other: "FiniteGroup") -> bool:
        """Structural equality: same elements in the same order and same products."""
        if other is self:
            return True
        if self.elements != other.elements:
            return False
        return all(self.op(a, b) == other.op(a, b) for a in self.elements for b in self.elements)

    # -- validation ---------------------------------------------------------
    def _check_axioms(self) -> None:
        els = self.elements
        e = self.identity
        if e not in self._index:
            raise MalformedGenerator("identity is not among the elements")
        if len(els) <= _EXHAUSTIVE_CHECK:
            table = {}
            for a in els:
                for b in els:
                    c = self.op(a, b)
                    if c not in self._index:
                        raise MalformedGenerator(f"not closed: {a!r}*{b!r}={c!r}")
                    table[a, b] = c
            for a in els:
                if table[e, a] != a or table[a, e] != a:
                    raise MalformedGenerator(f"{e!r} is not a two-sided identity")
                if not any(table[a, b] == e and table[b, a] == e for b in els):
                    raise MalformedGenerator(f"{a!r} has no inverse")
            for a, b, c in itertools.product(els, repeat=3):
                if table[table[a, b], c] != table[a, table[b, c]]:
                    raise MalformedGenerator("operation is not associative")
            return
        rng = random.Random(SPOT_CHECK_SEED)
        for _ in range(_RANDOM_TRIPLES):
            a, b, c = rng.choice(els), rng.choice(els), rng.choice(els)
            ab = self.op(a, b)
            bc = self.op(b, c)
            if ab not in self._index or bc not in self._index:
                raise MalformedGenerator("not closed")
            if self.op(ab, c) != self.op(a, bc):
                raise MalformedGenerator("operation is not associative")
        for a in rng.sample(els, min(len(els), 200)):
            if self.op(e, a) != a or self.op(a, e) != a:
                raise MalformedGenerator(f"{e!r} is not a two-sided identity")
            self.element_order(a)


# ---------------------------------------------------------------------------
# Constructors


def enumerate_group(
    generators: Sequence[Element],
    op: Callable[[Element, Element], Element],
    identity: Element,
    label: str = "",
) -> FiniteGroup:
    """Subgroup generated by ``generators``, elements in BFS order from the identity."""
    seen = {identity: None}
    queue = deque([identity])
    while queue:
        g = queue.popleft()
        for s in generators:
            h = op(g, s)
            if h not in seen:
                seen[h] = None
                if len(seen) > SIZE_CAP:
                    raise SizeCapExceeded(f"{label or 'generated group'} exceeds {SIZE_CAP} elements")
                queue.append(h)
    return FiniteGroup(list(seen), op, identity, label)


def compose(a: tuple, b: tuple) -> tuple:
    """Permutation product ``a*b``: apply ``b`` first."""
    return tuple(a[i] for i in b)


def perm_from_cycles(cycles: Iterable[Iterable[int]], n: int) -> tuple:
    """Build an image tuple from 1-based cycle notation, e.g. ``[[1, 2, 3]]``."""
    img = list(range(n))
    seen: set = set()
    for cyc in cycles:
        cyc = [int(c) - 1 for c in cyc]
        if any(c < 0 or c >= n for c in cyc) or seen & set(cyc) or len(set(cyc)) != len(cyc):
            raise MalformedGenerator(f"bad cycle {cyc!r} on {n} points")
        seen |= set(cyc)
        for i, c in enumerate(cyc):
            img[c] = cyc[(i + 1) % len(cyc)]
    return tuple(img)


def cycle_type(perm: tuple) -> tuple:
    """Sorted cycle lengths (fixed points included)."""
    n = len(perm)
    seen = [False] * n
    out = []
    for i in range(n):
        if not seen[i]:
            k, j = 0, i
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                k += 1
            out.append(k)
    return tuple(sorted(out))


def permutation_group(generators: Sequence[Sequence[int]], n: int, label: str = "") -> FiniteGroup:
    gens = []
    for g in generators:
        try:
            g = tuple(int(v) for v in g)
        except (TypeError, ValueError):
            raise MalformedGenerator(f"{g!r} is not an image tuple") from None
        if len(g) != n or sorted(g) != list(range(n)):
            raise MalformedGenerator(f"{g!r} is not a permutation of range({n})")
        gens.append(g)
    return enumerate_group(gens, compose, tuple(range(n)), label or f"<perms on {n}>")


def symmetric_group(n: int) -> FiniteGroup:
    if n < 1:
        raise MalformedGenerator("degree must be positive")
    if math.factorial(n) > SIZE_CAP:
        raise SizeCapExceeded(f"S_{n} exceeds {SIZE_CAP} elements")
    gens = []
    if n >= 2:
        gens = [perm_from_cycles([range(1, n + 1)], n), perm_from_cycles([[1, 2]], n)]
    return permutation_group(gens, n, f"S{n}")


def sign(perm: tuple) -> int:
    return -1 if (len(perm) - len(cycle_type(perm))) % 2 else 1


def unit_residue_group(modulus: int, generators: Sequence[int], label: str = "") -> FiniteGroup:
    """Subgroup of ``(Z/m)^x`` generated by the given residues."""
    m = int(modulus)
    if m < 1:
        raise MalformedGenerator("modulus must be positive")
    gens = []
    for g in generators:
        g = int(g) % m
        if math.gcd(g, m) != 1:
            raise MalformedGenerator(f"{g} is not a unit mod {m}")
        gens.append(g)
    return enumerate_group(gens, lambda a, b: a * b % m, 1 % m, label or f"<{gens}> in (Z/{m})^x")


def unit_group(m: int) -> FiniteGroup:
    """The full unit group ``(Z/m)^x``, elements in increasing order."""
    m = int(m)
    if m < 1:
        raise MalformedGenerator("modulus must be positive")
    units = [a for a in range(m) if math.gcd(a, m) == 1] if m > 1 else [0]
    if len(units) > SIZE_CAP:
        raise SizeCapExceeded(f"(Z/{m})^x has {len(units)} > {SIZE_CAP} elements")
    return FiniteGroup(units, lambda a, b: a * b % m, 1 % m, f"(Z/{m})^x")


def cyclic_group(d: int) -> FiniteGroup:
    """Additive ``Z/d``."""
    if d < 1:
        raise MalformedGenerator("order must be positive")
    return FiniteGroup(range(d), lambda a, b: (a + b) % d, 0, f"Z/{d}")


# ---------------------------------------------------------------------------
# Morphisms and derived groups


class GroupMorphism:
    """A homomorphism stored as an explicit table on source encodings."""

    def __init__(self, source: FiniteGroup, target: FiniteGroup, mapping: Mapping | Callable, *, check: bool = True):
        self.source = source
        self.target = target
        if callable(mapping) and not isinstance(mapping, Mapping):
            table = {g: mapping(g) for g in source.elements}
        else:
            table = {g: mapping[g] for g in source.elements}
        self._table = table
        self._kernel: frozenset | None = None
        self._fibers: dict = {}
        self._class_fns: dict = {}  # compiled set -> class functions, filled by density
        if check:
            self._check()

    def __call__(self, g):
        try:
            return self._table[g]
        except (KeyError, TypeError):
            raise ElementNotInGroup(f"{g!r} not in source {self.source.label}") from None

    def _check(self) -> None:
        src, tgt = self.source, self.target
        for g, v in self._table.items():
            if v not in tgt:
                raise NotHomomorphism(f"image {v!r} of {g!r} not in target")
        if self._table[src.identity] != tgt.identity:
            raise NotHomomorphism("identity does not map to identity")
        els = src.elements
        if len(els) <= _EXHAUSTIVE_CHECK:
            pairs: Iterable = itertools.product(els, repeat=2)
        else:
            rng = random.Random(SPOT_CHECK_SEED + 1)
            pairs = ((rng.choice(els), rng.choice(els)) for _ in range(_RANDOM_TRIPLES))
        for a, b in pairs:
            if self._table[src.op(a, b)] != tgt.op(self._table[a], self._table[b]):
                raise NotHomomorphism(f"map(ab) != map(a)map(b) at {a!r}, {b!r}")

    def kernel(self) -> frozenset:
        if self._kernel is None:
            self._kernel = frozenset(g for g, v in self._table.items() if v == self.target.identity)
        return self._kernel

    def image(self) -> frozenset:
        return frozenset(self._table.values())

    def preimage(self, x) -> list:
        self.target.require(x)
        return [g for g in self.source.elements if self._table[g] == x]

    def is_surjective(self) -> bool:
        return len(self.image()) == len(self.target)


def quotient(G: FiniteGroup, H: Iterable[Element], label: str = "") -> tuple[FiniteGroup, GroupMorphism]:
    """``G/H`` on minimal coset representatives, with the natural projection."""
    H = frozenset(H)
    G.require(*H)
    if not G.is_normal(H):
        raise NotNormal(f"subgroup of order {len(H)} is not normal in {G.label}")
    rep_of: dict = {}
    reps = []
    for g in G.elements:
        if g in rep_of:
            continue
        coset = [G.op(g, h) for h in H]
        r = min(coset)
        for c in coset:
            rep_of[c] = r
        reps.append(r)
    Q = FiniteGroup(reps, lambda a, b: rep_of[G.op(a, b)], rep_of[G.identity],
                    label or f"{G.label}/H{len(H)}", check=False)
    return Q, GroupMorphism(G, Q, rep_of, check=False)


@dataclass(frozen=True)
class FiberClassPartition:
    """The H-conjugacy classes inside the fiber ``pi^-1(x)``."""

    base: Any
    classes: tuple

    def class_of(self, y) -> frozenset:
        for c in self.classes:
            if y in c:
                return c
        raise ElementNotInGroup(f"{y!r} not in fiber over {self.base!r}")

    def __len__(self) -> int:
        return len(self.classes)


def fiber_h_classes(pi: GroupMorphism, x) -> FiberClassPartition:
    # memoized per morphism: the table never changes after construction
    try:
        return pi._fibers[x]
    except (KeyError, TypeError):
        pass
    G = pi.source
    H = sorted(pi.kernel(), key=G.index)
    fiber = pi.preimage(x)
    seen: set = set()
    classes = []
    for y in fiber:
        if y in seen:
            continue
        orbit = frozenset(G.conj(h, y) for h in H)
        seen |= orbit
        classes.append(orbit)
    part = FiberClassPartition(x, tuple(classes))
    pi._fibers[x] = part
    return part


def fibered_product(pi1: GroupMorphism, pi2: GroupMorphism, label: str = ""):
    """``G1 x_Q G2`` together with its two projections."""
    Q = pi1.target
    if not Q.same_as(pi2.target):
        raise TargetMismatch("projections have different targets")
    G1, G2 = pi1.source, pi2.source
    by_image: dict = {}
    for g2 in G2.elements:
        by_image.setdefault(pi2(g2), []).append(g2)
    elements = [(g1, g2) for g1 in G1.elements for g2 in by_image.get(pi1(g1), ())]
    if len(elements) > SIZE_CAP:
        raise SizeCapExceeded(f"fibered product has {len(elements)} elements")

    def op(a, b):
        return (G1.op(a[0], b[0]), G2.op(a[1], b[1]))

    P = FiniteGroup(elements, op, (G1.identity, G2.identity),
                    label or f"{G1.label} x_{Q.label} {G2.label}", check=False)
    p1 = GroupMorphism(P, G1, lambda g: g[0], check=False)
    p2 = GroupMorphism(P, G2, lambda g: g[1], check=False)
    return P, p1, p2


def direct_product(G1: FiniteGroup, G2: FiniteGroup):
    trivial = FiniteGroup([0], lambda a, b: 0, 0, "1", check=False)
    t1 = GroupMorphism(G1, trivial, lambda g: 0, check=False)
    t2 = GroupMorphism(G2, trivial, lambda g: 0, check=False)
    return fibered_product(t1, t2, f"{G1.label} x {G2.label}")


def normal_closure(G: FiniteGroup, S: Iterable[Element]) -> frozenset:
    """Smallest normal subgroup of ``G`` containing ``S``."""
    S = list(S)
    G.require(*S)
    conjugates = {G.conj(g, s) for s in S for g in G.elements}
    return G.generated_subgroup(sorted(conjugates, key=G.index))


@dataclass(frozen=True)
class SemidirectTower:
    """``H_i = H0 |x (Z/p)^i`` with ``H0 = Z/d`` acting through ``chi``.

    Multiplication is ``(a, v)(b, w) = (a + b, v + chi(a) w)`` where
    ``chi(a) = chi_gen**a mod p``.  The section is ``a -> (a, 0)``.
    """

    group: FiniteGroup
    base: FiniteGroup
    projection: GroupMorphism
    d: int
    p: int
    chi_gen: int
    level: int

    def section(self, a: int) -> tuple:
        self.base.require(a)
        return (a, (0,) * self.level)

    def chi(self, a: int) -> int:
        return pow(self.chi_gen, a, self.p)


def _is_prime(n: int) -> bool:
    return n >= 2 and all(n % q for q in range(2, math.isqrt(n) + 1))


def semidirect_tower(d: int, p: int, chi_gen: int, level: int) -> SemidirectTower:
    """Build ``H_level``; ``chi_gen`` is the image of ``1 in Z/d`` in ``(Z/p)^x``."""
    if not _is_prime(p):
        raise MalformedGenerator(f"{p} is not prime")
    if d < 1 or level < 0:
        raise MalformedGenerator("need d >= 1 and level >= 0")
    c = chi_gen % p
    if c == 0 or pow(c, d, p) != 1:
        raise NotHomomorphism(f"{chi_gen} does not define a character Z/{d} -> (Z/{p})^x")
    if d * p**level > SIZE_CAP:
        raise SizeCapExceeded(f"|H_{level}| = {d * p**level} exceeds {SIZE_CAP}")
    powers = [pow(c, a, p) for a in range(d)]

    def op(x, y):
        a, v = x
        b, w = y
        s = powers[a]
        return ((a + b) % d, tuple((vi + s * wi) % p for vi, wi in zip(v, w)))

    elements = [(a, v) for a in range(d) for v in itertools.product(range(p), repeat=level)]
    Hi = FiniteGroup(elements, op, (0, (0,) * level), f"Z/{d} |x (Z/{p})^{level}")
    H0 = cyclic_group(d)
    proj = GroupMorphism(Hi, H0, lambda g: g[0])
    return SemidirectTower(Hi, H0, proj, d, p, c, level)


# ---------------------------------------------------------------------------
# Class functions


def _is_exact(v) -> bool:
    return isinstance(v, (int, Fraction)) and not isinstance(v, bool)


class CharacterFn:
    """A complex-valued function on a group, stored as a value table.

    Values need not be constant on conjugacy classes.  ``exact`` is true when
    every value is an ``int`` or ``Fraction``.
    """

    def __init__(self, group: FiniteGroup, values: Mapping | Sequence | Callable):
        self.group = group
        if callable(values) and not isinstance(values, (Mapping, Sequence)):
            vals = [values(g) for g in group.elements]
        elif isinstance(values, Mapping):
            missing = [g for g in group.elements if g not in values]
            if missing:
                raise ElementNotInGroup(f"no value given for {missing[0]!r}")
            vals = [values[g] for g in group.elements]
        else:
            vals = list(values)
            if len(vals) != len(group):
                raise GroupMismatch(f"{len(vals)} values for a group of order {len(group)}")
        self.values = tuple(Fraction(v) if isinstance(v, int) and not isinstance(v, bool) else v for v in vals)
        self.exact = all(_is_exact(v) for v in self.values)

    def __call__(self, g):
        return self.values[self.group.index(g)]

    def __repr__(self) -> str:
        return f"CharacterFn({self.group.label}, {list(self.values)!r})"

    def __add__(self, other: "CharacterFn") -> "CharacterFn":
        _same_group(self, other)
        return CharacterFn(self.group, [a + b for a, b in zip(self.values, other.values)])

    def scale(self, c) -> "CharacterFn":
        return CharacterFn(self.group, [c * a for a in self.values])

    def inflate(self, pi: GroupMorphism) -> "CharacterFn":
        """Pull back along ``pi: G -> self.group`` (``psi o pi``)."""
        if not pi.target.same_as(self.group):
            raise GroupMismatch("projection target is not the character's group")
        return CharacterFn(pi.source, lambda g: self(pi(g)))


def _same_group(a: CharacterFn, b: CharacterFn) -> None:
    if not a.group.same_as(b.group):
        raise GroupMismatch("characters live on different groups")


def inner_product(phi: CharacterFn, psi: CharacterFn):
    """``|G|^-1 sum phi(g) conj(psi(g))``; a ``Fraction`` when both inputs are exact."""
    _same_group(phi, psi)
    n = len(phi.group)
    if phi.exact and psi.exact:
        # zero terms are common (point masses, indicators) and Fraction products are slow
        return sum((a * b for a, b in zip(phi.values, psi.values) if a and b), Fraction(0)) / n
    return sum(complex(a) * complex(b).conjugate() for a, b in zip(phi.values, psi.values)) / n


def trivial_character(G: FiniteGroup) -> CharacterFn:
    return CharacterFn(G, [1] * len(G))


def regular_character(G: FiniteGroup) -> CharacterFn:
    return CharacterFn(G, [len(G)] + [0] * (len(G) - 1))


def point_mass_character(G: FiniteGroup, x) -> CharacterFn:
    i = G.index(x)
    return CharacterFn(G, [len(G) if j == i else 0 for j in range(len(G))])


def is_density_character(psi: CharacterFn, tol: float = 1e-12) -> bool:
    """Real values in ``[0, |G|]`` and ``<psi, 1> = 1``."""
    n = len(psi.group)
    for v in psi.values:
        if isinstance(v, complex):
            if abs(v.imag) > (0 if psi.exact else tol):
                return False
            v = v.real
        if v < 0 or v > n:
            return False
    total = inner_product(psi, trivial_character(psi.group))
    if psi.exact:
        return total == 1
    return abs(total - 1) <= tol
