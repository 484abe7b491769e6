from fractions import Fraction
from functools import lru_cache

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frobdens.density import (
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
    beta_constant,
    character_order,
    characteristic_function,
    classical_density,
    cor34_pullback,
    cor35_chebotarev_pullback,
    gamma_constant,
    inflation_identity_check,
    injective_chi_generator,
    lemma_normteiler_verify,
    lifted_characteristic_function,
    multiplicative_order,
    multiplicity_constant,
    predict_density,
    primes_per_class,
    prop32_density,
    psi_density_predict,
    sect56_closed_form,
    sect56_density,
)
from frobdens.errors import (
    BadInput,
    ClassNotInFiber,
    ElementNotInGroup,
    HypothesisViolated,
    MissingDensity,
    NotPredictable,
    OutOfRange,
    TargetMismatch,
)
from frobdens.fields import AbelianScenario, SnScenario
from frobdens.groups import (
    CharacterFn,
    FiniteGroup,
    GroupMorphism,
    cyclic_group,
    direct_product,
    fiber_h_classes,
    perm_from_cycles,
    point_mass_character,
    quotient,
    regular_character,
    semidirect_tower,
    sign,
    symmetric_group,
    trivial_character,
    unit_group,
)

T12 = perm_from_cycles([[1, 2]], 3)
C123 = perm_from_cycles([[1, 2, 3]], 3)


def make_tower(G, H):
    Q, pi = quotient(G, H)
    return Tower(G, frozenset(H), Q, pi, G.label)


@lru_cache(maxsize=None)
def s3_a3():
    G = symmetric_group(3)
    return make_tower(G, [g for g in G.elements if sign(g) == 1])


def nontrivial(Q):
    return next(q for q in Q.elements if q != Q.identity)


@lru_cache(maxsize=None)
def tower_pool():
    """Test towers: symmetric groups, unit groups and a semidirect product."""
    out = []
    S3 = symmetric_group(3)
    out.append(s3_a3())
    out.append(make_tower(S3, [S3.identity]))
    out.append(make_tower(S3, S3.elements))
    S4 = symmetric_group(4)
    V4 = [g for g in S4.elements if sorted(map(len, _cycles(g))) in ([1, 1, 1, 1], [2, 2])]
    out.append(make_tower(S4, V4))
    out.append(make_tower(S4, [g for g in S4.elements if sign(g) == 1]))
    U15 = unit_group(15)
    out.append(make_tower(U15, U15.generated_subgroup([11])))  # kernel of the map to (Z/5)^x
    out.append(make_tower(U15, U15.generated_subgroup([4])))
    out.append(make_tower(U15, U15.generated_subgroup([2])))
    Z4 = cyclic_group(4)
    out.append(make_tower(Z4, [0, 2]))
    H1 = semidirect_tower(4, 5, 2, 1).group
    out.append(make_tower(H1, H1.generated_subgroup([(0, (1,))])))
    out.append(make_tower(H1, H1.generated_subgroup([(2, (0,)), (0, (1,))])))
    return tuple(out)


def _cycles(g):
    seen, out = set(), []
    for i in range(len(g)):
        if i not in seen:
            c, j = [], i
            while j not in seen:
                seen.add(j)
                c.append(j)
                j = g[j]
            out.append(c)
    return out


# prop32 and the constants


def test_prop32_examples():
    t = s3_a3()
    e = t.Q.identity
    assert prop32_density(t.pi, e, {C123}) == Fraction(1, 3)
    x = nontrivial(t.Q)
    transp = frozenset(g for g in t.G.elements if sign(g) == -1)
    assert prop32_density(t.pi, x, transp) == 1
    G = symmetric_group(3)
    Q, pi = quotient(G, [G.identity])
    for y in G.elements:
        assert prop32_density(pi, pi(y), {y}) == 1


def test_prop32_rejects_non_class():
    t = s3_a3()
    with pytest.raises(ClassNotInFiber):
        prop32_density(t.pi, t.Q.identity, {T12})
    with pytest.raises(ClassNotInFiber):
        prop32_density(t.pi, t.Q.identity, {C123, t.G.identity})


def test_gamma_examples():
    t = s3_a3()
    assert gamma_constant(t.pi, T12) == 1
    assert gamma_constant(t.pi, C123) == 1
    Z2 = cyclic_group(2)
    Q, pi = quotient(Z2, Z2.elements)
    assert gamma_constant(pi, 1) == 1
    with pytest.raises(ElementNotInGroup):
        gamma_constant(t.pi, (0, 1))


def test_multiplicity_examples():
    G = symmetric_group(3)
    assert multiplicity_constant(G, G.identity) == 6
    assert multiplicity_constant(G, T12) == 1
    assert multiplicity_constant(G, C123) == 1
    Z12 = cyclic_group(12)
    for x in Z12.elements:
        assert multiplicity_constant(Z12, x) == Fraction(12, Z12.element_order(x))
    with pytest.raises(ElementNotInGroup):
        multiplicity_constant(G, 5)


def test_beta_examples():
    t = s3_a3()
    assert beta_constant(t.pi, C123) == 1
    assert beta_constant(t.pi, T12) == 1
    G = symmetric_group(3)
    Q, pi = quotient(G, [G.identity])
    for y in G.elements:
        assert beta_constant(pi, y) == multiplicity_constant(G, y)


def test_primes_per_class_abelian_formula():
    sc = AbelianScenario(105, U=[16, 76])
    for y in sc.G.elements:
        d = sc.Q.element_order(sc.pi(y))
        assert primes_per_class(sc.pi, y) == Fraction(len(sc.Q), d)


@pytest.mark.parametrize("idx", range(11))
def test_constants_positive_and_prop32_partition(idx):
    t = tower_pool()[idx]
    for x in t.Q.elements:
        part = fiber_h_classes(t.pi, x)
        vals = [prop32_density(t.pi, x, C) for C in part.classes]
        assert sum(vals) == 1
        assert all(0 < v <= 1 for v in vals)
        for C in part.classes:
            assert cor34_pullback(prop32_density(t.pi, x, C), C, len(t.H)) == 1
            y = next(iter(C))
            for c in (gamma_constant(t.pi, y), beta_constant(t.pi, y), multiplicity_constant(t.G, y)):
                assert c > 0


@pytest.mark.parametrize("idx", range(11))
def test_primes_per_class_adds_up_to_multiplicity(idx):
    # for a rational prime with Frobenius class K_G, the primes of the middle
    # field with Frobenius exactly x are counted once by the fiber classes
    # inside K_G, and also by the Q-side constant |Z_Q(x)|/|<x>|
    t = tower_pool()[idx]
    for KG in t.G.conjugacy_classes():
        images = {t.pi(y) for y in KG}
        for x in t.Q.elements:
            total = sum(
                (primes_per_class(t.pi, next(iter(C))) for C in fiber_h_classes(t.pi, x).classes if C <= KG),
                Fraction(0),
            )
            want = multiplicity_constant(t.Q, x) if x in images else 0
            assert total == want


def test_gamma_against_coset_count():
    # primes of L over p are the cosets g<y>; those over the prime of K below
    # the prime fixed by <y> are the cosets inside H<y>
    for t in tower_pool():
        G = t.G
        for y in G.elements:
            D = G.cyclic_subgroup(y)
            HD = {G.mul(h, c) for h in t.H for c in D}
            cosets = {frozenset(G.mul(g, c) for c in D) for g in HD}
            d = t.Q.element_order(t.pi(y))
            assert len(cosets) == len(t.H) * d // G.element_order(y)
            if G.is_abelian():
                assert gamma_constant(t.pi, y) == len(cosets)


# cor34


def test_cor34_examples():
    assert cor34_pullback(Fraction(1, 3), {C123}, 3) == 1
    assert cor34_pullback(0, 2, 3) == 0
    assert cor34_pullback(Fraction(1, 6), {C123}, 3) == Fraction(1, 2)
    with pytest.raises(OutOfRange):
        cor34_pullback(Fraction(1, 2), 1, 3)
    with pytest.raises(OutOfRange):
        cor34_pullback(Fraction(-1, 2), 1, 3)
    with pytest.raises(BadInput):
        cor34_pullback(0, 4, 3)


# cor35


def _proj(m, g):
    src = unit_group(m)
    if g <= 2:
        tgt = FiniteGroup([1], lambda a, b: 1, 1, "1")
        return GroupMorphism(src, tgt, lambda r: 1)
    return GroupMorphism(src, unit_group(g), lambda r: r % g)


def test_cor35_examples():
    ident = _proj(3, 3)
    assert cor35_chebotarev_pullback(ident, ident, 2, 2) == 1
    assert cor35_chebotarev_pullback(ident, ident, 2, 1) == 0
    assert cor35_chebotarev_pullback(_proj(4, 1), _proj(3, 1), 3, 2) == Fraction(1, 2)
    assert cor35_chebotarev_pullback(_proj(5, 5), _proj(15, 5), 2, 4) == 0


def test_cor35_target_mismatch():
    with pytest.raises(TargetMismatch):
        cor35_chebotarev_pullback(_proj(5, 5), _proj(9, 3), 2, 2)
    G = unit_group(5)
    Z4 = unit_group(5)
    not_onto = GroupMorphism(unit_group(15), Z4, lambda r: pow(r % 5, 2, 5))
    with pytest.raises(TargetMismatch):
        cor35_chebotarev_pullback(GroupMorphism(G, Z4, lambda r: r), not_onto, 2, 2)


@pytest.mark.parametrize("m", [5, 7, 8, 12, 15, 21])
def test_cor35_abelian_same_field_is_indicator(m):
    ident = _proj(m, m)
    for x in ident.source.elements:
        for s in ident.source.elements:
            assert cor35_chebotarev_pullback(ident, ident, x, s) == (1 if x == s else 0)


def _count_oracle(mL, mM, x, sigma):
    # density among p = x mod mL of p = sigma mod mM, by CRT counting in (Z/lcm)^x
    import math

    n = mL * mM // math.gcd(mL, mM)
    units = [r for r in range(n) if math.gcd(r, n) == 1]
    base = [r for r in units if r % mL == x % mL]
    return Fraction(sum(1 for r in base if r % mM == sigma % mM), len(base))


@pytest.mark.parametrize("mL,mM", [(4, 3), (5, 15), (8, 12), (9, 6), (7, 7), (20, 8)])
def test_cor35_matches_crt_count(mL, mM):
    import math

    g = math.gcd(mL, mM)
    pL, pM = _proj(mL, g), _proj(mM, g)
    for x in pL.source.elements:
        for s in pM.source.elements:
            assert cor35_chebotarev_pullback(pL, pM, x, s) == _count_oracle(mL, mM, x, s)


def test_cor35_nonabelian_against_t_set():
    # L = M = splitting field of x^3 - 2 over Q: the density of {Frob in C(sigma)}
    # with respect to x is 1 exactly when x is conjugate to sigma
    G = symmetric_group(3)
    T = FiniteGroup([0], lambda a, b: 0, 0, "1")
    to1 = GroupMorphism(G, T, lambda g: 0)
    # trivial common quotient: L and M independent copies
    for x in G.elements:
        for s in G.elements:
            v = cor35_chebotarev_pullback(to1, to1, x, s)
            assert v == Fraction(len(G.conjugacy_class(s)), len(G))


# sect56


def test_sect56_collapsed_case():
    Z2 = cyclic_group(2)
    rho = GroupMorphism(Z2, Z2, lambda g: g)
    for Hi in (cyclic_group(3), semidirect_tower(2, 3, 2, 1).group):
        for x in Hi.elements:
            assert sect56_density(rho, Hi, 1, x) == 1


@pytest.mark.parametrize("GM", [cyclic_group(4), direct_product(cyclic_group(2), cyclic_group(2))[0]])
def test_sect56_index_two(GM):
    Z2 = cyclic_group(2)
    if GM.identity == 0:
        rho = GroupMorphism(GM, Z2, lambda g: g % 2)
        sigma = 1
    else:
        rho = GroupMorphism(GM, Z2, lambda g: g[0])
        sigma = (1, 0)
    Hi = semidirect_tower(2, 3, 2, 1).group
    vals = {sect56_density(rho, Hi, sigma, x) for x in Hi.elements}
    assert vals == {Fraction(1, 2)}
    assert sect56_closed_form(rho, sigma) == Fraction(1, 2)


def test_sect56_nonabelian_gm():
    S3 = symmetric_group(3)
    Z2 = cyclic_group(2)
    rho = GroupMorphism(S3, Z2, lambda g: 0 if sign(g) == 1 else 1)
    Hi = cyclic_group(5)
    assert {sect56_density(rho, Hi, T12, x) for x in Hi.elements} == {Fraction(1)}
    # [M : K(mu_p)] = 3, the transposition class has 3 elements
    with pytest.raises(TargetMismatch):
        sect56_density(GroupMorphism(Z2, S3, lambda g: S3.identity), Hi, 0, 0)


# set expressions and predictions


def test_chebotarev_levels_on_s3():
    t = s3_a3()
    e, x = t.Q.identity, nontrivial(t.Q)
    S = Chebotarev("L", frozenset([t.G.identity]))
    assert predict_density(t, S, e) == Fraction(1, 3)
    # over x the Frobenius squared is the identity: every prime qualifies
    assert predict_density(t, S, x) == 1
    S = Chebotarev("L", frozenset([C123]))
    assert predict_density(t, S, e) == Fraction(1, 3)
    assert predict_density(t, S, x) == 0
    S = Chebotarev("L", frozenset([C123, t.G.inv(C123)]))
    assert predict_density(t, S, e) == Fraction(2, 3)
    S = Chebotarev("K", frozenset([x]))
    assert predict_density(t, S, x) == 1 and predict_density(t, S, e) == 0
    with pytest.raises(ElementNotInGroup):
        Chebotarev("L", frozenset([T12])).elements(t)
    with pytest.raises(BadInput):
        Chebotarev("Z", frozenset()).elements(t)


def test_fiber_sets():
    t = s3_a3()
    assert predict_density(t, Fiber(frozenset([T12])), nontrivial(t.Q)) == 1
    assert predict_density(t, Fiber(frozenset([T12])), t.Q.identity) == 0
    assert predict_density(t, Fiber(frozenset([C123])), t.Q.identity) == Fraction(1, 3)


def test_all_and_none():
    for t in tower_pool():
        for x in t.Q.elements:
            assert predict_density(t, AllPrimes(), x) == 1
            assert predict_density(t, NoPrimes(), x) == 0


def test_minus_finite_keeps_prediction():
    sc = AbelianScenario(15, U=[11])
    x = sc.quotient_element({"residue": 2, "modulus": 5})
    S = Congruence(15, frozenset([2]))
    assert predict_density(sc, MinusFinite(S, frozenset([2, 17, 47])), x) == predict_density(sc, S, x) == Fraction(1, 2)


def test_congruence_predictions():
    sc = AbelianScenario(15, U=[11])
    x = sc.quotient_element({"residue": 2, "modulus": 5})
    assert predict_density(sc, Congruence(15, frozenset([2])), x) == Fraction(1, 2)
    assert predict_density(sc, Congruence(15, frozenset([7])), x) == Fraction(1, 2)
    assert predict_density(sc, Congruence(3, frozenset([1, 2])), x) == 1
    with pytest.raises(NotPredictable):
        predict_density(sc, Congruence(7, frozenset([1])), x)
    with pytest.raises(NotPredictable):
        predict_density(s3_a3(), Congruence(3, frozenset([1])), s3_a3().Q.identity)
    cubic = SnScenario([1, 0, 0, -2], "alternating")
    with pytest.raises(NotPredictable):
        predict_density(cubic, Congruence(3, frozenset([1])), cubic.Q.identity)


def set_exprs(t, depth=2):
    H_elems = sorted(t.H, key=t.G.index)
    Q_elems = list(t.Q.elements)
    G_elems = list(t.G.elements)
    leaves = st.one_of(
        st.just(AllPrimes()),
        st.just(NoPrimes()),
        st.frozensets(st.sampled_from(H_elems), min_size=1).map(lambda m: Chebotarev("L", m)),
        st.frozensets(st.sampled_from(Q_elems), min_size=1).map(lambda m: Chebotarev("K", m)),
        st.frozensets(st.sampled_from(G_elems), min_size=1).map(Fiber),
    )
    return st.recursive(
        leaves,
        lambda inner: st.one_of(
            st.tuples(inner, inner).map(Union),
            st.tuples(inner, inner).map(Intersect),
            inner.map(Complement),
            inner.map(lambda s: MinusFinite(s, frozenset([2, 3]))),
        ),
        max_leaves=4,
    )


@st.composite
def tower_and_sets(draw):
    t = draw(st.sampled_from(tower_pool()))
    S = draw(set_exprs(t))
    T = draw(set_exprs(t))
    return t, S, T


@settings(max_examples=150, deadline=None)
@given(tower_and_sets())
def test_prediction_is_a_finitely_additive_measure(data):
    t, S, T = data
    for x in t.Q.elements:
        a, b = predict_density(t, S, x), predict_density(t, T, x)
        assert 0 <= a <= 1
        assert a + b == predict_density(t, Union((S, T)), x) + predict_density(t, Intersect((S, T)), x)
        assert predict_density(t, Complement(S), x) == 1 - a


@settings(max_examples=150, deadline=None)
@given(tower_and_sets())
def test_regular_weight_gives_classical_density(data):
    t, S, _ = data
    chi = characteristic_function(t, S)
    per_x = dict(zip(t.Q.elements, chi.values))
    assert psi_density_predict(regular_character(t.Q), per_x) == classical_density(t, S)
    # classical Chebotarev for L/K: share of H lying in the compiled set
    assert classical_density(t, S) == Fraction(len(S.elements(t) & t.H), len(t.H))


@settings(max_examples=150, deadline=None)
@given(tower_and_sets())
def test_inflation_identity(data):
    t, S, _ = data
    for psi in [regular_character(t.Q), trivial_character(t.Q)] + [point_mass_character(t.Q, x) for x in t.Q.elements]:
        assert inflation_identity_check(t, psi, S)


@settings(max_examples=100, deadline=None)
@given(tower_and_sets())
def test_lifted_characteristic_is_indicator(data):
    t, S, _ = data
    T = S.elements(t)
    lifted = lifted_characteristic_function(t, S)
    for y, v in zip(t.G.elements, lifted.values):
        assert v == (1 if y in T else 0)


def test_psi_examples():
    t = s3_a3()
    S = Chebotarev("L", frozenset([t.G.identity]))
    chi = characteristic_function(t, S)
    per_x = dict(zip(t.Q.elements, chi.values))
    e, x = t.Q.identity, nontrivial(t.Q)
    assert psi_density_predict(point_mass_character(t.Q, x), per_x) == per_x[x] == 1
    assert psi_density_predict(point_mass_character(t.Q, e), per_x) == Fraction(1, 3)
    assert psi_density_predict(trivial_character(t.Q), per_x) == Fraction(2, 3)
    assert psi_density_predict(regular_character(t.Q), per_x) == Fraction(1, 3)
    with pytest.raises(MissingDensity):
        psi_density_predict(trivial_character(t.Q), {e: Fraction(1)})


def test_regular_class_sum_when_h_is_g():
    G = symmetric_group(3)
    t = make_tower(G, G.elements)
    S = Chebotarev("L", frozenset([T12]))
    per_x = {t.Q.identity: predict_density(t, S, t.Q.identity)}
    assert psi_density_predict(regular_character(t.Q), per_x) == Fraction(3, 6)


def test_inflation_examples():
    U15 = unit_group(15)
    Q, pi = quotient(U15, U15.generated_subgroup([11]))
    sc = AbelianScenario(15, U=[11])
    for x in sc.Q.elements:
        assert inflation_identity_check(sc, point_mass_character(sc.Q, x), Congruence(15, frozenset([2])))
    t = s3_a3()
    transp = Chebotarev("K", frozenset([nontrivial(t.Q)]))
    assert inflation_identity_check(t.pi, regular_character(t.Q), transp)
    for psi in (regular_character(t.Q), trivial_character(t.Q)):
        assert inflation_identity_check(t, psi, AllPrimes())


def test_inflation_complex_psi():
    U = unit_group(5)
    t = make_tower(unit_group(15), unit_group(15).generated_subgroup([11]))
    import cmath

    # a character of (Z/15)^x / <11>, i.e. of (Z/5)^x, with values i^k
    gen = next(q for q in t.Q.elements if t.Q.element_order(q) == 4)
    vals = {t.Q.power(gen, k): cmath.exp(2j * cmath.pi * k / 4) for k in range(4)}
    psi = CharacterFn(t.Q, vals)
    assert not psi.exact
    for S in (AllPrimes(), Chebotarev("L", frozenset([t.G.identity])), Fiber(frozenset([t.G.elements[1]]))):
        assert inflation_identity_check(t, psi, S)
    with pytest.raises(BadInput):
        inflation_identity_check(t, CharacterFn(U, [1, 1, 1, 1]), AllPrimes())


# lemma in the semidirect tower


def naive_normal_closure(G, gens):
    closure = {G.identity}
    frontier = set(gens)
    while frontier:
        closure |= frontier
        new = set()
        for a in closure:
            for b in closure:
                new.add(G.mul(a, b))
        for s in list(closure):
            for g in G.elements:
                new.add(G.conj(g, s))
        frontier = new - closure
    return closure


def test_lemma_examples():
    assert lemma_normteiler_verify(2, 3, 2, 1, 0)
    assert lemma_normteiler_verify(4, 5, injective_chi_generator(4, 5), 2, 2)
    with pytest.raises(HypothesisViolated):
        lemma_normteiler_verify(2, 3, 2, 1, 1)


def test_lemma_closure_of_trivial_psi_is_whole_group():
    tower = semidirect_tower(2, 3, 2, 1)
    assert len(tower.group) == 6
    closure = naive_normal_closure(tower.group, [tower.section(a) for a in range(2)])
    assert closure == set(tower.group.elements)


@pytest.mark.parametrize("d,p,level", [(2, 3, 1), (2, 5, 1), (4, 5, 1), (2, 7, 1), (3, 7, 1), (6, 7, 1), (2, 3, 2), (4, 5, 2)])
def test_lemma_against_naive_closure(d, p, level):
    c = injective_chi_generator(d, p)
    tower = semidirect_tower(d, p, c, level)
    for j in range(d):
        if character_order(j, d) >= d:
            with pytest.raises(HypothesisViolated):
                lemma_normteiler_verify(d, p, c, level, j)
            continue
        kernel = [a for a in range(d) if j * a % d == 0]
        naive = naive_normal_closure(tower.group, [tower.section(a) for a in kernel])
        preimage = {g for g in tower.group.elements if g[0] in kernel}
        assert lemma_normteiler_verify(d, p, c, level, j) == (naive == preimage)
        assert naive == preimage


def test_lemma_non_injective_chi():
    # chi trivial: ord(chi) = 1, no psi satisfies the hypothesis
    with pytest.raises(HypothesisViolated):
        lemma_normteiler_verify(2, 3, 1, 1, 0)
    # chi of order 2 on Z/4: psi of order 1 is covered
    assert lemma_normteiler_verify(4, 5, 4, 1, 0)


def test_order_helpers():
    assert character_order(0, 6) == 1
    assert character_order(2, 6) == 3
    assert character_order(5, 6) == 6
    assert multiplicative_order(2, 7) == 3
    assert multiplicative_order(3, 7) == 6
    with pytest.raises(BadInput):
        multiplicative_order(7, 7)
    assert injective_chi_generator(4, 5) == 2
    assert injective_chi_generator(6, 7) == 3
    assert injective_chi_generator(4, 7) is None
    assert injective_chi_generator(3, 5) is None
