import itertools
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from builders import (
    dual_numbers, gauged, koszul_eval, massey, rand_coderivation, rand_map, rand_module, truncated_polynomial,
)
from hochkit.ainfty import (
    AInftyMorphism, AInftyStructure, CoalgebraMorphism, Coderivation, bracket, check_morphism,
    check_morphism_via_bar, check_stasheff, compose_morphisms, conjugate, exp_coderivation, gauge_structure,
    inverse, is_coalgebra_morphism_between, stasheff_defect, stasheff_via_bar,
)
from hochkit.formality import normal_cone
from hochkit.graded import GradedModule, MultiMap, bar_sign_exponent, compose_multimaps
from hochkit.ring import HPoly, Ring, sign


def compositions(n, parts):
    """Ordered tuples of positive integers of length ``parts`` summing to n."""
    if parts == 1:
        yield (n,)
        return
    for first in range(1, n - parts + 2):
        for rest in compositions(n - first, parts - 1):
            yield (first,) + rest


def direct_stasheff(A: AInftyStructure, n_max: int):
    """Independent expansion of sum (-1)^(r+st) m_u(1^r (x) m_s (x) 1^t) via the Koszul word oracle."""
    M = A.module
    ident = MultiMap.identity(M)
    out = {}
    for n in range(1, n_max + 1):
        for key in M.tuples(n):
            acc = {}
            for s, ms in A.components.items():
                for r in range(0, n - s + 1):
                    t = n - r - s
                    u = r + 1 + t
                    if u not in A.components:
                        continue
                    sg = -1 if (r + s * t) % 2 else 1
                    for mid, c in koszul_eval([ident] * r + [ms] + [ident] * t, key, M.degrees).items():
                        for j, v in A.components[u].apply(mid).items():
                            acc[j] = acc.get(j, 0) + sg * c * v
            acc = {j: v for j, v in acc.items() if v}
            if acc:
                out[(n, key)] = acc
    return out


def direct_morphism_defect(f: AInftyMorphism, n_max: int):
    M = f.source.module
    ident = MultiMap.identity(M)
    out = {}
    for n in range(1, n_max + 1):
        for key in M.tuples(n):
            acc = {}
            for s, ms in f.source.components.items():
                for r in range(0, n - s + 1):
                    t = n - r - s
                    u = r + 1 + t
                    if u not in f.components:
                        continue
                    sg = -1 if (r + s * t) % 2 else 1
                    for mid, c in koszul_eval([ident] * r + [ms] + [ident] * t, key, M.degrees).items():
                        for j, v in f.components[u].apply(mid).items():
                            acc[j] = acc.get(j, 0) + sg * c * v
            for r, mr in f.target.components.items():
                for ar in compositions(n, r) if r <= n else []:
                    if any(i not in f.components for i in ar):
                        continue
                    s = sum((r - 1 - j) * (i - 1) for j, i in enumerate(ar))
                    sg = -1 if s % 2 else 1
                    for mid, c in koszul_eval([f.components[i] for i in ar], key, M.degrees).items():
                        for j, v in mr.apply(mid).items():
                            acc[j] = acc.get(j, 0) - sg * c * v
            acc = {j: v for j, v in acc.items() if v}
            if acc:
                out[(n, key)] = acc
    return out


def as_table(res):
    return {(v.n, v.inputs): v.defect for v in res.violations}


def abs_table(res):
    return {(v.n, v.inputs): {j: abs(c) for j, c in v.defect.items()} for v in res.violations}


def random_structure(rng, M, arities=(1, 2, 3), density=0.3):
    comps = {n: rand_map(rng, n, 2 - n, M, density) for n in arities}
    return AInftyStructure(M, comps)


# examples ----------------------------------------------------------------------------


def test_associative_and_non_associative_tables():
    A = dual_numbers()
    assert check_stasheff(A, 5).ok and stasheff_via_bar(A, 5).ok
    M = A.module
    bad = AInftyStructure(M, {2: MultiMap.from_named(2, 0, M, M, [(("a", "a"), "b", 1), (("b", "a"), "a", 1)])})
    assert check_stasheff(bad, 4).failing_arities == [3]
    assert stasheff_via_bar(bad, 4).failing_arities == [3]


def test_massey_structure_is_valid_by_two_expansions():
    A = massey()
    assert check_stasheff(A, 6).ok and stasheff_via_bar(A, 6).ok
    assert direct_stasheff(A, 5) == {}
    assert check_stasheff(AInftyStructure(GradedModule(()), {}), 4).ok


def test_identity_and_algebra_isomorphism_morphisms():
    A = truncated_polynomial()
    assert check_morphism(AInftyMorphism.identity(A), 5).ok
    M = A.module
    # t -> 2t, t2 -> 4t2 is an algebra automorphism; t -> 2t, t2 -> t2 is not
    good = MultiMap.from_named(1, 0, M, M, [(("1",), "1", 1), (("t",), "t", 2), (("t2",), "t2", 4)])
    bad = MultiMap.from_named(1, 0, M, M, [(("1",), "1", 1), (("t",), "t", 2), (("t2",), "t2", 1)])
    assert check_morphism(AInftyMorphism(A, A, {1: good}), 4).ok
    assert check_morphism(AInftyMorphism(A, A, {1: bad}), 4).failing_arities == [2]


def test_normal_cone_morphism_over_qh():
    rng = random.Random(11)
    T = truncated_polynomial()
    E = exp_coderivation(rand_coderivation(rng, T.bar_module, 0, [2, 3], density=0.6), 6)
    S = gauge_structure(E, T, 6)
    f = AInftyMorphism.from_bar(E, T, S)
    assert check_morphism(f, 5).ok
    N = 3
    R = Ring(N)
    src = normal_cone(T, N).structure
    tgt = normal_cone(S, N).structure
    comps = {i: g.map_coeffs(lambda c, i=i: HPoly.monomial(c, i - 1, N)) for i, g in f.components.items()}
    ft = AInftyMorphism(src, tgt, {i: MultiMap(i, 1 - i, T.module, S.module, g.entries) for i, g in comps.items()})
    assert ft.ring == R
    assert check_morphism(ft, 5).ok


def test_compose_morphisms():
    rng = random.Random(2)
    T = truncated_polynomial()
    E1 = exp_coderivation(rand_coderivation(rng, T.bar_module, 0, [2], density=0.6), 5)
    S1 = gauge_structure(E1, T, 5)
    E2 = exp_coderivation(rand_coderivation(rng, T.bar_module, 0, [2, 3], density=0.6), 5)
    S2 = gauge_structure(E2, S1, 5)
    f = AInftyMorphism.from_bar(E1, T, S1)
    g = AInftyMorphism.from_bar(E2, S1, S2)
    gf = compose_morphisms(g, f, 5)
    assert check_morphism(gf, 5).ok
    idT, idS = AInftyMorphism.identity(T), AInftyMorphism.identity(S1)
    assert compose_morphisms(f, idT, 5).components == f.components
    assert compose_morphisms(idS, f, 5).components == f.components
    # functoriality and the arity-2 expansion on the bar side
    G, Fb, H = g.bar(), f.bar(), gf.bar()
    assert H == G.compose(Fb, 5)
    from hochkit.ainfty import compose_arity1
    assert H.component(1) == compose_arity1(G.component(1), Fb.component(1))
    expect2 = compose_arity1(G.component(1), Fb.component(2)) + compose_multimaps(
        G.component(2), [Fb.component(1), Fb.component(1)])
    assert H.component(2) == expect2
    with pytest.raises(ValueError):
        compose_morphisms(f, g, 5)


def test_exp_examples():
    T = truncated_polynomial()
    V = T.bar_module
    assert exp_coderivation(Coderivation(V, 0, {}), 5) == CoalgebraMorphism.identity(V)
    rng = random.Random(4)
    g = rand_coderivation(rng, V, 0, [1, 2], density=0.7)
    R = Ring(1)
    gh = g.map_coeffs(lambda c: HPoly([0, c]), R)
    E = exp_coderivation(gh, 5)
    one = CoalgebraMorphism.identity(V, R)
    # exp(g h) = id + g h as a coalgebra map: its components are id_1 + g_n h
    assert E.component(1) == one.component(1) + gh.component(1)
    assert E.component(2) == gh.component(2)
    with pytest.raises(ValueError, match="exp does not truncate"):
        exp_coderivation(g, 4)
    g0 = rand_coderivation(rng, V, 0, [2, 3], density=0.7)
    assert exp_coderivation(g0, 6).compose(exp_coderivation(-g0, 6), 6) == CoalgebraMorphism.identity(V)
    assert inverse(exp_coderivation(g0, 6), 6) == exp_coderivation(-g0, 6)


def test_conjugate_examples():
    T = truncated_polynomial()
    V = T.bar_module
    m = T.bar()
    assert conjugate(CoalgebraMorphism.identity(V), m, 5) == m
    # the Euler derivation t -> t, t2 -> 2 t2 commutes with m_2, so exp(D h) fixes m
    R2 = Ring(2)
    D = MultiMap.from_named(1, 0, V, V, [(("t",), "t", 1), (("t2",), "t2", 2)])
    Dh = Coderivation(V, 0, {1: D}).map_coeffs(lambda c: HPoly([0, c, 0]), R2)
    assert bracket(Coderivation(V, 0, {1: D}), m, 5).is_zero()
    m2 = m.map_coeffs(lambda c: HPoly([c, 0, 0]), R2)
    assert conjugate(exp_coderivation(Dh, 5), m2, 5) == m2
    rng = random.Random(9)
    g = rand_coderivation(rng, V, 0, [1, 2, 3], density=0.6)
    R = Ring(1)
    gh = g.map_coeffs(lambda c: HPoly([0, c]), R)
    mh = m.map_coeffs(lambda c: HPoly([c, 0]), R)
    lhs = conjugate(exp_coderivation(gh, 6), mh, 6)
    rhs = mh + bracket(g, m, 6).map_coeffs(lambda c: HPoly([0, c]), R)
    assert lhs == rhs


# properties --------------------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_checkers_agree_with_direct_expansion(seed):
    rng = random.Random(seed)
    M = rand_module(rng)
    A = random_structure(rng, M)
    n = 4
    direct = direct_stasheff(A, n)
    assert as_table(check_stasheff(A, n)) == direct
    # on the bar side d o d = -(-1)^e times the A-side defect, e the structure-map shift exponent
    moved = {}
    for v in stasheff_via_bar(A, n).violations:
        s = -sign(bar_sign_exponent([M.degree(i) for i in v.inputs]))
        moved[(v.n, v.inputs)] = {j: s * c for j, c in v.defect.items()}
    assert moved == direct


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_morphism_checkers_agree(seed):
    rng = random.Random(seed)
    M = rand_module(rng, max_dim=2)
    A = random_structure(rng, M, arities=(2, 3))
    B = random_structure(rng, M, arities=(2,))
    f = AInftyMorphism(A, B, {1: rand_map(rng, 1, 0, M, 0.7), 2: rand_map(rng, 2, -1, M, 0.5)})
    n = 4
    direct = direct_morphism_defect(f, n)
    assert as_table(check_morphism(f, n)) == direct
    assert abs_table(check_morphism_via_bar(f, n)) == {k: {j: abs(c) for j, c in v.items()}
                                                       for k, v in direct.items()}


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_conjugation_preserves_square_zero_and_morphisms(seed):
    rng = random.Random(seed)
    base = rng.choice([dual_numbers(), truncated_polynomial(), massey()])
    V = base.bar_module
    E = exp_coderivation(rand_coderivation(rng, V, 0, [2, 3], density=0.5), 6)
    c = conjugate(E, base.bar(), 6)
    assert c.square(6).is_zero()
    S = AInftyStructure.from_bar(c, base.module)
    assert check_stasheff(S, 6).ok and stasheff_via_bar(S, 6).ok
    f = AInftyMorphism.from_bar(E, base, S)
    assert check_morphism(f, 6).ok and check_morphism_via_bar(f, 6).ok
    assert is_coalgebra_morphism_between(E, base.bar(), c, 6)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 3))
def test_exp_is_additive_on_commuting_arguments(seed, N):
    rng = random.Random(seed)
    V = truncated_polynomial().bar_module
    a = rand_coderivation(rng, V, 0, [1, 2], density=0.6)
    p, q = F(rng.randint(-2, 2)), F(rng.randint(-2, 2))
    R = Ring(N)
    ah = a.map_coeffs(lambda c: HPoly.monomial(p * c, 1, N), R)
    bh = a.map_coeffs(lambda c: HPoly.monomial(q * c, 1, N), R)
    assert bracket(ah, bh, 5).is_zero()
    assert exp_coderivation(ah + bh, 5) == exp_coderivation(ah, 5).compose(exp_coderivation(bh, 5), 5)
