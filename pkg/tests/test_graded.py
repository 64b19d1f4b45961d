import itertools
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from builders import koszul_eval, rand_map, rand_module
from hochkit.graded import (
    DegreeError, GradedModule, MultiMap, compose_multimaps, hom_arity_bound, insert, morphism_from_bar,
    morphism_to_bar, shift_from_bar, shift_to_bar,
)


def apply_tensor(T, key):
    """Uniform evaluation of MultiMap / TensorMap on a tuple, as {tuple: coeff}."""
    out = T.apply(tuple(key))
    return {(k if isinstance(k, tuple) else (k,)): v for k, v in out.items()}


def compose_tensor(S, T, key):
    acc = {}
    for mid, c in apply_tensor(T, key).items():
        for out, v in apply_tensor(S, mid).items():
            acc[out] = acc.get(out, 0) + c * v
    return {k: v for k, v in acc.items() if v}


def identity(M):
    return MultiMap.identity(M)


# modules and maps --------------------------------------------------------------------


def test_module_basics():
    M = GradedModule.of(("x", 1), ("y", -2))
    assert M.dim == 2 and M.index("y") == 1 and M.shift().degrees == (0, -3)
    with pytest.raises(ValueError):
        GradedModule.of(("x", 1), ("x", 2))
    assert GradedModule(()).dim == 0


def test_homogeneity_is_enforced():
    M = GradedModule.of(("x", 1), ("z", 2))
    MultiMap.from_named(2, 0, M, M, [(("x", "x"), "z", 1)])
    with pytest.raises(DegreeError):
        MultiMap.from_named(2, 1, M, M, [(("x", "x"), "z", 1)])


def test_hom_arity_bound():
    assert hom_arity_bound(GradedModule.of(("a", 1), ("b", 2)), 1) == 1
    assert hom_arity_bound(GradedModule.of(("a", -1), ("b", -2)), 1) == 3
    assert hom_arity_bound(GradedModule.of(("a", 0)), 1) is None
    assert hom_arity_bound(GradedModule(()), 1) == 0
    # the bound is sharp: nothing of degree 1 above it
    V = GradedModule.of(("a", -1), ("b", -2))
    assert list(V.hom_basis(3, 1)) and not list(V.hom_basis(4, 1))


# shift dictionary ---------------------------------------------------------------------


def reference_bar_sign(degs):
    # independent transcription of n = i + sum_(j<i) (i-j) deg a_j
    i = len(degs)
    return (-1) ** (i + sum((i - j) * degs[j - 1] for j in range(1, i)))


def test_shift_sign_small_cases():
    M = GradedModule.of(("a", 0), ("b", 1), ("c", 1), ("e", 2))
    m1 = MultiMap.from_named(1, 1, M, M, [(("a",), "b", 1), (("c",), "e", 1)])
    d1 = shift_to_bar(m1)
    assert d1.apply((0,)) == {1: -1} and d1.apply((2,)) == {3: -1}
    m2 = MultiMap.from_named(2, 0, M, M, [(("a", "a"), "a", 1), (("b", "a"), "b", 1), (("a", "b"), "c", 1)])
    d2 = shift_to_bar(m2)
    # with deg a_1 = 0 the arity-2 sign is +1; deg a_1 = 1 flips it
    assert d2.apply((0, 0)) == {0: 1} and d2.apply((0, 1)) == {2: 1}
    assert d2.apply((1, 0)) == {1: -1}
    assert shift_to_bar(MultiMap.zero(3, -1, M)).is_zero()
    with pytest.raises(DegreeError, match="not an m-component"):
        shift_to_bar(MultiMap.from_named(2, 1, M, M, [(("a", "b"), "e", 1)]))


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_shift_roundtrip_and_sign_reference(seed):
    rng = random.Random(seed)
    M = rand_module(rng)
    n = rng.randint(1, 4)
    m = rand_map(rng, n, 2 - n, M, density=0.6)
    d = shift_to_bar(m)
    assert len(d) == len(m)
    assert shift_from_bar(d, M) == m
    for key, j, c in m.terms():
        assert d.apply(key)[j] == reference_bar_sign([M.degree(i) for i in key]) * c
    f = rand_map(rng, n, 1 - n, M, density=0.6)
    assert morphism_from_bar(morphism_to_bar(f), M, M) == f


# insertion and tensor composition --------------------------------------------------------


def test_insert_trivial_cases():
    M = GradedModule.of(("x", 0), ("y", 1))
    f = MultiMap.from_named(1, 1, M, M, [(("x",), "y", 1)])
    assert insert(f, 0, 0) is f
    g = MultiMap.from_named(1, 0, M, M, [(("y",), "y", 2)])
    T = insert(g, 1, 1)
    for key in M.tuples(3):
        assert apply_tensor(T, key) == koszul_eval([identity(M), g, identity(M)], key, M.degrees)


def test_insert_example_odd_map_passes_odd_element():
    V = GradedModule.of(("x", 1), ("y", 0), ("z", 2), ("w", 1))
    f = MultiMap.from_named(1, 1, V, V, [(("y",), "w", 1)])
    T = insert(f, 1, 1)
    assert apply_tensor(T, (0, 1, 2)) == {(0, 3, 2): -1}


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_insert_matches_oracle(seed):
    rng = random.Random(seed)
    M = rand_module(rng)
    s = rng.randint(1, 2)
    f = rand_map(rng, s, rng.randint(-2, 2), M, density=0.7)
    r, t = rng.randint(0, 2), rng.randint(0, 1)
    T = insert(f, r, t)
    maps = [identity(M)] * r + [f] + [identity(M)] * t
    for key in M.tuples(r + s + t):
        assert apply_tensor(T, key) == koszul_eval(maps, key, M.degrees)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_compose_multimaps_matches_oracle(seed):
    rng = random.Random(seed)
    M = rand_module(rng)
    arities = [rng.randint(1, 2) for _ in range(rng.randint(1, 3))]
    inners = [rand_map(rng, a, rng.randint(-1, 2), M, density=0.7) for a in arities]
    outer = rand_map(rng, len(inners), rng.randint(-1, 1), M, density=0.7)
    comp = compose_multimaps(outer, inners)
    for key in M.tuples(sum(arities)):
        expect = {}
        for mid, c in koszul_eval(inners, key, M.degrees).items():
            for j, v in outer.apply(mid).items():
                expect[j] = expect.get(j, 0) + c * v
        assert comp.apply(key) == {j: v for j, v in expect.items() if v}


def test_compose_identity_and_degree_zero():
    M = GradedModule.of(("a", 0), ("b", 0))
    m2 = MultiMap.from_named(2, 0, M, M, [(("a", "a"), "b", 1), (("a", "b"), "b", 3)])
    assert compose_multimaps(m2, [identity(M), identity(M)]) == m2
    f = MultiMap.from_named(1, 0, M, M, [(("a",), "a", 2), (("b",), "a", 1)])
    comp = compose_multimaps(m2, [f, f])
    for x, y in M.tuples(2):
        expect = {}
        for i, c in f.apply((x,)).items():
            for j, d in f.apply((y,)).items():
                for k, v in m2.apply((i, j)).items():
                    expect[k] = expect.get(k, 0) + c * d * v
        assert comp.apply((x, y)) == {k: v for k, v in expect.items() if v}
    with pytest.raises(ValueError):
        compose_multimaps(m2, [f])


def test_compose_two_odd_inners():
    V = GradedModule.of(("x", 1), ("y", 0), ("u", 2), ("v", 1))
    f = MultiMap.from_named(1, 1, V, V, [(("x",), "u", 1)])
    g = MultiMap.from_named(1, 1, V, V, [(("y",), "v", 1)])
    outer = MultiMap.from_named(2, -2, V, V, [(("u", "v"), "x", 1)])
    # g passes x (degree 1): one sign
    assert compose_multimaps(outer, [f, g]).apply((0, 1)) == {0: -1}


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_interchange_law(seed):
    rng = random.Random(seed)
    M = rand_module(rng)
    p, q = rng.randint(1, 2), rng.randint(1, 2)
    f = rand_map(rng, p, rng.randint(-2, 2), M, density=0.7)
    g = rand_map(rng, q, rng.randint(-2, 2), M, density=0.7)
    f1 = insert(f, 0, 1)  # f (x) 1 on arity p+1
    g1 = insert(g, p, 0)  # 1^p (x) g on arity p+q
    one_g = insert(g, 1, 0)  # 1 (x) g on arity 1+q
    f_one = insert(f, 0, q)  # f (x) 1^q on arity p+q
    s = -1 if (f.degree * g.degree) % 2 else 1
    for key in M.tuples(p + q):
        lhs = compose_tensor(f1, g1, key)
        rhs = compose_tensor(one_g, f_one, key)
        assert lhs == {k: s * v for k, v in rhs.items()}
