import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from builders import massey_dga, triangular_dga
from hochkit.ainfty import MultiMap, check_morphism, check_stasheff, compose_arity1
from hochkit.formality import Obstruction, formality_test
from hochkit.graded import GradedModule, compose_multimaps, hom_arity_bound
from hochkit.transfer import DGAlgebra, build_contraction, minimal_model


def test_zero_differential():
    M = GradedModule.of(("a", 0), ("b", 0))
    prod = MultiMap.from_named(2, 0, M, M, [(("a", "a"), "b", 1)])
    E = DGAlgebra(M, MultiMap.zero(1, 1, M), prod)
    C = build_contraction(E)
    assert C.inclusion == MultiMap(1, 0, C.cohomology_module, M, {(0,): {0: 1}, (1,): {1: 1}})
    assert C.homotopy.is_zero()
    H, f = minimal_model(E, C, 5)
    assert set(H.components) == {2} and H.m(2).entries == prod.entries
    assert set(f.components) == {1}


def test_acyclic_two_term_complex():
    M = GradedModule.of(("x", 0), ("y", 1))
    d = MultiMap.from_named(1, 1, M, M, [(("x",), "y", 2)])
    E = DGAlgebra(M, d, MultiMap.zero(2, 0, M))
    C = build_contraction(E)
    assert C.cohomology_module.dim == 0
    # i p - id = d h + h d forces h = -d^-1 on the image
    assert C.homotopy.apply((1,)) == {0: F(-1, 2)}
    assert not C.verify(E)


def test_five_dim_with_one_dim_cohomology():
    # unit e plus two acyclic pairs x -> y, z -> w (dimension parity rules out 4 with H of dim 1)
    M = GradedModule.of(("e", 0), ("x", 0), ("y", 1), ("z", 1), ("w", 2))
    d = MultiMap.from_named(1, 1, M, M, [(("x",), "y", 1), (("z",), "w", 1)])
    terms = [(("e", n), n, 1) for n in M.names] + [((n, "e"), n, 1) for n in M.names if n != "e"]
    E = DGAlgebra(M, d, MultiMap.from_named(2, 0, M, M, terms))
    E.validate()
    C = build_contraction(E)
    assert C.cohomology_module.basis == (("e", 0),)
    assert C.verify(E) == []


def test_not_a_dg_algebra():
    M = GradedModule.of(("x", 0), ("y", 1))
    d = MultiMap.from_named(1, 1, M, M, [(("x",), "y", 1)])
    prod = MultiMap.from_named(2, 0, M, M, [(("x", "x"), "x", 1)])
    with pytest.raises(ValueError, match="not a DG algebra"):
        build_contraction(DGAlgebra(M, d, prod))


def test_formal_by_construction():
    # H = k[t]/t^2 (t in degree 1) plus an acyclic pair with zero products on it
    M = GradedModule.of(("1", 0), ("t", 1), ("u", 0), ("v", 1))
    terms = [(("1", "1"), "1", 1), (("1", "t"), "t", 1), (("t", "1"), "t", 1)]
    d = MultiMap.from_named(1, 1, M, M, [(("u",), "v", 1)])
    E = DGAlgebra(M, d, MultiMap.from_named(2, 0, M, M, terms))
    H, f = minimal_model(E, build_contraction(E), 6)
    assert set(H.components) == {2}
    assert check_stasheff(H, 6).ok and check_morphism(f, 6).ok


def test_massey_dga_transfers_to_a_non_formal_structure():
    E = massey_dga()
    C = build_contraction(E)
    H, f = minimal_model(E, C, 5)
    assert 3 in H.components and check_stasheff(H, 5).ok and check_morphism(f, 5).ok
    r = formality_test(H, 2)
    assert isinstance(r, Obstruction) and r.level == 1


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(3, 4))
def test_transfer_properties(seed, n):
    E = triangular_dga(random.Random(seed), n)
    C = build_contraction(E)
    assert C.verify(E) == []
    K = 6
    H, f = minimal_model(E, C, K)
    assert H.is_minimal
    assert check_stasheff(H, K).ok and check_morphism(f, K).ok
    i, p = C.inclusion, C.projection
    m2 = compose_arity1(p, compose_multimaps(E.product, [i, i]))
    assert H.m(2) == m2
    assert compose_arity1(p, f.f(1)) == MultiMap.identity(C.cohomology_module)
    # degree bookkeeping: nothing where Hom^(2-k)(H^k, H) is empty
    for k, mk in H.components.items():
        assert list(H.module.hom_basis(k, 2 - k)), k
