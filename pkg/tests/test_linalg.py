import random
from fractions import Fraction as F

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from hochkit.linalg import (
    NotAComplex, SparseMatrix, cohomology, expand_matrix, expand_vector, inverse, kernel, rank, solve,
    solve_with_certificate,
)
from hochkit.ring import HPoly, QQ, Ring


def rand_matrix(rng, r, c, density=0.5, scale=3, ring=QQ):
    ent = {}
    for i in range(r):
        for j in range(c):
            if rng.random() < density:
                if ring.truncation is None:
                    v = F(rng.randint(-scale, scale))
                else:
                    v = HPoly([rng.randint(-scale, scale) if rng.random() < 0.6 else 0
                               for _ in range(ring.truncation + 1)])
                if v:
                    ent[(i, j)] = v
    return SparseMatrix(r, c, ent, ring)


def to_sympy(M: SparseMatrix):
    S = sympy.zeros(M.nrows, M.ncols)
    for (i, j), v in M.entries():
        S[i, j] = sympy.Rational(v.numerator, v.denominator)
    return S


def residual(M, x, b):
    Mx = M.apply(x)
    keys = set(Mx) | set(b)
    zero = M.ring.zero()
    return {k: Mx.get(k, zero) - M.ring.coerce(b.get(k, 0)) for k in keys if Mx.get(k, zero) != M.ring.coerce(b.get(k, 0))}


def test_solve_examples():
    I = SparseMatrix.identity(3)
    b = {0: F(1, 2), 2: F(-3)}
    assert solve(I, b) == b
    Z = SparseMatrix(2, 2)
    res = solve_with_certificate(Z, {1: F(1)})
    assert res.x is None and res.certificate.verify(Z, {1: F(1)})
    M = SparseMatrix(2, 2, {(0, 0): F(2), (0, 1): F(1), (1, 0): F(1), (1, 1): F(3)})
    x = solve(M, {0: F(1), 1: F(2)})
    assert x == {0: F(1, 5), 1: F(3, 5)}


def test_solve_is_block_complete_where_layers_are_not():
    # h x = h over Q[h]/h^2: the layer-0 particular solution x_0 = 0 dead-ends,
    # the expanded system finds x = 1
    R = Ring(1)
    M = SparseMatrix(1, 1, {(0, 0): R.h()}, R)
    x = solve(M, {0: R.h()})
    assert x is not None and not residual(M, x, {0: R.h()})
    assert layer_solve(M, {0: R.h()}) is None


def layer_solve(M: SparseMatrix, b):
    """h-degree induction with zero free variables: the reference layered solver."""
    N = M.ring.truncation
    layers = [SparseMatrix(M.nrows, M.ncols, {(i, j): v[a] for (i, j), v in M.entries() if v[a]})
              for a in range(N + 1)]
    xs = []
    for k in range(N + 1):
        rhs = {i: M.ring.coerce(v)[k] for i, v in b.items()}
        for a in range(1, k + 1):
            for i, c in layers[a].apply(xs[k - a]).items():
                rhs[i] = rhs.get(i, 0) - c
        x = solve(layers[0], {i: c for i, c in rhs.items() if c})
        if x is None:
            return None
        xs.append(x)
    out = {}
    for k, x in enumerate(xs):
        for j, c in x.items():
            out.setdefault(j, [F(0)] * (N + 1))[k] = c
    return {j: HPoly(cs) for j, cs in out.items() if any(cs)}


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_solve_over_q_against_sympy(seed):
    rng = random.Random(seed)
    r, c = rng.randint(1, 5), rng.randint(1, 5)
    M = rand_matrix(rng, r, c)
    b = {i: F(rng.randint(-3, 3)) for i in range(r) if rng.random() < 0.7}
    res = solve_with_certificate(M, b)
    S = to_sympy(M)
    aug = S.row_join(sympy.Matrix([sympy.Rational(b.get(i, 0)) for i in range(r)]))
    consistent = S.rank() == aug.rank()
    assert res.ok == consistent
    if res.ok:
        assert not residual(M, res.x, b)
    else:
        assert res.certificate.verify(M, b)
    assert rank(M) == S.rank()
    ker = kernel(M)
    assert len(ker) == c - S.rank()
    for v in ker:
        assert not M.apply(v)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_solve_over_qh_block_vs_layers(seed):
    rng = random.Random(seed)
    R = Ring(rng.randint(1, 3))
    r, c = rng.randint(1, 4), rng.randint(1, 4)
    M = rand_matrix(rng, r, c, ring=R)
    if rng.random() < 0.5:
        x0 = {j: HPoly([rng.randint(-2, 2) for _ in range(R.truncation + 1)]) for j in range(c)}
        b = M.apply(x0)
    else:
        b = {i: HPoly([rng.randint(-2, 2) for _ in range(R.truncation + 1)]) for i in range(r)}
    res = solve_with_certificate(M, b)
    lay = layer_solve(M, b)
    if lay is not None:
        assert not residual(M, lay, b)
        assert res.ok
    if res.ok:
        assert not residual(M, res.x, b)
    else:
        assert res.certificate.verify(M, b)
    # the expanded system is the oracle for solvability
    E, eb = expand_matrix(M), expand_vector(b, r, R)
    S = to_sympy(E)
    aug = S.row_join(sympy.Matrix([sympy.Rational(eb.get(i, 0)) for i in range(E.nrows)]))
    assert res.ok == (S.rank() == aug.rank())


def test_layers_agree_when_leading_layer_is_invertible():
    rng = random.Random(5)
    R = Ring(3)
    for _ in range(20):
        M = rand_matrix(rng, 3, 3, ring=R)
        M0 = SparseMatrix(3, 3, {(i, j): v[0] for (i, j), v in M.entries() if v[0]})
        if rank(M0) < 3:
            continue
        b = {i: HPoly([rng.randint(-2, 2) for _ in range(4)]) for i in range(3)}
        assert solve(M, b) == layer_solve(M, b)


def test_inverse():
    M = SparseMatrix(2, 2, {(0, 0): F(1), (0, 1): F(2), (1, 1): F(1)})
    Mi = inverse(M)
    assert dict(Mi.entries()) == {(0, 0): 1, (0, 1): -2, (1, 1): 1}
    with pytest.raises(ZeroDivisionError):
        inverse(SparseMatrix(2, 2, {(0, 0): F(1)}))
    R = Ring(2)
    U = SparseMatrix(1, 1, {(0, 0): HPoly([1, 1, 0])}, R)
    assert inverse(U).get(0, 0) == HPoly([1, -1, 1])


def test_cohomology_examples():
    res = cohomology(SparseMatrix(3, 0), SparseMatrix(0, 3))
    assert res.dimension == 3 and sorted(tuple(sorted(r)) for r in res.representatives) == [(0,), (1,), (2,)]
    inj = SparseMatrix(3, 2, {(0, 0): F(1), (1, 1): F(1)})
    assert cohomology(SparseMatrix(2, 0), inj).dimension == 0
    with pytest.raises(NotAComplex, match="not a complex"):
        cohomology(SparseMatrix(1, 1, {(0, 0): F(1)}), SparseMatrix(1, 1, {(0, 0): F(1)}))


def dense_cohomology_dim(d_in, d_out):
    n = d_in.nrows
    ker = n - (to_sympy(d_out).rank() if d_out.nrows else 0)
    im = to_sympy(d_in).rank() if d_in.ncols else 0
    return ker - im


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_cohomology_against_dense_oracle(seed):
    rng = random.Random(seed)
    a, b, c = rng.randint(0, 4), rng.randint(1, 5), rng.randint(0, 4)
    # build a complex: d_out = random, d_in = kernel vectors of d_out combined randomly
    d_out = rand_matrix(rng, c, b)
    ker = kernel(d_out)
    cols = []
    for _ in range(a):
        v = {}
        for z in ker:
            s = rng.randint(-2, 2)
            for k, x in z.items():
                v[k] = v.get(k, 0) + s * x
        cols.append({k: x for k, x in v.items() if x})
    d_in = SparseMatrix.from_columns(b, cols)
    res = cohomology(d_in, d_out)
    assert res.dimension == dense_cohomology_dim(d_in, d_out)
    for rep in res.representatives:
        assert not d_out.apply(rep)
    # lift data: random cocycle = sum c_j rep_j + d_in(w)
    z = {}
    for v in ker:
        s = rng.randint(-2, 2)
        for k, x in v.items():
            z[k] = z.get(k, 0) + s * x
    z = {k: x for k, x in z.items() if x}
    coords, w = res.lift(z)
    recon = dict(d_in.apply(w))
    for cj, rep in zip(coords, res.representatives):
        for k, x in rep.items():
            recon[k] = recon.get(k, 0) + cj * x
    assert {k: x for k, x in recon.items() if x} == z
