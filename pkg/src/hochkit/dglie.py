"""Graded Lie algebras, Maurer-Cartan elements and gauge trivialization.

Elements of g are sparse vectors {basis index: scalar}; linear maps on g are
arity-1 MultiMaps.  Over Q[h]/h^(N+1) the scalars are HPoly values.
A gauge element is kept in factored form exp(xi_N h^N) ... exp(xi_1 h).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .ainfty import AInftyStructure, CheckResult, Coderivation, Violation, bracket, compose_arity1
from .errors import InvariantError
from .graded import GradedModule, MultiMap
from .linalg import FredholmCertificate, SparseMatrix, solve_with_certificate
from .ring import QQ, HPoly, Ring, coeff_at, d_dh, sign

Vector = Dict[int, object]


def _clean(v: Vector) -> Vector:
    return {k: c for k, c in v.items() if c}


def vadd(a: Vector, b: Vector, s=1) -> Vector:
    out = dict(a)
    for k, c in b.items():
        out[k] = out.get(k, 0) + s * c
    return _clean(out)


def vscale(a: Vector, c) -> Vector:
    return _clean({k: c * x for k, x in a.items()})


@dataclass
class GradedLie:
    module: GradedModule
    bracket: MultiMap

    def __post_init__(self):
        if self.bracket.arity != 2 or (self.bracket.degree != 0 and not self.bracket.is_zero()):
            raise ValueError("bracket must be arity 2, degree 0")

    def br(self, a: Vector, b: Vector) -> Vector:
        out: Vector = {}
        for i, x in a.items():
            for j, y in b.items():
                for k, c in self.bracket.apply((i, j)).items():
                    out[k] = out.get(k, 0) + x * y * c
        return _clean(out)

    def ad(self, a: Vector, ring: Ring = QQ) -> MultiMap:
        """ad_a as a linear map; a must be homogeneous."""
        M = self.module
        degs = {M.degree(i) for i in a}
        if len(degs) > 1:
            raise ValueError("ad needs a homogeneous element")
        deg = degs.pop() if degs else 0
        entries = {(j,): self.br(a, {j: ring.one()}) for j in range(M.dim)}
        return MultiMap(1, deg, M, M, entries, check=False)

    def degree_part(self, degree: int) -> List[int]:
        return [i for i, d in enumerate(self.module.degrees) if d == degree]


def apply_linear(f: MultiMap, v: Vector) -> Vector:
    out: Vector = {}
    for i, x in v.items():
        for k, c in f.apply((i,)).items():
            out[k] = out.get(k, 0) + c * x
    return _clean(out)


def check_graded_lie(L: GradedLie) -> CheckResult:
    """Graded antisymmetry and the signed Jacobi identity on all basis pairs/triples.

    Violations at n=2 are antisymmetry failures, at n=3 Jacobi failures.
    """
    M = L.module
    dg = M.degrees
    out: List[Violation] = []
    for a in range(M.dim):
        for b in range(M.dim):
            v = vadd(L.br({a: 1}, {b: 1}), L.br({b: 1}, {a: 1}), sign(dg[a] * dg[b]))
            if v:
                out.append(Violation(2, (a, b), v))
    for a in range(M.dim):
        for b in range(M.dim):
            for c in range(M.dim):
                A, B, C = {a: 1}, {b: 1}, {c: 1}
                t1 = vscale(L.br(A, L.br(B, C)), sign(dg[c] * dg[a]))
                t2 = vscale(L.br(B, L.br(C, A)), sign(dg[a] * dg[b]))
                t3 = vscale(L.br(C, L.br(A, B)), sign(dg[b] * dg[c]))
                v = vadd(vadd(t1, t2), t3)
                if v:
                    out.append(Violation(3, (a, b, c), v))
    return CheckResult(3, out)


@dataclass
class LieDerivation:
    map: MultiMap

    @property
    def degree(self) -> int:
        return self.map.degree

    def __call__(self, v: Vector) -> Vector:
        return apply_linear(self.map, v)

    def __eq__(self, other):
        return isinstance(other, LieDerivation) and self.map.entries == other.map.entries


def check_derivation(L: GradedLie, D: LieDerivation) -> List[Tuple[int, int]]:
    """Basis pairs where D[b, c] != [Db, c] + (-1)^(deg(b) l) [b, Dc]."""
    M = L.module
    bad = []
    one = 1
    for b in range(M.dim):
        for c in range(M.dim):
            B, C = {b: one}, {c: one}
            lhs = D(L.br(B, C))
            rhs = vadd(L.br(D(B), C), L.br(B, D(C)), sign(M.degree(b) * D.degree))
            if vadd(lhs, rhs, -1):
                bad.append((b, c))
    return bad


def square_is_zero(D: LieDerivation) -> bool:
    return compose_arity1(D.map, D.map).is_zero()


# h-adic helpers -----------------------------------------------------------------


def lift_vector(v: Vector, ring: Ring, power: int = 0) -> Vector:
    return _clean({k: HPoly.monomial(c, power, ring.truncation) for k, c in v.items()})


def layer(v: Vector, k: int) -> Vector:
    return _clean({i: coeff_at(c, k) for i, c in v.items()})


def lift_map(f: MultiMap, ring: Ring) -> MultiMap:
    if ring.truncation is None:
        return f
    return f.map_coeffs(lambda c: c if isinstance(c, HPoly) else HPoly.const(c, ring.truncation))


def exp_linear(X: MultiMap, ring: Ring) -> MultiMap:
    """exp(X) for X with h-divisible coefficients (the series then stops)."""
    M = X.source
    out = MultiMap.identity(M, ring.one())
    term = MultiMap.identity(M, ring.one())
    k = 1
    while True:
        term = compose_arity1(X, term).scale(Fraction(1, k))
        if term.is_zero():
            return out
        out = out + term
        k += 1
        if k > 10_000:
            raise ValueError("exp does not truncate")


def exp_vector_action(L: GradedLie, alpha: Vector, v: Vector) -> Vector:
    """exp(ad_alpha)(v) = v + [alpha, v] + [alpha, [alpha, v]]/2 + ..."""
    out = dict(v)
    term = dict(v)
    k = 1
    while term:
        term = vscale(L.br(alpha, term), Fraction(1, k))
        out = vadd(out, term)
        k += 1
    return out


@dataclass
class MCElement:
    """pi = pi_1 h + ... + pi_N h^N, pi_k a degree-1 element of g."""
    pi: Vector
    N: int

    @property
    def ring(self) -> Ring:
        return Ring(self.N)

    def layer(self, k: int) -> Vector:
        return layer(self.pi, k)

    @classmethod
    def from_layers(cls, layers: Dict[int, Vector], N: int) -> "MCElement":
        acc: Vector = {}
        for k, v in layers.items():
            acc = vadd(acc, lift_vector(v, Ring(N), k))
        return cls(acc, N)


def mc_defect(L: GradedLie, d: LieDerivation, pi: MCElement) -> Vector:
    """d pi + [pi, pi]/2."""
    dl = lift_map(d.map, pi.ring)
    return vadd(apply_linear(dl, pi.pi), vscale(L.br(pi.pi, pi.pi), Fraction(1, 2)))


def check_mc(L: GradedLie, d: LieDerivation, pi: MCElement) -> bool:
    if any(coeff_at(c, 0) for c in pi.pi.values()):
        return False
    if any(L.module.degree(i) != 1 for i in pi.pi):
        return False
    return not mc_defect(L, d, pi)


def twisted(L: GradedLie, d: LieDerivation, pi: MCElement) -> LieDerivation:
    """d_pi = d + [pi, -] over Q[h]/h^(N+1)."""
    return LieDerivation(lift_map(d.map, pi.ring) + L.ad(pi.pi, pi.ring))


@dataclass
class GaugeElement:
    """g = exp(xi_N h^N) ... exp(xi_1 h); factors[k-1] = xi_k in g^0 over Q."""
    factors: List[Vector] = field(default_factory=list)

    @property
    def N(self) -> int:
        return len(self.factors)

    def inverse_steps(self) -> List[Tuple[int, Vector]]:
        """Factors of g^-1 in application order (rightmost first)."""
        return [(k, vscale(xi, -1)) for k, xi in reversed(list(enumerate(self.factors, 1)))]

    def steps(self) -> List[Tuple[int, Vector]]:
        return [(k, xi) for k, xi in enumerate(self.factors, 1)]


def gauge_matrix(L: GradedLie, g: GaugeElement, ring: Ring, inverse: bool = False) -> MultiMap:
    """The automorphism of g[h]/h^(N+1) given by the factored gauge element."""
    M = MultiMap.identity(L.module, ring.one())
    for k, xi in (g.inverse_steps() if inverse else g.steps()):
        if xi:
            E = exp_linear(L.ad(lift_vector(xi, ring, k), ring), ring)
            M = compose_arity1(E, M)
    return M


def gauge_act(L: GradedLie, g: GaugeElement, D: LieDerivation, ring: Ring) -> LieDerivation:
    """g D g^-1 over ``ring``; asserts that D^2 = 0 is preserved."""
    G = gauge_matrix(L, g, ring)
    Gi = gauge_matrix(L, g, ring, inverse=True)
    out = LieDerivation(compose_arity1(G, compose_arity1(lift_map(D.map, ring), Gi)))
    if square_is_zero(D) and not square_is_zero(out):
        raise InvariantError("gauge action broke d^2 = 0")
    return out


def gauge_act_mc(L: GradedLie, d: LieDerivation, g: GaugeElement, pi: MCElement) -> MCElement:
    """The MC element pi' with g(d_pi) = d_pi'.

    For a single factor alpha = xi h^k:
    pi' = exp(ad alpha) pi - sum_j (ad alpha)^j (d alpha) / (j+1)!.
    """
    ring = pi.ring
    dl = lift_map(d.map, ring)
    cur = pi.pi
    for k, xi in g.steps():
        if not xi:
            continue
        alpha = lift_vector(xi, ring, k)
        new = exp_vector_action(L, alpha, cur)
        term = apply_linear(dl, alpha)
        j = 1
        while term:
            new = vadd(new, vscale(term, Fraction(-1, factorial_int(j))))
            j += 1
            term = L.br(alpha, term)
        cur = new
    return MCElement(cur, pi.N)


def factorial_int(n: int) -> int:
    out = 1
    for i in range(2, n + 1):
        out *= i
    return out


# trivialization ---------------------------------------------------------------------


def _restricted_matrix(L: GradedLie, d: LieDerivation, src_deg: int, tgt_deg: int):
    src = L.degree_part(src_deg)
    tgt = L.degree_part(tgt_deg)
    pos = {j: r for r, j in enumerate(tgt)}
    cols = []
    for i in src:
        col = {}
        for j, c in d.map.apply((i,)).items():
            if j not in pos:
                raise ValueError("derivation leaves the degree slot")
            col[pos[j]] = c
        cols.append(col)
    return SparseMatrix.from_columns(len(tgt), cols), src, tgt


@dataclass
class Trivialization:
    ok: bool
    gauge: GaugeElement
    level: Optional[int] = None
    obstruction: Optional[Vector] = None
    certificate: Optional[FredholmCertificate] = None


def gauge_trivialize(L: GradedLie, d: LieDerivation, pi: MCElement, N: Optional[int] = None) -> Trivialization:
    """Solve d(xi_n) = pi_n level by level, gauging each solved layer away."""
    N = pi.N if N is None else N
    if not check_mc(L, d, pi):
        raise ValueError("not a Maurer-Cartan element")
    D, src, tgt = _restricted_matrix(L, d, 0, 1)
    pos = {j: r for r, j in enumerate(tgt)}
    cur = pi
    factors: List[Vector] = []
    for n in range(1, N + 1):
        for j in range(1, n):
            if cur.layer(j):
                raise InvariantError("layer %d survived the gauge step" % j)
        target = cur.layer(n)
        if not target:
            factors.append({})
            continue
        res = solve_with_certificate(D, {pos[j]: c for j, c in target.items()})
        if res.x is None:
            return Trivialization(False, GaugeElement(factors), n, target, res.certificate)
        xi = _clean({src[r]: c for r, c in res.x.items()})
        factors.append(xi)
        step = GaugeElement([{}] * (n - 1) + [xi])
        cur = gauge_act_mc(L, d, step, cur)
    g = GaugeElement(factors)
    if cur.pi:
        raise InvariantError("trivialization left a nonzero MC element")
    if gauge_act(L, g, twisted(L, d, pi), pi.ring) != LieDerivation(lift_map(d.map, pi.ring)):
        raise InvariantError("gauge does not conjugate d_pi to d")
    return Trivialization(True, g)


@dataclass
class LieKaledinClass:
    cocycle: Vector
    zero: bool
    trivialization: Trivialization


def lie_kaledin_class(L: GradedLie, d: LieDerivation, pi: MCElement) -> LieKaledinClass:
    """The class of d/dh pi, with the zero decision made constructively."""
    dpi = _clean({i: d_dh(c) for i, c in pi.pi.items()})
    if pi.N >= 1:
        resid = apply_linear(twisted(L, d, pi).map, dpi)
        if any(c.truncate(pi.N - 1) for c in resid.values()):
            raise InvariantError("d/dh pi is not a d_pi-cocycle")
    triv = gauge_trivialize(L, d, pi)
    return LieKaledinClass(dpi, triv.ok, triv)


def gauge_decompose(L: GradedLie, G: MultiMap, N: int) -> GaugeElement:
    """Factor an automorphism G = id mod h of g[h]/h^(N+1) as exp(xi_N h^N) ... exp(xi_1 h).

    Each peeled layer must be ad of some degree-0 element; the particular
    solution with free variables zero is used, so central parts become 0.
    """
    ring = Ring(N)
    M = L.module
    G = lift_map(G, ring)
    for a in range(M.dim):
        for b in range(M.dim):
            lhs = apply_linear(G, L.br({a: ring.one()}, {b: ring.one()}))
            rhs = L.br(apply_linear(G, {a: ring.one()}), apply_linear(G, {b: ring.one()}))
            if vadd(lhs, rhs, -1):
                raise ValueError("not bracket-preserving at (%s, %s)" % (M.name(a), M.name(b)))
    ident = MultiMap.identity(M)
    if G.map_coeffs(lambda c: coeff_at(c, 0)).entries != ident.entries:
        raise ValueError("automorphism is not the identity modulo h")
    zero_part = L.degree_part(0)
    # ad: g^0 -> End(g), one column per degree-0 basis element
    rows: Dict[Tuple[int, int], int] = {}
    cols = []
    for i in zero_part:
        col = {}
        for (j,), row in L.ad({i: 1}).entries.items():
            for k, c in row.items():
                col[rows.setdefault((j, k), len(rows))] = c
        cols.append(col)
    cur = G
    factors: List[Vector] = []
    for n in range(1, N + 1):
        X = cur.map_coeffs(lambda c: coeff_at(c, n))
        b = {}
        for (j,), row in X.entries.items():
            for k, c in row.items():
                if (j, k) not in rows:
                    raise ValueError("layer %d is not of the form ad(xi)" % n)
                b[rows[(j, k)]] = c
        A = SparseMatrix.from_columns(max(len(rows), 1), cols) if cols else SparseMatrix(max(len(rows), 1), 0)
        sol = solve_with_certificate(A, b)
        if sol.x is None:
            raise ValueError("layer %d is not of the form ad(xi)" % n)
        xi = _clean({zero_part[r]: c for r, c in sol.x.items()})
        factors.append(xi)
        if xi:
            E = exp_linear(L.ad(lift_vector(vscale(xi, -1), ring, n), ring), ring)
            cur = compose_arity1(cur, E)
    if cur.entries != MultiMap.identity(M, ring.one()).entries:
        raise InvariantError("gauge decomposition does not recompose")
    return GaugeElement(factors)


# Hochschild slice ------------------------------------------------------------------


@dataclass
class HochschildSlice:
    """Coderivations of arity <= K modulo the ideal of arities > K."""
    structure: AInftyStructure
    arity_bound: int
    lie: GradedLie
    d: LieDerivation
    basis: List[Tuple[Tuple[int, ...], int]]

    def element(self, c: Coderivation) -> Vector:
        index = {b: i for i, b in enumerate(self.basis)}
        out: Vector = {}
        for n, f in c.components.items():
            if n > self.arity_bound:
                continue
            for key, j, v in f.terms():
                out[index[(key, j)]] = v
        return out

    def cochain(self, v: Vector, degree: int, ring: Ring = QQ) -> Coderivation:
        V = self.structure.bar_module
        comps: Dict[int, dict] = {}
        for i, c in v.items():
            key, j = self.basis[i]
            comps.setdefault(len(key), {}).setdefault(key, {})[j] = c
        return Coderivation(V, degree, {n: MultiMap(n, degree, V, V, e) for n, e in comps.items()}, ring)

    def normal_cone_mc(self, N: int) -> MCElement:
        """pi = sum_n m_(n+2) h^n from the bar differential."""
        m = self.structure.bar()
        layers = {n - 2: self.element(Coderivation(m.module, 1, {n: f}))
                  for n, f in m.components.items() if n >= 3 and n - 2 <= N}
        return MCElement.from_layers(layers, N)


def hochschild_as_dglie(A: AInftyStructure, arity_bound: int) -> HochschildSlice:
    """The Hochschild DG Lie algebra truncated at ``arity_bound``, with d = [m_2, -]."""
    V = A.bar_module
    K = arity_bound
    basis: List[Tuple[Tuple[int, ...], int]] = []
    names = []
    degs = V.degrees
    for n in range(1, K + 1):
        for key in V.tuples(n):
            for j in range(V.dim):
                basis.append((key, j))
                names.append(("c%d:%s>%s" % (n, ",".join(V.name(i) for i in key), V.name(j)),
                              degs[j] - sum(degs[i] for i in key)))
    G = GradedModule(tuple(names))
    index = {b: i for i, b in enumerate(basis)}

    def single(i):
        key, j = basis[i]
        deg = G.degree(i)
        return Coderivation(V, deg, {len(key): MultiMap(len(key), deg, V, V, {key: {j: 1}}, check=False)})

    def to_vec(c: Coderivation) -> Vector:
        out: Vector = {}
        for n, f in c.components.items():
            for key, j, v in f.terms():
                out[index[(key, j)]] = v
        return out

    singles = [single(i) for i in range(len(basis))]
    entries = {}
    for a in range(len(basis)):
        for b in range(len(basis)):
            v = to_vec(bracket(singles[a], singles[b], K))
            if v:
                entries[(a, b)] = v
    L = GradedLie(G, MultiMap(2, 0, G, G, entries))
    m2 = A.truncation().bar()
    dent = {}
    for a in range(len(basis)):
        v = to_vec(bracket(m2, singles[a], K))
        if v:
            dent[(a,)] = v
    d = LieDerivation(MultiMap(1, 1, G, G, dent))
    return HochschildSlice(A, K, L, d, basis)
