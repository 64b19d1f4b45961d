"""Normal-cone deformation, Kaledin classes and the n-formality engine.

Everything runs on the bar side.  Over Q[h]/h^(N+1) a structure is a
coderivation whose coefficients are HPoly values; gauges are automorphisms
exp(g h^k) with g defined over Q.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional

from .ainfty import (
    AInftyMorphism, AInftyStructure, CoalgebraMorphism, Coderivation, bracket, check_morphism,
    check_stasheff, conjugate, exp_coderivation, inverse,
)
from .errors import InvariantError
from .graded import MultiMap, hom_arity_bound
from .hochschild import coboundary_witness, specialize_structure
from .linalg import FredholmCertificate
from .ring import QQ, HPoly, Ring, coeff_at, d_dh


# coefficient helpers ------------------------------------------------------------


def lift_coeffs(c: Coderivation, ring: Ring, power: int = 0) -> Coderivation:
    """c (over Q) times h^power, as a coderivation over ``ring``."""
    N = ring.truncation
    return Coderivation(c.module, c.degree,
                        {n: f.map_coeffs(lambda v: HPoly.monomial(v, power, N)) for n, f in c.components.items()},
                        ring)


def lift_morphism(F: CoalgebraMorphism, ring: Ring) -> CoalgebraMorphism:
    N = ring.truncation
    return CoalgebraMorphism(F.source_module, F.target_module,
                             {n: f.map_coeffs(lambda v: HPoly.const(v, N)) for n, f in F.components.items()},
                             ring)


def h_coefficient(c: Coderivation, k: int) -> Coderivation:
    """The h^k coefficient of c, over Q."""
    return Coderivation(c.module, c.degree,
                        {n: f.map_coeffs(lambda v: coeff_at(v, k)) for n, f in c.components.items()}, QQ)


def morphism_h_coefficient(F: CoalgebraMorphism, k: int) -> Dict[int, MultiMap]:
    return {n: g.map_coeffs(lambda v: coeff_at(v, k)) for n, g in F.components.items()
            if not g.map_coeffs(lambda v: coeff_at(v, k)).is_zero()}


def reduce_mod(c: Coderivation, n: int) -> Coderivation:
    """Reduce coefficients modulo h^n (result over Q[h]/h^n)."""
    if n < 1:
        raise ValueError("need n >= 1")
    return Coderivation(c.module, c.degree,
                        {k: f.map_coeffs(lambda v: v.truncate(n - 1)) for k, f in c.components.items()},
                        Ring(n - 1))


def _bound_for(A: AInftyStructure) -> int:
    return max(2 * A.max_arity - 1, 1)


# normal cone ----------------------------------------------------------------------


@dataclass
class NormalCone:
    base: AInftyStructure
    structure: AInftyStructure
    N: int

    def at_zero(self) -> AInftyStructure:
        return specialize_structure(self.structure, 0)

    def at_one(self) -> AInftyStructure:
        return specialize_structure(self.structure, 1)


def normal_cone(A: AInftyStructure, N: int) -> NormalCone:
    """(m_2, m_3 h, m_4 h^2, ...) over Q[h]/h^(N+1)."""
    if A.ring != QQ:
        raise ValueError("normal cone needs a structure over QQ")
    if not A.is_minimal:
        raise ValueError("normal cone needs a minimal structure (m_1 = 0)")
    ring = Ring(N)
    comps = {n: m.map_coeffs(lambda v, p=n - 2: HPoly.monomial(v, p, N)) for n, m in A.components.items()}
    S = AInftyStructure(A.module, comps, ring)
    if not check_stasheff(S, _bound_for(S)).ok:
        raise InvariantError("normal cone fails the Stasheff identities")
    return NormalCone(A, S, N)


def dh_structure(B: AInftyStructure) -> Coderivation:
    """d/dh of the bar differential; a cocycle modulo h^N."""
    m = B.bar()
    dm = m.map_coeffs(d_dh)
    N = B.ring.truncation
    if N is None:
        return Coderivation(m.module, 1, {}, QQ)
    if N >= 1:
        bound = max(m.max_arity + dm.max_arity - 1, 1)
        if not reduce_mod(bracket(m, dm, bound), N).is_zero():
            raise InvariantError("[m, d/dh m] does not vanish: sign bug")
    return dm


# exp decomposition ---------------------------------------------------------------


def exp_decompose(f: CoalgebraMorphism, N: Optional[int] = None, bound: Optional[int] = None) -> List[Coderivation]:
    """Coderivations g^(1..N) over Q with f = exp(g^(N) h^N) ... exp(g^(1) h) up to ``bound``."""
    ring = f.ring
    if N is None:
        N = ring.truncation
    if ring.truncation is None or N > ring.truncation:
        raise ValueError("exp_decompose needs a morphism over Q[h]/h^(N+1)")
    if f.source_module != f.target_module:
        raise ValueError("exp_decompose needs an endomorphism")
    bound = f.max_arity if bound is None else bound
    V = f.source_module
    ident = CoalgebraMorphism.identity(V, ring)
    if morphism_h_coefficient(f, 0) != morphism_h_coefficient(ident, 0):
        raise ValueError("morphism is not the identity modulo h")
    cur = f
    out: List[Coderivation] = []
    for k in range(1, N + 1):
        # cur = id + g h^k + O(h^(k+1)); the identity sits at h^0 only
        g = Coderivation(V, 0, morphism_h_coefficient(cur, k), QQ)
        out.append(g)
        if not g.is_zero():
            cur = cur.compose(exp_coderivation(lift_coeffs(g, ring, k).scale(-1), bound), bound)
    if cur.truncate(bound) != ident:
        raise InvariantError("exp decomposition does not recompose")
    return out


def exp_recompose(gs: List[Coderivation], ring: Ring, bound: int, first_power: int = 1) -> CoalgebraMorphism:
    """exp(g_last h^(...)) ... exp(g_first h^first_power)."""
    if not gs:
        raise ValueError("empty gauge sequence")
    V = gs[0].module
    out = CoalgebraMorphism.identity(V, ring)
    for k, g in enumerate(gs):
        if not g.is_zero():
            e = exp_coderivation(lift_coeffs(g, ring, first_power + k), bound)
            out = e.compose(out, bound)
    return out


# Kaledin class ----------------------------------------------------------------------


@dataclass
class KaledinClass:
    level: int
    cocycle: Coderivation
    zero: bool
    gauges: List[Coderivation] = field(default_factory=list)
    certificate: Optional[FredholmCertificate] = None
    failed_at: Optional[int] = None
    arity_bound: int = 0

    def gauge(self, ring: Ring) -> CoalgebraMorphism:
        return exp_recompose(self.gauges, ring, self.arity_bound)


def default_arity_bound(A: AInftyStructure) -> int:
    b = hom_arity_bound(A.bar_module, 1)
    if b is not None:
        return max(b, A.max_arity, 1)
    return max(2 * A.max_arity, 2)


def kaledin_class(B: AInftyStructure, arity_bound: Optional[int] = None) -> KaledinClass:
    """Decide whether B over Q[h]/h^(n+1) is gauge-trivial, i.e. K_B vanishes.

    Step k solves [m^(0), g] = m^(k) for the current structure (over Q, all
    arities <= the bound) and gauges by exp(g h^k), which kills the h^k term.
    A failing solve is a nonzero class; by gauge invariance of the class this
    verdict does not depend on earlier choices.
    """
    n = B.ring.truncation
    if n is None:
        raise ValueError("kaledin_class needs a structure over Q[h]/h^(n+1)")
    if not B.is_minimal:
        raise ValueError("kaledin_class needs a minimal structure")
    K = default_arity_bound(B) if arity_bound is None else arity_bound
    m = B.bar().truncate(K)
    cocycle = reduce_mod(dh_structure(B), n) if n >= 1 else Coderivation(m.module, 1, {}, Ring(0))
    m0 = h_coefficient(m, 0)
    A0 = AInftyStructure.from_bar(m0, B.module)
    cur = m
    gauges: List[Coderivation] = []
    for k in range(1, n + 1):
        target = h_coefficient(cur, k)
        if target.is_zero():
            gauges.append(Coderivation(m.module, 0, {}, QQ))
            continue
        res = coboundary_witness(target, A0, range(1, K), bound=K)
        if not res.ok:
            return KaledinClass(n, cocycle, False, gauges, res.certificate, k, K)
        g = res.g
        gauges.append(g)
        E = exp_coderivation(lift_coeffs(g, B.ring, k), K)
        cur = conjugate(E, cur, K)
        for j in range(1, k + 1):
            if not h_coefficient(cur, j).is_zero():
                raise InvariantError("gauge step %d left an h^%d term" % (k, j))
    if cur != lift_coeffs(m0, B.ring):
        raise InvariantError("gauged structure differs from its reduction mod h")
    return KaledinClass(n, cocycle, True, gauges, None, None, K)


# the formality engine ------------------------------------------------------------------


@dataclass
class FormalityCertificate:
    level: int
    gauge_sequence: List[MultiMap]
    composite: CoalgebraMorphism
    fully_formal: bool
    structure: AInftyStructure
    purity: List[int] = field(default_factory=list)

    def verify(self) -> bool:
        """gamma(tilde m) = m_2 modulo h^(N+1), recomputed from scratch."""
        cone = normal_cone(self.structure, self.level)
        bound = self.level + 2
        target = cone.structure.truncation().bar()
        return conjugate(self.composite, cone.structure.bar(), bound).truncate(bound) == target.truncate(bound)


@dataclass
class Obstruction:
    level: int
    component: MultiMap
    certificate: FredholmCertificate
    gauge_sequence: List[MultiMap] = field(default_factory=list)
    structure: Optional[AInftyStructure] = None


def formality_test(A: AInftyStructure, N: int):
    """FormalityCertificate if A is N-formal, else the Obstruction at the first failing level."""
    cone = normal_cone(A, N)
    ring = cone.structure.ring
    V = A.bar_module
    bound = N + 2
    A2 = A.truncation()
    cur = cone.structure.bar().truncate(bound)
    gauges: List[MultiMap] = []
    purity: List[int] = []
    composite = CoalgebraMorphism.identity(V, ring)
    for n in range(1, N + 1):
        for j in range(1, n):
            if not h_coefficient(cur, j).is_zero():
                raise InvariantError("h^%d term survived normalization" % j)
        dev = h_coefficient(cur, n)
        support = sorted(dev.components)
        if support and support != [n + 2]:
            raise InvariantError("weight purity violated at level %d: arities %s" % (n, support))
        purity.append(n + 2)
        if dev.is_zero():
            gauges.append(MultiMap.zero(n + 1, 0, V))
            continue
        res = coboundary_witness(dev, A2, [n + 1])
        if not res.ok:
            return Obstruction(n, dev.component(n + 2), res.certificate, gauges, A)
        g = res.g.component(n + 1)
        gauges.append(g)
        E = exp_coderivation(lift_coeffs(res.g, ring, n), bound)
        cur = conjugate(E, cur, bound)
        composite = E.compose(composite, bound)
    if cur != A2.bar().map_coeffs(lambda v: HPoly.const(v, N)).truncate(bound):
        raise InvariantError("final structure is not m_2")
    b1 = hom_arity_bound(V, 1)
    fully = A.is_associative or (b1 is not None and b1 <= N + 2)
    return FormalityCertificate(N, gauges, composite, fully, A, purity)


def extract_quasi_iso(cert: FormalityCertificate) -> AInftyMorphism:
    """The h = 1 specialization of gamma as an A-infinity morphism A -> A(2)."""
    if not cert.fully_formal:
        raise ValueError("certificate does not cover all arities (not fully formal)")
    A = cert.structure
    V = A.bar_module
    b0 = hom_arity_bound(V, 0)
    b1 = hom_arity_bound(V, 1)
    bound = max(b0 if b0 is not None else 0, b1 if b1 is not None else 0, cert.level + 2, 2)
    F = CoalgebraMorphism.identity(V)
    for g in cert.gauge_sequence:
        if not g.is_zero():
            E = exp_coderivation(Coderivation(V, 0, {g.arity: g}), bound)
            F = E.compose(F, bound)
    f = AInftyMorphism.from_bar(F, A, A.truncation())
    if not check_morphism(f, bound).ok:
        raise InvariantError("extracted morphism fails the morphism identities")
    return f
