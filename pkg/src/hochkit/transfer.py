"""Homotopy transfer from a finite DG algebra to a minimal model on its cohomology."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Tuple

from .ainfty import AInftyMorphism, AInftyStructure, check_stasheff, compose_arity1
from .errors import InvariantError
from .graded import GradedModule, MultiMap, compose_multimaps, morphism_from_bar, shift_from_bar, shift_to_bar
from .linalg import Echelon, SparseMatrix, inverse, kernel
from .ring import QQ


@dataclass
class DGAlgebra:
    module: GradedModule
    differential: MultiMap
    product: MultiMap

    def __post_init__(self):
        if self.differential.arity != 1 or (self.differential.degree != 1 and not self.differential.is_zero()):
            raise ValueError("differential must have arity 1 and degree 1")
        if self.product.arity != 2 or (self.product.degree != 0 and not self.product.is_zero()):
            raise ValueError("product must have arity 2 and degree 0")

    def as_ainfty(self) -> AInftyStructure:
        comps = {}
        if not self.differential.is_zero():
            comps[1] = self.differential
        if not self.product.is_zero():
            comps[2] = self.product
        return AInftyStructure(self.module, comps, QQ)

    def validate(self) -> None:
        """d^2 = 0, Leibniz, associativity; raises ValueError otherwise."""
        res = check_stasheff(self.as_ainfty(), 3)
        if not res.ok:
            what = {1: "d^2 != 0", 2: "Leibniz rule fails", 3: "product not associative"}
            raise ValueError("not a DG algebra: " + what[res.violations[0].n])


@dataclass
class Contraction:
    """H(E) as a deformation retract: p i = id, i p - id = d h + h d."""
    cohomology_module: GradedModule
    inclusion: MultiMap
    projection: MultiMap
    homotopy: MultiMap

    def verify(self, E: DGAlgebra) -> List[str]:
        """Names of the failing identities; empty when all hold."""
        i, p, h, d = self.inclusion, self.projection, self.homotopy, E.differential
        H, M = self.cohomology_module, E.module
        idH = MultiMap.identity(H)
        idE = MultiMap.identity(M)
        bad = []
        if compose_arity1(p, i) != idH:
            bad.append("p i = id")
        lhs = compose_arity1(i, p) - idE
        rhs = compose_arity1(d, h) + compose_arity1(h, d)
        if lhs.entries != rhs.entries:
            bad.append("i p - id = d h + h d")
        if not compose_arity1(h, i).is_zero():
            bad.append("h i = 0")
        if not compose_arity1(p, h).is_zero():
            bad.append("p h = 0")
        if not compose_arity1(h, h).is_zero():
            bad.append("h h = 0")
        if not compose_arity1(d, i).is_zero():
            bad.append("d i = 0")
        return bad


def _vector_columns(f: MultiMap, src_idx, tgt_idx):
    """Matrix of an arity-1 map restricted to the given index lists."""
    pos = {j: r for r, j in enumerate(tgt_idx)}
    cols = []
    for i in src_idx:
        cols.append({pos[j]: c for j, c in f.apply((i,)).items() if j in pos})
    return SparseMatrix.from_columns(len(tgt_idx), cols)


def build_contraction(E: DGAlgebra) -> Contraction:
    """Split each E^k = B^k + H^k + C^k with d: C^k -> B^(k+1) an isomorphism.

    C^k is spanned by basis vectors whose images are independent, B^k by
    those images, and H^k by kernel vectors completing B^k.  On B^k the
    homotopy is -(d|C)^-1, and zero on H^k and C^k.
    """
    E.validate()
    M = E.module
    d = E.differential
    by_deg: Dict[int, List[int]] = {}
    for i, deg in enumerate(M.degrees):
        by_deg.setdefault(deg, []).append(i)
    degrees = sorted(by_deg)

    chosen_c: Dict[int, List[int]] = {}
    images: Dict[int, List[Dict[int, Fraction]]] = {}
    for k in degrees:
        src = by_deg[k]
        ech = Echelon()
        cs, ims = [], []
        for i in src:
            img = {j: Fraction(c) for j, c in d.apply((i,)).items()}
            if ech.insert(img)[0] is not None:
                cs.append(i)
                ims.append(img)
        chosen_c[k] = cs
        images[k + 1] = ims

    h_names: List[Tuple[str, int]] = []
    incl: Dict[tuple, Dict[int, Fraction]] = {}
    proj: Dict[tuple, Dict[int, Fraction]] = {}
    htpy: Dict[tuple, Dict[int, Fraction]] = {}
    for k in degrees:
        idx = by_deg[k]
        local = {j: r for r, j in enumerate(idx)}
        bvecs = images.get(k, [])
        dk = _vector_columns(d, idx, by_deg.get(k + 1, []))
        ker = kernel(dk)
        ech = Echelon()
        for b in bvecs:
            ech.insert({local[j]: c for j, c in b.items()})
        hvecs = []
        for z in ker:
            if ech.insert(z)[0] is not None:
                hvecs.append({idx[r]: c for r, c in z.items()})
        cvecs = [{i: Fraction(1)} for i in chosen_c[k]]
        new_basis = bvecs + hvecs + cvecs
        if len(new_basis) != len(idx):
            raise InvariantError("splitting of degree %d has the wrong size" % k)
        P = SparseMatrix.from_columns(len(idx), [{local[j]: c for j, c in v.items()} for v in new_basis])
        Pinv = inverse(P)
        nb, nh = len(bvecs), len(hvecs)
        first_h = len(h_names)
        for t, hv in enumerate(hvecs):
            if len(hv) == 1 and next(iter(hv.values())) == 1:
                name = M.name(next(iter(hv)))
            else:
                name = "[%s]" % M.name(max(hv))
            h_names.append((name, k))
            incl[(first_h + t,)] = dict(hv)
        prev_c = chosen_c.get(k - 1, [])
        for col, j in enumerate(idx):
            coords = {r: c for (r, cc), c in Pinv.entries() if cc == col}
            p_row, h_row = {}, {}
            for r, c in coords.items():
                if nb <= r < nb + nh:
                    p_row[first_h + r - nb] = c
                elif r < nb:
                    # B-coordinate r is d(prev_c[r]); the homotopy sends it to -prev_c[r]
                    e = prev_c[r]
                    h_row[e] = h_row.get(e, 0) - c
            if p_row:
                proj[(j,)] = p_row
            if h_row:
                htpy[(j,)] = h_row
    # list H in the order of the input basis, so d = 0 gives H = E verbatim
    order = sorted(range(len(h_names)), key=lambda t: (min(incl[(t,)]), t))
    new_pos = {t: r for r, t in enumerate(order)}
    h_names = [h_names[t] for t in order]
    incl = {(new_pos[t],): v for (t,), v in incl.items()}
    proj = {k: {new_pos[t]: c for t, c in row.items()} for k, row in proj.items()}
    Hmod = GradedModule(tuple(h_names))
    C = Contraction(Hmod, MultiMap(1, 0, Hmod, M, incl), MultiMap(1, 0, M, Hmod, proj),
                    MultiMap(1, -1, M, M, htpy))
    bad = C.verify(E)
    if bad:
        raise InvariantError("contraction identities fail: " + ", ".join(bad))
    return C


def minimal_model(E: DGAlgebra, C: Contraction, bound: int) -> Tuple[AInftyStructure, AInftyMorphism]:
    """Transferred minimal structure on H(E) and the morphism f: H(E) -> E.

    Bar side: lambda_n = sum_(i+j=n) b_2(F_i (x) F_j) with F_1 = I, then
    b'_n = P lambda_n and F_n = H lambda_n, where H = -s h s^-1 so that
    b_1 H + H b_1 = I P - id.
    """
    M, Hm = E.module, C.cohomology_module
    V, W = M.shift(), Hm.shift()
    b2 = shift_to_bar(E.product, V)
    I = MultiMap(1, 0, W, V, C.inclusion.entries, check=False)
    P = MultiMap(1, 0, V, W, C.projection.entries, check=False)
    Hb = MultiMap(1, -1, V, V, C.homotopy.entries, check=False).scale(-1)
    F: Dict[int, MultiMap] = {1: I}
    bprime: Dict[int, MultiMap] = {}
    for n in range(2, bound + 1):
        lam = MultiMap.zero(n, 1, W, V)
        for i in range(1, n):
            j = n - i
            if i in F and j in F and not b2.is_zero():
                lam = lam + compose_multimaps(b2, [F[i], F[j]])
        bn = compose_arity1(P, lam)
        if not bn.is_zero():
            bprime[n] = bn
        fn = compose_arity1(Hb, lam)
        if not fn.is_zero():
            F[n] = fn
    Hstruct = AInftyStructure(Hm, {n: shift_from_bar(b, Hm) for n, b in bprime.items()}, QQ)
    f = AInftyMorphism(Hstruct, E.as_ainfty(),
                       {n: morphism_from_bar(g, Hm, M) for n, g in F.items()})
    return Hstruct, f
