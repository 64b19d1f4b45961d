"""Hochschild cochains as coderivations, the differential [m, -], weight slots.

HH indices follow the shifted convention: a bar-side cochain of degree q
represents a class in HH^(q+1).  So HH^2 classes are degree-1 coderivations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .ainfty import AInftyStructure, Coderivation, bracket
from .errors import InvariantError
from .graded import GradedModule, MultiMap
from .linalg import (
    CohomologyResult, FredholmCertificate, SparseMatrix, cohomology, collapse_vector,
    solve_with_certificate,
)
from .ring import QQ, Ring, specialize

HochschildCochain = Coderivation

BasisElement = Tuple[Tuple[int, ...], int]


def hochschild_d(c: Coderivation, A: AInftyStructure, bound: int) -> Coderivation:
    """[m, c] = m o c - (-1)^deg(c) c o m, exact in arities <= bound."""
    return bracket(A.bar(), c, bound)


def _required_bound(A: AInftyStructure, arities: Iterable[int]) -> int:
    top = max(arities, default=0)
    return max(1, top + max(A.max_arity, 1) - 1)


def _single(V: GradedModule, degree: int, elem: BasisElement, ring: Ring) -> Coderivation:
    key, j = elem
    n = len(key)
    return Coderivation(V, degree, {n: MultiMap(n, degree, V, V, {key: {j: ring.one()}}, check=False)}, ring)


def cochain_from_vector(V: GradedModule, degree: int, basis: Sequence[BasisElement],
                        vec, ring: Ring) -> Coderivation:
    comps: Dict[int, dict] = {}
    for idx, c in vec.items():
        if c:
            key, j = basis[idx]
            comps.setdefault(len(key), {}).setdefault(key, {})[j] = c
    return Coderivation(V, degree, {n: MultiMap(n, degree, V, V, e, check=False)
                                    for n, e in comps.items()}, ring)


def vector_from_cochain(c: Coderivation, index: Dict[BasisElement, int], strict=True) -> Dict[int, object]:
    out = {}
    for n, f in c.components.items():
        for key, j, v in f.terms():
            i = index.get((key, j))
            if i is None:
                if strict:
                    raise ValueError("cochain has support outside the slot: arity %d" % n)
                continue
            out[i] = v
    return out


def differential_matrix(A: AInftyStructure, degree: int, source_basis: Sequence[BasisElement],
                        target_basis: Sequence[BasisElement]) -> SparseMatrix:
    """Matrix of [m, -] from span(source_basis) to span(target_basis).

    Raises if some image leaves the target span (the slot is not closed).
    """
    V = A.bar_module
    index = {b: i for i, b in enumerate(target_basis)}
    bound = _required_bound(A, (len(k) for k, _ in source_basis))
    cols = []
    for elem in source_basis:
        img = hochschild_d(_single(V, degree, elem, A.ring), A, bound)
        cols.append(vector_from_cochain(img, index))
    return SparseMatrix.from_columns(len(target_basis), cols, A.ring)


@dataclass
class HochschildSlot:
    """The slot Hom^(q-1)(V^(x)(n-1)) -> Hom^q(V^(x)n) -> Hom^(q+1)(V^(x)(n+1)) of [m_2, -]."""
    structure: AInftyStructure
    hh_degree: int
    arity: int
    basis_in: List[BasisElement]
    basis_mid: List[BasisElement]
    basis_out: List[BasisElement]
    d_in: SparseMatrix
    d_out: SparseMatrix
    result: CohomologyResult

    @property
    def degree(self) -> int:
        return self.hh_degree - 1

    @property
    def dimension(self) -> int:
        return self.result.dimension

    @property
    def module(self) -> GradedModule:
        return self.structure.bar_module

    def to_vector(self, c: Coderivation):
        return vector_from_cochain(c, {b: i for i, b in enumerate(self.basis_mid)})

    def representatives(self) -> List[Coderivation]:
        return [cochain_from_vector(self.module, self.degree, self.basis_mid, r, self.structure.ring)
                for r in self.result.representatives]

    def lift(self, c: Coderivation):
        """(class coordinates, g) with c = sum coords_i rep_i + [m, g]."""
        coords, w = self.result.lift(self.to_vector(c))
        # the witness lives on the h-expanded in-space; fold it back
        wc = collapse_vector(w, len(self.basis_in), self.structure.ring)
        g = cochain_from_vector(self.module, self.degree - 1, self.basis_in, wc, self.structure.ring)
        return coords, g


def weight_cohomology(A: AInftyStructure, hh_degree: int, arity: int) -> HochschildSlot:
    """Cohomology of [m_2, -] at (HH degree, arity) for an associative structure."""
    if not A.is_associative:
        raise ValueError("weight decomposition requires m_i=0, i≠2")
    if arity < 1:
        raise ValueError("arity must be >= 1")
    V = A.bar_module
    q = hh_degree - 1
    b_in = V.hom_basis(arity - 1, q - 1) if arity > 1 else []
    b_mid = V.hom_basis(arity, q)
    b_out = V.hom_basis(arity + 1, q + 1)
    d_in = differential_matrix(A, q - 1, b_in, b_mid) if b_in else SparseMatrix(len(b_mid), 0, ring=A.ring)
    d_out = differential_matrix(A, q, b_mid, b_out) if b_mid else SparseMatrix(len(b_out), 0, ring=A.ring)
    res = cohomology(d_in, d_out)
    return HochschildSlot(A, hh_degree, arity, b_in, b_mid, b_out, d_in, d_out, res)


@dataclass
class WitnessResult:
    g: Optional[Coderivation]
    certificate: Optional[FredholmCertificate] = None
    rows: Optional[List[BasisElement]] = None

    @property
    def ok(self) -> bool:
        return self.g is not None


def boundary_system(A: AInftyStructure, degree: int, ansatz_arities: Iterable[int],
                    target: Coderivation, bound: Optional[int] = None):
    """Assemble [m, g] = target for g of the given degree on the ansatz arities.

    With ``bound`` the equation is imposed only in arities <= bound.
    """
    V = A.bar_module
    cols_basis: List[BasisElement] = []
    for k in sorted(set(ansatz_arities)):
        if k >= 1:
            cols_basis.extend(V.hom_basis(k, degree))
    if bound is None:
        bound = max(_required_bound(A, (len(k) for k, _ in cols_basis)), target.max_arity)
    elif target.max_arity > bound:
        raise ValueError("target has support above the arity bound")
    rows: Dict[BasisElement, int] = {}
    cols = []
    for elem in cols_basis:
        img = hochschild_d(_single(V, degree, elem, A.ring), A, bound)
        col = {}
        for n, f in img.components.items():
            for key, j, v in f.terms():
                col[rows.setdefault((key, j), len(rows))] = v
        cols.append(col)
    b = {}
    for n, f in target.components.items():
        for key, j, v in f.terms():
            b[rows.setdefault((key, j), len(rows))] = v
    row_list = [None] * len(rows)
    for e, i in rows.items():
        row_list[i] = e
    M = SparseMatrix.from_columns(len(rows), cols, A.ring)
    return M, b, cols_basis, row_list, bound


def coboundary_witness(target: Coderivation, A: AInftyStructure,
                       ansatz_arities: Iterable[int], bound: Optional[int] = None) -> WitnessResult:
    """Solve [m, g] = target for g supported on ``ansatz_arities``.

    Without ``bound`` the equation must hold in every arity; with it, only
    in arities <= bound.
    """
    degree = target.degree - 1
    M, b, cols_basis, row_list, bound = boundary_system(A, degree, ansatz_arities, target, bound)
    res = solve_with_certificate(M, b)
    if res.x is None:
        return WitnessResult(None, res.certificate, row_list)
    g = cochain_from_vector(A.bar_module, degree, cols_basis, res.x, A.ring)
    if hochschild_d(g, A, bound) != target:
        raise InvariantError("coboundary witness has nonzero residual")
    return WitnessResult(g, None, row_list)


# base change ----------------------------------------------------------------


def specialize_cochain(c: Coderivation, point) -> Coderivation:
    """Apply h -> point to every coefficient; the result lives over QQ."""
    return Coderivation(c.module, c.degree,
                        {n: f.map_coeffs(lambda v: specialize(v, point)) for n, f in c.components.items()},
                        QQ)


def specialize_structure(A: AInftyStructure, point) -> AInftyStructure:
    return A.map_coeffs(lambda v: specialize(v, point), QQ)


def compact_injectivity_check(A: AInftyStructure, d: Coderivation, n: int) -> Coderivation:
    """Truncate d to arities <= n-1 and confirm the boundary is unchanged.

    For an associative A with [m, d] supported in arities <= n, the
    truncation d_(<= n-1) is a compactly supported cochain with the same
    boundary.  Failure means A is not associative or the support claim is
    wrong.
    """
    if not A.is_associative:
        raise InvariantError("compact injectivity check needs an associative structure")
    bound = max(d.max_arity + 1, n)
    full = hochschild_d(d, A, bound)
    if full.max_arity > n:
        raise InvariantError("boundary of d is supported above arity %d" % n)
    trunc = d.truncate(n - 1)
    if hochschild_d(trunc, A, bound) != full:
        raise InvariantError("truncated cochain has a different boundary")
    return trunc
