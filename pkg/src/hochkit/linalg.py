"""Exact sparse linear algebra over Q and Q[h]/h^(N+1).

Vectors are dicts ``{index: scalar}`` with zero entries omitted.  Pivoting is
deterministic: rows are processed in order and the pivot of a row is its
first nonzero column.  Systems over Q[h]/h^(N+1) are expanded to Q in
h-layer order, so elimination runs through the layers h^0, h^1, ... in turn.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .ring import HPoly, QQ, Ring, RingMismatch, coeff_at

Vector = Dict[int, object]


class NotAComplex(ValueError):
    pass


class SparseMatrix:
    __slots__ = ("nrows", "ncols", "rows", "ring")

    def __init__(self, nrows: int, ncols: int, entries: Mapping | None = None, ring: Ring = QQ):
        self.nrows = nrows
        self.ncols = ncols
        self.ring = ring
        self.rows: Dict[int, Dict[int, object]] = {}
        for (i, j), v in (entries or {}).items():
            if not (0 <= i < nrows and 0 <= j < ncols):
                raise IndexError("entry (%d, %d) out of range" % (i, j))
            if v:
                self.rows.setdefault(i, {})[j] = ring.coerce(v)

    @classmethod
    def from_columns(cls, nrows: int, columns: Sequence[Mapping], ring: Ring = QQ):
        M = cls(nrows, len(columns), ring=ring)
        for j, col in enumerate(columns):
            for i, v in col.items():
                if v:
                    if not 0 <= i < nrows:
                        raise IndexError("row %d out of range" % i)
                    M.rows.setdefault(i, {})[j] = ring.coerce(v)
        return M

    @classmethod
    def identity(cls, n: int, ring: Ring = QQ):
        return cls(n, n, {(i, i): 1 for i in range(n)}, ring)

    def entries(self):
        for i, row in self.rows.items():
            for j, v in row.items():
                yield (i, j), v

    def get(self, i, j):
        return self.rows.get(i, {}).get(j, 0)

    def columns(self) -> List[Vector]:
        cols: List[Vector] = [dict() for _ in range(self.ncols)]
        for i, row in self.rows.items():
            for j, v in row.items():
                cols[j][i] = v
        return cols

    def transpose(self) -> "SparseMatrix":
        return SparseMatrix(self.ncols, self.nrows, {(j, i): v for (i, j), v in self.entries()}, self.ring)

    def apply(self, x: Mapping) -> Vector:
        out: Vector = {}
        for i, row in self.rows.items():
            acc = 0
            for j, v in row.items():
                xj = x.get(j)
                if xj:
                    acc = acc + v * xj
            if acc:
                out[i] = acc
        return out

    def __matmul__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch")
        if self.ring != other.ring:
            raise RingMismatch("ring mismatch")
        out = SparseMatrix(self.nrows, other.ncols, ring=self.ring)
        for i, row in self.rows.items():
            acc: Dict[int, object] = {}
            for k, v in row.items():
                for j, w in other.rows.get(k, {}).items():
                    acc[j] = acc.get(j, 0) + v * w
            acc = {j: c for j, c in acc.items() if c}
            if acc:
                out.rows[i] = acc
        return out

    def is_zero(self) -> bool:
        return not any(self.rows.values())

    def dense(self):
        return [[self.get(i, j) for j in range(self.ncols)] for i in range(self.nrows)]

    def __repr__(self):
        return "SparseMatrix(%dx%d over %r, %d nonzeros)" % (
            self.nrows, self.ncols, self.ring, sum(len(r) for r in self.rows.values()))


# vector helpers -----------------------------------------------------------


def vec_add(a: Mapping, b: Mapping, s=1) -> Vector:
    out = dict(a)
    for k, v in b.items():
        nv = out.get(k, 0) + s * v
        if nv:
            out[k] = nv
        else:
            out.pop(k, None)
    return out


def vec_scale(a: Mapping, c) -> Vector:
    return {k: c * v for k, v in a.items() if c * v}


def dot(a: Mapping, b: Mapping):
    if len(a) > len(b):
        a, b = b, a
    acc = 0
    for k, v in a.items():
        w = b.get(k)
        if w:
            acc = acc + v * w
    return acc


# echelon core over Q --------------------------------------------------------


class Echelon:
    """Incremental row echelon form over Q.

    Each stored row is normalized (pivot coefficient 1) and carries the
    combination of inserted vectors that produced it, plus an optional
    right-hand-side value.
    """

    def __init__(self):
        self.pivots: Dict[int, Tuple[Dict[int, Fraction], Dict[int, Fraction], Fraction]] = {}
        self.count = 0

    def reduce(self, v: Mapping, rhs=Fraction(0), combo: Mapping | None = None):
        v = {k: Fraction(x) for k, x in v.items() if x}
        combo = dict(combo or {})
        rhs = Fraction(rhs)
        while True:
            hits = [c for c in v if c in self.pivots]
            if not hits:
                return v, rhs, combo
            p = min(hits)
            row, rcombo, rrhs = self.pivots[p]
            f = v[p]
            for k, x in row.items():
                nv = v.get(k, 0) - f * x
                if nv:
                    v[k] = nv
                else:
                    v.pop(k, None)
            for k, x in rcombo.items():
                nv = combo.get(k, 0) - f * x
                if nv:
                    combo[k] = nv
                else:
                    combo.pop(k, None)
            rhs -= f * rrhs

    def insert(self, v: Mapping, rhs=Fraction(0)):
        """Add a vector; returns (pivot column or None, residual rhs, residual combo)."""
        idx = self.count
        self.count += 1
        red, r, combo = self.reduce(v, rhs, {idx: Fraction(1)})
        if not red:
            return None, r, combo
        p = min(red)
        f = red[p]
        red = {k: x / f for k, x in red.items()}
        combo = {k: x / f for k, x in combo.items()}
        self.pivots[p] = (red, combo, r / f)
        return p, r, combo

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def back_substitute(self) -> Vector:
        """A solution of the stored system (free variables zero)."""
        x: Dict[int, Fraction] = {}
        for p in sorted(self.pivots, reverse=True):
            row, _, r = self.pivots[p]
            acc = r
            for k, c in row.items():
                if k != p and k in x:
                    acc -= c * x[k]
            if acc:
                x[p] = acc
        return x

    def reduced_rows(self) -> Dict[int, Dict[int, Fraction]]:
        """Fully reduced (RREF) rows keyed by pivot column."""
        rref: Dict[int, Dict[int, Fraction]] = {}
        for p in sorted(self.pivots, reverse=True):
            row = dict(self.pivots[p][0])
            for q in [k for k in row if k != p and k in rref]:
                f = row[q]
                for k, c in rref[q].items():
                    nv = row.get(k, 0) - f * c
                    if nv:
                        row[k] = nv
                    else:
                        row.pop(k, None)
            rref[p] = row
        return rref


# Q[h] expansion -----------------------------------------------------------


def _layers(ring: Ring) -> int:
    return 1 if ring.truncation is None else ring.truncation + 1


def expand_matrix(M: SparseMatrix) -> SparseMatrix:
    """Q-matrix of M acting on coefficient vectors, index = layer*size + i."""
    L = _layers(M.ring)
    if L == 1:
        return M
    out = SparseMatrix(L * M.nrows, L * M.ncols)
    for (i, j), v in M.entries():
        for a in range(L):
            c = coeff_at(v, a)
            if c:
                for b in range(L - a):
                    out.rows.setdefault((a + b) * M.nrows + i, {})[b * M.ncols + j] = c
    return out


def expand_vector(v: Mapping, size: int, ring: Ring) -> Vector:
    L = _layers(ring)
    if L == 1:
        return {k: Fraction(x) for k, x in v.items() if x}
    out = {}
    for k, x in v.items():
        for a in range(L):
            c = coeff_at(x, a)
            if c:
                out[a * size + k] = c
    return out


def collapse_vector(v: Mapping, size: int, ring: Ring) -> Vector:
    L = _layers(ring)
    if L == 1:
        return dict(v)
    acc: Dict[int, list] = {}
    for idx, c in v.items():
        a, k = divmod(idx, size)
        acc.setdefault(k, [Fraction(0)] * L)[a] += c
    out = {}
    for k, cs in acc.items():
        p = HPoly(cs)
        if p:
            out[k] = p
    return out


# solve ----------------------------------------------------------------------


@dataclass
class FredholmCertificate:
    """Left null vector y (over Q, on the h-expanded system) with y.M = 0, y.b != 0."""
    y: Dict[int, Fraction]
    value: Fraction

    def verify(self, M: SparseMatrix, b: Mapping) -> bool:
        E = expand_matrix(M)
        eb = expand_vector(b, M.nrows, M.ring)
        yM = E.transpose().apply(self.y)
        return not yM and dot(self.y, eb) == self.value and self.value != 0


@dataclass
class SolveResult:
    x: Optional[Vector]
    certificate: Optional[FredholmCertificate] = None

    @property
    def ok(self) -> bool:
        return self.x is not None


def solve_with_certificate(M: SparseMatrix, b: Mapping) -> SolveResult:
    b = {k: M.ring.coerce(v) for k, v in b.items() if v}
    for k in b:
        if not 0 <= k < M.nrows:
            raise IndexError("rhs index %d out of range" % k)
    E = expand_matrix(M)
    eb = expand_vector(b, M.nrows, M.ring)
    ech = Echelon()
    for i in range(E.nrows):
        row = E.rows.get(i, {})
        rhs = eb.get(i, Fraction(0))
        if not row and not rhs:
            ech.count += 1
            continue
        p, r, combo = ech.insert(row, rhs)
        if p is None and r:
            return SolveResult(None, FredholmCertificate({k: v for k, v in combo.items()}, r))
    x = ech.back_substitute()
    return SolveResult(collapse_vector(x, M.ncols, M.ring))


def solve(M: SparseMatrix, b: Mapping) -> Optional[Vector]:
    """x with Mx = b exactly, or None when inconsistent."""
    return solve_with_certificate(M, b).x


def rank(M: SparseMatrix) -> int:
    E = expand_matrix(M)
    ech = Echelon()
    for i in sorted(E.rows):
        ech.insert(E.rows[i])
    return ech.rank


def kernel(M: SparseMatrix) -> List[Vector]:
    """Basis of the Q-kernel of M (of the expanded matrix over Q[h])."""
    E = expand_matrix(M)
    ech = Echelon()
    for i in sorted(E.rows):
        ech.insert(E.rows[i])
    rref = ech.reduced_rows()
    basis = []
    for f in range(E.ncols):
        if f in rref:
            continue
        v = {f: Fraction(1)}
        for p, row in rref.items():
            c = row.get(f)
            if c:
                v[p] = -c
        basis.append(v)
    return basis


def inverse(M: SparseMatrix) -> SparseMatrix:
    """Inverse of a square matrix over Q or Q[h]/h^(N+1); raises if singular."""
    if M.nrows != M.ncols:
        raise ValueError("not square")
    cols = []
    for j in range(M.ncols):
        x = solve(M, {j: M.ring.one()})
        if x is None:
            raise ZeroDivisionError("singular matrix")
        cols.append(x)
    inv = SparseMatrix.from_columns(M.nrows, cols, M.ring)
    if not _is_identity(M @ inv):
        raise ZeroDivisionError("singular matrix")
    return inv


def _is_identity(P: SparseMatrix) -> bool:
    for i in range(P.nrows):
        row = P.rows.get(i, {})
        if any(j != i and v for j, v in row.items()) or row.get(i, 0) != 1:
            return False
    return True


# cohomology -------------------------------------------------------------------


@dataclass
class CohomologyResult:
    """Cohomology of C_in --d_in--> C_mid --d_out--> C_out.

    Over Q[h]/h^(N+1) the computation runs on the h-expanded Q complex, so
    ``dimension`` is a Q-dimension and ``filtration_ranks[k]`` is the
    Q-dimension of the cohomology of the complex reduced mod h^(k+1).
    """
    dimension: int
    representatives: List[Vector]
    image_columns: List[int]
    ring: Ring = QQ
    filtration_ranks: List[int] = field(default_factory=list)
    mid_size: int = 0
    _lifter: Echelon | None = field(default=None, repr=False)
    _roles: Dict[int, Tuple[str, int]] = field(default_factory=dict, repr=False)

    def lift(self, z: Mapping):
        """Write a cocycle as sum(c_j rep_j) + d_in(w); returns (c, w).

        ``w`` is indexed like the (h-expanded) columns of d_in.
        """
        ez = expand_vector(z, self.mid_size, self.ring)
        red, _, combo = self._lifter.reduce(ez, 0, {})
        if red:
            raise ValueError("vector is not a cocycle of this slot")
        coords = [Fraction(0)] * len(self.representatives)
        w: Dict[int, Fraction] = {}
        for k, c in combo.items():
            role, j = self._roles[k]
            if role == "img":
                w[j] = -c
            else:
                coords[j] = -c
        return coords, w

    def is_coboundary(self, z: Mapping) -> bool:
        coords, _ = self.lift(z)
        return not any(coords)


def cohomology(d_in: SparseMatrix, d_out: SparseMatrix) -> CohomologyResult:
    if d_in.nrows != d_out.ncols:
        raise ValueError("shape mismatch between d_in and d_out")
    if d_in.ring != d_out.ring:
        raise RingMismatch("ring mismatch")
    if not (d_out @ d_in).is_zero():
        raise NotAComplex("not a complex: d_out o d_in != 0")
    ring = d_in.ring
    Ein = expand_matrix(d_in)
    ker = kernel(d_out)
    lifter = Echelon()
    roles: Dict[int, Tuple[str, int]] = {}
    image_cols = []
    for j, col in enumerate(Ein.columns()):
        idx = lifter.count
        p, _, _ = lifter.insert(col)
        if p is not None:
            roles[idx] = ("img", j)
            image_cols.append(j)
    reps = []
    for z in ker:
        idx = lifter.count
        p, _, _ = lifter.insert(z)
        if p is not None:
            roles[idx] = ("rep", len(reps))
            reps.append(z)
    dim = len(reps)
    if ring.truncation is not None:
        filt = [_dimension_mod(d_in, d_out, k) for k in range(ring.truncation + 1)]
    else:
        filt = [dim]
    mid = d_in.nrows
    return CohomologyResult(dim, [collapse_vector(r, mid, ring) for r in reps], image_cols,
                            ring, filt, mid, lifter, roles)


def _dimension_mod(d_in: SparseMatrix, d_out: SparseMatrix, k: int) -> int:
    R = Ring(k)

    def red(M):
        out = SparseMatrix(M.nrows, M.ncols, ring=R)
        for (i, j), v in M.entries():
            t = v.truncate(k)
            if t:
                out.rows.setdefault(i, {})[j] = t
        return out

    Ea, Eb = expand_matrix(red(d_in)), expand_matrix(red(d_out))
    return Eb.ncols - rank(Eb) - rank(Ea)
