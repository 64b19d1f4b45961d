"""Finite free graded modules and sparse homogeneous multilinear maps.

Koszul rule: (f (x) g)(x (x) y) = (-1)^(|g||x|) f(x) (x) g(y).  Degrees used
for signs are always those of the module the map lives on; bar-side maps
live on A[1] whose degrees are deg_A - 1.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Iterator, Mapping, Sequence, Tuple

from .ring import sign

Key = Tuple[int, ...]
Entries = Dict[Key, Dict[int, object]]


class DegreeError(ValueError):
    pass


@dataclass(frozen=True)
class GradedModule:
    basis: Tuple[Tuple[str, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "basis", tuple((str(n), int(d)) for n, d in self.basis))
        names = [n for n, _ in self.basis]
        if len(set(names)) != len(names):
            raise ValueError("basis names must be unique")
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(names)})

    @classmethod
    def of(cls, *pairs) -> "GradedModule":
        return cls(tuple(pairs))

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(n for n, _ in self.basis)

    @property
    def degrees(self) -> Tuple[int, ...]:
        return tuple(d for _, d in self.basis)

    def degree(self, i: int) -> int:
        return self.basis[i][1]

    def name(self, i: int) -> str:
        return self.basis[i][0]

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError("unknown basis element %r" % name) from None

    def shift(self, k: int = 1) -> "GradedModule":
        """A[k]: same names, degrees lowered by k."""
        return GradedModule(tuple((n, d - k) for n, d in self.basis))

    def tuples(self, n: int) -> Iterator[Key]:
        return itertools.product(range(self.dim), repeat=n)

    def hom_basis(self, arity: int, degree: int, target: "GradedModule" | None = None):
        """Basis (key, output) of Hom^degree(self^(x)arity, target)."""
        target = self if target is None else target
        by_deg: Dict[int, list] = {}
        for j, d in enumerate(target.degrees):
            by_deg.setdefault(d, []).append(j)
        degs = self.degrees
        out = []
        for key in self.tuples(arity):
            s = sum(degs[i] for i in key) + degree
            for j in by_deg.get(s, ()):
                out.append((key, j))
        return out


def hom_arity_bound(module: GradedModule, degree: int) -> int | None:
    """An arity beyond which Hom^degree(module^(x)k, module) vanishes, or None.

    Bounded when all degrees are > 0 or all are < 0; mixed or zero degrees
    are treated as unbounded.  The empty module gives 0.
    """
    degs = module.degrees
    if not degs:
        return 0
    lo, hi = min(degs), max(degs)
    if lo > 0:
        # k * lo + degree <= hi
        return max(0, (hi - degree) // lo)
    if hi < 0:
        # k * hi + degree >= lo, i.e. k <= (degree - lo) / (-hi)
        return max(0, (degree - lo) // (-hi))
    return None


def _clean(entries: Entries) -> Entries:
    out = {}
    for k, row in entries.items():
        r = {j: c for j, c in row.items() if c}
        if r:
            out[k] = r
    return out


class MultiMap:
    """Homogeneous map source^(x)arity -> target of a fixed internal degree.

    ``entries[key][j]`` is the coefficient of target basis element j in the
    image of the basis tuple ``key``.  Treated as immutable once built.
    """

    __slots__ = ("arity", "degree", "source", "target", "entries", "_by_out")

    def __init__(self, arity: int, degree: int, source: GradedModule,
                 target: GradedModule | None = None, entries: Mapping | None = None,
                 check: bool = True):
        if arity < 1:
            raise ValueError("arity must be >= 1")
        self.arity = arity
        self.degree = degree
        self.source = source
        self.target = source if target is None else target
        self.entries = _clean(dict(entries or {}))
        self._by_out = None
        if check:
            self._check()

    def _check(self):
        sd, td = self.source.degrees, self.target.degrees
        for key, row in self.entries.items():
            if len(key) != self.arity:
                raise ValueError("entry %r has wrong arity (expected %d)" % (key, self.arity))
            s = sum(sd[i] for i in key) + self.degree
            for j in row:
                if td[j] != s:
                    raise DegreeError(
                        "inhomogeneous entry %s -> %s for a map of degree %d"
                        % ([self.source.name(i) for i in key], self.target.name(j), self.degree))

    # construction helpers
    @classmethod
    def zero(cls, arity, degree, source, target=None):
        return cls(arity, degree, source, target, {}, check=False)

    @classmethod
    def identity(cls, module: GradedModule, one=1):
        return cls(1, 0, module, module, {(i,): {i: one} for i in range(module.dim)}, check=False)

    @classmethod
    def from_named(cls, arity, degree, source, target, items, coerce=lambda c: c):
        """Build from (input names, output name, coeff) triples, summing repeats."""
        target = source if target is None else target
        acc: Entries = {}
        for inputs, output, c in items:
            key = tuple(source.index(n) for n in inputs)
            row = acc.setdefault(key, {})
            j = target.index(output)
            row[j] = row.get(j, 0) + coerce(c)
        return cls(arity, degree, source, target, acc)

    def like(self, entries, check=False) -> "MultiMap":
        return MultiMap(self.arity, self.degree, self.source, self.target, entries, check=check)

    # queries
    def terms(self) -> Iterator[Tuple[Key, int, object]]:
        for key, row in self.entries.items():
            for j, c in row.items():
                yield key, j, c

    def by_output(self) -> Dict[int, list]:
        if self._by_out is None:
            d: Dict[int, list] = {}
            for key, j, c in self.terms():
                d.setdefault(j, []).append((key, c))
            self._by_out = d
        return self._by_out

    def apply(self, key: Key) -> Dict[int, object]:
        return self.entries.get(tuple(key), {})

    def is_zero(self) -> bool:
        return not self.entries

    def __len__(self):
        return sum(len(r) for r in self.entries.values())

    def __eq__(self, other):
        if not isinstance(other, MultiMap):
            return NotImplemented
        if self.is_zero() and other.is_zero():
            return self.arity == other.arity
        return (self.arity == other.arity and self.degree == other.degree
                and self.entries == other.entries)

    def __repr__(self):
        return "MultiMap(arity=%d, degree=%d, %d terms)" % (self.arity, self.degree, len(self))

    # linear structure
    def _combine(self, other, s):
        if other.arity != self.arity:
            raise ValueError("arity mismatch")
        if other.degree != self.degree and not (self.is_zero() or other.is_zero()):
            raise DegreeError("degree mismatch %d vs %d" % (self.degree, other.degree))
        acc = {k: dict(r) for k, r in self.entries.items()}
        for key, j, c in other.terms():
            row = acc.setdefault(key, {})
            row[j] = row.get(j, 0) + s * c
        deg = self.degree if not self.is_zero() else other.degree
        return MultiMap(self.arity, deg, self.source, self.target, acc, check=False)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c) -> "MultiMap":
        return self.like({k: {j: c * v for j, v in r.items()} for k, r in self.entries.items()})

    def map_coeffs(self, fn: Callable) -> "MultiMap":
        return self.like({k: {j: fn(v) for j, v in r.items()} for k, r in self.entries.items()})

    def named_terms(self):
        for key, j, c in sorted(self.terms(), key=lambda t: (t[0], t[1])):
            yield [self.source.name(i) for i in key], self.target.name(j), c


def accumulate(acc: Entries, key: Key, j: int, c) -> None:
    row = acc.get(key)
    if row is None:
        acc[key] = {j: c}
    else:
        row[j] = row[j] + c if j in row else c


# shift dictionary between A and A[1] ----------------------------------------


def bar_sign_exponent(degrees_a: Sequence[int]) -> int:
    """Sign exponent for d_i(sa_1..sa_i) = (-1)^n s m_i(a_1..a_i).

    n = i + (i-1)deg a_1 + (i-2)deg a_2 + ... + deg a_(i-1), degrees in A.
    This is the exponent under which the (-1)^(r+st) Stasheff identity is
    equivalent to d o d = 0 with the Koszul rule above.
    """
    i = len(degrees_a)
    n = i
    for j, d in enumerate(degrees_a[:-1]):
        n += (i - 1 - j) * d
    return n


def shift_to_bar(m: MultiMap, bar_module: GradedModule | None = None) -> MultiMap:
    """m_i on A (degree 2-i) -> d_i on A[1] (degree 1)."""
    if m.degree != 2 - m.arity and not m.is_zero():
        raise DegreeError("not an m-component: arity %d with degree %d" % (m.arity, m.degree))
    V = m.source.shift() if bar_module is None else bar_module
    degs = m.source.degrees
    entries = {}
    for key, row in m.entries.items():
        s = sign(bar_sign_exponent([degs[i] for i in key]))
        entries[key] = {j: s * c for j, c in row.items()}
    return MultiMap(m.arity, 1, V, V, entries, check=False)


def shift_from_bar(d: MultiMap, module: GradedModule | None = None) -> MultiMap:
    """Inverse of :func:`shift_to_bar`: d_i of degree 1 on A[1] -> m_i on A."""
    if d.degree != 1 and not d.is_zero():
        raise DegreeError("bar component must have degree 1")
    A = d.source.shift(-1) if module is None else module
    degs = A.degrees
    entries = {}
    for key, row in d.entries.items():
        s = sign(bar_sign_exponent([degs[i] for i in key]))
        entries[key] = {j: s * c for j, c in row.items()}
    return MultiMap(d.arity, 2 - d.arity, A, A, entries, check=False)


def morphism_sign_exponent(degrees_a: Sequence[int]) -> int:
    """Shift sign exponent for f_i (degree 1-i on A) -> F_i (degree 0 on A[1]).

    (i-1) + (i-1)deg a_1 + ... + deg a_(i-1); pairs with the morphism
    identity's sign s = (r-1)(i_1-1) + ... + (i_(r-1)-1).
    """
    i = len(degrees_a)
    n = i - 1
    for j, d in enumerate(degrees_a[:-1]):
        n += (i - 1 - j) * d
    return n


def morphism_to_bar(f: MultiMap, source_bar=None, target_bar=None) -> MultiMap:
    if f.degree != 1 - f.arity and not f.is_zero():
        raise DegreeError("not a morphism component: arity %d with degree %d" % (f.arity, f.degree))
    V = f.source.shift() if source_bar is None else source_bar
    W = f.target.shift() if target_bar is None else target_bar
    degs = f.source.degrees
    entries = {}
    for key, row in f.entries.items():
        s = sign(morphism_sign_exponent([degs[i] for i in key]))
        entries[key] = {j: s * c for j, c in row.items()}
    return MultiMap(f.arity, 0, V, W, entries, check=False)


def morphism_from_bar(F: MultiMap, source=None, target=None) -> MultiMap:
    if F.degree != 0 and not F.is_zero():
        raise DegreeError("bar morphism component must have degree 0")
    A = F.source.shift(-1) if source is None else source
    B = F.target.shift(-1) if target is None else target
    degs = A.degrees
    entries = {}
    for key, row in F.entries.items():
        s = sign(morphism_sign_exponent([degs[i] for i in key]))
        entries[key] = {j: s * c for j, c in row.items()}
    return MultiMap(F.arity, 1 - F.arity, A, B, entries, check=False)


# insertion and tensor composition -------------------------------------------


class TensorMap:
    """Map M^(x)n -> M^(x)k; entries map input tuples to output tuples."""

    def __init__(self, arity, degree, module, entries):
        self.arity = arity
        self.degree = degree
        self.source = module
        self.entries = _clean(entries)

    def apply(self, key):
        return self.entries.get(tuple(key), {})


def insert(f: MultiMap, r: int, t: int):
    """The map 1^(x)r (x) f (x) 1^(x)t as a :class:`TensorMap`.

    Evaluating on x_1..x_n multiplies by (-1)^(deg f * (|x_1|+...+|x_r|)).
    For r = t = 0 this is f itself.
    """
    if r < 0 or t < 0:
        raise ValueError("r, t must be >= 0")
    if r == 0 and t == 0:
        return f
    if f.source != f.target:
        raise ValueError("insertion needs an endomorphism-type map")
    M = f.source
    degs = M.degrees
    entries: Dict[Key, Dict[Key, object]] = {}
    for pre in M.tuples(r):
        s = sign(f.degree * sum(degs[i] for i in pre))
        for post in M.tuples(t):
            for key, row in f.entries.items():
                out = entries.setdefault(pre + key + post, {})
                for j, c in row.items():
                    out[pre + (j,) + post] = s * c
    return TensorMap(r + f.arity + t, f.degree, M, entries)


def compose_multimaps(outer: MultiMap, inners: Sequence[MultiMap]) -> MultiMap:
    """outer o (inner_1 (x) ... (x) inner_r) with Koszul signs.

    inner_j passes the inputs of inner_1..inner_(j-1); their total source
    degree D gives the factor (-1)^(deg inner_j * D).
    """
    if len(inners) != outer.arity:
        raise ValueError("need %d inner maps, got %d" % (outer.arity, len(inners)))
    src = inners[0].source
    sd = src.degrees
    arity = sum(g.arity for g in inners)
    degree = outer.degree + sum(g.degree for g in inners)
    preim = [g.by_output() for g in inners]
    entries: Entries = {}
    for okey, orow in outer.entries.items():
        choices = []
        for pos, o in enumerate(okey):
            lst = preim[pos].get(o)
            if not lst:
                break
            choices.append(lst)
        else:
            for combo in itertools.product(*choices):
                par = 0
                D = 0
                key: Tuple[int, ...] = ()
                coeff = 1
                for pos, (k, c) in enumerate(combo):
                    par += inners[pos].degree * D
                    D += sum(sd[i] for i in k)
                    key += k
                    coeff = coeff * c
                s = sign(par)
                for j, c0 in orow.items():
                    accumulate(entries, key, j, s * coeff * c0)
    return MultiMap(arity, degree, src, outer.target, entries, check=False)


def insertion_sum(outer: Mapping[int, MultiMap], inner: Mapping[int, MultiMap], bound: int,
                  module: GradedModule, inner_degree: Callable[[int], int],
                  term_sign: Callable[[int, int, int], int] | None = None) -> Dict[int, Entries]:
    """Sum over u, s, r of outer_u(1^r (x) inner_s (x) 1^t), arity u+s-1 <= bound.

    ``inner_degree(s)`` is the degree used in the Koszul sign for inner_s
    passing its prefix; ``term_sign(r, s, t)`` is an optional extra sign.
    """
    degs = module.degrees
    out: Dict[int, Entries] = {}
    inner_items = [(s, g.by_output(), inner_degree(s)) for s, g in sorted(inner.items())
                   if not g.is_zero()]
    for u, F in sorted(outer.items()):
        if F.is_zero():
            continue
        for s, preim, dg in inner_items:
            n = u + s - 1
            if n > bound or n < 1:
                continue
            acc = out.setdefault(n, {})
            for key, row in F.entries.items():
                pref = 0
                for r in range(u):
                    o = key[r]
                    lst = preim.get(o)
                    if lst:
                        t = u - 1 - r
                        par = (dg * pref) & 1
                        ts = 1 if term_sign is None else term_sign(r, s, t)
                        sg = ts * sign(par)
                        head, tail = key[:r], key[r + 1:]
                        for k, c in lst:
                            nk = head + k + tail
                            for j, c0 in row.items():
                                accumulate(acc, nk, j, sg * c * c0)
                    pref += degs[o]
    return out


def tensor_sum(outer: Mapping[int, MultiMap], inner: Mapping[int, MultiMap], bound: int,
               module: GradedModule, inner_degree: Callable[[int], int] = lambda i: 0,
               term_sign: Callable[[Sequence[int]], int] | None = None) -> Dict[int, Entries]:
    """Sum over r and splittings of outer_r(inner_(i_1) (x) ... (x) inner_(i_r)).

    ``module`` is the source of the inner maps (for Koszul degrees);
    ``term_sign(arities)`` is an optional extra sign per splitting.
    """
    degs = module.degrees
    by_out: Dict[int, list] = {}
    for i, g in sorted(inner.items()):
        if g.is_zero():
            continue
        dg = inner_degree(i)
        for key, j, c in g.terms():
            by_out.setdefault(j, []).append((i, key, c, dg, sum(degs[x] for x in key)))
    out: Dict[int, Entries] = {}

    for r, F in sorted(outer.items()):
        if F.is_zero() or r > bound:
            continue
        for okey, orow in F.entries.items():
            lists = [by_out.get(o) for o in okey]
            if not all(lists):
                continue

            def rec(pos, n, key, coeff, par, D, arities):
                if pos == r:
                    ts = 1 if term_sign is None else term_sign(arities)
                    s = ts * sign(par)
                    acc = out.setdefault(n, {})
                    for j, c0 in orow.items():
                        accumulate(acc, key, j, s * coeff * c0)
                    return
                rest = r - pos - 1
                for i, k, c, dg, kd in lists[pos]:
                    if n + i + rest > bound:
                        continue
                    rec(pos + 1, n + i, key + k, coeff * c, par + dg * D, D + kd, arities + (i,))

            rec(0, 0, (), 1, 0, 0, ())
    return out


def entries_to_maps(raw: Mapping[int, Entries], degree: int, source: GradedModule,
                    target: GradedModule | None = None) -> Dict[int, MultiMap]:
    out = {}
    for n, ent in raw.items():
        mm = MultiMap(n, degree, source, target, ent, check=False)
        if not mm.is_zero():
            out[n] = mm
    return out
