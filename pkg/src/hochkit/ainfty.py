"""A-infinity structures, morphisms and the bar-side coderivation calculus.

Bar-side objects are families of components Phi_n : V^(x)n -> W.  A family
stands for a map out of the tensor coalgebra followed by the projection to
the cogenerators, and right composition has two flavours:

* with a coderivation c:  (Phi o c)_n = sum Phi_u(1^r (x) c_s (x) 1^t),
  Koszul-signed by the degree of c;
* with a coalgebra morphism F: (Phi o F)_n = sum Phi_r(F_i1 (x) ... (x) F_ir).

Composites of coderivations, automorphisms and conjugates are all computed
this way, exactly below an explicit arity bound (arity never decreases under
these operations, so truncation loses nothing below the bound).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Dict, List, Mapping, Optional, Tuple

from .graded import (
    Entries, GradedModule, MultiMap, entries_to_maps, insertion_sum, morphism_from_bar,
    morphism_to_bar, shift_from_bar, shift_to_bar, tensor_sum,
)
from .linalg import SparseMatrix, inverse as matrix_inverse
from .ring import QQ, Ring, is_h_divisible, sign

Components = Dict[int, MultiMap]


def _clean_components(comps: Mapping[int, MultiMap], bound: Optional[int] = None) -> Components:
    return {n: f for n, f in sorted(comps.items())
            if not f.is_zero() and (bound is None or n <= bound)}


def _max_arity(comps: Mapping[int, MultiMap]) -> int:
    return max((n for n, f in comps.items() if not f.is_zero()), default=0)


def _combine(a: Mapping[int, MultiMap], b: Mapping[int, MultiMap], s) -> Components:
    out = dict(a)
    for n, f in b.items():
        out[n] = out[n] + f.scale(s) if n in out else f.scale(s)
    return _clean_components(out)


# bar side -------------------------------------------------------------------


@dataclass
class Coderivation:
    """A coderivation of the tensor coalgebra on ``module`` (a bar-side A[1])."""
    module: GradedModule
    degree: int
    components: Components = field(default_factory=dict)
    ring: Ring = QQ

    def __post_init__(self):
        for n, f in self.components.items():
            if f.arity != n:
                raise ValueError("component keyed %d has arity %d" % (n, f.arity))
            if not f.is_zero() and f.degree != self.degree:
                raise ValueError("component of degree %d in a degree-%d coderivation"
                                 % (f.degree, self.degree))
        self.components = _clean_components(self.components)

    @classmethod
    def zero(cls, module, degree, ring=QQ):
        return cls(module, degree, {}, ring)

    def component(self, n: int) -> MultiMap:
        f = self.components.get(n)
        return f if f is not None else MultiMap.zero(n, self.degree, self.module)

    @property
    def max_arity(self) -> int:
        return _max_arity(self.components)

    def is_zero(self) -> bool:
        return not self.components

    def truncate(self, bound: int) -> "Coderivation":
        return Coderivation(self.module, self.degree, _clean_components(self.components, bound), self.ring)

    def _like(self, comps, degree=None):
        return Coderivation(self.module, self.degree if degree is None else degree, comps, self.ring)

    def __add__(self, other: "Coderivation"):
        return self._like(_combine(self.components, other.components, 1))

    def __sub__(self, other: "Coderivation"):
        return self._like(_combine(self.components, other.components, -1))

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c) -> "Coderivation":
        return self._like({n: f.scale(c) for n, f in self.components.items()})

    def map_coeffs(self, fn, ring: Ring | None = None) -> "Coderivation":
        """Apply ``fn`` to every coefficient; ``ring`` is the ring of the results."""
        return Coderivation(self.module, self.degree, {n: f.map_coeffs(fn) for n, f in self.components.items()},
                            self.ring if ring is None else ring)

    def __eq__(self, other):
        if not isinstance(other, Coderivation):
            return NotImplemented
        return self.module == other.module and self.components == other.components

    def compose(self, other: "Coderivation", bound: int) -> "Coderivation":
        """self o other (a coderivation only up to sign corrections; see bracket)."""
        raw = insertion_sum(self.components, other.components, bound, self.module,
                            lambda s: other.degree)
        return self._like(entries_to_maps(raw, self.degree + other.degree, self.module),
                          self.degree + other.degree)

    def square(self, bound: int) -> "Coderivation":
        return self.compose(self, bound)


@dataclass
class CoalgebraMorphism:
    """A degree-0 coalgebra map between bar sides, given by its components F_n."""
    source_module: GradedModule
    target_module: GradedModule
    components: Components = field(default_factory=dict)
    ring: Ring = QQ

    def __post_init__(self):
        for n, f in self.components.items():
            if f.arity != n:
                raise ValueError("component keyed %d has arity %d" % (n, f.arity))
            if not f.is_zero() and f.degree != 0:
                raise ValueError("coalgebra morphism components have degree 0")
        self.components = _clean_components(self.components)

    @classmethod
    def identity(cls, module: GradedModule, ring: Ring = QQ) -> "CoalgebraMorphism":
        return cls(module, module, {1: MultiMap.identity(module, ring.one())}, ring)

    def component(self, n: int) -> MultiMap:
        f = self.components.get(n)
        return f if f is not None else MultiMap.zero(n, 0, self.source_module, self.target_module)

    @property
    def max_arity(self) -> int:
        return _max_arity(self.components)

    def truncate(self, bound: int) -> "CoalgebraMorphism":
        return CoalgebraMorphism(self.source_module, self.target_module,
                                 _clean_components(self.components, bound), self.ring)

    def map_coeffs(self, fn, ring: Ring | None = None) -> "CoalgebraMorphism":
        return CoalgebraMorphism(self.source_module, self.target_module,
                                 {n: f.map_coeffs(fn) for n, f in self.components.items()},
                                 self.ring if ring is None else ring)

    def __eq__(self, other):
        if not isinstance(other, CoalgebraMorphism):
            return NotImplemented
        return (self.source_module == other.source_module
                and self.target_module == other.target_module
                and self.components == other.components)

    def compose(self, other: "CoalgebraMorphism", bound: int) -> "CoalgebraMorphism":
        """self o other."""
        if other.target_module != self.source_module:
            raise ValueError("cannot compose: intermediate modules differ")
        raw = tensor_sum(self.components, other.components, bound, other.source_module)
        return CoalgebraMorphism(other.source_module, self.target_module,
                                 entries_to_maps(raw, 0, other.source_module, self.target_module),
                                 self.ring)

    # right composition with coderivations (see module docstring)
    def after_coderivation(self, c: Coderivation, bound: int) -> Components:
        """Components of pr o self o c."""
        raw = insertion_sum(self.components, c.components, bound, self.source_module,
                            lambda s: c.degree)
        return entries_to_maps(raw, c.degree, self.source_module, self.target_module)

    def is_isomorphism(self) -> bool:
        try:
            _matrix_inverse_of(self.component(1), self.ring)
        except ZeroDivisionError:
            return False
        return True


def right_compose_morphism(phi: Mapping[int, MultiMap], F: CoalgebraMorphism, degree: int,
                           bound: int, target: GradedModule) -> Components:
    """(Phi o F)_n for a family Phi out of F's target."""
    raw = tensor_sum(phi, F.components, bound, F.source_module)
    return entries_to_maps(raw, degree, F.source_module, target)


def _arity1_matrix(f: MultiMap, ring: Ring) -> SparseMatrix:
    ent = {}
    for (i,), j, c in f.terms():
        ent[(j, i)] = c
    return SparseMatrix(f.target.dim, f.source.dim, ent, ring)


def _matrix_inverse_of(f: MultiMap, ring: Ring) -> MultiMap:
    if f.source.dim != f.target.dim:
        raise ZeroDivisionError("f_1 is not square")
    inv = matrix_inverse(_arity1_matrix(f, ring))
    entries: Dict[tuple, Dict[int, object]] = {}
    for (i, j), c in inv.entries():
        entries.setdefault((j,), {})[i] = c
    return MultiMap(1, 0, f.target, f.source, entries)


def inverse(F: CoalgebraMorphism, bound: int) -> CoalgebraMorphism:
    """Inverse coalgebra morphism up to ``bound``, arity by arity.

    G_1 = F_1^-1 and G_n = -F_1^-1 sum_(r >= 2) F_r(G_i1 (x) ... (x) G_ir).
    """
    try:
        g1 = _matrix_inverse_of(F.component(1), F.ring)
    except ZeroDivisionError:
        raise ZeroDivisionError("f_1 is singular; morphism is not invertible") from None
    G = {1: g1}
    higher = {n: f for n, f in F.components.items() if n >= 2}
    for n in range(2, bound + 1):
        if not higher:
            break
        partial = CoalgebraMorphism(F.target_module, F.source_module, dict(G), F.ring)
        raw = tensor_sum(higher, partial.components, n, F.target_module)
        acc = entries_to_maps({n: raw.get(n, {})}, 0, F.target_module, F.target_module).get(n)
        if acc is None:
            continue
        gn = compose_arity1(g1, acc).scale(-1)
        if not gn.is_zero():
            G[n] = gn
    return CoalgebraMorphism(F.target_module, F.source_module, G, F.ring)


def compose_arity1(a: MultiMap, f: MultiMap) -> MultiMap:
    """a o f for an arity-1 map a."""
    entries: Entries = {}
    for key, row in f.entries.items():
        out: Dict[int, object] = {}
        for j, c in row.items():
            for k, c2 in a.apply((j,)).items():
                out[k] = out.get(k, 0) + c2 * c
        entries[key] = out
    return MultiMap(f.arity, f.degree + a.degree, f.source, a.target, entries, check=False)


def bracket(D: Coderivation, E: Coderivation, bound: int) -> Coderivation:
    """Graded commutator D o E - (-1)^(|D||E|) E o D."""
    return D.compose(E, bound) - E.compose(D, bound).scale(sign(D.degree * E.degree))


def exp_coderivation(g: Coderivation, bound: int) -> CoalgebraMorphism:
    """exp(g) = sum g^k / k! as a coalgebra automorphism, up to ``bound``.

    The series is finite when g_1 vanishes modulo h: each factor either
    raises arity or carries a power of h.
    """
    if g.degree != 0 and not g.is_zero():
        raise ValueError("exp needs a degree-0 coderivation")
    g1 = g.components.get(1)
    if g1 is not None and not all(is_h_divisible(c) for _, _, c in g1.terms()):
        raise ValueError("exp does not truncate: g_1 is not nilpotent")
    out: Components = {1: MultiMap.identity(g.module, g.ring.one())}
    power = _clean_components(g.components, bound)
    k = 1
    while power:
        scale = Fraction(1, factorial(k))
        out = _combine(out, power, scale)
        raw = insertion_sum(power, g.components, bound, g.module, lambda s: 0)
        power = entries_to_maps(raw, 0, g.module)
        k += 1
    return CoalgebraMorphism(g.module, g.module, out, g.ring)


def conjugate(F: CoalgebraMorphism, c: Coderivation, bound: int,
              F_inverse: CoalgebraMorphism | None = None) -> Coderivation:
    """F o c o F^-1 as a coderivation on F's target."""
    Finv = inverse(F, bound) if F_inverse is None else F_inverse
    phi = F.after_coderivation(c, bound)
    comps = right_compose_morphism(phi, Finv, c.degree, bound, F.target_module)
    return Coderivation(F.target_module, c.degree, comps, c.ring)


def is_coalgebra_morphism_between(F: CoalgebraMorphism, d_src: Coderivation, d_tgt: Coderivation,
                                  bound: int) -> bool:
    """F o d_src = d_tgt o F up to ``bound``."""
    lhs = F.after_coderivation(d_src, bound)
    rhs = right_compose_morphism(d_tgt.components, F, d_src.degree, bound, F.target_module)
    return _clean_components(lhs) == _clean_components(rhs)


# A-side structures --------------------------------------------------------


@dataclass
class AInftyStructure:
    """Operations m_i of degree 2 - i on the graded module A."""
    module: GradedModule
    components: Components = field(default_factory=dict)
    ring: Ring = QQ

    def __post_init__(self):
        for n, m in self.components.items():
            if m.arity != n:
                raise ValueError("m_%d stored with arity %d" % (n, m.arity))
            if not m.is_zero() and m.degree != 2 - n:
                raise ValueError("m_%d must have degree %d, got %d" % (n, 2 - n, m.degree))
        self.components = _clean_components(self.components)

    def __eq__(self, other):
        if not isinstance(other, AInftyStructure):
            return NotImplemented
        return self.module == other.module and self.components == other.components

    def m(self, n: int) -> MultiMap:
        f = self.components.get(n)
        return f if f is not None else MultiMap.zero(n, 2 - n, self.module)

    @property
    def is_minimal(self) -> bool:
        return 1 not in self.components

    @property
    def is_associative(self) -> bool:
        """Only m_2 is nonzero."""
        return all(n == 2 for n in self.components)

    @property
    def max_arity(self) -> int:
        return _max_arity(self.components)

    @property
    def bar_module(self) -> GradedModule:
        return self.module.shift()

    def bar(self) -> Coderivation:
        V = self.bar_module
        return Coderivation(V, 1, {n: shift_to_bar(m, V) for n, m in self.components.items()}, self.ring)

    @classmethod
    def from_bar(cls, d: Coderivation, module: GradedModule | None = None) -> "AInftyStructure":
        A = d.module.shift(-1) if module is None else module
        return cls(A, {n: shift_from_bar(f, A) for n, f in d.components.items()}, d.ring)

    def truncation(self, keep=(2,)) -> "AInftyStructure":
        """A(2) for keep=(2,): the structure keeping only the listed arities."""
        return AInftyStructure(self.module, {n: m for n, m in self.components.items() if n in keep},
                               self.ring)

    def map_coeffs(self, fn, ring: Ring) -> "AInftyStructure":
        return AInftyStructure(self.module, {n: m.map_coeffs(fn) for n, m in self.components.items()}, ring)


@dataclass
class AInftyMorphism:
    """Components f_i of degree 1 - i from source.module to target.module."""
    source: AInftyStructure
    target: AInftyStructure
    components: Components = field(default_factory=dict)

    def __post_init__(self):
        for n, f in self.components.items():
            if f.arity != n:
                raise ValueError("f_%d stored with arity %d" % (n, f.arity))
            if not f.is_zero() and f.degree != 1 - n:
                raise ValueError("f_%d must have degree %d, got %d" % (n, 1 - n, f.degree))
        self.components = _clean_components(self.components)

    @property
    def ring(self) -> Ring:
        return self.source.ring

    @classmethod
    def identity(cls, A: AInftyStructure) -> "AInftyMorphism":
        return cls(A, A, {1: MultiMap.identity(A.module, A.ring.one())})

    def f(self, n: int) -> MultiMap:
        g = self.components.get(n)
        return g if g is not None else MultiMap.zero(n, 1 - n, self.source.module, self.target.module)

    def bar(self) -> CoalgebraMorphism:
        V, W = self.source.bar_module, self.target.bar_module
        return CoalgebraMorphism(V, W, {n: morphism_to_bar(f, V, W) for n, f in self.components.items()},
                                 self.ring)

    @classmethod
    def from_bar(cls, F: CoalgebraMorphism, source: AInftyStructure, target: AInftyStructure):
        return cls(source, target, {n: morphism_from_bar(f, source.module, target.module)
                                    for n, f in F.components.items()})


# identity checks ------------------------------------------------------------


@dataclass
class Violation:
    n: int
    inputs: Tuple[int, ...]
    defect: Dict[int, object]

    def named(self, source: GradedModule, target: GradedModule | None = None):
        target = source if target is None else target
        return ([source.name(i) for i in self.inputs],
                {target.name(j): c for j, c in sorted(self.defect.items())})


@dataclass
class CheckResult:
    n_max: int
    violations: List[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    @property
    def failing_arities(self) -> List[int]:
        return sorted({v.n for v in self.violations})


def _violations(raw: Mapping[int, Entries], n_max: int) -> CheckResult:
    out = []
    for n in sorted(raw):
        for key in sorted(raw[n]):
            row = {j: c for j, c in raw[n][key].items() if c}
            if row:
                out.append(Violation(n, key, row))
    return CheckResult(n_max, out)


def _subtract(a: Mapping[int, Entries], b: Mapping[int, Entries]) -> Dict[int, Entries]:
    out = {n: {k: dict(r) for k, r in e.items()} for n, e in a.items()}
    for n, e in b.items():
        acc = out.setdefault(n, {})
        for key, row in e.items():
            r = acc.setdefault(key, {})
            for j, c in row.items():
                r[j] = r.get(j, 0) - c
    return out


def stasheff_defect(A: AInftyStructure, n_max: int) -> Dict[int, Entries]:
    """sum (-1)^(r+st) m_u(1^r (x) m_s (x) 1^t) on A, Koszul-signed, arities <= n_max."""
    return insertion_sum(A.components, A.components, n_max, A.module,
                         lambda s: 2 - s, lambda r, s, t: sign(r + s * t))


def check_stasheff(A: AInftyStructure, n_max: int) -> CheckResult:
    return _violations(stasheff_defect(A, n_max), n_max)


def stasheff_via_bar(A: AInftyStructure, n_max: int) -> CheckResult:
    d = A.bar()
    raw = insertion_sum(d.components, d.components, n_max, d.module, lambda s: 1)
    return _violations(raw, n_max)


def _morphism_rhs_sign(arities) -> int:
    r = len(arities)
    return sign(sum((r - 1 - j) * (i - 1) for j, i in enumerate(arities)))


def check_morphism(f: AInftyMorphism, n_max: int) -> CheckResult:
    """sum (-1)^(r+st) f_u(1^r (x) m_s (x) 1^t) = sum (-1)^s m_r(f_i1 (x) ... (x) f_ir)."""
    A = f.source.module
    lhs = insertion_sum(f.components, f.source.components, n_max, A,
                        lambda s: 2 - s, lambda r, s, t: sign(r + s * t))
    rhs = tensor_sum(f.target.components, f.components, n_max, A, lambda i: 1 - i,
                     _morphism_rhs_sign)
    return _violations(_subtract(lhs, rhs), n_max)


def check_morphism_via_bar(f: AInftyMorphism, n_max: int) -> CheckResult:
    F = f.bar()
    lhs = insertion_sum(F.components, f.source.bar().components, n_max, F.source_module, lambda s: 1)
    rhs = tensor_sum(f.target.bar().components, F.components, n_max, F.source_module)
    return _violations(_subtract(lhs, rhs), n_max)


def compose_morphisms(g: AInftyMorphism, f: AInftyMorphism, bound: int) -> AInftyMorphism:
    """g o f, computed as the composite of the bar-side coalgebra maps."""
    if f.target.module != g.source.module or f.target.components != g.source.components:
        raise ValueError("cannot compose: target of f is not the source of g")
    H = g.bar().compose(f.bar(), bound)
    return AInftyMorphism.from_bar(H, f.source, g.target)


def gauge_structure(F: CoalgebraMorphism, A: AInftyStructure, bound: int) -> AInftyStructure:
    """The structure whose bar differential is F o d_A o F^-1."""
    return AInftyStructure.from_bar(conjugate(F, A.bar(), bound), A.module)
