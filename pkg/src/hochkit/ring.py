"""Exact scalars: rationals and truncated polynomials in h.

Rationals are :class:`fractions.Fraction`.  An :class:`HPoly` is an element of
Q[h]/h^(N+1); the truncation order N travels with every value and mixing
orders raises :class:`RingMismatch`.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence, Union


class RingMismatch(ValueError):
    pass


class HPoly:
    """Element of Q[h]/h^(N+1), stored as N+1 rational coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable, N: int | None = None):
        cs = [Fraction(c) for c in coeffs]
        if N is not None:
            if N < 0:
                raise ValueError("truncation order must be >= 0")
            cs = (cs + [Fraction(0)] * (N + 1))[: N + 1]
        if not cs:
            raise ValueError("HPoly needs N >= 0")
        self.coeffs = tuple(cs)

    @classmethod
    def const(cls, c, N: int) -> "HPoly":
        return cls([c], N)

    @classmethod
    def monomial(cls, c, power: int, N: int) -> "HPoly":
        cs = [0] * (N + 1)
        if power <= N:
            cs[power] = c
        return cls(cs)

    @property
    def N(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, i: int) -> Fraction:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else Fraction(0)

    def _coerce(self, other) -> "HPoly":
        if isinstance(other, HPoly):
            if other.N != self.N:
                raise RingMismatch("ring mismatch: h-truncation %d vs %d" % (self.N, other.N))
            return other
        if isinstance(other, (int, Fraction)):
            return HPoly.const(other, self.N)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return HPoly([a + b for a, b in zip(self.coeffs, o.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return HPoly([-a for a in self.coeffs])

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return HPoly([a - b for a, b in zip(self.coeffs, o.coeffs)])

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return HPoly([a * other for a in self.coeffs])
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        n = len(self.coeffs)
        out = [Fraction(0)] * n
        for i, a in enumerate(self.coeffs):
            if a:
                for j in range(n - i):
                    b = o.coeffs[j]
                    if b:
                        out[i + j] += a * b
        return HPoly(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return HPoly([a / other for a in self.coeffs])
        return NotImplemented

    def __pow__(self, k: int):
        out = HPoly.const(1, self.N)
        for _ in range(k):
            out = out * self
        return out

    def __bool__(self):
        return any(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, HPoly):
            return self.N == other.N and self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs[0] == other and not any(self.coeffs[1:])
        return NotImplemented

    def __hash__(self):
        return hash(("HPoly", self.coeffs))

    def __repr__(self):
        return "HPoly(%s)" % format_scalar(self)

    def valuation(self) -> int | None:
        """Lowest power of h with a nonzero coefficient, None for zero."""
        for i, c in enumerate(self.coeffs):
            if c:
                return i
        return None

    def truncate(self, N: int) -> "HPoly":
        return HPoly(self.coeffs, N)

    def shift_down(self, k: int) -> "HPoly":
        """Divide by h^k, assuming the low k coefficients vanish."""
        if any(self.coeffs[:k]):
            raise ValueError("not divisible by h^%d" % k)
        return HPoly(self.coeffs[k:], self.N)


Scalar = Union[Fraction, HPoly]


def hpoly_mul(a: HPoly, b: HPoly) -> HPoly:
    if a.N != b.N:
        raise RingMismatch("ring mismatch")
    return a * b


def d_dh(a):
    """Formal derivative in h; the top coefficient of the result is zero."""
    if not isinstance(a, HPoly):
        return Fraction(0)
    cs = [i * c for i, c in enumerate(a.coeffs)][1:] + [Fraction(0)]
    return HPoly(cs)


def specialize(a, c) -> Fraction:
    """Evaluate h -> c.  Rationals are returned unchanged."""
    if not isinstance(a, HPoly):
        return Fraction(a)
    c = Fraction(c)
    acc = Fraction(0)
    for coeff in reversed(a.coeffs):
        acc = acc * c + coeff
    return acc


def coeff_at(a, power: int) -> Fraction:
    if isinstance(a, HPoly):
        return a[power]
    return Fraction(a) if power == 0 else Fraction(0)


# ring descriptors ---------------------------------------------------------


class Ring:
    """Either Q (truncation None) or Q[h]/h^(N+1)."""

    __slots__ = ("truncation",)

    def __init__(self, truncation: int | None = None):
        if truncation is not None and truncation < 0:
            raise ValueError("truncation must be >= 0")
        self.truncation = truncation

    @property
    def is_field(self) -> bool:
        return self.truncation is None

    def __eq__(self, other):
        return isinstance(other, Ring) and other.truncation == self.truncation

    def __hash__(self):
        return hash(("Ring", self.truncation))

    def __repr__(self):
        return "QQ" if self.truncation is None else "QQ[h]/h^%d" % (self.truncation + 1)

    def zero(self):
        return Fraction(0) if self.truncation is None else HPoly.const(0, self.truncation)

    def one(self):
        return Fraction(1) if self.truncation is None else HPoly.const(1, self.truncation)

    def h(self, power: int = 1):
        if self.truncation is None:
            raise RingMismatch("QQ has no h")
        return HPoly.monomial(1, power, self.truncation)

    def coerce(self, x):
        if self.truncation is None:
            if isinstance(x, HPoly):
                raise RingMismatch("ring mismatch: expected a rational, got %r" % x)
            return Fraction(x)
        if isinstance(x, HPoly):
            if x.N != self.truncation:
                raise RingMismatch("ring mismatch")
            return x
        return HPoly.const(x, self.truncation)

    def contains(self, x) -> bool:
        if self.truncation is None:
            return not isinstance(x, HPoly)
        return isinstance(x, HPoly) and x.N == self.truncation


QQ = Ring(None)


def truncated(N: int) -> Ring:
    return Ring(N)


def ring_of(x) -> Ring:
    return Ring(x.N) if isinstance(x, HPoly) else QQ


# text forms ---------------------------------------------------------------


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else "%d/%d" % (q.numerator, q.denominator)


def parse_rational(text) -> Fraction:
    if isinstance(text, bool):
        raise ValueError("not a rational: %r" % (text,))
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise ValueError("not a rational: %r" % (text,))
    s = text.strip()
    if "/" in s:
        p, q = s.split("/", 1)
        q = int(q)
        if q == 0:
            raise ValueError("zero denominator in %r" % text)
        return Fraction(int(p), q)
    return Fraction(int(s))


def format_scalar(x):
    """Rationals as "p/q" strings, HPoly as a list of such strings."""
    if isinstance(x, HPoly):
        return [format_rational(c) for c in x.coeffs]
    return format_rational(x)


def parse_scalar(value, ring: Ring):
    if isinstance(value, list):
        if ring.truncation is None:
            raise ValueError("h-polynomial coefficient in a QQ file")
        if len(value) > ring.truncation + 1:
            raise ValueError("coefficient %r exceeds truncation order %d" % (value, ring.truncation))
        return HPoly([parse_rational(v) for v in value], ring.truncation)
    return ring.coerce(parse_rational(value))


def sign(parity: int) -> int:
    return -1 if parity & 1 else 1


def is_h_divisible(x) -> bool:
    """True when x lies in the ideal (h); rationals qualify only if zero."""
    if isinstance(x, HPoly):
        return x.coeffs[0] == 0
    return x == 0

