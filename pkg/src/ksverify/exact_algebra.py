"""Exact arithmetic in Q(sqrt 2) and exact geometry on real 3-vectors.

Orthogonality between rays is decided with exact rational arithmetic, so no
tolerance ever enters the combinatorial part of the package.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Union

SQRT2_FLOAT = math.sqrt(2.0)

Scalar = Union[int, Fraction, "QuadRat"]


@dataclass(frozen=True, slots=True)
class QuadRat:
    """The number ``a + b*sqrt(2)`` with rational ``a`` and ``b``."""

    a: Fraction = Fraction(0)
    b: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        # Fraction normalizes sign and gcd; this also accepts ints and strings.
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))

    @classmethod
    def coerce(cls, x: Scalar) -> QuadRat:
        if isinstance(x, QuadRat):
            return x
        if isinstance(x, (int, Fraction)):
            return cls(Fraction(x))
        raise TypeError(f"cannot interpret {x!r} as an element of Q(sqrt2)")

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def __bool__(self) -> bool:
        return not self.is_zero()

    def conjugate(self) -> QuadRat:
        """Galois conjugate ``a - b*sqrt(2)``."""
        return QuadRat(self.a, -self.b)

    def norm(self) -> Fraction:
        """Field norm ``a^2 - 2 b^2``; zero only for zero."""
        return self.a * self.a - 2 * self.b * self.b

    def sign(self) -> int:
        a, b = self.a, self.b
        if a >= 0 and b >= 0:
            return 0 if (a == 0 and b == 0) else 1
        if a <= 0 and b <= 0:
            return -1
        # Opposite signs: the larger of a^2 and 2b^2 wins.
        cmp = a * a - 2 * b * b
        if a > 0:
            return 1 if cmp > 0 else -1
        return 1 if cmp < 0 else -1

    def __neg__(self) -> QuadRat:
        return QuadRat(-self.a, -self.b)

    def __add__(self, other: Scalar) -> QuadRat:
        try:
            o = QuadRat.coerce(other)
        except TypeError:
            return NotImplemented
        return QuadRat(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __sub__(self, other: Scalar) -> QuadRat:
        try:
            o = QuadRat.coerce(other)
        except TypeError:
            return NotImplemented
        return QuadRat(self.a - o.a, self.b - o.b)

    def __rsub__(self, other: Scalar) -> QuadRat:
        return (-self) + other

    def __mul__(self, other: Scalar) -> QuadRat:
        try:
            o = QuadRat.coerce(other)
        except TypeError:
            return NotImplemented
        return QuadRat(self.a * o.a + 2 * self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def inverse(self) -> QuadRat:
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero in Q(sqrt2)")
        return QuadRat(self.a / n, -self.b / n)

    def __truediv__(self, other: Scalar) -> QuadRat:
        try:
            o = QuadRat.coerce(other)
        except TypeError:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other: Scalar) -> QuadRat:
        return QuadRat.coerce(other) * self.inverse()

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = QuadRat(Fraction(other))
        if not isinstance(other, QuadRat):
            return NotImplemented
        return self.a == other.a and self.b == other.b

    def __hash__(self) -> int:
        return hash((self.a, self.b))

    def __float__(self) -> float:
        return to_float(self)

    def __str__(self) -> str:
        return format_quadrat(self)

    def __repr__(self) -> str:
        return f"QuadRat({format_quadrat(self)!r})"


ZERO = QuadRat(0)
ONE = QuadRat(1)
SQRT2 = QuadRat(0, 1)


def qr_add(x: QuadRat, y: QuadRat) -> QuadRat:
    return x + y


def qr_mul(x: QuadRat, y: QuadRat) -> QuadRat:
    return x * y


def qr_inv(x: QuadRat) -> QuadRat:
    """Multiplicative inverse; raises ZeroDivisionError for zero."""
    return x.inverse()


def to_float(x: QuadRat) -> float:
    """Nearest-ish float to ``x``, accurate to a few ulp.

    When ``a`` and ``b`` have opposite signs the naive sum cancels, so the
    value is rewritten as ``(a^2 - 2b^2) / (a - b*sqrt2)`` whose denominator
    adds two same-signed terms.
    """
    a, b = x.a, x.b
    if b == 0:
        return float(a)
    if a == 0:
        return float(b) * SQRT2_FLOAT
    if (a > 0) == (b > 0):
        return float(a) + float(b) * SQRT2_FLOAT
    return float(x.norm()) / (float(a) - float(b) * SQRT2_FLOAT)


def format_quadrat(x: QuadRat) -> str:
    """Serialize as ``a+b√2`` with reduced fractions, e.g. ``1/2-3√2``."""
    if x.b == 0:
        return str(x.a)
    if x.a == 0:
        return f"{x.b}√2"
    sign = "+" if x.b > 0 else "-"
    return f"{x.a}{sign}{abs(x.b)}√2"


_RATIONAL = r"\d+(?:/\d+)?"
_TERM = re.compile(rf"([+-]?)({_RATIONAL})?(\*?√2)?")


def parse_quadrat(text: str) -> QuadRat:
    """Parse the output of :func:`format_quadrat`; ``sqrt2`` is accepted for ``√2``."""
    s = re.sub(r"\s*([+-])\s*", r"\1", text.strip())
    s = s.replace("sqrt(2)", "√2").replace("sqrt2", "√2")
    if not s or re.search(r"\s", s):
        raise ValueError(f"cannot parse {text!r} as a+b√2")
    a = Fraction(0)
    b = Fraction(0)
    pos = 0
    while pos < len(s):
        m = _TERM.match(s, pos)
        if m is None or m.end() == pos or (m.group(2) is None and m.group(3) is None):
            raise ValueError(f"cannot parse {text!r} as a+b√2")
        sign = -1 if m.group(1) == "-" else 1
        if pos > 0 and not m.group(1):
            raise ValueError(f"cannot parse {text!r} as a+b√2")
        coef = Fraction(m.group(2)) if m.group(2) is not None else Fraction(1)
        if m.group(3):
            b += sign * coef
        else:
            a += sign * coef
        pos = m.end()
    return QuadRat(a, b)


@dataclass(frozen=True, slots=True)
class Vec3Exact:
    x: QuadRat
    y: QuadRat
    z: QuadRat

    @classmethod
    def of(cls, x: Scalar, y: Scalar, z: Scalar) -> Vec3Exact:
        return cls(QuadRat.coerce(x), QuadRat.coerce(y), QuadRat.coerce(z))

    def __iter__(self) -> Iterator[QuadRat]:
        yield self.x
        yield self.y
        yield self.z

    def is_zero(self) -> bool:
        return self.x.is_zero() and self.y.is_zero() and self.z.is_zero()

    def scale(self, c: Scalar) -> Vec3Exact:
        return Vec3Exact(self.x * c, self.y * c, self.z * c)

    def to_floats(self) -> tuple[float, float, float]:
        return (to_float(self.x), to_float(self.y), to_float(self.z))

    def __str__(self) -> str:
        return f"({self.x}, {self.y}, {self.z})"


def dot(u: Vec3Exact, v: Vec3Exact) -> QuadRat:
    return u.x * v.x + u.y * v.y + u.z * v.z


def cross(u: Vec3Exact, v: Vec3Exact) -> Vec3Exact:
    """Exact cross product; raises ValueError if ``u`` and ``v`` are parallel."""
    w = Vec3Exact(
        u.y * v.z - u.z * v.y,
        u.z * v.x - u.x * v.z,
        u.x * v.y - u.y * v.x,
    )
    if w.is_zero():
        raise ValueError(f"cross product of parallel vectors {u} and {v}")
    return w


@dataclass(frozen=True, slots=True)
class Ray:
    """A one-dimensional real subspace, stored by its canonical representative.

    Build rays through :func:`canonicalize`; the constructor trusts its input.
    """

    v: Vec3Exact

    def __iter__(self) -> Iterator[QuadRat]:
        return iter(self.v)

    def to_floats(self) -> tuple[float, float, float]:
        return self.v.to_floats()

    def __str__(self) -> str:
        return str(self.v)


def canonicalize(v: Vec3Exact) -> Ray:
    """Scale ``v`` so its first nonzero component is exactly 1."""
    for c in v:
        if not c.is_zero():
            return Ray(v.scale(c.inverse()))
    raise ValueError("the zero vector does not span a ray")
