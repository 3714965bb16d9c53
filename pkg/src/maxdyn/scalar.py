"""Exact numbers of the form ``sum(c_m * sqrt(m))``.

Coefficients ``c_m`` are rationals and every radicand ``m`` is a squarefree
positive integer (``m == 1`` carries the rational part).  Because the square
roots of distinct squarefree integers are linearly independent over the
rationals, the term map is a unique representation: two values are equal
exactly when their term maps are equal, and a value is zero exactly when it
has no terms.

Internally a value is stored as a tuple of ``(radicand, numerator)`` pairs
over one positive common denominator, reduced so that the numerators and the
denominator share no factor.  The recurrence only ever adds, subtracts and
compares, so no product of two radicals is supported.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt
from typing import Iterable, Mapping, Union

__all__ = [
    "Rational",
    "Scalar",
    "ScalarSyntaxError",
    "PrecisionExhausted",
    "parse_scalar",
    "sign",
    "smax",
    "smin",
    "rational_ratio",
    "to_float",
    "squarefree_decompose",
    "DEFAULT_PRECISION_CAP",
]

Rational = Fraction

#: Hard cap, in bits, for interval refinement in :func:`sign` and friends.
DEFAULT_PRECISION_CAP = 65536

_START_BITS = 64

Number = Union[int, Fraction, "Scalar"]


class ScalarSyntaxError(ValueError):
    """A literal does not follow the scalar grammar."""

    def __init__(self, message: str, text: str, position: int):
        super().__init__(f"{message} at position {position} in {text!r}")
        self.text = text
        self.position = position


class PrecisionExhausted(ArithmeticError):
    """Interval refinement hit the precision cap.

    Nonzero values always separate from zero eventually, so this signals a
    bug rather than a property of the input.
    """


@lru_cache(maxsize=4096)
def squarefree_decompose(n: int) -> tuple[int, int]:
    """Return ``(k, m)`` with ``n == k*k*m`` and ``m`` squarefree."""
    if n <= 0:
        raise ValueError(f"radicand must be positive, got {n}")
    k, m = 1, 1
    rest = n
    p = 2
    while p * p <= rest:
        e = 0
        while rest % p == 0:
            rest //= p
            e += 1
        if e:
            k *= p ** (e // 2)
            if e % 2:
                m *= p
        p += 1 if p == 2 else 2
    return k, m * rest


@lru_cache(maxsize=65536)
def _root_floor(radicand: int, bits: int) -> int:
    # floor(sqrt(radicand) * 2**bits)
    return isqrt(radicand << (2 * bits))


def _interval(nums: Iterable[tuple[int, int]], bits: int) -> tuple[int, int]:
    """Integer bounds ``lo <= 2**bits * sum(num*sqrt(rad)) <= hi``."""
    lo = hi = 0
    for rad, num in nums:
        if rad == 1:
            v = num << bits
            lo += v
            hi += v
            continue
        s = _root_floor(rad, bits)
        if num > 0:
            lo += num * s
            hi += num * (s + 1)
        else:
            lo += num * (s + 1)
            hi += num * s
    return lo, hi


def _sign_of(nums: tuple[tuple[int, int], ...], cap: int = DEFAULT_PRECISION_CAP) -> int:
    n = len(nums)
    if n == 0:
        return 0
    if n == 1:
        return 1 if nums[0][1] > 0 else -1
    if n == 2:
        (r1, a), (r2, b) = nums
        if (a > 0) == (b > 0):
            return 1 if a > 0 else -1
        # a*sqrt(r1) and b*sqrt(r2) have opposite signs: compare squares
        d = a * a * r1 - b * b * r2
        if d == 0:  # impossible for distinct squarefree radicands
            raise AssertionError("non-canonical scalar")
        return (1 if a > 0 else -1) if d > 0 else (1 if b > 0 else -1)
    bits = _START_BITS
    while bits <= cap:
        lo, hi = _interval(nums, bits)
        if lo > 0:
            return 1
        if hi < 0:
            return -1
        bits *= 2
    raise PrecisionExhausted(f"sign undecided at {cap} bits")


def _reduce(terms: dict[int, int], den: int) -> tuple[tuple[tuple[int, int], ...], int]:
    items = sorted((r, c) for r, c in terms.items() if c)
    if not items:
        return (), 1
    g = den
    for _, c in items:
        g = gcd(g, c)
        if g == 1:
            break
    if g != 1:
        items = [(r, c // g) for r, c in items]
        den //= g
    return tuple(items), den


class Scalar:
    """An immutable exact element of the multi-quadratic field."""

    __slots__ = ("_nums", "_den", "_hash")

    def __init__(self, value: Number | str = 0):
        if isinstance(value, Scalar):
            self._nums, self._den = value._nums, value._den
        elif isinstance(value, int):
            self._nums, self._den = (((1, value),) if value else ()), 1
        elif isinstance(value, Fraction):
            self._nums = ((1, value.numerator),) if value else ()
            self._den = value.denominator
        elif isinstance(value, str):
            parsed = parse_scalar(value)
            self._nums, self._den = parsed._nums, parsed._den
        else:
            raise TypeError(f"cannot build a Scalar from {type(value).__name__}")
        self._hash = None

    @classmethod
    def _raw(cls, nums: tuple[tuple[int, int], ...], den: int) -> Scalar:
        obj = cls.__new__(cls)
        obj._nums = nums
        obj._den = den
        obj._hash = None
        return obj

    @classmethod
    def from_terms(cls, terms: Mapping[int, Number]) -> Scalar:
        """Build ``sum(coef * sqrt(radicand))``; radicands need not be squarefree."""
        acc: dict[int, Fraction] = {}
        for rad, coef in terms.items():
            coef = Fraction(coef)
            if not coef:
                continue
            k, m = squarefree_decompose(int(rad))
            acc[m] = acc.get(m, Fraction(0)) + coef * k
        den = 1
        for c in acc.values():
            den = den * c.denominator // gcd(den, c.denominator)
        nums, den = _reduce({m: int(c * den) for m, c in acc.items()}, den)
        return cls._raw(nums, den)

    @classmethod
    def sqrt(cls, n: int) -> Scalar:
        return cls.from_terms({n: 1})

    # -- inspection ---------------------------------------------------------

    @property
    def terms(self) -> dict[int, Fraction]:
        """Radicand to rational coefficient; empty for zero."""
        return {r: Fraction(c, self._den) for r, c in self._nums}

    @property
    def radicands(self) -> tuple[int, ...]:
        return tuple(r for r, _ in self._nums)

    def is_zero(self) -> bool:
        return not self._nums

    def is_rational(self) -> bool:
        return not self._nums or (len(self._nums) == 1 and self._nums[0][0] == 1)

    def as_rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is irrational")
        return Fraction(self._nums[0][1], self._den) if self._nums else Fraction(0)

    def sign(self) -> int:
        return _sign_of(self._nums)

    # -- arithmetic ---------------------------------------------------------

    def _combine(self, other: Scalar, negate: bool) -> tuple[dict[int, int], int]:
        d1, d2 = self._den, other._den
        if d1 == d2:
            m1 = m2 = 1
            den = d1
        else:
            g = gcd(d1, d2)
            m1, m2 = d2 // g, d1 // g
            den = d1 * m1
        acc = {r: c * m1 for r, c in self._nums}
        for r, c in other._nums:
            c = -c * m2 if negate else c * m2
            acc[r] = acc.get(r, 0) + c
        return acc, den

    def __add__(self, other: Number) -> Scalar:
        other = _coerce(other)
        if other is None:
            return NotImplemented
        if not other._nums:
            return self
        if not self._nums:
            return other
        return Scalar._raw(*_reduce(*self._combine(other, False)))

    __radd__ = __add__

    def __sub__(self, other: Number) -> Scalar:
        other = _coerce(other)
        if other is None:
            return NotImplemented
        if not other._nums:
            return self
        return Scalar._raw(*_reduce(*self._combine(other, True)))

    def __rsub__(self, other: Number) -> Scalar:
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return other - self

    def __neg__(self) -> Scalar:
        return Scalar._raw(tuple((r, -c) for r, c in self._nums), self._den)

    def __pos__(self) -> Scalar:
        return self

    def __abs__(self) -> Scalar:
        return -self if self.sign() < 0 else self

    def scale(self, q: int | Fraction) -> Scalar:
        """Multiply by a rational."""
        q = Fraction(q)
        if not q or not self._nums:
            return ZERO
        terms = {r: c * q.numerator for r, c in self._nums}
        return Scalar._raw(*_reduce(terms, self._den * q.denominator))

    def __mul__(self, other: Number) -> Scalar:
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if isinstance(other, Scalar):
            if other.is_rational():
                return self.scale(other.as_rational())
            if self.is_rational():
                return other.scale(self.as_rational())
            raise TypeError("product of two irrational scalars is not supported")
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other: Number) -> Scalar:
        if isinstance(other, Scalar):
            if not other.is_rational():
                raise TypeError("division by an irrational scalar is not supported")
            other = other.as_rational()
        if isinstance(other, (int, Fraction)):
            if not other:
                raise ZeroDivisionError("division by zero")
            return self.scale(1 / Fraction(other))
        return NotImplemented

    def floor(self) -> int:
        """Exact floor."""
        if self.is_rational():
            q = self.as_rational()
            return q.numerator // q.denominator
        bits = _START_BITS
        while bits <= DEFAULT_PRECISION_CAP:
            lo, hi = _interval(self._nums, bits)
            scale = self._den << bits
            flo, fhi = lo // scale, hi // scale
            if flo == fhi:
                return flo
            bits *= 2
        raise PrecisionExhausted("floor undecided")

    # -- comparison ---------------------------------------------------------

    def _cmp(self, other: Number) -> int:
        other = _coerce(other)
        if other is None:
            raise TypeError
        if not other._nums:
            return _sign_of(self._nums)
        a, b = self._nums, other._nums
        if len(a) == 1 and len(b) == 1 and a[0][0] == 1 and b[0][0] == 1:
            l, r = a[0][1] * other._den, b[0][1] * self._den
            return (l > r) - (l < r)
        acc, _ = self._combine(other, True)
        return _sign_of(tuple(sorted((r, c) for r, c in acc.items() if c)))

    def __lt__(self, other: Number) -> bool:
        try:
            return self._cmp(other) < 0
        except TypeError:
            return NotImplemented

    def __le__(self, other: Number) -> bool:
        try:
            return self._cmp(other) <= 0
        except TypeError:
            return NotImplemented

    def __gt__(self, other: Number) -> bool:
        try:
            return self._cmp(other) > 0
        except TypeError:
            return NotImplemented

    def __ge__(self, other: Number) -> bool:
        try:
            return self._cmp(other) >= 0
        except TypeError:
            return NotImplemented

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Scalar):
            return self._den == other._den and self._nums == other._nums
        if isinstance(other, (int, Fraction)):
            return self == Scalar(other)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            if self.is_rational():
                self._hash = hash(self.as_rational())
            else:
                self._hash = hash((self._nums, self._den))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self._nums)

    # -- conversion ---------------------------------------------------------

    def to_float(self, abs_error_bound: float = 1e-15) -> float:
        return to_float(self, abs_error_bound)

    def __float__(self) -> float:
        return to_float(self, 2.0**-60)

    def __str__(self) -> str:
        if not self._nums:
            return "0"
        parts = []
        for i, (rad, num) in enumerate(self._nums):
            coef = Fraction(num, self._den)
            neg = coef < 0
            mag = -coef if neg else coef
            if rad == 1:
                body = str(mag)
            elif mag == 1:
                body = f"sqrt({rad})"
            else:
                body = f"{mag}*sqrt({rad})"
            if i == 0:
                parts.append(f"-{body}" if neg else body)
            else:
                parts.append(f" - {body}" if neg else f" + {body}")
        return "".join(parts)

    def __repr__(self) -> str:
        return f"Scalar({str(self)!r})"


ZERO = Scalar._raw((), 1)
ONE = Scalar(1)


def _coerce(value: object) -> Scalar | None:
    if isinstance(value, Scalar):
        return value
    if isinstance(value, (int, Fraction)):
        return Scalar(value)
    return None


def sign(a: Scalar) -> int:
    """Exact sign of ``a``: -1, 0 or +1."""
    return a.sign()


def smax(*values: Scalar) -> Scalar:
    best = values[0]
    for v in values[1:]:
        if v._cmp(best) > 0:
            best = v
    return best


def smin(*values: Scalar) -> Scalar:
    best = values[0]
    for v in values[1:]:
        if v._cmp(best) < 0:
            best = v
    return best


def rational_ratio(a: Scalar, b: Scalar) -> Fraction | None:
    """Return ``q`` with ``a == q*b`` if such a rational exists, else ``None``.

    Decided by proportionality of the coefficient vectors.
    """
    if not b._nums:
        raise ZeroDivisionError("rational_ratio with zero denominator")
    if not a._nums:
        return Fraction(0)
    if len(a._nums) != len(b._nums):
        return None
    ratio = None
    for (ra, ca), (rb, cb) in zip(a._nums, b._nums):
        if ra != rb:
            return None
        r = Fraction(ca, cb)
        if ratio is None:
            ratio = r
        elif r != ratio:
            return None
    return ratio * b._den / a._den


def to_float(a: Scalar, abs_error_bound: float = 1e-15) -> float:
    """Float within ``abs_error_bound`` of ``a``.

    The bound is honoured down to the resolution of a double; a bound below
    half an ulp of the result cannot be met by any float.
    """
    if not abs_error_bound > 0:
        raise ValueError("abs_error_bound must be positive")
    nums = a._nums
    if not nums:
        return 0.0
    if len(nums) == 1 and nums[0][0] == 1:
        return nums[0][1] / a._den  # int/int true division is correctly rounded
    # enclosure width <= sum|num| / (den * 2**bits); make it <= bound / 2
    total = sum(abs(c) for _, c in nums)
    need = Fraction(2 * total) / (a._den * Fraction(abs_error_bound))
    bits = max(_START_BITS, (need.numerator // need.denominator).bit_length() + 1)
    lo, hi = _interval(nums, bits)
    return (lo + hi) / (a._den << (bits + 1))


_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<sqrt>sqrt)|(?P<op>[-+*/()]))")


def parse_scalar(text: str) -> Scalar:
    """Parse a literal such as ``"3/2 + 2*sqrt(2)"`` or ``"-5"``.

    Grammar (whitespace insignificant)::

        scalar   := ["-"] term (("+" | "-") term)*
        term     := rational ["*" radical] | radical
        radical  := "sqrt" "(" posint ")"
        rational := int ["/" posint]
    """
    tokens: list[tuple[str, str, int]] = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m:
            raise ScalarSyntaxError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", n))

    i = 0

    def peek() -> tuple[str, str, int]:
        return tokens[i]

    def take(kind: str, value: str | None = None) -> tuple[str, str, int]:
        nonlocal i
        tok = tokens[i]
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = value or kind
            got = tok[1] or "end of input"
            raise ScalarSyntaxError(f"expected {want!r}, found {got!r}", text, tok[2])
        i += 1
        return tok

    def radical() -> int:
        take("sqrt")
        take("op", "(")
        tok = take("int")
        value = int(tok[1])
        if value <= 0:
            raise ScalarSyntaxError("radicand must be positive", text, tok[2])
        take("op", ")")
        return value

    def term() -> tuple[Fraction, int]:
        kind, value, _ = peek()
        if kind == "sqrt":
            return Fraction(1), radical()
        num = int(take("int")[1])
        coef = Fraction(num)
        if peek()[:2] == ("op", "/"):
            take("op", "/")
            tok = take("int")
            den = int(tok[1])
            if den == 0:
                raise ScalarSyntaxError("zero denominator", text, tok[2])
            coef = Fraction(num, den)
        if peek()[:2] == ("op", "*"):
            take("op", "*")
            return coef, radical()
        return coef, 1

    acc: dict[int, Fraction] = {}

    def add(coef: Fraction, rad: int) -> None:
        acc[rad] = acc.get(rad, Fraction(0)) + coef

    negate = False
    if peek()[:2] == ("op", "-"):
        take("op", "-")
        negate = True
    coef, rad = term()
    add(-coef if negate else coef, rad)
    while peek()[0] != "end":
        tok = peek()
        if tok[0] != "op" or tok[1] not in "+-":
            raise ScalarSyntaxError(f"expected '+' or '-', found {tok[1]!r}", text, tok[2])
        take("op")
        coef, rad = term()
        add(coef if tok[1] == "+" else -coef, rad)
    return Scalar.from_terms(acc)
