"""Exact Laurent polynomials in the deformation parameter q over the rationals."""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, Union

from .errors import NotInvertible, PoleAtZero

ScalarLike = Union["QScalar", int, Fraction]


class QScalar:
    """A finite sum ``sum c_k q^k`` with ``k`` any integer and ``c_k`` a nonzero Fraction.

    Instances are immutable and hashable. Zero is the empty sum.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[int, Rational] | Iterable[tuple[int, Rational]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[int, Fraction] = {}
        for k, c in items:
            k = int(k)
            acc[k] = acc.get(k, Fraction(0)) + Fraction(c)
        self._terms = tuple(sorted((k, c) for k, c in acc.items() if c != 0))
        self._hash = None

    # construction helpers

    @classmethod
    def const(cls, c: Rational) -> QScalar:
        return cls({0: c})

    @classmethod
    def monomial(cls, c: Rational, k: int) -> QScalar:
        return cls({k: c})

    @classmethod
    def coerce(cls, value: ScalarLike) -> QScalar:
        if isinstance(value, QScalar):
            return value
        if isinstance(value, (int, Fraction)):
            return cls.const(value)
        raise TypeError(f"cannot convert {type(value).__name__} to QScalar")

    # inspection

    @property
    def terms(self) -> dict[int, Fraction]:
        return dict(self._terms)

    def items(self):
        return iter(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_one(self) -> bool:
        return self._terms == ((0, Fraction(1)),)

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def min_exponent(self) -> int | None:
        return self._terms[0][0] if self._terms else None

    def max_exponent(self) -> int | None:
        return self._terms[-1][0] if self._terms else None

    def constant_value(self) -> Fraction | None:
        """The rational value if this scalar does not depend on q, else None."""
        if not self._terms:
            return Fraction(0)
        if len(self._terms) == 1 and self._terms[0][0] == 0:
            return self._terms[0][1]
        return None

    # ring operations

    def __add__(self, other: ScalarLike) -> QScalar:
        try:
            other = QScalar.coerce(other)
        except TypeError:
            return NotImplemented
        return QScalar(self._terms + other._terms)

    __radd__ = __add__

    def __neg__(self) -> QScalar:
        return QScalar((k, -c) for k, c in self._terms)

    def __sub__(self, other: ScalarLike) -> QScalar:
        try:
            other = QScalar.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: ScalarLike) -> QScalar:
        return QScalar.coerce(other) - self

    def __mul__(self, other: ScalarLike) -> QScalar:
        try:
            other = QScalar.coerce(other)
        except TypeError:
            return NotImplemented
        return QScalar(
            (ka + kb, ca * cb) for ka, ca in self._terms for kb, cb in other._terms
        )

    __rmul__ = __mul__

    def __pow__(self, n: int) -> QScalar:
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def shift(self, k: int) -> QScalar:
        """Multiply by ``q^k``."""
        if k == 0:
            return self
        return QScalar((e + k, c) for e, c in self._terms)

    def inverse(self) -> QScalar:
        if len(self._terms) != 1:
            raise NotInvertible(f"{self} is not a unit of the Laurent ring")
        k, c = self._terms[0]
        return QScalar({-k: 1 / c})

    def evaluate(self, q0, exact: bool = False):
        """Value at ``q = q0``; Fraction when ``exact`` (q0 must then be rational)."""
        if self._terms and self._terms[0][0] < 0 and q0 == 0:
            raise PoleAtZero(f"{self} has a pole at q = 0")
        if exact:
            q0 = Fraction(q0)
            return sum((c * q0**k for k, c in self._terms), Fraction(0))
        if q0 == 1:
            return float(sum((c for _, c in self._terms), Fraction(0)))
        q0 = float(q0)
        return float(sum(float(c) * q0**k for k, c in self._terms))

    # protocol

    def __eq__(self, other) -> bool:
        if isinstance(other, QScalar):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self._terms == QScalar.const(other)._terms
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self._terms)
        return self._hash

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __repr__(self) -> str:
        return f"QScalar({format_scalar(self)!r})"

    def __str__(self) -> str:
        return format_scalar(self)


ZERO = QScalar()
ONE = QScalar.const(1)
Q = QScalar.monomial(1, 1)


def _format_rational(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_scalar_term(c: Fraction, k: int) -> str:
    """Text of ``c q^k`` with ``c > 0``."""
    if k == 0:
        return _format_rational(c)
    qpart = "q" if k == 1 else f"q^{k}"
    if c == 1:
        return qpart
    return f"{_format_rational(c)}*{qpart}"


def format_scalar(a: QScalar) -> str:
    """Canonical text, ascending exponent: ``1/2*q^-1 + 3 + 2*q^2``."""
    if a.is_zero():
        return "0"
    parts: list[str] = []
    for i, (k, c) in enumerate(a.items()):
        body = format_scalar_term(abs(c), k)
        if i == 0:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append((" - " if c < 0 else " + ") + body)
    return "".join(parts)


def scalar_ring_op(a: QScalar, b: QScalar, op: str) -> QScalar:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown ring operation {op!r}")


def scalar_eval(a: QScalar, q0, exact: bool = False):
    return a.evaluate(q0, exact=exact)


def scalar_invert(a: QScalar) -> QScalar:
    return a.inverse()
