"""Normal-ordered arithmetic in quantum n-space.

Generators ``x_1..x_n`` obey ``x_j x_i = q x_i x_j`` for ``i < j``; every element
is stored as a sum of normal-ordered monomials ``x_1^a_1 ... x_n^a_n`` (Laurent
exponents allowed) with ``QScalar`` coefficients, which are central.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import DimensionMismatch, NotInvertible, NotInvertibleImage, PoleAtZero
from .qcoeff import ONE, QScalar, ScalarLike

Multidegree = tuple[int, ...]


def mono_mul(a: Multidegree, b: Multidegree) -> tuple[int, Multidegree]:
    """Return ``(k, c)`` with ``x^a x^b = q^k x^c`` in normal order.

    Moving each ``x_i`` of the right factor past each ``x_j`` (``j > i``) of the
    left factor costs one power of q per swap, so ``k = sum_{i<j} a_j b_i``.
    """
    if len(a) != len(b):
        raise DimensionMismatch(f"multidegrees of length {len(a)} and {len(b)}")
    k = 0
    suffix = 0  # running sum of a_j over j > i
    for i in range(len(a) - 1, -1, -1):
        k += suffix * b[i]
        suffix += a[i]
    return k, tuple(x + y for x, y in zip(a, b))


class QPoly:
    """Element of quantum n-space: a finite map multidegree -> nonzero QScalar."""

    __slots__ = ("dim", "_terms", "_hash")

    def __init__(self, dim: int, terms: Mapping[Multidegree, ScalarLike] | Iterable = ()):
        if dim < 1:
            raise ValueError("dimension must be at least 1")
        self.dim = dim
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Multidegree, QScalar] = {}
        for mdeg, c in items:
            mdeg = tuple(int(e) for e in mdeg)
            if len(mdeg) != dim:
                raise DimensionMismatch(f"multidegree {mdeg} in dimension {dim}")
            c = QScalar.coerce(c)
            acc[mdeg] = acc[mdeg] + c if mdeg in acc else c
        self._terms = tuple(sorted((m, c) for m, c in acc.items() if not c.is_zero()))
        self._hash = None

    @classmethod
    def zero(cls, dim: int) -> QPoly:
        return cls(dim)

    @classmethod
    def constant(cls, dim: int, c: ScalarLike) -> QPoly:
        return cls(dim, {(0,) * dim: c})

    @classmethod
    def one(cls, dim: int) -> QPoly:
        return cls.constant(dim, ONE)

    @classmethod
    def generator(cls, dim: int, i: int) -> QPoly:
        """The generator ``x_i`` (0-based index)."""
        if not 0 <= i < dim:
            raise DimensionMismatch(f"generator index {i} out of range for dimension {dim}")
        mdeg = [0] * dim
        mdeg[i] = 1
        return cls(dim, {tuple(mdeg): ONE})

    @classmethod
    def monomial(cls, dim: int, mdeg: Sequence[int], c: ScalarLike = ONE) -> QPoly:
        return cls(dim, {tuple(mdeg): c})

    @property
    def terms(self) -> dict[Multidegree, QScalar]:
        return dict(self._terms)

    def items(self):
        return iter(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def is_invertible(self) -> bool:
        """Single normal-ordered monomial with a single-term coefficient."""
        return len(self._terms) == 1 and self._terms[0][1].is_monomial()

    def _check(self, other: QPoly) -> None:
        if self.dim != other.dim:
            raise DimensionMismatch(f"dimensions {self.dim} and {other.dim}")

    def _coerce(self, other) -> QPoly:
        if isinstance(other, QPoly):
            self._check(other)
            return other
        return QPoly.constant(self.dim, QScalar.coerce(other))

    def __add__(self, other) -> QPoly:
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return QPoly(self.dim, self._terms + other._terms)

    __radd__ = __add__

    def __neg__(self) -> QPoly:
        return QPoly(self.dim, ((m, -c) for m, c in self._terms))

    def __sub__(self, other) -> QPoly:
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> QPoly:
        return self._coerce(other) - self

    def __mul__(self, other) -> QPoly:
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        out = []
        for ma, ca in self._terms:
            for mb, cb in other._terms:
                k, mc = mono_mul(ma, mb)
                out.append((mc, (ca * cb).shift(k)))
        return QPoly(self.dim, out)

    def __rmul__(self, other) -> QPoly:
        # scalars are central
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return other * self

    def scale(self, c: ScalarLike) -> QPoly:
        c = QScalar.coerce(c)
        return QPoly(self.dim, ((m, cm * c) for m, cm in self._terms))

    def inverse(self) -> QPoly:
        if not self.is_invertible():
            raise NotInvertible(f"{self!r} is not an invertible monomial")
        (mdeg, c), = self._terms
        neg = tuple(-e for e in mdeg)
        k, _ = mono_mul(mdeg, neg)
        return QPoly(self.dim, {neg: c.inverse().shift(-k)})

    def __pow__(self, n: int) -> QPoly:
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = QPoly.one(self.dim)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def negative_generators(self) -> set[int]:
        """Indices of generators that appear with a negative exponent."""
        return {i for m, _ in self._terms for i, e in enumerate(m) if e < 0}

    def __eq__(self, other) -> bool:
        if isinstance(other, QPoly):
            return self.dim == other.dim and self._terms == other._terms
        if isinstance(other, (int, Fraction, QScalar)):
            return self == QPoly.constant(self.dim, other)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.dim, self._terms))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __repr__(self) -> str:
        from .qparse import print_canonical

        return f"QPoly({self.dim}, {print_canonical(self)!r})"

    def __str__(self) -> str:
        from .qparse import print_canonical

        return print_canonical(self)


def generators(dim: int) -> list[QPoly]:
    return [QPoly.generator(dim, i) for i in range(dim)]


def poly_op(f: QPoly, g: QPoly, op: str) -> QPoly:
    f._check(g)
    if op == "add":
        return f + g
    if op == "sub":
        return f - g
    if op == "mul":
        return f * g
    raise ValueError(f"unknown ring operation {op!r}")


def eval_classical(f: QPoly, p: Sequence, q0=1, exact: bool = False):
    """Evaluate ``f`` at the classical point ``p`` with coefficients taken at ``q = q0``.

    In exact mode ``p`` and ``q0`` are converted to Fractions and the result is a
    Fraction; otherwise floats are used throughout.
    """
    if len(p) != f.dim:
        raise DimensionMismatch(f"point of length {len(p)} for dimension {f.dim}")
    conv = Fraction if exact else float
    p = [conv(v) for v in p]
    total = conv(0)
    for mdeg, c in f.items():
        term = c.evaluate(q0, exact=exact)
        for i, e in enumerate(mdeg):
            if e < 0 and p[i] == 0:
                raise PoleAtZero(f"coordinate x{i + 1} is zero but appears with exponent {e}")
            if e:
                term *= p[i] ** e
        total += term
    return total


def substitute(f: QPoly, images: Sequence[QPoly]) -> QPoly:
    """Extend generator images basis-wise over the normal-ordered expansion of ``f``.

    Each monomial ``x^I`` goes to the ordered product
    ``images[0]^I_0 ... images[n-1]^I_{n-1}``; coefficients pass through.
    """
    if len(images) != f.dim:
        raise DimensionMismatch(f"{len(images)} images for dimension {f.dim}")
    target_dim = images[0].dim
    for img in images:
        if img.dim != target_dim:
            raise DimensionMismatch("images of different dimensions")
    for i in f.negative_generators():
        if not images[i].is_invertible():
            raise NotInvertibleImage(
                f"generator x{i + 1} appears with a negative exponent but its image is not an invertible monomial"
            )

    cache: dict[tuple[int, int], QPoly] = {}

    def power(i: int, e: int) -> QPoly:
        key = (i, e)
        if key not in cache:
            cache[key] = images[i] ** e
        return cache[key]

    out: list = []
    for mdeg, c in f.items():
        prod = QPoly.one(target_dim)
        for i, e in enumerate(mdeg):
            if e:
                prod = prod * power(i, e)
        out.extend((m, cm * c) for m, cm in prod.items())
    return QPoly(target_dim, out)
