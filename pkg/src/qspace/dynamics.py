"""Vector fields on quantum n-space, their brackets, and the classical shadow."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import mpmath
import numpy as np

from .errors import DimensionMismatch, NotAHomomorphism, PoleAtZero
from .qalgebra import Multidegree, QPoly, generators, substitute
from .qcoeff import Q


@dataclass(frozen=True)
class ValidationReport:
    strict_ok: bool
    residuals: dict[tuple[int, int], QPoly]


@dataclass(frozen=True)
class VectorField:
    """A map of quantum n-space given by the images of its generators.

    With ``strict=True`` the field refuses to act unless it preserves every
    relation ``x_j x_i = q x_i x_j``.
    """

    images: tuple[QPoly, ...]
    strict: bool = False

    def __post_init__(self):
        images = tuple(self.images)
        object.__setattr__(self, "images", images)
        if not images:
            raise ValueError("a vector field needs at least one generator image")
        n = len(images)
        for img in images:
            if img.dim != n:
                raise DimensionMismatch(f"image of dimension {img.dim} in a {n}-dimensional field")
        if self.strict and not validate_field(self).strict_ok:
            raise NotAHomomorphism("field does not preserve the commutation relations")

    @property
    def dim(self) -> int:
        return len(self.images)

    @classmethod
    def identity(cls, dim: int) -> VectorField:
        return cls(tuple(generators(dim)))

    @classmethod
    def from_images(cls, images: Sequence[QPoly], strict: bool = False) -> VectorField:
        return cls(tuple(images), strict)

    def __call__(self, f: QPoly) -> QPoly:
        return apply_field(self, f)


def validate_field(X: VectorField) -> ValidationReport:
    """Residuals ``X(x_j) X(x_i) - q X(x_i) X(x_j)`` for every pair ``i < j``."""
    residuals = {}
    imgs = X.images
    for i in range(X.dim):
        for j in range(i + 1, X.dim):
            residuals[(i, j)] = imgs[j] * imgs[i] - (imgs[i] * imgs[j]).scale(Q)
    return ValidationReport(all(r.is_zero() for r in residuals.values()), residuals)


def apply_field(X: VectorField, f: QPoly) -> QPoly:
    if f.dim != X.dim:
        raise DimensionMismatch(f"field of dimension {X.dim} applied to element of dimension {f.dim}")
    return substitute(f, X.images)


def compose(X: VectorField, Y: VectorField) -> VectorField:
    """``X o Y``: first ``Y``, then ``X``."""
    if X.dim != Y.dim:
        raise DimensionMismatch(f"dimensions {X.dim} and {Y.dim}")
    return VectorField(tuple(apply_field(X, img) for img in Y.images), X.strict and Y.strict)


def bracket_apply(X: VectorField, Y: VectorField, f: QPoly) -> QPoly:
    """Action of the commutator ``X o Y - Y o X`` on ``f``."""
    if X.dim != Y.dim:
        raise DimensionMismatch(f"dimensions {X.dim} and {Y.dim}")
    return apply_field(X, apply_field(Y, f)) - apply_field(Y, apply_field(X, f))


def leibniz_residual(X: VectorField, Y: VectorField, Z: VectorField, f: QPoly) -> QPoly:
    """``[X, YZ](f) - ([X, Y](f) Z(f) + Y(f) [X, Z](f))``.

    The product of two operators acts pointwise, ``(AB)(g) = A(g) B(g)``.
    """
    if not X.dim == Y.dim == Z.dim:
        raise DimensionMismatch("fields of different dimensions")

    def W(g: QPoly) -> QPoly:
        return apply_field(Y, g) * apply_field(Z, g)

    lhs = apply_field(X, W(f)) - W(apply_field(X, f))
    rhs = bracket_apply(X, Y, f) * apply_field(Z, f) + apply_field(Y, f) * bracket_apply(X, Z, f)
    return lhs - rhs


@dataclass(frozen=True)
class CPoly:
    """Commutative Laurent polynomial in ``t_1..t_n`` with real (or rational) coefficients."""

    dim: int
    terms: Mapping[Multidegree, float] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for m, c in self.terms.items():
            m = tuple(int(e) for e in m)
            if len(m) != self.dim:
                raise DimensionMismatch(f"multidegree {m} in dimension {self.dim}")
            if c != 0:
                clean[m] = clean.get(m, 0) + c
        object.__setattr__(self, "terms", {m: c for m, c in clean.items() if c != 0})

    def __add__(self, other: CPoly) -> CPoly:
        if self.dim != other.dim:
            raise DimensionMismatch(f"dimensions {self.dim} and {other.dim}")
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return CPoly(self.dim, out)

    def __mul__(self, other: CPoly) -> CPoly:
        if self.dim != other.dim:
            raise DimensionMismatch(f"dimensions {self.dim} and {other.dim}")
        out: dict = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                m = tuple(a + b for a, b in zip(ma, mb))
                out[m] = out.get(m, 0) + ca * cb
        return CPoly(self.dim, out)

    def partial(self, j: int) -> CPoly:
        out = {}
        for m, c in self.terms.items():
            e = m[j]
            if e:
                dm = list(m)
                dm[j] -= 1
                out[tuple(dm)] = c * e
        return CPoly(self.dim, out)

    def __call__(self, p: Sequence[float]) -> float:
        return evaluate_cpoly(self, p)

    def is_zero(self) -> bool:
        return not self.terms


def evaluate_cpoly(cp: CPoly, p: Sequence[float]) -> float:
    if len(p) != cp.dim:
        raise DimensionMismatch(f"point of length {len(p)} for dimension {cp.dim}")
    total = 0.0
    for m, c in cp.terms.items():
        term = c
        for i, e in enumerate(m):
            if e:
                if e < 0 and p[i] == 0:
                    raise PoleAtZero(f"coordinate t{i + 1} is zero but appears with exponent {e}")
                term = term * p[i] ** e
        total = total + term
    return total


def classicalize(f: QPoly, q0=1, exact: bool = False) -> CPoly:
    """Evaluate every coefficient at ``q = q0`` and forget the ordering."""
    return CPoly(f.dim, {m: c.evaluate(q0, exact=exact) for m, c in f.items()})


def classicalize_field(X: VectorField, q0=1) -> list[CPoly]:
    return [classicalize(img, q0) for img in X.images]


def jacobian(F: Sequence[CPoly], p: Sequence[float]) -> np.ndarray:
    """Matrix of formal partial derivatives ``dF_i/dt_j`` at ``p``."""
    n = len(F)
    J = np.empty((n, n))
    for i, Fi in enumerate(F):
        if Fi.dim != n:
            raise DimensionMismatch(f"component of dimension {Fi.dim} in a system of size {n}")
        for j in range(n):
            J[i, j] = float(evaluate_cpoly(Fi.partial(j), p))
    return J


class CompiledField:
    """Vectorized evaluator for a classicalized field ``F(x)``, ``x`` of shape (..., n)."""

    object_dtype = False

    def __init__(self, F: Sequence[CPoly]):
        self.dim = len(F)
        monos = sorted({m for Fi in F for m in Fi.terms})
        self.exps = np.array(monos, dtype=float).reshape(len(monos), self.dim)
        self.coef = np.zeros((self.dim, len(monos)))
        index = {m: k for k, m in enumerate(monos)}
        for i, Fi in enumerate(F):
            for m, c in Fi.terms.items():
                self.coef[i, index[m]] = float(c)
        self.negative = (self.exps < 0).any(axis=0)

    def has_pole(self, x: np.ndarray) -> bool:
        if not self.negative.any():
            return False
        return bool(((x == 0) & self.negative).any())

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.exps.shape[0] == 0:
            return np.zeros_like(x)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            # (..., 1, n) ** (k, n) -> (..., k, n)
            powers = np.where(self.exps == 0, 1.0, x[..., None, :] ** self.exps)
            monos = powers.prod(axis=-1)
        return monos @ self.coef.T


class MPCompiledField:
    """Arbitrary-precision evaluator (mpmath) for a single state vector.

    Coefficients must be exact (Fractions) so that no float rounding leaks in.
    """

    object_dtype = True

    def __init__(self, F: Sequence[CPoly], dps: int):
        self.dps = dps
        self.mpf = mpmath.mpf
        self.dim = len(F)
        with mpmath.workdps(dps):
            self.rows = [
                [(self._exact(c), m) for m, c in sorted(Fi.terms.items())] for Fi in F
            ]
        self.negative = [any(m[i] < 0 for Fi in F for m in Fi.terms) for i in range(self.dim)]

    def _exact(self, c):
        c = Fraction(c)
        return self.mpf(c.numerator) / c.denominator

    def has_pole(self, x) -> bool:
        return any(neg and v == 0 for neg, v in zip(self.negative, x))

    def __call__(self, x):
        out = np.empty(self.dim, dtype=object)
        with mpmath.workdps(self.dps):
            for i, row in enumerate(self.rows):
                acc = self.mpf(0)
                for c, m in row:
                    term = c
                    for v, e in zip(x, m):
                        if e:
                            term = term * v**e
                    acc += term
                out[i] = acc
        return out
