"""Text formats: algebra expressions and line-oriented system definition files.

Expression grammar::

    expr     := ("+"|"-")? term (("+"|"-") term)*
    term     := factor ("*"? factor)*
    factor   := base ("^" signed_int)?
    base     := "q" | generator | rational | "(" expr ")"
    generator:= "x" int | "x" | "y"          # aliases only when dim <= 2
    rational := int ("/" int)?

Juxtaposition multiplies. Products are left-associative and order-sensitive,
so ``y*x`` normal-orders to ``q*x*y``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, NamedTuple

from .errors import BadQValue, MissingField, NotInvertible, ParseError, UnknownGenerator
from .qalgebra import QPoly
from .qcoeff import QScalar, format_scalar, format_scalar_term


class Token(NamedTuple):
    kind: str  # NUM, Q, GEN, OP, EOF
    value: object
    line: int
    column: int


_OPS = set("+-*/^()")


def tokenize(text: str, dim: int, line: int = 1, column: int = 1) -> Iterator[Token]:
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            column = 1
            i += 1
            continue
        if ch.isspace():
            i += 1
            column += 1
            continue
        start_col = column
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            yield Token("NUM", int(text[i:j]), line, start_col)
            column += j - i
            i = j
            continue
        if ch in _OPS:
            yield Token("OP", ch, line, start_col)
            i += 1
            column += 1
            continue
        if ch == "q":
            yield Token("Q", None, line, start_col)
            i += 1
            column += 1
            continue
        if ch == "x":
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            if j > i + 1:
                idx = int(text[i + 1 : j])
                if not 1 <= idx <= dim:
                    raise UnknownGenerator(
                        f"generator x{idx} does not exist in dimension {dim}", line, start_col
                    )
                yield Token("GEN", idx - 1, line, start_col)
            else:
                if dim > 2:
                    raise UnknownGenerator(
                        "alias 'x' is only available for dimension <= 2; use x1..xn", line, start_col
                    )
                yield Token("GEN", 0, line, start_col)
            column += j - i
            i = j
            continue
        if ch == "y":
            if dim != 2:
                raise UnknownGenerator(f"alias 'y' is only available for dimension 2", line, start_col)
            yield Token("GEN", 1, line, start_col)
            i += 1
            column += 1
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            raise UnknownGenerator(f"unknown symbol {text[i:j]!r}", line, start_col)
        raise ParseError(f"unexpected character {ch!r}", line, start_col)
    yield Token("EOF", None, line, column)


class _Parser:
    def __init__(self, text: str, dim: int, line: int = 1, column: int = 1):
        self.dim = dim
        self.tokens = list(tokenize(text, dim, line, column))
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.column)

    def is_op(self, *ops: str) -> bool:
        return self.tok.kind == "OP" and self.tok.value in ops

    def expect_op(self, op: str) -> Token:
        if not self.is_op(op):
            found = "end of input" if self.tok.kind == "EOF" else repr(self._describe(self.tok))
            raise self.error(f"expected {op!r}, found {found}")
        return self.advance()

    @staticmethod
    def _describe(tok: Token) -> str:
        if tok.kind == "GEN":
            return f"x{tok.value + 1}"
        if tok.kind == "Q":
            return "q"
        return str(tok.value)

    def parse(self) -> QPoly:
        result = self.expr()
        if self.tok.kind != "EOF":
            raise self.error(f"unexpected {self._describe(self.tok)!r}")
        return result

    def expr(self) -> QPoly:
        negate = False
        if self.is_op("+", "-"):
            negate = self.advance().value == "-"
        result = self.term()
        if negate:
            result = -result
        while self.is_op("+", "-"):
            op = self.advance().value
            rhs = self.term()
            result = result + rhs if op == "+" else result - rhs
        return result

    def starts_factor(self) -> bool:
        t = self.tok
        return t.kind in ("NUM", "Q", "GEN") or (t.kind == "OP" and t.value == "(")

    def term(self) -> QPoly:
        result = self.factor()
        while True:
            if self.is_op("*"):
                self.advance()
                result = result * self.factor()
            elif self.starts_factor():
                result = result * self.factor()
            else:
                return result

    def factor(self) -> QPoly:
        start = self.tok
        base = self.base()
        if self.is_op("^"):
            self.advance()
            sign = 1
            if self.is_op("+", "-"):
                sign = -1 if self.advance().value == "-" else 1
            if self.tok.kind != "NUM":
                raise self.error("expected integer exponent")
            e = sign * self.advance().value
            try:
                base = base**e
            except (NotInvertible, ZeroDivisionError):
                raise self.error("negative power of a non-invertible expression", start) from None
        return base

    def base(self) -> QPoly:
        t = self.tok
        if t.kind == "Q":
            self.advance()
            return QPoly.constant(self.dim, QScalar.monomial(1, 1))
        if t.kind == "GEN":
            self.advance()
            return QPoly.generator(self.dim, t.value)
        if t.kind == "NUM":
            self.advance()
            value = Fraction(t.value)
            if self.is_op("/"):
                slash = self.advance()
                if self.tok.kind != "NUM":
                    raise self.error("expected integer denominator")
                den = self.advance().value
                if den == 0:
                    raise self.error("zero denominator", slash)
                value = value / den
            return QPoly.constant(self.dim, value)
        if t.kind == "OP" and t.value == "(":
            self.advance()
            inner = self.expr()
            self.expect_op(")")
            return inner
        if t.kind == "EOF":
            raise self.error("unexpected end of input")
        raise self.error(f"unexpected {self._describe(t)!r}")


def parse_expr(text: str, dim: int, *, line: int = 1, column: int = 1) -> QPoly:
    """Parse ``text`` into a normal-ordered element of ``dim``-dimensional quantum space."""
    if dim < 1:
        raise ValueError("dimension must be at least 1")
    return _Parser(text, dim, line, column).parse()


def generator_name(i: int, dim: int, aliases: bool) -> str:
    if aliases and dim <= 2:
        return "xy"[i]
    return f"x{i + 1}"


def format_monomial(mdeg, dim: int, aliases: bool) -> str:
    parts = []
    for i, e in enumerate(mdeg):
        if e == 0:
            continue
        name = generator_name(i, dim, aliases)
        parts.append(name if e == 1 else f"{name}^{e}")
    return "*".join(parts)


def print_canonical(f: QPoly, aliases: bool | None = None) -> str:
    """Deterministic text with terms in ascending lexicographic multidegree order.

    ``aliases`` defaults to using ``x``/``y`` in dimension 2 and ``x1..xn`` otherwise.
    """
    if aliases is None:
        aliases = f.dim == 2
    pieces: list[tuple[bool, str]] = []  # (negative, body)
    for mdeg, c in f.items():
        mono = format_monomial(mdeg, f.dim, aliases)
        if not mono:
            for k, ck in c.items():
                pieces.append((ck < 0, format_scalar_term(abs(ck), k)))
        elif c.is_monomial():
            (k, ck), = c.items()
            coef = format_scalar_term(abs(ck), k)
            pieces.append((ck < 0, mono if coef == "1" else f"{coef}*{mono}"))
        else:
            pieces.append((False, f"({format_scalar(c)})*{mono}"))
    if not pieces:
        return "0"
    out = []
    for i, (neg, body) in enumerate(pieces):
        if i == 0:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out)


def format_real_poly(cp, aliases: bool | None = None) -> str:
    """Text for a commutative polynomial with float coefficients (``dynamics.CPoly``)."""
    if aliases is None:
        aliases = cp.dim == 2
    pieces = []
    for mdeg, c in sorted(cp.terms.items()):
        mono = format_monomial(mdeg, cp.dim, aliases)
        mag = repr(abs(float(c)))
        pieces.append((c < 0, f"{mag}*{mono}" if mono else mag))
    if not pieces:
        return "0"
    return "".join(
        (("-" if neg else "") if i == 0 else (" - " if neg else " + ")) + body
        for i, (neg, body) in enumerate(pieces)
    )


@dataclass(frozen=True)
class SystemDef:
    """Serialized form of an autonomous system ``alpha o X = d alpha/dt``.

    ``q_value`` is None for a symbolic deformation parameter. ``second_field``
    holds optional ``Y[i]`` images (used by the bracket command).
    """

    dim: int
    field_images: tuple[QPoly, ...]
    q_value: float | None = None
    initial_point: tuple[float, ...] | None = None
    notes: str | None = None
    second_field: tuple[QPoly, ...] | None = None

    @property
    def q_symbolic(self) -> bool:
        return self.q_value is None

    def to_text(self) -> str:
        lines = [f"dim = {self.dim}", f"q = {'symbolic' if self.q_value is None else repr(self.q_value)}"]
        lines += [f"X[{i + 1}] = {print_canonical(img)}" for i, img in enumerate(self.field_images)]
        if self.second_field is not None:
            lines += [f"Y[{i + 1}] = {print_canonical(img)}" for i, img in enumerate(self.second_field)]
        if self.initial_point is not None:
            lines.append("point = " + ", ".join(repr(float(v)) for v in self.initial_point))
        if self.notes:
            lines.append(f"notes = {self.notes}")
        return "\n".join(lines) + "\n"


_KEY_RE = re.compile(r"^(dim|q|point|notes|([XY])\[(\d+)\])$")


def parse_q_value(text: str, line: int = 1, column: int = 1) -> float | None:
    text = text.strip()
    if text == "symbolic":
        return None
    try:
        value = float(text)
    except ValueError:
        raise BadQValue(f"q must be 'symbolic' or a decimal, got {text!r}", line, column) from None
    if not (math.isfinite(value) and 0 < value <= 1):
        raise BadQValue(f"q = {text} lies outside (0, 1]", line, column)
    return value


def parse_system(text: str) -> SystemDef:
    """Parse a ``key = value`` system file (keys: dim, q, X[i], Y[i], point, notes)."""
    raw: dict[str, tuple[str, int, int]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        hash_at = line.find("#")
        content = line if hash_at < 0 else line[:hash_at]
        if not content.strip():
            continue
        if "=" not in content:
            col = len(content) - len(content.lstrip()) + 1
            raise ParseError("expected 'key = value'", lineno, col)
        key_part, value = content.split("=", 1)
        key = key_part.strip()
        key_col = len(key_part) - len(key_part.lstrip()) + 1
        if not _KEY_RE.match(key):
            raise ParseError(f"unknown key {key!r}", lineno, key_col)
        if key in raw:
            raise ParseError(f"duplicate key {key!r}", lineno, key_col)
        value_col = len(key_part) + 2 + (len(value) - len(value.lstrip()))
        raw[key] = (value.strip(), lineno, value_col)

    if "dim" not in raw:
        raise MissingField("missing field 'dim'", 1, 1)
    dim_text, dline, dcol = raw["dim"]
    if not re.fullmatch(r"\d+", dim_text) or int(dim_text) < 1:
        raise ParseError(f"dim must be a positive integer, got {dim_text!r}", dline, dcol)
    dim = int(dim_text)

    q_value = None
    if "q" in raw:
        qtext, qline, qcol = raw["q"]
        q_value = parse_q_value(qtext, qline, qcol)

    def read_field(letter: str, required: bool) -> tuple[QPoly, ...] | None:
        present = [k for k in raw if k.startswith(letter + "[")]
        if not present and not required:
            return None
        images = []
        for i in range(1, dim + 1):
            key = f"{letter}[{i}]"
            if key not in raw:
                raise MissingField(f"missing field {key!r}", len(text.splitlines()) or 1, 1)
            etext, eline, ecol = raw[key]
            images.append(parse_expr(etext, dim, line=eline, column=ecol))
        for k in present:
            idx = int(k[2:-1])
            if not 1 <= idx <= dim:
                _, eline, _ = raw[k]
                raise ParseError(f"{k} exceeds dimension {dim}", eline, 1)
        return tuple(images)

    images = read_field("X", True)
    second = read_field("Y", False)

    point = None
    if "point" in raw:
        ptext, pline, pcol = raw["point"]
        try:
            point = tuple(float(v) for v in ptext.split(","))
        except ValueError:
            raise ParseError(f"point must be comma-separated reals, got {ptext!r}", pline, pcol) from None
        if len(point) != dim or not all(math.isfinite(v) for v in point):
            raise ParseError(f"point must have {dim} finite coordinates", pline, pcol)

    notes = raw["notes"][0] if "notes" in raw else None
    return SystemDef(dim, images, q_value, point, notes, second)
