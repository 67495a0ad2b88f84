"""Sparse multivariate polynomial arithmetic over float coefficients.

A polynomial in n variables is a map from exponent tuples (length n, one
non-negative integer per variable) to nonzero float coefficients.  The zero
polynomial is the empty map and its degree is the sentinel ``-inf`` so that
no integer arithmetic can accidentally be performed on it.

Terms are kept in no particular order internally; printing and hashing use
graded lexicographic order so text output is deterministic.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .errors import PolynomialParseError

Exponent = tuple[int, ...]

NEG_INF = float("-inf")


@dataclass(frozen=True)
class Polynomial:
    """Sparse polynomial: ``terms`` maps exponent tuples to coefficients.

    Instances are immutable; all arithmetic returns new objects.  Use
    :func:`make` (or the module-level constructors) rather than calling the
    constructor with unnormalized data.
    """

    n: int
    terms: dict[Exponent, float] = field(default_factory=dict)

    def degree(self) -> float:
        """Total degree; ``-inf`` for the zero polynomial."""
        if not self.terms:
            return NEG_INF
        return max(sum(e) for e in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self.terms)

    def constant_value(self) -> float:
        return self.terms.get((0,) * self.n, 0.0)

    def is_homogeneous(self) -> bool:
        degrees = {sum(e) for e in self.terms}
        return len(degrees) <= 1

    # -- ring operations ---------------------------------------------------

    def __add__(self, other: Polynomial | float | int) -> Polynomial:
        other = _coerce(other, self.n)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0.0) + c
        return make(self.n, out)

    def __radd__(self, other):
        return self.__add__(other)

    def __neg__(self) -> Polynomial:
        return Polynomial(self.n, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: Polynomial | float | int) -> Polynomial:
        return self.__add__(-_coerce(other, self.n))

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other: Polynomial | float | int) -> Polynomial:
        if isinstance(other, (int, float)):
            if other == 0:
                return zero(self.n)
            return make(self.n, {e: c * other for e, c in self.terms.items()})
        if self.n != other.n:
            raise ValueError("polynomial dimension mismatch")
        out: dict[Exponent, float] = {}
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                out[e] = out.get(e, 0.0) + ca * cb
        return make(self.n, out)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __pow__(self, k: int) -> Polynomial:
        if k < 0:
            raise ValueError("negative exponent")
        result = constant(self.n, 1.0)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    # -- calculus and evaluation -------------------------------------------

    def differentiate(self, i: int) -> Polynomial:
        """Exact partial derivative with respect to variable ``i``."""
        if not 0 <= i < self.n:
            raise IndexError(f"variable index {i} out of range for n={self.n}")
        out: dict[Exponent, float] = {}
        for e, c in self.terms.items():
            if e[i] == 0:
                continue
            de = list(e)
            de[i] -= 1
            out[tuple(de)] = out.get(tuple(de), 0.0) + c * e[i]
        return make(self.n, out)

    def evaluate(self, x) -> complex | float:
        """Term-sum evaluation at a real or complex point of length n."""
        if len(x) != self.n:
            raise ValueError(f"point has length {len(x)}, expected {self.n}")
        total = 0.0
        for e, c in self.terms.items():
            term = c
            for xi, ei in zip(x, e):
                if ei:
                    term = term * xi**ei
            total = total + term
        return total

    # -- change of variables -------------------------------------------------

    def homogenize(self) -> Polynomial:
        """Homogenize with a fresh first variable; output has n+1 variables."""
        if not self.terms:
            return zero(self.n + 1)
        d = int(self.degree())
        out = {(d - sum(e),) + e: c for e, c in self.terms.items()}
        return Polynomial(self.n + 1, out)

    def dehomogenize(self) -> Polynomial:
        """Substitute 1 for the first variable and drop it."""
        out: dict[Exponent, float] = {}
        for e, c in self.terms.items():
            key = e[1:]
            out[key] = out.get(key, 0.0) + c
        return make(self.n - 1, out)

    def restrict_chart(self) -> Polynomial:
        """Substitute (first var -> 0, second var -> 1); for homogeneous input.

        Returns a polynomial in the remaining n-2 variables.  May be zero;
        callers decide how to handle that.
        """
        out: dict[Exponent, float] = {}
        for e, c in self.terms.items():
            if e[0] != 0:
                continue
            key = e[2:]
            out[key] = out.get(key, 0.0) + c
        return make(self.n - 2, out)

    def substitute(self, values: dict[int, float]) -> Polynomial:
        """Fix some variables to numbers, returning a polynomial in the rest."""
        keep = [i for i in range(self.n) if i not in values]
        out: dict[Exponent, float] = {}
        for e, c in self.terms.items():
            coef = c
            for i, v in values.items():
                if e[i]:
                    coef *= v ** e[i]
            key = tuple(e[i] for i in keep)
            out[key] = out.get(key, 0.0) + coef
        return make(len(keep), out)

    def restrict_ray(self, direction) -> Polynomial:
        """Substitute x_i -> t * direction_i, giving a univariate polynomial in t."""
        if len(direction) != self.n:
            raise ValueError("direction length mismatch")
        out: dict[Exponent, float] = {}
        for e, c in self.terms.items():
            coef = c
            for vi, ei in zip(direction, e):
                if ei:
                    coef *= vi**ei
            key = (sum(e),)
            out[key] = out.get(key, 0.0) + coef
        return make(1, out)

    # -- presentation --------------------------------------------------------

    def sorted_terms(self) -> list[tuple[Exponent, float]]:
        """Terms in graded lexicographic order, highest degree first."""
        return sorted(
            self.terms.items(),
            key=lambda item: (-sum(item[0]), tuple(-e for e in item[0])),
        )

    def to_text(self, names: list[str] | None = None) -> str:
        names = names or [f"x{i + 1}" for i in range(self.n)]
        if not self.terms:
            return "0"
        pieces: list[str] = []
        for e, c in self.sorted_terms():
            mono = "*".join(
                name if k == 1 else f"{name}^{k}"
                for name, k in zip(names, e)
                if k > 0
            )
            mag = _format_coef(abs(c))
            if not mono:
                body = mag
            elif abs(c) == 1.0:
                body = mono
            else:
                body = f"{mag}*{mono}"
            if not pieces:
                pieces.append(body if c >= 0 else f"-{body}")
            else:
                pieces.append(f"+ {body}" if c >= 0 else f"- {body}")
        return " ".join(pieces)

    def to_json_dict(self, names: list[str] | None = None) -> dict:
        names = names or [f"x{i + 1}" for i in range(self.n)]
        return {
            "vars": list(names),
            "terms": [
                {"exp": list(e), "coef": c} for e, c in self.sorted_terms()
            ],
        }

    def __str__(self) -> str:
        return self.to_text()


def _format_coef(c: float) -> str:
    return repr(int(c)) if c == int(c) and abs(c) < 1e15 else repr(c)


def _coerce(value, n: int) -> Polynomial:
    if isinstance(value, Polynomial):
        if value.n != n:
            raise ValueError("polynomial dimension mismatch")
        return value
    return constant(n, float(value))


def make(n: int, terms: dict[Exponent, float]) -> Polynomial:
    """Normalized constructor: drops zero coefficients, plain-float values."""
    return Polynomial(n, {e: float(c) for e, c in terms.items() if c != 0.0})


def zero(n: int) -> Polynomial:
    return Polynomial(n, {})


def constant(n: int, c: float) -> Polynomial:
    return make(n, {(0,) * n: c})


def variable(n: int, i: int) -> Polynomial:
    if not 0 <= i < n:
        raise IndexError(f"variable index {i} out of range for n={n}")
    e = [0] * n
    e[i] = 1
    return Polynomial(n, {tuple(e): 1.0})


def product(polys, n: int | None = None) -> Polynomial:
    """Product of an iterable of polynomials (1 for the empty product)."""
    polys = list(polys)
    if not polys:
        if n is None:
            raise ValueError("empty product needs an explicit dimension")
        return constant(n, 1.0)
    out = polys[0]
    for p in polys[1:]:
        out = out * p
    return out


def from_json_dict(data: dict) -> tuple[Polynomial, list[str]]:
    names = list(data["vars"])
    n = len(names)
    terms = {tuple(t["exp"]): float(t["coef"]) for t in data["terms"]}
    for e in terms:
        if len(e) != n:
            raise ValueError("exponent length does not match variable count")
    return make(n, terms), names


# ---------------------------------------------------------------------------
# Expression parsing
# ---------------------------------------------------------------------------

# Number literal: decimal or scientific, optionally a rational written a/b.
_NUMBER_RE = re.compile(r"\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?")
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


class _Token:
    __slots__ = ("kind", "value", "pos")

    def __init__(self, kind: str, value, pos: int):
        self.kind = kind
        self.value = value
        self.pos = pos


def _tokenize(src: str) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    while i < len(src):
        ch = src[i]
        if ch.isspace():
            i += 1
            continue
        m = _NUMBER_RE.match(src, i)
        if m:
            text = m.group(0)
            end = m.end()
            # rational literal a/b -- '/' is not a general operator
            if end < len(src) and src[end] == "/":
                m2 = _NUMBER_RE.match(src, end + 1)
                if m2 is None:
                    raise PolynomialParseError("expected number after '/'", end + 1)
                denom = float(m2.group(0))
                if denom == 0:
                    raise PolynomialParseError("division by zero in literal", end + 1)
                tokens.append(_Token("number", float(text) / denom, i))
                i = m2.end()
            else:
                tokens.append(_Token("number", float(text), i))
                i = end
            continue
        m = _NAME_RE.match(src, i)
        if m:
            tokens.append(_Token("name", m.group(0), i))
            i = m.end()
            continue
        if ch in "+-*^()":
            tokens.append(_Token(ch, ch, i))
            i += 1
            continue
        raise PolynomialParseError(f"unexpected character {ch!r}", i)
    tokens.append(_Token("end", None, len(src)))
    return tokens


class _Parser:
    """Recursive-descent parser producing an expanded Polynomial.

    Grammar (highest precedence last):
        expr   := term (('+'|'-') term)*
        term   := unary ('*' unary)*
        unary  := ('+'|'-')* power
        power  := atom ('^' integer)?
        atom   := number [name-power]   -- implicit product like "3x^2"
                | name | '(' expr ')'
    """

    def __init__(self, tokens: list[_Token], var_index: dict[str, int], n: int):
        self.tokens = tokens
        self.k = 0
        self.vars = var_index
        self.n = n

    def peek(self) -> _Token:
        return self.tokens[self.k]

    def next(self) -> _Token:
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.next()
        if tok.kind != kind:
            raise PolynomialParseError(f"expected {kind!r}, found {tok.kind!r}", tok.pos)
        return tok

    def parse(self) -> Polynomial:
        p = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise PolynomialParseError(f"unexpected {tok.kind!r}", tok.pos)
        return p

    def expr(self) -> Polynomial:
        p = self.term()
        while self.peek().kind in ("+", "-"):
            op = self.next().kind
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self) -> Polynomial:
        p = self.unary()
        while self.peek().kind == "*":
            self.next()
            p = p * self.unary()
        return p

    def unary(self) -> Polynomial:
        sign = 1.0
        while self.peek().kind in ("+", "-"):
            if self.next().kind == "-":
                sign = -sign
        return self.power() * sign

    def power(self) -> Polynomial:
        p = self.atom()
        if self.peek().kind == "^":
            self.next()
            p = p ** self._integer_exponent()
        return p

    def _integer_exponent(self) -> int:
        tok = self.peek()
        if tok.kind == "-":
            raise PolynomialParseError("negative exponent", tok.pos)
        tok = self.expect("number")
        if tok.value != int(tok.value):
            raise PolynomialParseError("exponent must be a non-negative integer", tok.pos)
        return int(tok.value)

    def atom(self) -> Polynomial:
        tok = self.next()
        if tok.kind == "number":
            p = constant(self.n, tok.value)
            # implicit multiplication: literal immediately followed by a variable
            if self.peek().kind == "name":
                name_tok = self.next()
                v = self._variable(name_tok)
                if self.peek().kind == "^":
                    self.next()
                    v = v ** self._integer_exponent()
                p = p * v
            return p
        if tok.kind == "name":
            return self._variable(tok)
        if tok.kind == "(":
            p = self.expr()
            self.expect(")")
            return p
        raise PolynomialParseError(f"unexpected {tok.kind!r}", tok.pos)

    def _variable(self, tok: _Token) -> Polynomial:
        if tok.value not in self.vars:
            raise PolynomialParseError(f"unknown variable {tok.value!r}", tok.pos)
        return variable(self.n, self.vars[tok.value])


def parse(src: str, names: list[str]) -> Polynomial:
    """Parse an arithmetic expression over the named variables.

    Supports +, -, *, ^ with non-negative integer powers, parentheses,
    decimal/rational literals, and implicit multiplication between a literal
    and a variable ("3x", "3/2z^2").
    """
    var_index = {name: i for i, name in enumerate(names)}
    if len(var_index) != len(names):
        raise ValueError("duplicate variable names")
    return _Parser(_tokenize(src), var_index, len(names)).parse()


# ---------------------------------------------------------------------------
# Arrangements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Arrangement:
    """A finite list of nonzero real polynomials in a common set of variables."""

    n: int
    polys: tuple[Polynomial, ...]
    names: tuple[str, ...] = ()

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be at least 1")
        if not self.polys:
            raise ValueError("arrangement needs at least one polynomial")
        for p in self.polys:
            if p.n != self.n:
                raise ValueError("polynomial dimension mismatch")
            if p.is_zero():
                raise ValueError("arrangement polynomials must be nonzero")
        if not self.names:
            object.__setattr__(
                self, "names", tuple(f"x{i + 1}" for i in range(self.n))
            )
        elif len(self.names) != self.n:
            raise ValueError("variable name count mismatch")

    @property
    def k(self) -> int:
        return len(self.polys)

    def degrees(self) -> tuple[int, ...]:
        # constants are allowed and contribute degree 0
        return tuple(max(int(p.degree()), 0) for p in self.polys)


def arrangement_from_text(polys: list[str], names: list[str]) -> Arrangement:
    return Arrangement(
        n=len(names),
        polys=tuple(parse(src, names) for src in polys),
        names=tuple(names),
    )


_TOTAL_DEGREE_CACHE: dict[tuple[int, int], int] = {}


def monomial_count(n: int, d: int) -> int:
    """Number of monomials in n variables of degree at most d."""
    key = (n, d)
    if key not in _TOTAL_DEGREE_CACHE:
        _TOTAL_DEGREE_CACHE[key] = math.comb(n + d, d)
    return _TOTAL_DEGREE_CACHE[key]
