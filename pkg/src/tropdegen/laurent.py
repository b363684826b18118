"""Truncated Laurent series over C with exact integer valuations.

A series is a finite map {exponent -> complex coefficient} together with a
truncation order: exponents above it are unknown.  Coefficients are floats,
exponents exact integers, so valuations (which drive all the combinatorics
downstream) stay trustworthy even when tails do not.  Exact polynomial data
uses trunc_order = None ("no unknown tail").

The module also provides Laurent polynomials in z_1..z_n with series
coefficients, and a small recursive-descent parser for the shared text
syntax, e.g. ``1 - 2*t^3 + (0.5+1i)*t^-1`` or ``z1*z2 + t*(1 + z1^3 + z2^3)``.
"""

from __future__ import annotations

import math
from typing import Iterator, Mapping

CANCEL_REL_THRESHOLD = 1e-12


def _merge_trunc(a: int | None, b: int | None) -> int | None:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


class LaurentSeries:
    """Finite complex Laurent series, truncated above ``trunc_order``."""

    __slots__ = ("terms", "trunc_order", "possible_cancellation")

    def __init__(
        self,
        terms: Mapping[int, complex] | None = None,
        trunc_order: int | None = None,
        possible_cancellation: bool = False,
    ):
        clean: dict[int, complex] = {}
        if terms:
            mags = [abs(complex(c)) for c in terms.values()]
            scale = max(mags) if mags else 0.0
            for k, c in terms.items():
                if not isinstance(k, int):
                    raise TypeError("exponents must be integers")
                c = complex(c)
                if c == 0:
                    continue
                if scale > 0 and abs(c) <= CANCEL_REL_THRESHOLD * scale:
                    possible_cancellation = True
                    continue
                if trunc_order is not None and k > trunc_order:
                    raise ValueError(
                        f"stored exponent {k} exceeds truncation order {trunc_order}"
                    )
                clean[k] = c
        self.terms = dict(sorted(clean.items()))
        self.trunc_order = trunc_order
        self.possible_cancellation = possible_cancellation

    # -- construction helpers -------------------------------------------------

    @staticmethod
    def zero() -> "LaurentSeries":
        return LaurentSeries({})

    @staticmethod
    def one() -> "LaurentSeries":
        return LaurentSeries({0: 1.0})

    @staticmethod
    def t_power(k: int, coeff: complex = 1.0) -> "LaurentSeries":
        return LaurentSeries({k: coeff})

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def valuation(self) -> int | float:
        """ord_0 of the series; +inf for the zero series."""
        return min(self.terms) if self.terms else math.inf

    # -- arithmetic ------------------------------------------------------------

    def __add__(self, other: "LaurentSeries") -> "LaurentSeries":
        trunc = _merge_trunc(self.trunc_order, other.trunc_order)
        acc = dict(self.terms)
        for k, c in other.terms.items():
            acc[k] = acc.get(k, 0.0) + c
        if trunc is not None:
            acc = {k: c for k, c in acc.items() if k <= trunc}
        return LaurentSeries(acc, trunc)

    def __neg__(self) -> "LaurentSeries":
        return LaurentSeries({k: -c for k, c in self.terms.items()}, self.trunc_order)

    def __sub__(self, other: "LaurentSeries") -> "LaurentSeries":
        return self + (-other)

    def __mul__(self, other: "LaurentSeries") -> "LaurentSeries":
        if self.is_zero or other.is_zero:
            # a zero factor kills the tail uncertainty as well
            return LaurentSeries.zero()
        if self.trunc_order is None and other.trunc_order is None:
            trunc = None
        else:
            va, vb = self.valuation(), other.valuation()
            ta = math.inf if self.trunc_order is None else self.trunc_order
            tb = math.inf if other.trunc_order is None else other.trunc_order
            trunc = int(min(va + tb, vb + ta))
        acc: dict[int, complex] = {}
        for ka, ca in self.terms.items():
            for kb, cb in other.terms.items():
                k = ka + kb
                if trunc is not None and k > trunc:
                    continue
                acc[k] = acc.get(k, 0.0) + ca * cb
        return LaurentSeries(acc, trunc)

    def __pow__(self, e: int) -> "LaurentSeries":
        if not isinstance(e, int):
            raise TypeError("integer exponent required")
        if e < 0:
            if len(self.terms) == 1:
                (k, c), = self.terms.items()
                return LaurentSeries({k * e: c**e})
            raise ValueError("negative powers only supported for monomial series")
        out = LaurentSeries.one()
        for _ in range(e):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, LaurentSeries)
            and self.terms == other.terms
            and self.trunc_order == other.trunc_order
        )

    def __repr__(self) -> str:
        if self.is_zero:
            return "LaurentSeries(0)"
        bits = []
        for k, c in self.terms.items():
            coeff = f"{c.real:g}" if c.imag == 0 else f"({c.real:g}{c.imag:+g}i)"
            bits.append(f"{coeff}*t^{k}")
        tail = "" if self.trunc_order is None else f" + O(t^{self.trunc_order + 1})"
        return " + ".join(bits) + tail

    # -- evaluation --------------------------------------------------------------

    def eval_at(self, t: complex) -> tuple[complex, float, bool]:
        """Partial sum at 0 < |t| < 1 with a heuristic geometric tail bound.

        Returns (value, tail_bound, reliable).  The bound assumes the unknown
        coefficients are dominated by the largest stored magnitude; it is
        flagged unreliable when the stored coefficients grow towards the
        truncation order.
        """
        t = complex(t)
        if t == 0:
            raise ValueError("evaluation requires t != 0")
        r = abs(t)
        if not r < 1:
            raise ValueError("evaluation requires |t| < 1")
        value = sum(c * t**k for k, c in self.terms.items())
        if self.trunc_order is None or self.is_zero:
            return value, 0.0, True
        big = max(abs(c) for c in self.terms.values())
        bound = big * r ** (self.trunc_order + 1) / (1 - r)
        ks = sorted(self.terms)
        mags = [abs(self.terms[k]) for k in ks]
        half = len(mags) // 2
        growing = len(mags) >= 2 and max(mags[half:]) > max(mags[: half or 1])
        return value, bound, not growing


def valuation(a: LaurentSeries) -> int | float:
    return a.valuation()


def add(a: LaurentSeries, b: LaurentSeries) -> LaurentSeries:
    return a + b


def mul(a: LaurentSeries, b: LaurentSeries) -> LaurentSeries:
    return a * b


def eval_at(a: LaurentSeries, t: complex) -> tuple[complex, float, bool]:
    return a.eval_at(t)


# ---------------------------------------------------------------------------
# Laurent polynomials over series
# ---------------------------------------------------------------------------

class LaurentPolynomial:
    """Polynomial in z_1..z_n with LaurentSeries coefficients.

    Exponent vectors may be negative.  The zero polynomial stores no terms.
    """

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[tuple[int, ...], LaurentSeries] | None = None):
        self.nvars = nvars
        clean: dict[tuple[int, ...], LaurentSeries] = {}
        if terms:
            for a, c in terms.items():
                a = tuple(int(x) for x in a)
                if len(a) != nvars:
                    raise ValueError("exponent vector length mismatch")
                if not c.is_zero:
                    clean[a] = c
        self.terms = dict(sorted(clean.items()))

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @staticmethod
    def constant(nvars: int, c: LaurentSeries) -> "LaurentPolynomial":
        return LaurentPolynomial(nvars, {(0,) * nvars: c})

    @staticmethod
    def variable(nvars: int, i: int) -> "LaurentPolynomial":
        a = tuple(int(j == i) for j in range(nvars))
        return LaurentPolynomial(nvars, {a: LaurentSeries.one()})

    def __add__(self, other: "LaurentPolynomial") -> "LaurentPolynomial":
        acc = dict(self.terms)
        for a, c in other.terms.items():
            acc[a] = acc[a] + c if a in acc else c
        return LaurentPolynomial(self.nvars, acc)

    def __neg__(self) -> "LaurentPolynomial":
        return LaurentPolynomial(self.nvars, {a: -c for a, c in self.terms.items()})

    def __sub__(self, other: "LaurentPolynomial") -> "LaurentPolynomial":
        return self + (-other)

    def __mul__(self, other: "LaurentPolynomial") -> "LaurentPolynomial":
        acc: dict[tuple[int, ...], LaurentSeries] = {}
        for a, ca in self.terms.items():
            for b, cb in other.terms.items():
                k = tuple(x + y for x, y in zip(a, b))
                prod = ca * cb
                acc[k] = acc[k] + prod if k in acc else prod
        return LaurentPolynomial(self.nvars, acc)

    def __pow__(self, e: int) -> "LaurentPolynomial":
        if not isinstance(e, int):
            raise TypeError("integer exponent required")
        if e < 0:
            if len(self.terms) == 1:
                (a, c), = self.terms.items()
                return LaurentPolynomial(
                    self.nvars, {tuple(x * e for x in a): c**e}
                )
            raise ValueError("negative powers only supported for monomials")
        out = LaurentPolynomial.constant(self.nvars, LaurentSeries.one())
        for _ in range(e):
            out = out * self
        return out

    def support(self) -> list[tuple[int, ...]]:
        return list(self.terms)

    def coefficients_at(self, t: complex) -> dict[tuple[int, ...], complex]:
        """Numeric coefficients of the fiber polynomial at parameter t."""
        return {a: c.eval_at(t)[0] for a, c in self.terms.items()}

    def eval_fiber(self, t: complex, x) -> complex:
        """Evaluate the fiber polynomial f_t at a point of (C*)^n."""
        val = 0j
        for a, c in self.coefficients_at(t).items():
            mono = c
            for xi, ai in zip(x, a):
                mono *= xi**ai
            val += mono
        return val

    def fiber_scale(self, t: complex, x) -> float:
        """Sum of term magnitudes at (t, x); the natural residual scale."""
        s = 0.0
        for a, c in self.coefficients_at(t).items():
            mono = abs(c)
            for xi, ai in zip(x, a):
                mono *= abs(xi) ** ai
            s += mono
        return s

    def __repr__(self) -> str:
        if self.is_zero:
            return "LaurentPolynomial(0)"
        bits = []
        for a, c in self.terms.items():
            z = "*".join(f"z{i+1}^{e}" for i, e in enumerate(a) if e != 0)
            bits.append(f"({c!r})" + (f"*{z}" if z else ""))
        return " + ".join(bits)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

class ParseError(ValueError):
    """Syntax error with the 0-based offending position in the input."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


_TOKEN_CHARS = set("+-*^()")


def _tokenize(text: str) -> Iterator[tuple[str, str, int]]:
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _TOKEN_CHARS:
            yield ("op", ch, i)
            i += 1
            continue
        if ch.isdigit() or ch == ".":
            j = i
            while j < n and (text[j].isdigit() or text[j] == "."):
                j += 1
            # exponent notation like 1e-3
            if j < n and text[j] in "eE" and j + 1 < n and (
                text[j + 1].isdigit() or (text[j + 1] in "+-" and j + 2 < n and text[j + 2].isdigit())
            ):
                j += 2
                while j < n and text[j].isdigit():
                    j += 1
            tok = text[i:j]
            if j < n and text[j] in "ij":
                yield ("imag", tok, i)
                j += 1
            else:
                yield ("num", tok, i)
            i = j
            continue
        if ch.isalpha():
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            yield ("name", text[i:j], i)
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r}", i)
    yield ("end", "", n)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = list(_tokenize(text))
        self.pos = 0
        self.vars: dict[str, int] = {}

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, value: str):
        kind, val, at = self.take()
        if val != value:
            raise ParseError(f"expected {value!r}, found {val or 'end of input'!r}", at)

    # grammar: expr := ['+'|'-'] term (('+'|'-') term)*
    #          term := factor ('*' factor)*
    #          factor := atom ['^' ['-'] INT]
    #          atom := NUM | NUM 'i' | 'i' | 't' | VAR | '(' expr ')'
    def parse_expr(self):
        sign = 1
        if self.peek()[1] in ("+", "-"):
            sign = -1 if self.take()[1] == "-" else 1
        node = self.parse_term()
        if sign < 0:
            node = ("neg", node)
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.parse_term()
            node = ("add", node, ("neg", rhs) if op == "-" else rhs)
        return node

    def parse_term(self):
        node = self.parse_factor()
        while self.peek()[1] == "*":
            self.take()
            node = ("mul", node, self.parse_factor())
        return node

    def parse_factor(self):
        node = self.parse_atom()
        if self.peek()[1] == "^":
            self.take()
            sign = 1
            if self.peek()[1] == "-":
                self.take()
                sign = -1
            kind, val, at = self.take()
            if kind != "num" or not val.isdigit():
                raise ParseError("integer exponent expected after '^'", at)
            node = ("pow", node, sign * int(val))
        return node

    def parse_atom(self):
        kind, val, at = self.take()
        if kind == "num":
            return ("const", complex(float(val), 0.0))
        if kind == "imag":
            return ("const", complex(0.0, float(val)))
        if kind == "name":
            if val in ("i", "j"):
                return ("const", 1j)
            if val == "t":
                return ("t",)
            if val == "z" or (val.startswith("z") and val[1:].isdigit()):
                if val not in self.vars:
                    self.vars[val] = at
                return ("var", val)
            raise ParseError(f"unknown name {val!r}", at)
        if val == "(":
            node = self.parse_expr()
            self.expect(")")
            return node
        if val == "-":
            return ("neg", self.parse_factor())
        raise ParseError(f"unexpected token {val or 'end of input'!r}", at)


def _var_index_map(vars_seen: dict[str, int]) -> dict[str, int]:
    names = list(vars_seen)
    if not names:
        return {}
    if "z" in names:
        if len(names) > 1:
            raise ParseError(
                "cannot mix bare 'z' with indexed variables", vars_seen["z"]
            )
        return {"z": 0}
    idx = {name: int(name[1:]) for name in names}
    bad = [n for n, k in idx.items() if k < 1]
    if bad:
        raise ParseError(f"variable index must be >= 1: {bad[0]}", vars_seen[bad[0]])
    return {name: idx[name] - 1 for name in names}


def _build(node, nvars: int, vmap: dict[str, int]) -> LaurentPolynomial:
    kind = node[0]
    if kind == "const":
        return LaurentPolynomial.constant(nvars, LaurentSeries({0: node[1]}))
    if kind == "t":
        return LaurentPolynomial.constant(nvars, LaurentSeries.t_power(1))
    if kind == "var":
        return LaurentPolynomial.variable(nvars, vmap[node[1]])
    if kind == "neg":
        return -_build(node[1], nvars, vmap)
    if kind == "add":
        return _build(node[1], nvars, vmap) + _build(node[2], nvars, vmap)
    if kind == "mul":
        return _build(node[1], nvars, vmap) * _build(node[2], nvars, vmap)
    if kind == "pow":
        return _build(node[1], nvars, vmap) ** node[2]
    raise AssertionError(f"unknown node {kind}")


def parse_polynomial(text: str, nvars: int | None = None) -> LaurentPolynomial:
    """Parse the shared text syntax into a LaurentPolynomial.

    Variables are ``z`` (one variable) or ``z1, z2, ...``; ``t`` is the base
    parameter; number literals may carry an ``i``/``j`` suffix.  If ``nvars``
    is omitted it is inferred as the largest variable index that occurs.
    """
    p = _Parser(text)
    node = p.parse_expr()
    kind, val, at = p.peek()
    if kind != "end":
        raise ParseError(f"trailing input {val!r}", at)
    vmap = _var_index_map(p.vars)
    inferred = max(vmap.values()) + 1 if vmap else 0
    if nvars is None:
        nvars = max(inferred, 1)
    elif inferred > nvars:
        raise ParseError(f"variable beyond requested dimension {nvars}", 0)
    return _build(node, nvars, vmap)


def parse_series(text: str) -> LaurentSeries:
    """Parse a series in t alone, e.g. ``1 - 2*t^3 + (0.5+1i)*t^-1``."""
    poly = parse_polynomial(text, nvars=1)
    for a in poly.support():
        if any(e != 0 for e in a):
            raise ParseError("series input must not contain z variables", 0)
    if poly.is_zero:
        return LaurentSeries.zero()
    return poly.terms[(0,)]
