"""
Parser for the descriptor mini-language.

Template families::

    family := expr ["for" ident cmp int]
    expr   := ["-"] term (("+" | "-") term)*
    term   := [rational ["*"]] symbol "(" index ")" [tensor "(" expr ")"]
    index  := ["-"] ident [("+" | "-") int] | ["-"] int
    cmp    := ">=" | "<="
    tensor := "⊗" | "ox" | "(x)"
    symbol := "e" | "x" | "x*"

Index sets::

    iset     := part ("|" part)* ["for" ident cmp int]
    part     := "{" [endpoint [".." endpoint]] "}"
    endpoint := "inf" | "-inf" | index

Only indices of the form ±k + c are accepted; anything else (``k*k``,
``2k``) is reported as an unsupported form.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import InputError
from .exact_linalg import format_rational


class DSLError(InputError):
    kind = "syntax_error"

    def __init__(self, message: str, line: int, column: int, expected=()):
        self.line = line
        self.column = column
        self.expected = tuple(sorted(expected))
        where = f"line {line}, column {column}"
        if self.expected:
            message = f"{message} at {where}; expected one of: {', '.join(self.expected)}"
        else:
            message = f"{message} at {where}"
        super().__init__(message, field="source")

    def to_json(self) -> dict:
        return {
            "line": self.line,
            "column": self.column,
            "expected": list(self.expected),
        }


class UnsupportedFormError(DSLError):
    kind = "unsupported_form"


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<tensor>⊗|\(x\)|\box\b)
  | (?P<range>\.\.)
  | (?P<cmp>>=|<=)
  | (?P<num>\d+)
  | (?P<dual>x\*(?=\s*\())
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/(){}|])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(src: str) -> list[Token]:
    out = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if not m:
            raise DSLError(f"unexpected character {src[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        if kind != "ws":
            if kind == "op":
                kind = text
            elif kind == "dual":
                kind = "symbol"
            elif kind == "ident" and text in ("e", "x"):
                kind = "symbol"
            elif kind == "ident" and text in ("for", "inf"):
                kind = text
            out.append(Token(kind, text, line, pos - line_start + 1))
        for k, ch in enumerate(text):
            if ch == "\n":
                line += 1
                line_start = pos + k + 1
        pos = m.end()
    out.append(Token("end", "", line, pos - line_start + 1))
    return out


# -- parsed forms --------------------------------------------------------------


@dataclass(frozen=True)
class Index:
    """slope * param + offset, with slope in {-1, 0, 1}."""

    slope: int
    offset: int

    def at(self, value: int) -> int:
        return self.slope * value + self.offset

    def render(self, param: str) -> str:
        if self.slope == 0:
            return str(self.offset)
        head = param if self.slope > 0 else f"-{param}"
        if self.offset > 0:
            return f"{head}+{self.offset}"
        if self.offset < 0:
            return f"{head}-{-self.offset}"
        return head


@dataclass(frozen=True)
class Term:
    coef: Fraction
    symbol: str
    index: Index
    tensor: tuple | None = None  # normalised terms of the right-hand factor


@dataclass(frozen=True)
class Quantifier:
    param: str
    cmp: str
    bound: int

    def values(self, lo: int, hi: int):
        """Admissible parameter values within [lo, hi], ascending."""
        if self.cmp == ">=":
            return range(max(lo, self.bound), hi + 1)
        return range(lo, min(hi, self.bound) + 1)


@dataclass(frozen=True)
class TemplateExpr:
    source: str
    terms: tuple
    quantifier: Quantifier | None = None

    @property
    def param(self) -> str:
        return self.quantifier.param if self.quantifier else "k"

    @property
    def is_tensor(self) -> bool:
        return any(t.tensor is not None for t in self.terms)

    def render(self) -> str:
        text = _render_terms(self.terms, self.param)
        if self.quantifier:
            q = self.quantifier
            text += f" for {q.param} {q.cmp} {q.bound}"
        return text

    def parsed(self) -> tuple:
        """The parsed form, without the source text (used for round-trip checks)."""
        return (self.terms, self.quantifier)

    def to_json(self) -> dict:
        return {"template": self.render()}

    def all_indices(self, value: int) -> list[int]:
        out = []
        for t in self.terms:
            out.append(t.index.at(value))
            for u in t.tensor or ():
                out.append(u.index.at(value))
        return out

    def instance(self, value: int | None) -> dict:
        """Vector instance {(symbol, index): coefficient} at a parameter value."""
        if self.is_tensor:
            raise InputError("tensor templates instantiate to matrices, not vectors")
        v = value if value is not None else 0
        out: dict = {}
        for t in self.terms:
            key = (t.symbol, t.index.at(v))
            out[key] = out.get(key, 0) + t.coef
        return {k: c for k, c in out.items() if c}

    def matrix_instance(self, value: int | None) -> dict:
        """Matrix instance {(row index, column index): coefficient}."""
        v = value if value is not None else 0
        out: dict = {}
        for t in self.terms:
            if t.tensor is None:
                raise InputError("template mixes vectors and tensors")
            i = t.index.at(v)
            for u in t.tensor:
                key = (i, u.index.at(v))
                out[key] = out.get(key, 0) + t.coef * u.coef
        return {k: c for k, c in out.items() if c}


def _render_coef(c: Fraction, first: bool) -> str:
    sign = "-" if c < 0 else ("" if first else "+")
    mag = abs(c)
    body = "" if mag == 1 else format_rational(mag) + " "
    if first:
        return f"{sign}{body}"
    return f" {sign} {body}"


def _render_terms(terms, param) -> str:
    if not terms:
        return "0"
    parts = []
    for k, t in enumerate(terms):
        s = _render_coef(t.coef, k == 0) + f"{t.symbol}({t.index.render(param)})"
        if t.tensor is not None:
            s += f" ⊗ ({_render_terms(t.tensor, param)})"
        parts.append(s)
    return "".join(parts)


def _normalise(terms: list) -> tuple:
    """Merge like terms (first appearance order) and drop zero coefficients."""
    acc: dict = {}
    for t in terms:
        key = (t.symbol, t.index, t.tensor)
        acc[key] = acc.get(key, 0) + t.coef
    return tuple(
        Term(Fraction(c), sym, idx, ten) for (sym, idx, ten), c in acc.items() if c
    )


# -- parser --------------------------------------------------------------------


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.toks = tokenize(src)
        self.pos = 0
        self.params: list = []  # (name, token) of every identifier used in an index

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def fail(self, expected, message=None, tok=None):
        tok = tok or self.tok
        what = repr(tok.text) if tok.text else "end of input"
        raise DSLError(message or f"unexpected {what}", tok.line, tok.column, expected)

    def expect(self, kind: str) -> Token:
        if self.tok.kind != kind:
            self.fail({kind})
        t = self.tok
        self.pos += 1
        return t

    def accept(self, kind: str) -> Token | None:
        if self.tok.kind == kind:
            t = self.tok
            self.pos += 1
            return t
        return None

    # template families

    def family(self) -> TemplateExpr:
        terms = self.expr()
        quant = self.quantifier()
        if self.tok.kind != "end":
            self.fail({"+", "-", "for", "end"})
        self._check_params(quant)
        return TemplateExpr(self.src, terms, quant)

    def quantifier(self) -> Quantifier | None:
        if not self.accept("for"):
            return None
        name = self.expect("ident").text
        cmp = self.expect("cmp").text
        neg = bool(self.accept("-"))
        bound = int(self.expect("num").text)
        return Quantifier(name, cmp, -bound if neg else bound)

    def _check_params(self, quant):
        for name, tok in self.params:
            if quant is None:
                raise DSLError(f"parameter {name!r} is not bound by a 'for' clause", tok.line, tok.column)
            if name != quant.param:
                raise DSLError(
                    f"index uses {name!r} but the family is quantified over {quant.param!r}",
                    tok.line,
                    tok.column,
                )

    def expr(self) -> tuple:
        start = self.tok
        terms = []
        sign = -1 if self.accept("-") else 1
        terms.append(self.term(sign))
        while self.tok.kind in ("+", "-"):
            sign = 1 if self.tok.kind == "+" else -1
            self.pos += 1
            terms.append(self.term(sign))
        out = _normalise(terms)
        if not out:
            raise DSLError("expression cancels to zero", start.line, start.column)
        return out

    def rational(self) -> Fraction | None:
        if self.tok.kind != "num":
            return None
        num = int(self.expect("num").text)
        if self.accept("/"):
            den = int(self.expect("num").text)
            if den == 0:
                self.fail({"nonzero denominator"}, "zero denominator", self.toks[self.pos - 1])
            return Fraction(num, den)
        return Fraction(num)

    def term(self, sign: int) -> Term:
        coef = self.rational()
        if coef is not None:
            self.accept("*")
        else:
            coef = Fraction(1)
        if self.tok.kind != "symbol":
            self.fail({"e", "x", "x*", "number"})
        symbol = self.expect("symbol").text
        self.expect("(")
        index = self.index()
        self.expect(")")
        tensor = None
        if self.accept("tensor"):
            self.expect("(")
            tensor = self.expr()
            self.expect(")")
        return Term(sign * coef, symbol, index, tensor)

    def index(self, closers=(")",)) -> Index:
        start = self.tok
        neg = bool(self.accept("-"))
        if self.tok.kind == "num":
            value = int(self.expect("num").text)
            if self.tok.kind in ("*", "ident", "("):
                raise UnsupportedFormError("index must be linear in the parameter", start.line, start.column)
            return Index(0, -value if neg else value)
        if self.tok.kind != "ident":
            self.fail({"identifier", "number"})
        name_tok = self.tok
        self.pos += 1
        self.params.append((name_tok.text, name_tok))
        slope = -1 if neg else 1
        offset = 0
        if self.tok.kind in ("*", "/", "ident", "num", "symbol", "("):
            raise UnsupportedFormError("index must be linear in the parameter", start.line, start.column)
        if self.tok.kind in ("+", "-"):
            s = 1 if self.tok.kind == "+" else -1
            self.pos += 1
            if self.tok.kind != "num":
                if self.tok.kind in ("ident", "symbol"):
                    raise UnsupportedFormError(
                        "index must use a single parameter", start.line, start.column
                    )
                self.fail({"number"})
            offset = s * int(self.expect("num").text)
            if self.tok.kind not in closers:
                raise UnsupportedFormError("index must be linear in the parameter", start.line, start.column)
        return Index(slope, offset)

    # index sets

    def index_set(self) -> "IndexSetExpr":
        parts = [self.part()]
        while self.accept("|"):
            parts.append(self.part())
        quant = self.quantifier()
        if self.tok.kind != "end":
            self.fail({"|", "for", "end"})
        self._check_params(quant)
        return IndexSetExpr(self.src, tuple(parts), quant)

    def part(self):
        self.expect("{")
        if self.accept("}"):
            return None
        lo = self.endpoint()
        hi = lo
        if self.accept("range"):
            hi = self.endpoint()
        self.expect("}")
        return (lo, hi)

    def endpoint(self):
        if self.tok.kind == "inf":
            self.pos += 1
            return "inf"
        if self.tok.kind == "-" and self.peek().kind == "inf":
            self.pos += 2
            return "-inf"
        return self.index(closers=("}", "range"))


def parse_template(src: str) -> TemplateExpr:
    return _Parser(src).family()


@dataclass(frozen=True)
class IndexSetExpr:
    """Union of intervals whose finite endpoints may depend on a parameter."""

    source: str
    parts: tuple  # (lo, hi) pairs or None for an empty part
    quantifier: Quantifier | None = None

    @property
    def param(self) -> str:
        return self.quantifier.param if self.quantifier else "i"

    def render(self) -> str:
        def ep(e):
            return e if isinstance(e, str) else e.render(self.param)

        chunks = []
        for p in self.parts:
            if p is None:
                chunks.append("{}")
            elif p[0] == p[1]:
                chunks.append("{" + ep(p[0]) + "}")
            else:
                chunks.append("{" + ep(p[0]) + ".." + ep(p[1]) + "}")
        text = " | ".join(chunks)
        if self.quantifier:
            q = self.quantifier
            text += f" for {q.param} {q.cmp} {q.bound}"
        return text

    def parsed(self) -> tuple:
        return (self.parts, self.quantifier)


def parse_index_set(src: str) -> IndexSetExpr:
    return _Parser(src).index_set()


__all__ = [
    "DSLError",
    "Index",
    "IndexSetExpr",
    "Quantifier",
    "TemplateExpr",
    "Term",
    "UnsupportedFormError",
    "parse_index_set",
    "parse_template",
    "tokenize",
]
