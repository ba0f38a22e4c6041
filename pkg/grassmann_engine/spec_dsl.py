"""
Parser and elaborator for .gsl immersion scripts.

A script declares sections with let-bindings and ends with one map declaration:

    # T1.3-3
    let a = concat(veronese(4,2), const(w=48, value=theta))
    map phi = span(pad_end(veronese(4,3),1), a)

Grammar:

    file      := [spacedecl] stmt* mapdecl
    spacedecl := "space" INT ["@weights" "[" rational ("," rational)* "]"]
    stmt      := "let" IDENT "=" expr
    mapdecl   := "map" IDENT "=" "span" "(" expr ("," expr)* ")"
    expr      := "veronese" "(" INT "," INT ")"
               | ("pad_end" | "pad_front") "(" expr "," INT ")"
               | "concat" "(" expr "," expr ")"
               | "const" "(" "w" "=" rational "," "value" "=" sum ")"
               | "const" "(" INT "," INT ")"
               | "[" sum ("," sum)* "]" ["@weights" "[" rational ("," rational)* "]"]
               | IDENT
    sum       := term (("+" | "-") term)*
    term      := unary (("*" | "/") unary)*
    unary     := "-" unary | power
    power     := atom ["^" INT]
    atom      := NUMBER | "z" | "zb" | "i" | "theta" | "(" sum ")"

NUMBER is `p`, `p/q`, `pi`, `p/qi` or `p/q i`. Comments run from "#" to end of line.
Parentheses, unary minus, pad_* and concat nest at most MAX_NESTING levels deep.
"""

import logging
import re
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

from sympy import QQ
from sympy.polys.domains.gaussiandomains import GaussianRational

from grassmann_engine.errors import (
    DegenerateInputError,
    DslBindingError,
    DslElaborationError,
    DslError,
    DslLexError,
    DslSyntaxError,
    GrassmannEngineError,
    SpaceMismatchError,
    WeightConflictError,
)
from grassmann_engine.exact_algebra import GR_I, GR_ONE, Z, ZB, RationalFunction, gaussian
from grassmann_engine.harmonic_sequences import (
    BundleMap,
    bundle_from_sections,
    concat,
    const_coord,
    const_vector,
    pad_end,
    pad_front,
    unify_sections,
    veronese,
)
from grassmann_engine.hermitian_ambient import VecRF, WeightedSpace

logger = logging.getLogger(__name__)

KEYWORDS = frozenset({"let", "map", "span", "space", "veronese", "pad_end", "pad_front", "concat", "const"})
SCALAR_NAMES = frozenset({"z", "zb", "i", "theta"})
MAX_NESTING = 100

_TOKEN_SPEC = [
    ("COMMENT", r"#[^\n]*"),
    ("NEWLINE", r"\n"),
    ("SKIP", r"[ \t\r]+"),
    ("NUMBER", r"\d+(?:/\d+)?(?:[ \t]*i(?![A-Za-z0-9_]))?"),
    ("WEIGHTS", r"@weights(?![A-Za-z0-9_])"),
    ("IDENT", r"[A-Za-z_][A-Za-z0-9_]*"),
    ("OP", r"[()\[\],=+\-*/^]"),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{name}>{pattern})" for name, pattern in _TOKEN_SPEC))


@dataclass(frozen=True)
class Span:
    line: int
    column: int
    end_column: int


@dataclass(frozen=True)
class Token:
    kind: str  # NUMBER | WEIGHTS | IDENT | OP | EOF
    text: str
    span: Span


# --- AST ----------------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: GaussianRational
    span: Span


@dataclass(frozen=True)
class Var:
    name: str
    span: Span


@dataclass(frozen=True)
class Neg:
    operand: "PolyNode"
    span: Span


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "PolyNode"
    right: "PolyNode"
    span: Span


@dataclass(frozen=True)
class Pow:
    base: "PolyNode"
    exponent: int
    span: Span


PolyNode = Union[Num, Var, Neg, BinOp, Pow]


@dataclass(frozen=True)
class Veronese:
    n: int
    i: int
    span: Span


@dataclass(frozen=True)
class Pad:
    side: str  # "end" | "front"
    operand: "SectionNode"
    count: int
    span: Span


@dataclass(frozen=True)
class Concat:
    left: "SectionNode"
    right: "SectionNode"
    span: Span


@dataclass(frozen=True)
class ConstCoord:
    dim: int
    index: int
    span: Span


@dataclass(frozen=True)
class ConstWeighted:
    weight: GaussianRational
    value: PolyNode
    span: Span


@dataclass(frozen=True)
class VectorLiteral:
    components: Tuple[PolyNode, ...]
    weights: Optional[Tuple[GaussianRational, ...]]
    span: Span


@dataclass(frozen=True)
class Ref:
    name: str
    span: Span


SectionNode = Union[Veronese, Pad, Concat, ConstCoord, ConstWeighted, VectorLiteral, Ref]


@dataclass(frozen=True)
class SpaceDecl:
    dim: int
    weights: Optional[Tuple[GaussianRational, ...]]
    span: Span


@dataclass(frozen=True)
class LetStmt:
    name: str
    expr: SectionNode
    span: Span
    index: int


@dataclass(frozen=True)
class MapDecl:
    name: str
    sections: Tuple[SectionNode, ...]
    span: Span
    index: int


@dataclass(frozen=True)
class SpecAst:
    space: Optional[SpaceDecl]
    lets: Tuple[LetStmt, ...]
    map: MapDecl


@dataclass(frozen=True)
class ImmersionSpec:
    space: WeightedSpace
    sections: Tuple[VecRF, ...]
    bundle: BundleMap
    name: str
    positions: Tuple[Span, ...]


# --- lexer --------------------------------------------------------------------------


def _number_value(text: str) -> GaussianRational:
    imaginary = text.endswith("i")
    digits = text.rstrip("i").strip()
    num, _, den = digits.partition("/")
    if den and int(den) == 0:
        raise ValueError("zero denominator")
    q = QQ(int(num), int(den) if den else 1)
    return gaussian(0, q) if imaginary else gaussian(q)


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        column = pos - line_start + 1
        if m is None:
            raise DslLexError(f"unexpected character {text[pos]!r}", line, column)
        kind = m.lastgroup
        if kind == "NEWLINE":
            line, line_start = line + 1, m.end()
        elif kind not in ("SKIP", "COMMENT"):
            tokens.append(Token(kind, m.group(), Span(line, column, column + len(m.group()))))
        pos = m.end()
    eof_column = len(text) - line_start + 1
    tokens.append(Token("EOF", "", Span(line, eof_column, eof_column + 1)))
    return tokens


# --- parser -------------------------------------------------------------------------


def _join(a: Span, b: Span) -> Span:
    if a.line != b.line:
        return a
    return Span(a.line, a.column, b.end_column)


class _Parser:
    def __init__(self, tokens: List[Token]):
        self.tokens = tokens
        self.pos = 0
        self.depth = 0
        self.defined: Dict[str, Span] = {}

    # token helpers

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    @property
    def previous(self) -> Token:
        return self.tokens[self.pos - 1]

    def at(self, text: str) -> bool:
        tok = self.current
        return tok.kind in ("OP", "IDENT") and tok.text == text

    def advance(self) -> Token:
        tok = self.current
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def error(self, message: str, tok: Optional[Token] = None) -> DslSyntaxError:
        tok = tok or self.current
        where = "end of input" if tok.kind == "EOF" else repr(tok.text)
        return DslSyntaxError(f"{message}, found {where}", tok.span.line, tok.span.column, tok.span.end_column)

    @contextmanager
    def nested(self):
        if self.depth >= MAX_NESTING:
            raise self.error(f"expression nested deeper than {MAX_NESTING} levels")
        self.depth += 1
        try:
            yield
        finally:
            self.depth -= 1

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"expected {text!r}")
        return self.advance()

    def expect_int(self) -> int:
        tok = self.current
        if tok.kind != "NUMBER" or not tok.text.isdigit():
            raise self.error("expected a non-negative integer")
        self.advance()
        return int(tok.text)

    def expect_ident(self) -> Token:
        tok = self.current
        if tok.kind != "IDENT":
            raise self.error("expected an identifier")
        if tok.text in KEYWORDS or tok.text in SCALAR_NAMES:
            raise self.error("reserved word cannot be bound")
        return self.advance()

    def rational(self) -> GaussianRational:
        tok = self.current
        negative = False
        if self.at("-"):
            negative = True
            self.advance()
            tok = self.current
        if tok.kind != "NUMBER" or tok.text.endswith("i"):
            raise self.error("expected a rational number")
        self.advance()
        try:
            value = _number_value(tok.text)
        except ValueError as exc:
            raise DslSyntaxError(str(exc), tok.span.line, tok.span.column, tok.span.end_column) from None
        return -value if negative else value

    def rational_list(self) -> Tuple[GaussianRational, ...]:
        self.expect("[")
        values = [self.rational()]
        while self.at(","):
            self.advance()
            values.append(self.rational())
        self.expect("]")
        return tuple(values)

    # statements

    def parse_file(self) -> SpecAst:
        space = None
        if self.at("space"):
            start = self.advance()
            dim = self.expect_int()
            weights = None
            if self.current.kind == "WEIGHTS":
                self.advance()
                weights = self.rational_list()
            space = SpaceDecl(dim, weights, _join(start.span, self.previous.span))
        lets: List[LetStmt] = []
        index = 1 if space else 0
        while self.at("let"):
            lets.append(self.let_stmt(index))
            index += 1
        if self.at("space"):
            raise self.error("space declaration must come first")
        if not self.at("map"):
            raise self.error("expected 'let' or 'map'")
        decl = self.map_decl(index)
        if self.current.kind != "EOF":
            raise self.error("map declaration must be the last statement")
        return SpecAst(space, tuple(lets), decl)

    def bind(self, tok: Token) -> None:
        if tok.text in self.defined:
            first = self.defined[tok.text]
            raise DslBindingError(
                f"duplicate binding {tok.text!r} (first bound at line {first.line})",
                tok.span.line,
                tok.span.column,
                tok.span.end_column,
            )
        self.defined[tok.text] = tok.span

    def let_stmt(self, index: int) -> LetStmt:
        start = self.expect("let")
        name = self.expect_ident()
        self.expect("=")
        expr = self.section()
        self.bind(name)
        return LetStmt(name.text, expr, _join(start.span, self.previous.span), index)

    def map_decl(self, index: int) -> MapDecl:
        start = self.expect("map")
        name = self.expect_ident()
        self.expect("=")
        self.expect("span")
        self.expect("(")
        sections = [self.section()]
        while self.at(","):
            self.advance()
            sections.append(self.section())
        self.expect(")")
        self.bind(name)
        return MapDecl(name.text, tuple(sections), _join(start.span, self.previous.span), index)

    # section expressions

    def section(self) -> SectionNode:
        tok = self.current
        if self.at("["):
            return self.vector_literal()
        if tok.kind != "IDENT":
            raise self.error("expected a section expression")
        self.advance()
        if tok.text == "veronese":
            self.expect("(")
            n = self.expect_int()
            self.expect(",")
            i = self.expect_int()
            self.expect(")")
            return Veronese(n, i, _join(tok.span, self.previous.span))
        if tok.text in ("pad_end", "pad_front"):
            self.expect("(")
            with self.nested():
                operand = self.section()
            self.expect(",")
            count = self.expect_int()
            self.expect(")")
            return Pad(tok.text[4:], operand, count, _join(tok.span, self.previous.span))
        if tok.text == "concat":
            self.expect("(")
            with self.nested():
                left = self.section()
                self.expect(",")
                right = self.section()
            self.expect(")")
            return Concat(left, right, _join(tok.span, self.previous.span))
        if tok.text == "const":
            return self.const_args(tok)
        if tok.text in KEYWORDS or tok.text in SCALAR_NAMES:
            raise self.error("expected a section expression", tok)
        if tok.text not in self.defined:
            raise DslBindingError(f"undefined identifier {tok.text!r}", tok.span.line, tok.span.column, tok.span.end_column)
        return Ref(tok.text, tok.span)

    def const_args(self, start: Token) -> SectionNode:
        self.expect("(")
        if self.at("w"):
            self.advance()
            self.expect("=")
            weight = self.rational()
            self.expect(",")
            self.expect("value")
            self.expect("=")
            value = self.sum()
            self.expect(")")
            return ConstWeighted(weight, value, _join(start.span, self.previous.span))
        dim = self.expect_int()
        self.expect(",")
        index = self.expect_int()
        self.expect(")")
        return ConstCoord(dim, index, _join(start.span, self.previous.span))

    def vector_literal(self) -> VectorLiteral:
        start = self.expect("[")
        components = [self.sum()]
        while self.at(","):
            self.advance()
            components.append(self.sum())
        self.expect("]")
        weights = None
        if self.current.kind == "WEIGHTS":
            self.advance()
            weights = self.rational_list()
        return VectorLiteral(tuple(components), weights, _join(start.span, self.previous.span))

    # polynomial expressions

    def sum(self) -> PolyNode:
        node = self.term()
        while self.at("+") or self.at("-"):
            op = self.advance().text
            right = self.term()
            node = BinOp(op, node, right, _join(node.span, right.span))
        return node

    def term(self) -> PolyNode:
        node = self.unary()
        while self.at("*") or self.at("/"):
            op = self.advance().text
            right = self.unary()
            node = BinOp(op, node, right, _join(node.span, right.span))
        return node

    def unary(self) -> PolyNode:
        if self.at("-"):
            start = self.advance()
            with self.nested():
                operand = self.unary()
            return Neg(operand, _join(start.span, operand.span))
        return self.power()

    def power(self) -> PolyNode:
        base = self.atom()
        if not self.at("^"):
            return base
        self.advance()
        tok = self.current
        if tok.kind == "NUMBER" and "/" in tok.text and not tok.text.endswith("i"):
            # z^2/3 lexes its exponent as the literal 2/3
            exp_text, _, den_text = tok.text.partition("/")
            self.advance()
            exp_span = Span(tok.span.line, tok.span.column, tok.span.column + len(exp_text))
            den_span = Span(tok.span.line, exp_span.end_column + 1, tok.span.end_column)
            power = Pow(base, int(exp_text), _join(base.span, exp_span))
            if int(den_text) == 0:
                raise DslSyntaxError("zero denominator", den_span.line, den_span.column, den_span.end_column)
            return BinOp("/", power, Num(gaussian(int(den_text)), den_span), _join(base.span, tok.span))
        exponent = self.expect_int()
        return Pow(base, exponent, _join(base.span, self.previous.span))

    def atom(self) -> PolyNode:
        tok = self.current
        if tok.kind == "NUMBER":
            self.advance()
            try:
                return Num(_number_value(tok.text), tok.span)
            except ValueError as exc:
                raise DslSyntaxError(str(exc), tok.span.line, tok.span.column, tok.span.end_column) from None
        if tok.kind == "IDENT" and tok.text in SCALAR_NAMES:
            self.advance()
            return Var(tok.text, tok.span)
        if self.at("("):
            with self.nested():
                self.advance()
                node = self.sum()
            self.expect(")")
            return node
        if tok.kind == "IDENT":
            raise DslBindingError(
                f"unknown scalar {tok.text!r} (use z, zb, i or theta)",
                tok.span.line,
                tok.span.column,
                tok.span.end_column,
            )
        raise self.error("expected a polynomial expression")


def parse(text: str) -> SpecAst:
    """Parse a script; lexical, syntax and binding errors carry line and column."""
    ast = _Parser(tokenize(text)).parse_file()
    logger.debug("parsed %d let-bindings and map %r", len(ast.lets), ast.map.name)
    return ast


def parse_gaussian(text: str) -> GaussianRational:
    """A Gaussian-rational constant such as '1/2', '-3/7i' or '3/5+4/5i'."""
    parser = _Parser(tokenize(text))
    node = parser.sum()
    if parser.current.kind != "EOF":
        raise parser.error("unexpected trailing input")
    value = _eval_poly(node, GR_ONE)
    if not value.is_constant():
        raise DslSyntaxError("expected a constant", node.span.line, node.span.column, node.span.end_column)
    return value.constant_value()


# --- elaboration --------------------------------------------------------------------


def _fail(message: str, span: Span, statement: Optional[int] = None) -> DslElaborationError:
    return DslElaborationError(message, span.line, span.column, span.end_column, statement)


def _eval_poly(node: PolyNode, theta: GaussianRational) -> RationalFunction:
    if isinstance(node, Num):
        return RationalFunction(node.value)
    if isinstance(node, Var):
        return {"z": Z, "zb": ZB, "i": RationalFunction(GR_I), "theta": RationalFunction(theta)}[node.name]
    if isinstance(node, Neg):
        return -_eval_poly(node.operand, theta)
    if isinstance(node, Pow):
        base = _eval_poly(node.base, theta)
        if not base and node.exponent == 0:
            raise _fail("zero to the power zero", node.span)
        return base ** node.exponent
    # sums and products are left-leaning chains; walk the spine without recursing
    spine = []
    while isinstance(node, BinOp):
        spine.append(node)
        node = node.left
    value = _eval_poly(node, theta)
    for op_node in reversed(spine):
        right = _eval_poly(op_node.right, theta)
        if op_node.op == "+":
            value = value + right
        elif op_node.op == "-":
            value = value - right
        elif op_node.op == "*":
            value = value * right
        elif not right:
            raise _fail("division by zero", op_node.right.span)
        else:
            value = value / right
    return value


def _positive_weights(values: Sequence[GaussianRational], span: Span) -> WeightedSpace:
    if any(w.y for w in values):
        raise _fail("weights must be real", span)
    try:
        return WeightedSpace(tuple(w.x for w in values))
    except SpaceMismatchError as exc:
        raise _fail(str(exc), span) from None


class _Elaborator:
    def __init__(self, theta: GaussianRational):
        self.theta = theta
        self.env: Dict[str, VecRF] = {}
        self.statement: Optional[int] = None

    def fail(self, message: str, span: Span) -> DslElaborationError:
        return _fail(message, span, self.statement)

    def section(self, node: SectionNode) -> VecRF:
        try:
            return self._section(node)
        except DslError:
            raise
        except GrassmannEngineError as exc:
            raise self.fail(str(exc), node.span) from None

    def _section(self, node: SectionNode) -> VecRF:
        if isinstance(node, Ref):
            return self.env[node.name]
        if isinstance(node, Veronese):
            if not 0 <= node.i <= node.n:
                raise self.fail(f"veronese index {node.i} outside 0..{node.n}", node.span)
            return veronese(node.n, node.i)
        if isinstance(node, Pad):
            inner = self.section(node.operand)
            return pad_end(inner, node.count) if node.side == "end" else pad_front(inner, node.count)
        if isinstance(node, Concat):
            return concat(self.section(node.left), self.section(node.right))
        if isinstance(node, ConstCoord):
            return const_coord(node.dim, node.index)
        if isinstance(node, ConstWeighted):
            if node.weight.y or not node.weight.x > 0:
                raise self.fail("const weight must be a positive rational", node.span)
            value = _eval_poly(node.value, self.theta)
            if not value.is_constant():
                raise self.fail("const value must not depend on z", node.value.span)
            return const_vector(node.weight.x, value.constant_value())
        components = tuple(_eval_poly(c, self.theta) for c in node.components)
        if node.weights is None:
            space = WeightedSpace.standard(len(components))
        else:
            space = _positive_weights(node.weights, node.span)
            if space.dim != len(components):
                raise self.fail(f"{len(components)} components but {space.dim} weights", node.span)
        return VecRF(space, components)

    def bind(self, stmt: LetStmt) -> None:
        self.statement = stmt.index
        self.env[stmt.name] = self.section(stmt.expr)

    def declared_space(self, decl: SpaceDecl, sections: List[VecRF], spans: Sequence[Span]) -> List[VecRF]:
        for v, span in zip(sections, spans):
            if v.space.dim != decl.dim:
                raise self.fail(f"section of dimension {v.space.dim} in a declared {decl.dim}-space", span)
        if decl.weights is None:
            return sections
        space = _positive_weights(decl.weights, decl.span)
        if space.dim != decl.dim:
            raise self.fail(f"space {decl.dim} declares {space.dim} weights", decl.span)
        for v, span in zip(sections, spans):
            for j, c in enumerate(v.components):
                if c and v.space.weights[j] != space.weights[j]:
                    raise _fail(f"weight conflict on coordinate {j}", span, self.statement)
        return [v.with_space(space) for v in sections]


def elaborate(ast: SpecAst, theta: GaussianRational = GR_ONE) -> ImmersionSpec:
    """Resolve constructors, unify weights and build the bundle the map spans."""
    el = _Elaborator(theta)
    for stmt in ast.lets:
        el.bind(stmt)
    decl = ast.map
    el.statement = decl.index
    sections = [el.section(node) for node in decl.sections]
    spans = [node.span for node in decl.sections]
    for v, span in zip(sections, spans):
        if not v:
            raise el.fail("zero section", span)
    if ast.space is not None:
        sections = el.declared_space(ast.space, sections, spans)
    try:
        unified = unify_sections(sections)
        bundle = bundle_from_sections(unified)
    except WeightConflictError as exc:
        raise el.fail(f"weight conflict: {exc}", decl.span) from None
    except (SpaceMismatchError, DegenerateInputError) as exc:
        raise el.fail(str(exc), decl.span) from None
    except GrassmannEngineError as exc:
        raise el.fail(f"dependent sections: {exc}", decl.span) from None
    logger.info("elaborated map %r: rank %d in %s", decl.name, bundle.rank, bundle.space)
    return ImmersionSpec(bundle.space, tuple(bundle.sections), bundle, decl.name, tuple(spans))


def load_spec(path: str, theta: GaussianRational = GR_ONE) -> ImmersionSpec:
    with open(path, encoding="utf-8") as f:
        text = f.read()
    return elaborate(parse(text), theta)
