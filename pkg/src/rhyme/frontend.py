"""Surface syntax: lexer, AST, recursive-descent parser, and pretty printer.

The grammar is statement oriented.  `||` chains parse into one flattened
n-ary node and are only classified (superposition literal vs logical or)
during checking, because the same token serves both purposes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .typesys import Kind, RhymeType


# ---------------------------------------------------------------------------
# Diagnostics

@dataclass(frozen=True)
class Span:
    line: int
    col: int
    length: int = 1


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    message: str
    span: Span

    def render(self, path: str = "<input>") -> str:
        return f"{path}:{self.span.line}:{self.span.col}: {self.severity}: {self.message}"


def has_errors(diags: Iterable[Diagnostic]) -> bool:
    return any(d.severity == "error" for d in diags)


# ---------------------------------------------------------------------------
# Tokens

KW_TYPES = {
    "bit": Kind.BIT, "int": Kind.INT, "float": Kind.FLOAT, "complex": Kind.COMPLEX,
    "char": Kind.CHAR, "string": Kind.STRING, "bool": Kind.BOOL, "ref": Kind.REF,
    "qbit": Kind.QBIT, "qint": Kind.QINT, "qfloat": Kind.QFLOAT, "qcomplex": Kind.QCOMPLEX,
    "qchar": Kind.QCHAR, "qstring": Kind.QSTRING, "qbool": Kind.QBOOL, "qref": Kind.QREF,
}
KEYWORDS = set(KW_TYPES) | {"def", "native", "if", "else", "for", "return", "print", "true", "false"}

_OPERATORS = [
    "||", "&&", "==", "!=", "<=", ">=", "->", "++", "--",
    "=", "<", ">", "+", "-", "*", "/", "%", "&", "!",
]
_PUNCT = "(){}[];,."

_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "0": "\0", "\\": "\\", "'": "'", '"': '"'}


@dataclass(frozen=True)
class Token:
    kind: str  # keyword | ident | int | float | imag | char | string | op | punct | eof
    lexeme: str
    span: Span

    @property
    def end_col(self) -> int:
        return self.span.col + self.span.length


def tokenize(source: str) -> tuple[list[Token], list[Diagnostic]]:
    tokens: list[Token] = []
    diags: list[Diagnostic] = []
    line, col, i = 1, 1, 0
    n = len(source)

    def err(msg: str, at_line: int, at_col: int, length: int = 1) -> None:
        diags.append(Diagnostic("error", msg, Span(at_line, at_col, length)))

    while i < n:
        c = source[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
                col += 1
            continue

        start_line, start_col, start_i = line, col, i

        if c.isdigit():
            j = i + 1
            is_float = False
            while j < n and source[j].isdigit():
                j += 1
            if j < n and source[j] == "." and j + 1 < n and source[j + 1].isdigit():
                is_float = True
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
            kind = "float" if is_float else "int"
            # imaginary suffix: digits directly followed by `i` not starting an identifier
            if j < n and source[j] == "i" and (j + 1 >= n or not (source[j + 1].isalnum() or source[j + 1] == "_")):
                j += 1
                kind = "imag"
            lexeme = source[i:j]
            tokens.append(Token(kind, lexeme, Span(start_line, start_col, len(lexeme))))
            col += j - i
            i = j
            continue

        if c.isalpha() or c == "_":
            j = i + 1
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            lexeme = source[i:j]
            kind = "keyword" if lexeme in KEYWORDS else "ident"
            tokens.append(Token(kind, lexeme, Span(start_line, start_col, len(lexeme))))
            col += j - i
            i = j
            continue

        if c in ("'", '"'):
            quote = c
            j = i + 1
            chars = []
            closed = False
            while j < n and source[j] != "\n":
                if source[j] == "\\" and j + 1 < n:
                    esc = source[j + 1]
                    if esc in _ESCAPES:
                        chars.append(_ESCAPES[esc])
                        j += 2
                        continue
                    err(f"unknown escape sequence '\\{esc}'", start_line, start_col + (j - i))
                    j += 2
                    continue
                if source[j] == quote:
                    closed = True
                    j += 1
                    break
                chars.append(source[j])
                j += 1
            name = "char" if quote == "'" else "string"
            if not closed:
                err(f"unterminated {name} literal", start_line, start_col)
                i = j
                col += j - start_i
                continue
            text = "".join(chars)
            for ch in text:
                if ord(ch) >= 128:
                    err(f"character {ch!r} outside 7-bit ASCII in {name} literal", start_line, start_col)
                    break
            if quote == "'" and len(text) != 1:
                err("char literal must contain exactly one character", start_line, start_col)
                text = text[:1] or "\0"
            lexeme = source[i:j]
            tokens.append(Token(name, text, Span(start_line, start_col, len(lexeme))))
            col += j - i
            i = j
            continue

        matched = None
        for op in _OPERATORS:
            if source.startswith(op, i):
                matched = op
                break
        if matched:
            tokens.append(Token("op", matched, Span(start_line, start_col, len(matched))))
            i += len(matched)
            col += len(matched)
            continue
        if c in _PUNCT:
            tokens.append(Token("punct", c, Span(start_line, start_col, 1)))
            i += 1
            col += 1
            continue

        err(f"unknown character {c!r}", start_line, start_col)
        i += 1
        col += 1

    return tokens, diags


# ---------------------------------------------------------------------------
# AST

def _span_field() -> Span:
    return Span(0, 0, 0)


@dataclass(frozen=True)
class Node:
    span: Span = field(compare=False, kw_only=True, default_factory=_span_field)


# expressions
@dataclass(frozen=True)
class IntLit(Node):
    value: int


@dataclass(frozen=True)
class FloatLit(Node):
    value: float


@dataclass(frozen=True)
class ImagLit(Node):
    value: float  # imaginary part


@dataclass(frozen=True)
class CharLit(Node):
    value: str


@dataclass(frozen=True)
class StringLit(Node):
    value: str


@dataclass(frozen=True)
class BoolLit(Node):
    value: bool


@dataclass(frozen=True)
class Ident(Node):
    name: str


@dataclass(frozen=True)
class Unary(Node):
    op: str  # - ! & *
    operand: "Expr"


@dataclass(frozen=True)
class ImagSuffix(Node):
    operand: "Expr"  # (expr)i multiplies by the imaginary unit


@dataclass(frozen=True)
class Binary(Node):
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class OrChain(Node):
    """Flattened `a || b || ...`; superposition literal or logical-or per checking."""

    operands: tuple["Expr", ...]


@dataclass(frozen=True)
class Call(Node):
    name: str
    args: tuple["Expr", ...]


@dataclass(frozen=True)
class MethodCall(Node):
    receiver: "Expr"
    name: str
    args: tuple["Expr", ...]


@dataclass(frozen=True)
class StaticCall(Node):
    type: RhymeType
    name: str
    args: tuple["Expr", ...]


@dataclass(frozen=True)
class Index(Node):
    base: "Expr"
    index: "Expr"


@dataclass(frozen=True)
class Length(Node):
    base: "Expr"


Expr = (
    IntLit | FloatLit | ImagLit | CharLit | StringLit | BoolLit | Ident | Unary
    | ImagSuffix | Binary | OrChain | Call | MethodCall | StaticCall | Index | Length
)


# statements
@dataclass(frozen=True)
class VarDecl(Node):
    type: RhymeType
    name: str
    init: Expr | None


@dataclass(frozen=True)
class Assign(Node):
    target: Expr
    value: Expr


@dataclass(frozen=True)
class ExprStmt(Node):
    expr: Expr


@dataclass(frozen=True)
class IncDec(Node):
    target: Expr
    op: str  # ++ | --


@dataclass(frozen=True)
class Block(Node):
    statements: tuple["Stmt", ...]


@dataclass(frozen=True)
class If(Node):
    cond: Expr
    then: Block
    orelse: "Block | If | None"


@dataclass(frozen=True)
class For(Node):
    init: "Stmt | None"
    cond: Expr | None
    update: "Stmt | None"
    body: Block


@dataclass(frozen=True)
class Return(Node):
    value: Expr | None


@dataclass(frozen=True)
class Print(Node):
    value: Expr


Stmt = VarDecl | Assign | ExprStmt | IncDec | Block | If | For | Return | Print


@dataclass(frozen=True)
class Param(Node):
    type: RhymeType
    name: str


@dataclass(frozen=True)
class FuncDef(Node):
    name: str
    params: tuple[Param, ...]
    return_type: RhymeType | None
    body: Block | None  # None for native declarations
    native: bool = False


@dataclass(frozen=True)
class Program(Node):
    items: tuple["FuncDef | Stmt", ...]


# ---------------------------------------------------------------------------
# Parser

class _ParseError(Exception):
    def __init__(self, message: str, span: Span):
        super().__init__(message)
        self.message = message
        self.span = span


class _Parser:
    def __init__(self, tokens: list[Token]):
        if tokens:
            last = tokens[-1]
            end = Span(last.span.line, last.end_col, 0)
        else:
            end = Span(1, 1, 0)
        self.tokens = tokens + [Token("eof", "", end)]
        self.pos = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def check(self, kind: str, lexeme: str | None = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (lexeme is None or tok.lexeme == lexeme)

    def match(self, kind: str, lexeme: str | None = None) -> Token | None:
        if self.check(kind, lexeme):
            return self.advance()
        return None

    def expect(self, kind: str, lexeme: str | None = None, what: str | None = None) -> Token:
        if self.check(kind, lexeme):
            return self.advance()
        tok = self.peek()
        wanted = what or (lexeme if lexeme is not None else kind)
        got = tok.lexeme if tok.kind != "eof" else "end of input"
        raise _ParseError(f"expected {wanted!r}, found {got!r}", tok.span)

    # --- types ---

    def at_type(self) -> bool:
        return self.peek().kind == "keyword" and self.peek().lexeme in KW_TYPES

    def parse_type(self) -> RhymeType:
        tok = self.expect("keyword", what="type name")
        if tok.lexeme not in KW_TYPES:
            raise _ParseError(f"expected type name, found {tok.lexeme!r}", tok.span)
        kind = KW_TYPES[tok.lexeme]
        if self.check("punct", "["):
            close = self.peek(1)
            if close.kind == "punct" and close.lexeme == "]":
                self.advance()
                self.advance()
                if kind == Kind.BIT:
                    return RhymeType(Kind.BIT_ARRAY)
                if kind == Kind.QBIT:
                    return RhymeType(Kind.QBIT_ARRAY)
                raise _ParseError(f"array types are limited to bit[] and qbit[], not {tok.lexeme}[]", tok.span)
        return RhymeType(kind)

    # --- program / items ---

    def parse_program(self) -> Program:
        items: list[FuncDef | Stmt] = []
        start = self.peek().span
        while not self.check("eof"):
            if self.check("keyword", "def"):
                items.append(self.parse_funcdef())
            else:
                items.append(self.parse_statement())
        return Program(tuple(items), span=start)

    def parse_funcdef(self) -> FuncDef:
        start = self.expect("keyword", "def").span
        native = self.match("keyword", "native") is not None
        name = self.expect("ident", what="function name").lexeme
        self.expect("punct", "(")
        params: list[Param] = []
        if not self.check("punct", ")"):
            while True:
                ptype = self.parse_type()
                pname_tok = self.expect("ident", what="parameter name")
                params.append(Param(ptype, pname_tok.lexeme, span=pname_tok.span))
                if not self.match("punct", ","):
                    break
        self.expect("punct", ")")
        ret: RhymeType | None = None
        if self.match("op", "->"):
            ret = self.parse_type()
        if native:
            self.expect("punct", ";")
            return FuncDef(name, tuple(params), ret, None, native=True, span=start)
        body = self.parse_block()
        return FuncDef(name, tuple(params), ret, body, span=start)

    # --- statements ---

    def parse_block(self) -> Block:
        start = self.expect("punct", "{").span
        stmts: list[Stmt] = []
        while not self.check("punct", "}"):
            if self.check("eof"):
                raise _ParseError("expected '}', found end of input", self.peek().span)
            stmts.append(self.parse_statement())
        self.expect("punct", "}")
        return Block(tuple(stmts), span=start)

    def parse_statement(self) -> Stmt:
        tok = self.peek()
        if tok.kind == "keyword":
            if tok.lexeme in KW_TYPES:
                nxt = self.peek(1)
                if not (nxt.kind == "punct" and nxt.lexeme == "."):
                    return self.parse_vardecl()
            elif tok.lexeme == "if":
                return self.parse_if()
            elif tok.lexeme == "for":
                return self.parse_for()
            elif tok.lexeme == "return":
                self.advance()
                value = None if self.check("punct", ";") else self.parse_expr()
                self.expect("punct", ";")
                return Return(value, span=tok.span)
            elif tok.lexeme == "print":
                self.advance()
                self.expect("punct", "(")
                value = self.parse_expr()
                self.expect("punct", ")")
                self.expect("punct", ";")
                return Print(value, span=tok.span)
        if tok.kind == "punct" and tok.lexeme == "{":
            return self.parse_block()
        stmt = self.parse_simple_statement()
        self.expect("punct", ";")
        return stmt

    def parse_vardecl(self) -> VarDecl:
        start = self.peek().span
        vtype = self.parse_type()
        name = self.expect("ident", what="variable name").lexeme
        init = None
        if self.match("op", "="):
            init = self.parse_expr()
        self.expect("punct", ";")
        return VarDecl(vtype, name, init, span=start)

    def parse_if(self) -> If:
        start = self.expect("keyword", "if").span
        self.expect("punct", "(")
        cond = self.parse_expr()
        self.expect("punct", ")")
        then = self.parse_block()
        orelse: Block | If | None = None
        if self.match("keyword", "else"):
            orelse = self.parse_if() if self.check("keyword", "if") else self.parse_block()
        return If(cond, then, orelse, span=start)

    def parse_for(self) -> For:
        start = self.expect("keyword", "for").span
        self.expect("punct", "(")
        init: Stmt | None = None
        if not self.check("punct", ";"):
            if self.at_type():
                vtype = self.parse_type()
                name_tok = self.expect("ident", what="variable name")
                self.expect("op", "=")
                expr = self.parse_expr()
                init = VarDecl(vtype, name_tok.lexeme, expr, span=name_tok.span)
            else:
                init = self.parse_simple_statement()
        self.expect("punct", ";")
        cond = None if self.check("punct", ";") else self.parse_expr()
        self.expect("punct", ";")
        update: Stmt | None = None
        if not self.check("punct", ")"):
            update = self.parse_simple_statement()
        self.expect("punct", ")")
        body = self.parse_block()
        return For(init, cond, update, body, span=start)

    def parse_simple_statement(self) -> Stmt:
        """Assignment, ++/--, or expression statement (no trailing ';')."""
        start = self.peek().span
        expr = self.parse_expr()
        if self.check("op", "="):
            self.advance()
            if not isinstance(expr, (Ident, Index, Unary)) or (
                isinstance(expr, Unary) and expr.op != "*"
            ):
                raise _ParseError("invalid assignment target", start)
            value = self.parse_expr()
            return Assign(expr, value, span=start)
        if self.check("op", "++") or self.check("op", "--"):
            op = self.advance().lexeme
            if not isinstance(expr, (Ident, Index)):
                raise _ParseError(f"invalid {op} target", start)
            return IncDec(expr, op, span=start)
        return ExprStmt(expr, span=start)

    # --- expressions (precedence climbing) ---

    def parse_expr(self) -> Expr:
        return self.parse_or()

    def parse_or(self) -> Expr:
        first = self.parse_and()
        if not self.check("op", "||"):
            return first
        operands = [first]
        start = first.span
        while self.match("op", "||"):
            operands.append(self.parse_and())
        return OrChain(tuple(operands), span=start)

    def parse_and(self) -> Expr:
        left = self.parse_equality()
        while self.check("op", "&&"):
            self.advance()
            right = self.parse_equality()
            left = Binary("&&", left, right, span=left.span)
        return left

    def parse_equality(self) -> Expr:
        left = self.parse_relational()
        while self.peek().kind == "op" and self.peek().lexeme in ("==", "!="):
            op = self.advance().lexeme
            right = self.parse_relational()
            left = Binary(op, left, right, span=left.span)
        return left

    def parse_relational(self) -> Expr:
        left = self.parse_additive()
        while self.peek().kind == "op" and self.peek().lexeme in ("<", ">", "<=", ">="):
            op = self.advance().lexeme
            right = self.parse_additive()
            left = Binary(op, left, right, span=left.span)
        return left

    def parse_additive(self) -> Expr:
        left = self.parse_multiplicative()
        while self.peek().kind == "op" and self.peek().lexeme in ("+", "-"):
            op = self.advance().lexeme
            right = self.parse_multiplicative()
            left = Binary(op, left, right, span=left.span)
        return left

    def parse_multiplicative(self) -> Expr:
        left = self.parse_unary()
        while self.peek().kind == "op" and self.peek().lexeme in ("*", "/", "%"):
            op = self.advance().lexeme
            right = self.parse_unary()
            left = Binary(op, left, right, span=left.span)
        return left

    def parse_unary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "op" and tok.lexeme in ("-", "!", "&", "*"):
            self.advance()
            operand = self.parse_unary()
            return Unary(tok.lexeme, operand, span=tok.span)
        return self.parse_postfix()

    def parse_postfix(self) -> Expr:
        expr = self.parse_primary()
        while True:
            if self.check("punct", "."):
                self.advance()
                name_tok = self.expect("ident", what="member name")
                if self.match("punct", "("):
                    args = self.parse_args()
                    expr = MethodCall(expr, name_tok.lexeme, args, span=expr.span)
                elif name_tok.lexeme == "length":
                    expr = Length(expr, span=expr.span)
                else:
                    raise _ParseError(
                        f"expected '(' after method name {name_tok.lexeme!r} (only .length is a property)",
                        name_tok.span,
                    )
                continue
            if self.check("punct", "["):
                self.advance()
                idx = self.parse_expr()
                self.expect("punct", "]")
                expr = Index(expr, idx, span=expr.span)
                continue
            # `(...)i` puts a value on the imaginary axis; the `i` must be adjacent
            prev = self.tokens[self.pos - 1]
            nxt = self.peek()
            if (
                nxt.kind == "ident"
                and nxt.lexeme == "i"
                and prev.kind == "punct"
                and prev.lexeme == ")"
                and nxt.span.line == prev.span.line
                and nxt.span.col == prev.end_col
            ):
                self.advance()
                expr = ImagSuffix(expr, span=expr.span)
                continue
            return expr

    def parse_args(self) -> tuple[Expr, ...]:
        args: list[Expr] = []
        if not self.check("punct", ")"):
            while True:
                args.append(self.parse_expr())
                if not self.match("punct", ","):
                    break
        self.expect("punct", ")")
        return tuple(args)

    def parse_primary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "int":
            self.advance()
            return IntLit(int(tok.lexeme), span=tok.span)
        if tok.kind == "float":
            self.advance()
            return FloatLit(float(tok.lexeme), span=tok.span)
        if tok.kind == "imag":
            self.advance()
            return ImagLit(float(tok.lexeme[:-1]), span=tok.span)
        if tok.kind == "char":
            self.advance()
            return CharLit(tok.lexeme, span=tok.span)
        if tok.kind == "string":
            self.advance()
            return StringLit(tok.lexeme, span=tok.span)
        if tok.kind == "keyword" and tok.lexeme in ("true", "false"):
            self.advance()
            return BoolLit(tok.lexeme == "true", span=tok.span)
        if tok.kind == "keyword" and tok.lexeme in KW_TYPES:
            ttype = self.parse_type()
            self.expect("punct", ".")
            name = self.expect("ident", what="static method name").lexeme
            self.expect("punct", "(")
            args = self.parse_args()
            return StaticCall(ttype, name, args, span=tok.span)
        if tok.kind == "ident":
            self.advance()
            if self.match("punct", "("):
                args = self.parse_args()
                return Call(tok.lexeme, args, span=tok.span)
            return Ident(tok.lexeme, span=tok.span)
        if tok.kind == "punct" and tok.lexeme == "(":
            self.advance()
            inner = self.parse_expr()
            self.expect("punct", ")")
            return inner
        got = tok.lexeme if tok.kind != "eof" else "end of input"
        raise _ParseError(f"expected expression, found {got!r}", tok.span)


def parse(tokens: list[Token]) -> tuple[Program | None, list[Diagnostic]]:
    try:
        return _Parser(tokens).parse_program(), []
    except _ParseError as e:
        return None, [Diagnostic("error", e.message, e.span)]


def parse_source(source: str) -> tuple[Program | None, list[Diagnostic]]:
    tokens, diags = tokenize(source)
    if has_errors(diags):
        return None, diags
    program, parse_diags = parse(tokens)
    return program, diags + parse_diags


# ---------------------------------------------------------------------------
# Pretty printer (canonical formatting; reparsing yields a structurally equal AST)

_PREC = {
    "||": 1, "&&": 2, "==": 3, "!=": 3,
    "<": 4, ">": 4, "<=": 4, ">=": 4,
    "+": 5, "-": 5, "*": 6, "/": 6, "%": 6,
}
_UNARY_PREC = 7


def _escape(text: str, quote: str) -> str:
    out = []
    for ch in text:
        if ch == "\\":
            out.append("\\\\")
        elif ch == quote:
            out.append("\\" + quote)
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        elif ch == "\0":
            out.append("\\0")
        else:
            out.append(ch)
    return "".join(out)


def _float_text(v: float) -> str:
    text = repr(v)
    return text if ("." in text or "e" in text or "inf" in text or "nan" in text) else text + ".0"


def format_expr(e: Expr, parent_prec: int = 0) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, FloatLit):
        return _float_text(e.value)
    if isinstance(e, ImagLit):
        t = _float_text(e.value)
        return (t[:-2] if t.endswith(".0") else t) + "i"
    if isinstance(e, CharLit):
        return f"'{_escape(e.value, chr(39))}'"
    if isinstance(e, StringLit):
        return f'"{_escape(e.value, chr(34))}"'
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, Ident):
        return e.name
    if isinstance(e, Unary):
        inner = format_expr(e.operand, _UNARY_PREC)
        return f"{e.op}{inner}"
    if isinstance(e, ImagSuffix):
        inner = format_expr(e.operand, 0)
        if isinstance(e.operand, Call):
            return f"{inner}i"
        return f"({inner})i"
    if isinstance(e, Binary):
        prec = _PREC[e.op]
        text = f"{format_expr(e.left, prec)} {e.op} {format_expr(e.right, prec + 1)}"
        return f"({text})" if prec < parent_prec else text
    if isinstance(e, OrChain):
        text = " || ".join(format_expr(op, _PREC["||"] + 1) for op in e.operands)
        return f"({text})" if _PREC["||"] < parent_prec else text
    if isinstance(e, Call):
        return f"{e.name}({', '.join(format_expr(a) for a in e.args)})"
    if isinstance(e, MethodCall):
        recv = format_expr(e.receiver, _UNARY_PREC + 1)
        return f"{recv}.{e.name}({', '.join(format_expr(a) for a in e.args)})"
    if isinstance(e, StaticCall):
        return f"{e.type}.{e.name}({', '.join(format_expr(a) for a in e.args)})"
    if isinstance(e, Index):
        return f"{format_expr(e.base, _UNARY_PREC + 1)}[{format_expr(e.index)}]"
    if isinstance(e, Length):
        return f"{format_expr(e.base, _UNARY_PREC + 1)}.length"
    raise TypeError(f"unknown expression node {e!r}")


def _format_stmt(s: Stmt, indent: int, lines: list[str]) -> None:
    pad = "  " * indent
    if isinstance(s, VarDecl):
        init = f" = {format_expr(s.init)}" if s.init is not None else ""
        lines.append(f"{pad}{s.type} {s.name}{init};")
    elif isinstance(s, Assign):
        lines.append(f"{pad}{format_expr(s.target)} = {format_expr(s.value)};")
    elif isinstance(s, ExprStmt):
        lines.append(f"{pad}{format_expr(s.expr)};")
    elif isinstance(s, IncDec):
        lines.append(f"{pad}{format_expr(s.target)}{s.op};")
    elif isinstance(s, Block):
        lines.append(f"{pad}{{")
        for inner in s.statements:
            _format_stmt(inner, indent + 1, lines)
        lines.append(f"{pad}}}")
    elif isinstance(s, If):
        lines.append(f"{pad}if ({format_expr(s.cond)}) {{")
        for inner in s.then.statements:
            _format_stmt(inner, indent + 1, lines)
        if s.orelse is None:
            lines.append(f"{pad}}}")
        elif isinstance(s.orelse, If):
            lines.append(f"{pad}}} else {_strip_leading(s.orelse, indent)}")
        else:
            lines.append(f"{pad}}} else {{")
            for inner in s.orelse.statements:
                _format_stmt(inner, indent + 1, lines)
            lines.append(f"{pad}}}")
    elif isinstance(s, For):
        init = _inline_stmt(s.init) if s.init is not None else ""
        cond = format_expr(s.cond) if s.cond is not None else ""
        update = _inline_stmt(s.update) if s.update is not None else ""
        lines.append(f"{pad}for ({init}; {cond}; {update}) {{")
        for inner in s.body.statements:
            _format_stmt(inner, indent + 1, lines)
        lines.append(f"{pad}}}")
    elif isinstance(s, Return):
        lines.append(f"{pad}return {format_expr(s.value)};" if s.value is not None else f"{pad}return;")
    elif isinstance(s, Print):
        lines.append(f"{pad}print({format_expr(s.value)});")
    else:
        raise TypeError(f"unknown statement node {s!r}")


def _strip_leading(s: If, indent: int) -> str:
    sub: list[str] = []
    _format_stmt(s, indent, sub)
    first = sub[0].lstrip()
    rest = "\n".join(sub[1:])
    return first + ("\n" + rest if rest else "")


def _inline_stmt(s: Stmt) -> str:
    lines: list[str] = []
    _format_stmt(s, 0, lines)
    text = lines[0]
    return text[:-1] if text.endswith(";") else text


def format_program(program: Program) -> str:
    lines: list[str] = []
    for item in program.items:
        if isinstance(item, FuncDef):
            params = ", ".join(f"{p.type} {p.name}" for p in item.params)
            ret = f" -> {item.return_type}" if item.return_type is not None else ""
            if item.native:
                lines.append(f"def native {item.name}({params}){ret};")
            else:
                lines.append(f"def {item.name}({params}){ret} {{")
                for inner in item.body.statements:
                    _format_stmt(inner, 1, lines)
                lines.append("}")
        else:
            _format_stmt(item, 0, lines)
    return "\n".join(lines) + "\n"
