"""Lexer and parser tests against the surface syntax."""
import pytest

from rhyme import frontend as fe
from rhyme.typesys import Kind

GROVER = """
qstring s = qstring.all();

int dim = qstring.dimension();
int numIter = ceil(pi / 4 * sqrt(dim));

// Grover iteration
for(int i = 0; i < numIter; i++) {
  s.applyOracle(oracle);
  s.invertAboutMean();
}

string res = s; // measure to get solution with high probability
print(res);

def oracle(string s) -> bool {
  if (s == "ABC") {
    return true;
  } else {
    return false;
  }
}
"""


def lex_ok(src):
    tokens, diags = fe.tokenize(src)
    assert not fe.has_errors(diags), diags
    return tokens


def parse_ok(src):
    program, diags = fe.parse_source(src)
    assert program is not None and not fe.has_errors(diags), diags
    return program


def test_tokenize_superposition_decl():
    tokens = lex_ok("qbit b = 0 || 1;")
    assert [(t.kind, t.lexeme) for t in tokens] == [
        ("keyword", "qbit"),
        ("ident", "b"),
        ("op", "="),
        ("int", "0"),
        ("op", "||"),
        ("int", "1"),
        ("punct", ";"),
    ]


def test_tokenize_empty_source():
    tokens, diags = fe.tokenize("")
    assert tokens == [] and diags == []


def test_tokenize_unterminated_string():
    tokens, diags = fe.tokenize('string s = "Hi')
    assert any(d.severity == "error" and "unterminated string literal" in d.message for d in diags)
    bad = [d for d in diags if "unterminated" in d.message][0]
    assert (bad.span.line, bad.span.col) == (1, 12)  # at the opening quote


def test_tokenize_imaginary_literal():
    tokens = lex_ok("complex z = 0.6 + 0.8i;")
    kinds = [t.kind for t in tokens]
    assert "imag" in kinds
    imag = tokens[kinds.index("imag")]
    assert imag.lexeme == "0.8i"


def test_tokenize_comments_and_operators():
    tokens = lex_ok("a <= b; // trailing words != tokens\nc % d;")
    lexemes = [t.lexeme for t in tokens]
    assert "<=" in lexemes and "%" in lexemes and "!=" not in lexemes


def test_tokenize_non_ascii_in_literal():
    _, diags = fe.tokenize("char c = 'é';")
    assert any("7-bit ASCII" in d.message for d in diags)


def test_tokenize_unknown_character():
    _, diags = fe.tokenize("int i = 3 @ 4;")
    assert any("unknown character" in d.message for d in diags)


def test_spans_reconstruct_source():
    src = 'qbit b = 0 || 1; // mix\nint i = 15;'
    tokens = lex_ok(src)
    lines = src.split("\n")
    for t in tokens:
        if t.kind in ("char", "string"):
            continue  # lexeme is the decoded text, not the raw slice
        line = lines[t.span.line - 1]
        assert line[t.span.col - 1 : t.span.col - 1 + t.span.length] == t.lexeme


def test_parse_int_declaration():
    program = parse_ok("int i = 15;")
    (decl,) = program.items
    assert isinstance(decl, fe.VarDecl)
    assert decl.type.kind == Kind.INT and decl.name == "i"
    assert decl.init == fe.IntLit(15)


def test_parse_if_with_method_call():
    program = parse_ok("if (c == 'B') { t.increment(); }")
    (stmt,) = program.items
    assert isinstance(stmt, fe.If)
    assert isinstance(stmt.cond, fe.Binary) and stmt.cond.op == "=="
    (body_stmt,) = stmt.then.statements
    assert isinstance(body_stmt, fe.ExprStmt)
    assert isinstance(body_stmt.expr, fe.MethodCall)
    assert body_stmt.expr.name == "increment"


def test_parse_grover_listing_shape():
    program = parse_ok(GROVER)
    fors = [s for s in program.items if isinstance(s, fe.For)]
    assert len(fors) == 1
    loop = fors[0]
    assert len(loop.body.statements) == 2
    assert all(
        isinstance(s, fe.ExprStmt) and isinstance(s.expr, fe.MethodCall)
        for s in loop.body.statements
    )
    # one measurement assignment: classical string initialized from the quantum var
    measures = [
        s
        for s in program.items
        if isinstance(s, fe.VarDecl) and s.type.kind == Kind.STRING and isinstance(s.init, fe.Ident)
    ]
    assert len(measures) == 1
    defs = [s for s in program.items if isinstance(s, fe.FuncDef)]
    assert len(defs) == 1 and defs[0].name == "oracle"


def test_parse_superposition_chain_flattened():
    program = parse_ok("qint j = 1 || 30 || 160;")
    (decl,) = program.items
    assert isinstance(decl.init, fe.OrChain)
    assert [op.value for op in decl.init.operands] == [1, 30, 160]


def test_parse_static_calls():
    program = parse_ok("qbit[] a = qbit.zeros(4); qint k = qint.all(); int d = qstring.dimension();")
    zeros, allcall, dim = (s.init for s in program.items)
    assert isinstance(zeros, fe.StaticCall) and zeros.name == "zeros"
    assert zeros.type.kind == Kind.QBIT
    assert isinstance(allcall, fe.StaticCall) and allcall.name == "all"
    assert isinstance(dim, fe.StaticCall) and dim.type.kind == Kind.QSTRING


def test_parse_ref_and_deref():
    program = parse_ok("ref x = &i; float y = *x;")
    addr, deref = (s.init for s in program.items)
    assert isinstance(addr, fe.Unary) and addr.op == "&"
    assert isinstance(deref, fe.Unary) and deref.op == "*"


def test_parse_imaginary_suffix_on_call():
    program = parse_ok("qcomplex z = (0.6 + 0.8i) || (sqrt(1/2) + sqrt(1/2)i);")
    (decl,) = program.items
    chain = decl.init
    assert isinstance(chain, fe.OrChain) and len(chain.operands) == 2
    second = chain.operands[1]
    assert isinstance(second, fe.Binary) and second.op == "+"
    assert isinstance(second.right, fe.ImagSuffix)
    assert isinstance(second.right.operand, fe.Call)


def test_parse_function_def_and_native():
    program = parse_ok(
        "def shift(bit b) -> bit { return 1; }\ndef native invertAboutMean(qstring s);"
    )
    shift, native = program.items
    assert isinstance(shift, fe.FuncDef) and not shift.native
    assert shift.params[0].type.kind == Kind.BIT and shift.return_type.kind == Kind.BIT
    assert native.native and native.body is None


def test_parse_for_with_decrement():
    program = parse_ok("for(int i = L - 1; i > 0; i--) { anc[i].CCNOT(arr[i], anc[i-1]); }")
    (loop,) = program.items
    assert isinstance(loop.update, fe.IncDec) and loop.update.op == "--"
    (call,) = loop.body.statements
    assert isinstance(call.expr.receiver, fe.Index)


def test_parse_else_if_chain():
    program = parse_ok("if (a == 1) { x = 1; } else if (a == 2) { x = 2; } else { x = 3; }")
    (stmt,) = program.items
    assert isinstance(stmt.orelse, fe.If)
    assert isinstance(stmt.orelse.orelse, fe.Block)


def test_parse_error_has_span_and_expectation():
    program, diags = fe.parse_source("int i = ;")
    assert program is None
    assert len(diags) == 1
    assert "expected expression" in diags[0].message
    assert diags[0].span.line == 1


@pytest.mark.parametrize(
    "src",
    [
        "qbit b = 0 || 1;",
        GROVER,
        "qcomplex z = (0.6 + 0.8i) || (sqrt(1/2) + sqrt(1/2)i);",
        "if (a == 1) { x = 1; } else if (a == 2) { x = 2; } else { x = 3; }",
        "def f(int a, float b) -> float { return a * b - 1.5; }",
        "for(;;) { i++; }",
        "print(-x + y * (z - 1) % 2);",
        "bit[] bArr;\nqbit[] arr = qbit.zeros(4);\nint L = arr.length;",
        'string s = "Hi\\n";\nchar c = \'\\t\';',
        "x = a || b || c;",
    ],
)
def test_pretty_print_round_trip(src):
    program = parse_ok(src)
    printed = fe.format_program(program)
    reparsed = parse_ok(printed)
    assert reparsed == program
    # canonical form is a fixed point
    assert fe.format_program(reparsed) == printed
