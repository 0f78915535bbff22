"""Static checker tests: classification, folding, and rejection rules."""
import pathlib
import time

import pytest

from rhyme import frontend as fe
from rhyme.checker import CheckedProgram, check_source
from rhyme.typesys import Address, TypeConfig

CORPUS = pathlib.Path(__file__).resolve().parent.parent / "corpus"

CORPUS_WIDTHS = {
    "quantum_types.rh": TypeConfig(string_max_len=5),
}


def check_ok(src, cfg=None):
    checked = check_source(src, cfg)
    assert isinstance(checked, CheckedProgram), checked
    errors = [d for d in checked.diagnostics if d.severity == "error"]
    assert not errors, errors
    return checked


def check_errors(src, cfg=None):
    checked = check_source(src, cfg)
    if isinstance(checked, CheckedProgram):
        return [d for d in checked.diagnostics if d.severity == "error"]
    return checked


@pytest.mark.parametrize("path", sorted(CORPUS.glob("*.rh")), ids=lambda p: p.name)
def test_corpus_checks_clean(path):
    cfg = CORPUS_WIDTHS.get(path.name, TypeConfig())
    start = time.monotonic()
    check_ok(path.read_text(), cfg)
    assert time.monotonic() - start < 1.0


def test_corpus_total_check_time_under_one_second():
    start = time.monotonic()
    for path in sorted(CORPUS.glob("*.rh")):
        cfg = CORPUS_WIDTHS.get(path.name, TypeConfig())
        check_ok(path.read_text(), cfg)
    assert time.monotonic() - start < 1.0


def test_superposition_folded_values():
    checked = check_ok("qint j = 1 || 30 || 160;")
    (values,) = checked.superpositions.values()
    assert values == [1, 30, 160]


def test_superposition_of_addresses():
    checked = check_ok("qint a = 1;\nqint b = 2;\nqref r = &a || &b;")
    folded = [v for v in checked.superpositions.values() if isinstance(v[0], Address)]
    assert folded == [[Address(0, True), Address(1, True)]]


def test_superposition_rejects_duplicates():
    errors = check_errors("qbit b = 0 || 0;")
    assert any("distinct" in e.message for e in errors)


def test_superposition_rejects_non_constants():
    errors = check_errors("int k = 1;\nk = 2;\nqint j = k || 3;")
    assert any("compile-time constants" in e.message for e in errors)


def test_superposition_out_of_range_int():
    errors = check_errors("qint j = 1 || 70000;")
    assert any("two's-complement" in e.message for e in errors)


def test_logical_or_needs_bools():
    check_ok("bool a = true;\nbool b = false;\nbool c = a || b;")
    errors = check_errors("int a = 1;\nbool c = a || false;")
    assert any("logical-or" in e.message for e in errors)


def test_string_too_long_for_width():
    errors = check_errors('qstring s = "Hello" || "World";')
    assert any("longer than" in e.message for e in errors)
    check_ok('qstring s = "Hello" || "World";', TypeConfig(string_max_len=5))


def test_float_rounding_warns_but_checks():
    checked = check_ok("qfloat f = 3.14159 || 2.71828;")
    warnings = [d for d in checked.diagnostics if d.severity == "warning"]
    assert len(warnings) == 2


def test_quantum_var_requires_initializer():
    errors = check_errors("qbit b;")
    assert any("requires an initializer" in e.message for e in errors)


def test_no_cloning():
    errors = check_errors("qbit a = 0 || 1;\nqbit b = a;")
    assert any("no-cloning" in e.message for e in errors)


def test_measurement_type_mismatch():
    errors = check_errors("qchar c = 'A' || 'B';\nint x = c;")
    assert any("yields" in e.message for e in errors)


def test_quantum_reassignment_rejected():
    errors = check_errors("qbit b = 0 || 1;\nb = 0;")
    assert any("reassigned" in e.message for e in errors)


def test_quantum_operand_in_arithmetic_rejected():
    errors = check_errors("qint i = 1 || 2;\nint x = 0;\nx = 1 + 2;\nprint(x);\nint y = 0;\ny = x + 0;\nbool b = i == 1;")
    assert any("quantum operand" in e.message or "quantum" in e.message for e in errors)


def test_print_quantum_rejected():
    errors = check_errors("qbit b = 0 || 1;\nprint(b);")
    assert any("cannot print a quantum variable" in e.message for e in errors)


def test_addphase_signature_checks():
    errors = check_errors(
        "qbit b = 0 || 1;\nb.addPhase(shift, 0);\ndef shift(bit x) -> bit { return x; }"
    )
    assert any("N must be" in e.message for e in errors)
    errors = check_errors(
        "qbit b = 0 || 1;\nb.addPhase(shift, 2);\ndef shift(int x, int y) -> int { return x; }"
    )
    assert any("exactly one parameter" in e.message for e in errors)
    errors = check_errors(
        "qint i = 1 || 2;\ni.addPhase(shift, 2);\ndef shift(string s) -> int { return 1; }"
    )
    assert any("does not match" in e.message for e in errors)


def test_phase_function_must_be_pure():
    errors = check_errors(
        "qbit b = 0 || 1;\nb.addPhase(shout, 2);\n"
        "def shout(bit x) -> bit { print(x); return x; }"
    )
    assert any("pure" in e.message for e in errors)


def test_bipartition_static_violation_detected():
    src = """
qchar c = 'A' || 'B';
c.applyBipartiteInterference(split, pair);

def split(char c) -> bool {
  if (c == 'A') {
    return true;
  } else {
    return false;
  }
}

def pair(char c) -> char {
  return 'A'; // everything maps to 'A': not a bipartition
}
"""
    errors = check_errors(src)
    assert any("bipartition" in e.message for e in errors)


def test_bipartition_same_side_detected():
    src = """
qchar c = 'A' || 'B';
c.applyBipartiteInterference(split, pair);

def split(char c) -> bool {
  return true; // everything on one side
}

def pair(char c) -> char {
  if (c == 'A') {
    return 'B';
  } else {
    if (c == 'B') {
      return 'A';
    } else {
      return c;
    }
  }
}
"""
    errors = check_errors(src)
    assert any("same side" in e.message for e in errors)


def test_interference_matrix_must_be_unitary():
    src = """
qbit b = 0 || 1;
b.applyBipartiteInterference(split, pair, 1.0, 1.0, 1.0, 1.0);

def split(bit x) -> bool {
  if (x == 0) { return true; } else { return false; }
}
def pair(bit x) -> bit {
  if (x == 0) { return 1; } else { return 0; }
}
"""
    errors = check_errors(src)
    assert any("not unitary" in e.message for e in errors)


def test_quantum_if_overlap_rejected():
    errors = check_errors(
        "qchar c = 'A' || 'B';\nif (c == 'B') { c.increment(); }"
    )
    assert any("condition/body overlap" in e.message for e in errors)


def test_quantum_if_irreversible_body_rejected():
    errors = check_errors(
        "qchar c = 'A' || 'B';\nqchar t = 'A';\nif (c == 'B') { string s = \"x\"; }"
    )
    assert any("reversible" in e.message for e in errors)


def test_quantum_if_else_rejected():
    errors = check_errors(
        "qchar c = 'A' || 'B';\nqchar t = 'A';\nif (c == 'B') { t.increment(); } else { t.decrement(); }"
    )
    assert any("else" in e.message for e in errors)


def test_quantum_if_measurement_in_body_rejected():
    errors = check_errors(
        "qchar c = 'A' || 'B';\nqchar t = 'A';\nif (c == 'B') { char x = t; }"
    )
    assert any("reversible" in e.message for e in errors)


def test_nested_quantum_if_disjointness():
    ok = """
qbit a = 0 || 1;
qbit b = 0 || 1;
qchar t = 'A';
if (a == 1) {
  if (b == 1) {
    t.increment();
  }
}
"""
    check_ok(ok)
    bad = """
qbit a = 0 || 1;
qchar t = 'A';
if (a == 1) {
  if (a == 0) {
    t.increment();
  }
}
"""
    errors = check_errors(bad)
    assert any("reuses enclosing" in e.message for e in errors)


def test_quantum_condition_allows_constants_only():
    errors = check_errors(
        "qint i = 1 || 2;\nint k = 1;\nk = 2;\nqchar t = 'A';\nif (i == k) { t.increment(); }"
    )
    assert any("neither" in e.message for e in errors)


def test_too_many_quantum_variables():
    lines = [f"qbit b{i} = 0 || 1;" for i in range(5)]
    errors = check_errors("\n".join(lines), TypeConfig(ref_bits=2))
    assert any("addressable" in e.message for e in errors)


def test_functions_do_not_see_module_vars():
    errors = check_errors("int g = 4;\ndef f(int x) -> int { return x + g; }")
    assert any("undefined variable 'g'" in e.message for e in errors)


def test_native_unknown_rejected():
    errors = check_errors("def native fooBar(qint x);")
    assert any("unknown native" in e.message for e in errors)


def test_undefined_function_and_variable():
    errors = check_errors("int x = foo(3);")
    assert any("undefined function" in e.message for e in errors)
    errors = check_errors("print(y);")
    assert any("undefined variable" in e.message for e in errors)


def test_incdec_requires_int():
    errors = check_errors("float f = 1.5;\nf++;")
    assert any("int" in e.message for e in errors)


def test_gate_methods_require_single_qubits():
    errors = check_errors("qint i = 3;\ni.H();")
    assert any("single qubit" in e.message for e in errors)
    check_ok("qbit[] arr = qbit.zeros(3);\narr[0].H();\narr[1].CNOT(arr[0]);")


def test_static_calls_only_in_initializers():
    errors = check_errors("qbit b = 0 || 1;\nint x = 0;\nx = 1;\nprint(x);\nbool y = true;\nqint q = qint.all();\nint z = 0;\nz = qint.all();")
    assert any("only valid as an initializer" in e.message for e in errors)
