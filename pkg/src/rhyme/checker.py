"""Static checking: scopes and types, `||` classification with constant folding,
quantum conditional validation, and enumerable split/pair bipartition checks.

Produces a CheckedProgram that the interpreter and the compile backend share.
Functions are closed over nothing but their parameters and locals, so purity
falls out of scoping plus a scan for prints and quantum constructs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import frontend as fe
from .classical import BUILTIN_CONSTANTS, BUILTIN_FUNCTIONS, ClassicalError, Evaluator, coerce
from .typesys import Address, EncodingError, Kind, RhymeType, TypeConfig, dimension, encode, width

BIPARTITION_CHECK_LIMIT = 1 << 16

QUANTUM_METHODS = {
    "addPhase", "applyBipartiteInterference", "applyOracle", "invertAboutMean",
    "increment", "decrement", "H", "X", "Z", "CNOT", "CCNOT",
}
CONDITIONAL_BODY_METHODS = {"increment", "decrement", "X", "addPhase", "applyBipartiteInterference"}
KNOWN_NATIVE_FUNCTIONS = {"invertAboutMean"}

_INT_LIKE = (Kind.BIT, Kind.INT)
_NUMERIC = (Kind.BIT, Kind.INT, Kind.FLOAT, Kind.COMPLEX)


@dataclass
class VarInfo:
    name: str
    type: RhymeType
    span: fe.Span
    qindex: int | None = None  # dense index among module-level quantum declarations


@dataclass
class FuncInfo:
    node: fe.FuncDef
    pure: bool


@dataclass
class CheckedProgram:
    program: fe.Program
    cfg: TypeConfig
    functions: dict[str, fe.FuncDef]
    func_info: dict[str, FuncInfo]
    diagnostics: list[fe.Diagnostic]
    superpositions: dict[int, list] = field(default_factory=dict)  # id(OrChain) -> folded values
    module_quantum_vars: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not fe.has_errors(self.diagnostics)


class _Scope:
    def __init__(self, parent: "_Scope | None" = None):
        self.parent = parent
        self.vars: dict[str, VarInfo] = {}

    def declare(self, info: VarInfo) -> bool:
        if info.name in self.vars:
            return False
        self.vars[info.name] = info
        return True

    def lookup(self, name: str) -> VarInfo | None:
        scope: _Scope | None = self
        while scope is not None:
            if name in scope.vars:
                return scope.vars[name]
            scope = scope.parent
        return None


def _counterpart_value_type(t: RhymeType) -> RhymeType:
    return t.classical()


class _Checker:
    def __init__(self, program: fe.Program, cfg: TypeConfig):
        self.program = program
        self.cfg = cfg
        self.diags: list[fe.Diagnostic] = []
        self.functions: dict[str, fe.FuncDef] = {}
        self.func_info: dict[str, FuncInfo] = {}
        self.superpositions: dict[int, list] = {}
        self.module_quantum_vars: list[str] = []
        self.const_values: dict[str, object] = {}
        self._assigned_names: set[str] = set()
        self._current_return: RhymeType | None = None
        self._in_function = False

    # --- diagnostics ---

    def error(self, message: str, span: fe.Span) -> None:
        self.diags.append(fe.Diagnostic("error", message, span))

    def warning(self, message: str, span: fe.Span) -> None:
        self.diags.append(fe.Diagnostic("warning", message, span))

    # --- entry point ---

    def run(self) -> CheckedProgram:
        self._collect_functions()
        self._collect_assigned_names(self.program.items)
        module_scope = _Scope()
        for item in self.program.items:
            if isinstance(item, fe.FuncDef):
                continue
            self.check_stmt(item, module_scope, top_level=True)
        for fdef in self.functions.values():
            self._check_function(fdef)
        if len(self.module_quantum_vars) > (1 << self.cfg.ref_bits):
            self.error(
                f"program declares {len(self.module_quantum_vars)} quantum variables; "
                f"at most {1 << self.cfg.ref_bits} are addressable with {self.cfg.ref_bits} ref bits",
                self.program.span,
            )
        return CheckedProgram(
            self.program,
            self.cfg,
            self.functions,
            self.func_info,
            self.diags,
            self.superpositions,
            self.module_quantum_vars,
        )

    def _collect_functions(self) -> None:
        for item in self.program.items:
            if not isinstance(item, fe.FuncDef):
                continue
            if item.name in self.functions:
                self.error(f"duplicate function definition {item.name!r}", item.span)
                continue
            if item.name in BUILTIN_FUNCTIONS or item.name in BUILTIN_CONSTANTS:
                self.error(f"function name {item.name!r} shadows a builtin", item.span)
                continue
            if item.native:
                if item.name not in KNOWN_NATIVE_FUNCTIONS:
                    self.error(f"unknown native function {item.name!r}", item.span)
                    continue
                if len(item.params) != 1 or not item.params[0].type.is_quantum:
                    self.error(
                        f"native {item.name!r} takes exactly one quantum parameter", item.span
                    )
                    continue
            self.functions[item.name] = item

    def _walk_statements(self, stmts, visit) -> None:
        for s in stmts:
            visit(s)
            if isinstance(s, fe.Block):
                self._walk_statements(s.statements, visit)
            elif isinstance(s, fe.If):
                self._walk_statements(s.then.statements, visit)
                if isinstance(s.orelse, fe.Block):
                    self._walk_statements(s.orelse.statements, visit)
                elif isinstance(s.orelse, fe.If):
                    self._walk_statements([s.orelse], visit)
            elif isinstance(s, fe.For):
                parts = [p for p in (s.init, s.update) if p is not None]
                self._walk_statements(parts, visit)
                self._walk_statements(s.body.statements, visit)

    def _collect_assigned_names(self, items) -> None:
        def visit(s):
            if isinstance(s, fe.Assign) and isinstance(s.target, fe.Ident):
                self._assigned_names.add(s.target.name)
            if isinstance(s, fe.IncDec) and isinstance(s.target, fe.Ident):
                self._assigned_names.add(s.target.name)

        stmts = [i for i in items if not isinstance(i, fe.FuncDef)]
        self._walk_statements(stmts, visit)

    # --- constant folding ---

    def fold_const(self, expr: fe.Expr, quantum_scope: _Scope | None = None):
        """Compile-time constant value of an expression, or None."""
        if isinstance(expr, (fe.IntLit, fe.FloatLit, fe.CharLit, fe.StringLit, fe.BoolLit)):
            return expr.value
        if isinstance(expr, fe.ImagLit):
            return complex(0.0, expr.value)
        if isinstance(expr, fe.ImagSuffix):
            inner = self.fold_const(expr.operand, quantum_scope)
            if isinstance(inner, (int, float)) and not isinstance(inner, bool):
                return complex(0.0, float(inner))
            return None
        if isinstance(expr, fe.Ident):
            if expr.name in self.const_values and expr.name not in self._assigned_names:
                return self.const_values[expr.name]
            if expr.name in BUILTIN_CONSTANTS:
                return BUILTIN_CONSTANTS[expr.name]
            return None
        if isinstance(expr, fe.Unary):
            if expr.op == "&" and quantum_scope is not None and isinstance(expr.operand, fe.Ident):
                info = quantum_scope.lookup(expr.operand.name)
                if info is not None and info.type.is_quantum and info.qindex is not None:
                    return Address(info.qindex, True)
                return None
            if expr.op == "-":
                inner = self.fold_const(expr.operand, quantum_scope)
                if isinstance(inner, (int, float, complex)) and not isinstance(inner, bool):
                    return -inner
            return None
        if isinstance(expr, fe.Binary):
            left = self.fold_const(expr.left, quantum_scope)
            right = self.fold_const(expr.right, quantum_scope)
            if left is None or right is None:
                return None
            if isinstance(left, bool) or isinstance(right, bool):
                return None
            if not isinstance(left, (int, float, complex)) or not isinstance(right, (int, float, complex)):
                return None
            try:
                if expr.op == "+":
                    return left + right
                if expr.op == "-":
                    return left - right
                if expr.op == "*":
                    return left * right
                if expr.op == "/":
                    out = left / right
                    return out if isinstance(out, complex) else float(out)
                if expr.op == "%":
                    if isinstance(left, int) and isinstance(right, int):
                        return left % right
            except (ZeroDivisionError, ValueError):
                return None
            return None
        if isinstance(expr, fe.Call) and expr.name in BUILTIN_FUNCTIONS:
            args = [self.fold_const(a, quantum_scope) for a in expr.args]
            if any(a is None or isinstance(a, (bool, str, complex, Address, tuple)) for a in args):
                return None
            try:
                return Evaluator({}, self.cfg).call_function(expr.name, args, expr.span)
            except ClassicalError:
                return None
        return None

    # --- functions ---

    def _scan_purity(self, fdef: fe.FuncDef) -> bool:
        if fdef.native or any(p.type.is_quantum for p in fdef.params):
            return False
        impure = []

        def visit(s):
            if isinstance(s, fe.Print):
                impure.append(s)
            if isinstance(s, fe.VarDecl) and s.type.is_quantum:
                impure.append(s)

        self._walk_statements(fdef.body.statements, visit)
        return not impure

    def _check_function(self, fdef: fe.FuncDef) -> None:
        pure = self._scan_purity(fdef)
        self.func_info[fdef.name] = FuncInfo(fdef, pure)
        if fdef.native:
            return
        scope = _Scope()  # functions do not see module variables
        seen = set()
        for p in fdef.params:
            if p.name in seen:
                self.error(f"duplicate parameter {p.name!r}", p.span)
            seen.add(p.name)
            scope.declare(VarInfo(p.name, p.type, p.span))
        prev_ret, prev_in = self._current_return, self._in_function
        self._current_return, self._in_function = fdef.return_type, True
        for stmt in fdef.body.statements:
            self.check_stmt(stmt, scope, top_level=False)
        self._current_return, self._in_function = prev_ret, prev_in

    def _function_ref(self, expr: fe.Expr, what: str) -> fe.FuncDef | None:
        if not isinstance(expr, fe.Ident):
            self.error(f"{what} must name a function", expr.span)
            return None
        fdef = self.functions.get(expr.name)
        if fdef is None:
            self.error(f"{what} names an undefined function {expr.name!r}", expr.span)
            return None
        return fdef

    def _require_pure_unary(self, fdef: fe.FuncDef, arg_type: RhymeType, span: fe.Span, what: str) -> bool:
        info = self.func_info.get(fdef.name) or FuncInfo(fdef, self._scan_purity(fdef))
        self.func_info[fdef.name] = info
        if not info.pure:
            self.error(f"{what} {fdef.name!r} must be a pure classical function", span)
            return False
        if len(fdef.params) != 1:
            self.error(f"{what} {fdef.name!r} must take exactly one parameter", span)
            return False
        want = arg_type.kind
        got = fdef.params[0].type.kind
        ok = got == want or (want in _INT_LIKE and got in _INT_LIKE)
        if not ok:
            self.error(
                f"{what} {fdef.name!r} parameter type {fdef.params[0].type} does not match "
                f"the register's value type {arg_type}",
                span,
            )
            return False
        return True

    # --- statements ---

    def check_stmt(self, stmt: fe.Stmt, scope: _Scope, top_level: bool) -> None:
        if isinstance(stmt, fe.FuncDef):
            self.error("function definitions must appear at the top level", stmt.span)
        elif isinstance(stmt, fe.VarDecl):
            self._check_vardecl(stmt, scope, top_level)
        elif isinstance(stmt, fe.Assign):
            self._check_assign(stmt, scope)
        elif isinstance(stmt, fe.ExprStmt):
            self.type_of(stmt.expr, scope, as_statement=True)
        elif isinstance(stmt, fe.IncDec):
            t = self.type_of(stmt.target, scope)
            if t is not None and t.kind != Kind.INT:
                self.error(f"{stmt.op} requires an int variable", stmt.span)
        elif isinstance(stmt, fe.Block):
            inner = _Scope(scope)
            for s in stmt.statements:
                self.check_stmt(s, inner, top_level=False)
        elif isinstance(stmt, fe.If):
            self._check_if(stmt, scope, top_level)
        elif isinstance(stmt, fe.For):
            inner = _Scope(scope)
            if stmt.init is not None:
                self.check_stmt(stmt.init, inner, top_level=False)
            if stmt.cond is not None:
                if self._quantum_idents(stmt.cond, scope):
                    self.error("for conditions cannot involve quantum variables", stmt.span)
                else:
                    t = self.type_of(stmt.cond, inner)
                    if t is not None and t.kind != Kind.BOOL:
                        self.error("for condition must be a bool", stmt.span)
            if stmt.update is not None:
                self.check_stmt(stmt.update, inner, top_level=False)
            for s in stmt.body.statements:
                self.check_stmt(s, _Scope(inner), top_level=False)
        elif isinstance(stmt, fe.Return):
            if not self._in_function:
                self.error("return outside of a function", stmt.span)
                return
            if stmt.value is None:
                if self._current_return is not None:
                    self.error("return value required", stmt.span)
                return
            t = self.type_of(stmt.value, scope)
            if self._current_return is None:
                self.error("function has no return type", stmt.span)
            elif t is not None and not self._assignable(t, self._current_return):
                self.error(
                    f"cannot return {t} from a function returning {self._current_return}",
                    stmt.span,
                )
        elif isinstance(stmt, fe.Print):
            if self._in_function:
                # allowed in quantum procedures, not pure functions; purity scan handles usage
                pass
            if isinstance(stmt.value, fe.Unary) and stmt.value.op == "*":
                self.type_of(stmt.value.operand, scope)
                return
            t = self.type_of(stmt.value, scope)
            if t is not None and t.is_quantum:
                self.error(
                    "cannot print a quantum variable; assign it to a classical variable first",
                    stmt.span,
                )
        else:
            self.error(f"unsupported statement {type(stmt).__name__}", stmt.span)

    def _check_vardecl(self, stmt: fe.VarDecl, scope: _Scope, top_level: bool) -> None:
        vtype = stmt.type
        info = VarInfo(stmt.name, vtype, stmt.span)
        if vtype.is_quantum:
            self._check_quantum_init(stmt, info, scope, top_level)
            if top_level:
                info.qindex = len(self.module_quantum_vars)
                self.module_quantum_vars.append(stmt.name)
        else:
            if stmt.init is not None:
                self._check_classical_init(stmt, scope, top_level)
        if not scope.declare(info):
            self.error(f"variable {stmt.name!r} already declared in this scope", stmt.span)

    def _check_classical_init(self, stmt: fe.VarDecl, scope: _Scope, top_level: bool) -> None:
        init = stmt.init
        # measurement assignment: classical variable initialized from a quantum variable
        if isinstance(init, fe.Ident):
            src = scope.lookup(init.name)
            if src is not None and src.type.is_quantum:
                want = _counterpart_value_type(src.type)
                if want.kind != stmt.type.kind:
                    self.error(
                        f"measuring {src.type} yields {want}, not {stmt.type}", stmt.span
                    )
                return
        if isinstance(init, fe.Unary) and init.op == "*":
            t = self.type_of(init.operand, scope)
            if t is not None and t.kind != Kind.REF:
                self.error("dereference requires a ref value", stmt.span)
            return  # referent type is only known at run time
        t = self.type_of(init, scope)
        if t is None:
            return
        if t.is_quantum:
            self.error(f"cannot initialize classical {stmt.type} from quantum {t}", stmt.span)
            return
        if not self._assignable(t, stmt.type):
            self.error(f"cannot initialize {stmt.type} from {t}", stmt.span)
            return
        if top_level and stmt.name not in self._assigned_names:
            value = self.fold_const(init, scope)
            if value is not None:
                try:
                    self.const_values[stmt.name] = coerce(value, stmt.type)
                except ClassicalError:
                    pass

    def _check_quantum_init(self, stmt: fe.VarDecl, info: VarInfo, scope: _Scope, top_level: bool) -> None:
        vtype = stmt.type
        init = stmt.init
        if init is None:
            self.error(f"quantum variable {stmt.name!r} requires an initializer", stmt.span)
            return
        if isinstance(init, fe.OrChain):
            self._fold_superposition(init, vtype, scope)
            return
        if isinstance(init, fe.StaticCall):
            if init.name == "all":
                if init.type.kind != vtype.kind:
                    self.error(f"{init.type}.all() cannot initialize a {vtype}", stmt.span)
                if init.args:
                    self.error(".all() takes no arguments", stmt.span)
                if vtype.kind == Kind.QBIT_ARRAY:
                    self.error(".all() is not available for qbit[]", stmt.span)
                return
            if init.name == "zeros":
                if init.type.kind != Kind.QBIT or vtype.kind != Kind.QBIT_ARRAY:
                    self.error("zeros(n) initializes qbit[] from qbit.zeros(n)", stmt.span)
                    return
                if len(init.args) != 1:
                    self.error("qbit.zeros takes one argument", stmt.span)
                    return
                t = self.type_of(init.args[0], scope)
                if t is not None and t.kind not in _INT_LIKE:
                    self.error("qbit.zeros length must be an int", stmt.span)
                return
            self.error(f"unknown initializer {init.type}.{init.name}()", stmt.span)
            return
        if isinstance(init, fe.Ident):
            src = scope.lookup(init.name)
            if src is not None and src.type.is_quantum:
                self.error("quantum variables cannot be copied (no-cloning)", stmt.span)
                return
        if vtype.kind == Kind.QBIT_ARRAY:
            self.error("qbit[] must be initialized with qbit.zeros(n)", stmt.span)
            return
        # single-value basis-state initializer
        counterpart = _counterpart_value_type(vtype)
        value = self.fold_const(init, scope)
        if value is not None:
            try:
                folded = coerce(value, counterpart, stmt.span)
                encode(folded, vtype, self.cfg, warn=lambda m: self.warning(m, stmt.span))
                self.superpositions[id(init)] = [folded]
            except (ClassicalError, EncodingError) as exc:
                self.error(str(exc), stmt.span)
            return
        t = self.type_of(init, scope)
        if t is None:
            return
        if t.is_quantum:
            self.error(f"cannot initialize {vtype} from quantum {t}", stmt.span)
        elif not self._assignable(t, counterpart):
            self.error(f"cannot initialize {vtype} from {t}", stmt.span)

    def _fold_superposition(self, chain: fe.OrChain, vtype: RhymeType, scope: _Scope) -> None:
        counterpart = _counterpart_value_type(vtype)
        if vtype.kind == Kind.QBIT_ARRAY:
            self.error("superposition literals are not available for qbit[]", chain.span)
            return
        values = []
        patterns = []
        for operand in chain.operands:
            raw = self.fold_const(operand, scope)
            if raw is None:
                self.error(
                    "superposition operands must be compile-time constants", operand.span
                )
                return
            try:
                value = coerce(raw, counterpart, operand.span)
                pattern = encode(
                    value, vtype, self.cfg, warn=lambda m: self.warning(m, operand.span)
                )
            except (ClassicalError, EncodingError) as exc:
                self.error(str(exc), operand.span)
                return
            if pattern in patterns:
                self.error(
                    f"duplicate superposition value {value!r} (values must be distinct)",
                    operand.span,
                )
                return
            values.append(value)
            patterns.append(pattern)
        self.superpositions[id(chain)] = values

    def _check_assign(self, stmt: fe.Assign, scope: _Scope) -> None:
        target = stmt.target
        if isinstance(target, fe.Ident):
            info = scope.lookup(target.name)
            if info is None:
                self.error(f"undefined variable {target.name!r}", stmt.span)
                return
            if info.type.is_quantum:
                self.error("quantum variables cannot be reassigned", stmt.span)
                return
            if isinstance(stmt.value, fe.Ident):
                src = scope.lookup(stmt.value.name)
                if src is not None and src.type.is_quantum:
                    want = _counterpart_value_type(src.type)
                    if want.kind != info.type.kind:
                        self.error(f"measuring {src.type} yields {want}, not {info.type}", stmt.span)
                    return
            if isinstance(stmt.value, fe.Unary) and stmt.value.op == "*":
                t = self.type_of(stmt.value.operand, scope)
                if t is not None and t.kind != Kind.REF:
                    self.error("dereference requires a ref value", stmt.span)
                return
            t = self.type_of(stmt.value, scope)
            if t is not None and t.is_quantum:
                self.error(f"cannot assign quantum {t} to classical {info.type}", stmt.span)
            elif t is not None and not self._assignable(t, info.type):
                self.error(f"cannot assign {t} to {info.type}", stmt.span)
            return
        self.error("unsupported assignment target", stmt.span)

    # --- quantum conditionals ---

    def _quantum_idents(self, expr: fe.Expr, scope: _Scope) -> set[str]:
        found: set[str] = set()

        def visit(e):
            if isinstance(e, fe.Ident):
                info = scope.lookup(e.name)
                if info is not None and info.type.is_quantum:
                    found.add(e.name)
            elif isinstance(e, fe.Binary):
                visit(e.left)
                visit(e.right)
            elif isinstance(e, fe.Unary):
                visit(e.operand)
            elif isinstance(e, fe.ImagSuffix):
                visit(e.operand)
            elif isinstance(e, fe.OrChain):
                for op in e.operands:
                    visit(op)
            elif isinstance(e, (fe.Call, fe.MethodCall, fe.StaticCall)):
                if isinstance(e, fe.MethodCall):
                    visit(e.receiver)
                for a in e.args:
                    visit(a)
            elif isinstance(e, fe.Index):
                visit(e.base)
                visit(e.index)
            elif isinstance(e, fe.Length):
                visit(e.base)

        visit(expr)
        return found

    def _check_if(self, stmt: fe.If, scope: _Scope, top_level: bool) -> None:
        cond_vars = self._quantum_idents(stmt.cond, scope)
        if not cond_vars:
            t = self.type_of(stmt.cond, scope)
            if t is not None and t.kind != Kind.BOOL:
                self.error("if condition must be a bool", stmt.span)
            for s in stmt.then.statements:
                self.check_stmt(s, _Scope(scope), top_level=False)
            if isinstance(stmt.orelse, fe.If):
                self.check_stmt(stmt.orelse, scope, top_level=False)
            elif isinstance(stmt.orelse, fe.Block):
                for s in stmt.orelse.statements:
                    self.check_stmt(s, _Scope(scope), top_level=False)
            return
        self._check_quantum_if(stmt, scope, cond_vars, outer_cond_vars=set())

    def _check_quantum_cond_expr(self, expr: fe.Expr, scope: _Scope, cond_vars: set[str]) -> None:
        """Condition may mention quantum variables, classical constants, and operators only."""

        def visit(e) -> bool:
            if isinstance(e, (fe.IntLit, fe.FloatLit, fe.CharLit, fe.StringLit, fe.BoolLit, fe.ImagLit)):
                return True
            if isinstance(e, fe.Ident):
                if e.name in cond_vars:
                    return True
                if self.fold_const(e) is not None:
                    return True
                self.error(
                    f"quantum condition may only mention quantum variables and constants; "
                    f"{e.name!r} is neither",
                    e.span,
                )
                return False
            if isinstance(e, fe.Binary):
                return visit(e.left) and visit(e.right)
            if isinstance(e, fe.Unary) and e.op in ("-", "!"):
                return visit(e.operand)
            if isinstance(e, fe.OrChain):
                return all(visit(op) for op in e.operands)
            self.error(
                f"{type(e).__name__} is not allowed inside a quantum condition", e.span
            )
            return False

        if not visit(expr):
            return
        # type-check with quantum variables standing in for their measured counterparts
        t = self.type_of(expr, scope, quantum_as_classical=cond_vars)
        if t is not None and t.kind != Kind.BOOL:
            self.error("quantum condition must be a bool expression", expr.span)

    def _check_quantum_if(
        self, stmt: fe.If, scope: _Scope, cond_vars: set[str], outer_cond_vars: set[str]
    ) -> None:
        if stmt.orelse is not None:
            self.error("quantum-conditioned if cannot have an else branch", stmt.span)
        overlap = cond_vars & outer_cond_vars
        if overlap:
            self.error(
                f"nested quantum condition reuses enclosing condition variable(s) {sorted(overlap)}",
                stmt.span,
            )
        self._check_quantum_cond_expr(stmt.cond, scope, cond_vars)
        all_cond_vars = cond_vars | outer_cond_vars
        for s in stmt.then.statements:
            self._check_quantum_body_stmt(s, scope, all_cond_vars)

    def _check_quantum_body_stmt(self, s: fe.Stmt, scope: _Scope, cond_vars: set[str]) -> None:
        if isinstance(s, fe.If):
            nested = self._quantum_idents(s.cond, scope)
            if not nested:
                self.error(
                    "classical control flow is not allowed inside a quantum conditional", s.span
                )
                return
            self._check_quantum_if(s, scope, nested, cond_vars)
            return
        if not (isinstance(s, fe.ExprStmt) and isinstance(s.expr, fe.MethodCall)):
            self.error(
                "quantum conditional bodies may only call reversible methods "
                "(increment, decrement, X, addPhase, applyBipartiteInterference) or nest quantum ifs",
                s.span,
            )
            return
        call = s.expr
        if call.name not in CONDITIONAL_BODY_METHODS:
            self.error(
                f"method {call.name!r} is not allowed inside a quantum conditional", s.span
            )
            return
        base = call.receiver
        while isinstance(base, fe.Index):
            base = base.base
        if not isinstance(base, fe.Ident):
            self.error("method receiver must be a quantum variable", s.span)
            return
        if base.name in cond_vars:
            self.error(
                f"condition/body overlap: {base.name!r} appears in the condition", s.span
            )
            return
        self.type_of(call, scope, as_statement=True)

    # --- expression typing ---

    def _assignable(self, src: RhymeType, dst: RhymeType) -> bool:
        if src.kind == dst.kind:
            return True
        pair = (src.kind, dst.kind)
        if pair == (Kind.INT, Kind.FLOAT) or pair == (Kind.BIT, Kind.INT) or pair == (Kind.INT, Kind.BIT):
            return True
        if src.kind in (Kind.INT, Kind.FLOAT, Kind.BIT) and dst.kind == Kind.COMPLEX:
            return True
        return False

    def type_of(
        self,
        expr: fe.Expr,
        scope: _Scope,
        as_statement: bool = False,
        quantum_as_classical: set[str] | None = None,
    ) -> RhymeType | None:
        t = self._type_of(expr, scope, as_statement, quantum_as_classical or set())
        return t

    def _type_of(
        self, expr: fe.Expr, scope: _Scope, as_statement: bool, qac: set[str]
    ) -> RhymeType | None:
        if isinstance(expr, fe.IntLit):
            return RhymeType(Kind.INT)
        if isinstance(expr, fe.FloatLit):
            return RhymeType(Kind.FLOAT)
        if isinstance(expr, fe.ImagLit):
            return RhymeType(Kind.COMPLEX)
        if isinstance(expr, fe.CharLit):
            return RhymeType(Kind.CHAR)
        if isinstance(expr, fe.StringLit):
            return RhymeType(Kind.STRING)
        if isinstance(expr, fe.BoolLit):
            return RhymeType(Kind.BOOL)
        if isinstance(expr, fe.Ident):
            info = scope.lookup(expr.name)
            if info is None:
                if expr.name in BUILTIN_CONSTANTS:
                    return RhymeType(Kind.FLOAT)
                self.error(f"undefined variable {expr.name!r}", expr.span)
                return None
            if info.type.is_quantum and expr.name in qac:
                return _counterpart_value_type(info.type)
            return info.type
        if isinstance(expr, fe.Unary):
            return self._type_of_unary(expr, scope, qac)
        if isinstance(expr, fe.ImagSuffix):
            t = self._type_of(expr.operand, scope, False, qac)
            if t is not None and t.kind not in (Kind.INT, Kind.FLOAT, Kind.BIT):
                self.error("imaginary suffix requires a real operand", expr.span)
            return RhymeType(Kind.COMPLEX)
        if isinstance(expr, fe.Binary):
            return self._type_of_binary(expr, scope, qac)
        if isinstance(expr, fe.OrChain):
            for op in expr.operands:
                t = self._type_of(op, scope, False, qac)
                if t is not None and t.kind != Kind.BOOL:
                    self.error(
                        "'||' chains outside quantum initializers are logical-or and need bool operands",
                        op.span,
                    )
            return RhymeType(Kind.BOOL)
        if isinstance(expr, fe.Call):
            return self._type_of_call(expr, scope, qac)
        if isinstance(expr, fe.MethodCall):
            return self._type_of_method(expr, scope, as_statement, qac)
        if isinstance(expr, fe.StaticCall):
            if expr.name == "dimension":
                if not expr.type.is_quantum:
                    self.error("dimension() is defined for quantum types", expr.span)
                elif expr.type.kind == Kind.QBIT_ARRAY:
                    self.error("dimension() is not available for qbit[]", expr.span)
                if expr.args:
                    self.error("dimension() takes no arguments", expr.span)
                return RhymeType(Kind.INT)
            if expr.name in ("all", "zeros"):
                self.error(f"{expr.type}.{expr.name}() is only valid as an initializer", expr.span)
                return None
            self.error(f"unknown static method {expr.type}.{expr.name}", expr.span)
            return None
        if isinstance(expr, fe.Index):
            base_t = self._type_of(expr.base, scope, False, qac)
            idx_t = self._type_of(expr.index, scope, False, qac)
            if idx_t is not None and idx_t.kind not in _INT_LIKE:
                self.error("index must be an int", expr.span)
            if base_t is None:
                return None
            if base_t.kind == Kind.BIT_ARRAY:
                return RhymeType(Kind.BIT)
            if base_t.kind == Kind.QBIT_ARRAY:
                return RhymeType(Kind.QBIT)
            self.error(f"cannot index a {base_t}", expr.span)
            return None
        if isinstance(expr, fe.Length):
            base_t = self._type_of(expr.base, scope, False, qac)
            if base_t is not None and not base_t.is_array:
                self.error(".length is defined for arrays", expr.span)
            return RhymeType(Kind.INT)
        self.error(f"unsupported expression {type(expr).__name__}", expr.span)
        return None

    def _type_of_unary(self, expr: fe.Unary, scope: _Scope, qac: set[str]) -> RhymeType | None:
        if expr.op == "&":
            if not isinstance(expr.operand, fe.Ident):
                self.error("'&' requires a variable name", expr.span)
                return None
            if self._in_function:
                self.error("address-of is only available at the top level", expr.span)
                return None
            info = scope.lookup(expr.operand.name)
            if info is None:
                self.error(f"undefined variable {expr.operand.name!r}", expr.span)
                return None
            return RhymeType(Kind.REF)
        if expr.op == "*":
            if self._in_function:
                self.error("dereference is only available at the top level", expr.span)
                return None
            t = self._type_of(expr.operand, scope, False, qac)
            if t is not None and t.kind != Kind.REF:
                self.error("dereference requires a ref value", expr.span)
            self.error(
                "dereference is only allowed as a whole initializer, assignment source, or print argument",
                expr.span,
            )
            return None
        t = self._type_of(expr.operand, scope, False, qac)
        if t is None:
            return None
        if t.is_quantum:
            self.error(f"operator {expr.op!r} is not defined on quantum operands", expr.span)
            return None
        if expr.op == "-":
            if t.kind not in _NUMERIC:
                self.error("unary '-' requires a numeric operand", expr.span)
                return None
            return t if t.kind != Kind.BIT else RhymeType(Kind.INT)
        if expr.op == "!":
            if t.kind != Kind.BOOL:
                self.error("'!' requires a bool operand", expr.span)
            return RhymeType(Kind.BOOL)
        self.error(f"unsupported unary operator {expr.op!r}", expr.span)
        return None

    def _type_of_binary(self, expr: fe.Binary, scope: _Scope, qac: set[str]) -> RhymeType | None:
        lt = self._type_of(expr.left, scope, False, qac)
        rt = self._type_of(expr.right, scope, False, qac)
        if lt is None or rt is None:
            return None
        for side, t in ((expr.left, lt), (expr.right, rt)):
            if t.is_quantum:
                self.error(
                    f"quantum operand in classical expression (operator {expr.op!r}); "
                    "quantum variables appear only in measurements, methods, and quantum conditions",
                    side.span,
                )
                return None
        op = expr.op
        if op == "&&":
            if lt.kind != Kind.BOOL or rt.kind != Kind.BOOL:
                self.error("'&&' operands must be bool", expr.span)
            return RhymeType(Kind.BOOL)
        if op in ("==", "!="):
            if not self._comparable(lt, rt):
                self.error(f"cannot compare {lt} with {rt}", expr.span)
            return RhymeType(Kind.BOOL)
        if op in ("<", ">", "<=", ">="):
            if lt.kind not in (Kind.BIT, Kind.INT, Kind.FLOAT) or rt.kind not in (
                Kind.BIT,
                Kind.INT,
                Kind.FLOAT,
            ):
                self.error(f"{op!r} requires numeric operands", expr.span)
            return RhymeType(Kind.BOOL)
        if op == "%":
            if lt.kind not in _INT_LIKE or rt.kind not in _INT_LIKE:
                self.error("'%' requires int operands", expr.span)
            return RhymeType(Kind.INT)
        if op == "/":
            if lt.kind == Kind.COMPLEX or rt.kind == Kind.COMPLEX:
                return RhymeType(Kind.COMPLEX)
            if lt.kind not in _NUMERIC or rt.kind not in _NUMERIC:
                self.error(f"{op!r} requires numeric operands", expr.span)
                return None
            return RhymeType(Kind.FLOAT)
        if op in ("+", "-", "*"):
            if lt.kind not in _NUMERIC or rt.kind not in _NUMERIC:
                self.error(f"{op!r} requires numeric operands", expr.span)
                return None
            if Kind.COMPLEX in (lt.kind, rt.kind):
                return RhymeType(Kind.COMPLEX)
            if Kind.FLOAT in (lt.kind, rt.kind):
                return RhymeType(Kind.FLOAT)
            return RhymeType(Kind.INT)
        self.error(f"unsupported operator {op!r}", expr.span)
        return None

    def _comparable(self, lt: RhymeType, rt: RhymeType) -> bool:
        numeric = (Kind.BIT, Kind.INT, Kind.FLOAT, Kind.COMPLEX)
        if lt.kind in numeric and rt.kind in numeric:
            return True
        return lt.kind == rt.kind

    def _type_of_call(self, expr: fe.Call, scope: _Scope, qac: set[str]) -> RhymeType | None:
        if expr.name in BUILTIN_FUNCTIONS:
            if len(expr.args) != 1:
                self.error(f"{expr.name} takes one argument", expr.span)
                return None
            t = self._type_of(expr.args[0], scope, False, qac)
            if t is not None and t.kind not in _NUMERIC:
                self.error(f"{expr.name} requires a numeric argument", expr.span)
            if expr.name in ("ceil", "floor"):
                return RhymeType(Kind.INT)
            if expr.name == "abs":
                return t if t is not None and t.kind != Kind.COMPLEX else RhymeType(Kind.FLOAT)
            return RhymeType(Kind.FLOAT)
        fdef = self.functions.get(expr.name)
        if fdef is None:
            self.error(f"undefined function {expr.name!r}", expr.span)
            return None
        if fdef.native:
            fdef_params = fdef.params
            if len(expr.args) != 1 or not isinstance(expr.args[0], fe.Ident):
                self.error(f"native {expr.name!r} takes one quantum variable", expr.span)
                return None
            t = self._type_of(expr.args[0], scope, False, qac)
            if t is not None and t.kind != fdef_params[0].type.kind:
                self.error(
                    f"native {expr.name!r} is declared for {fdef_params[0].type}, got {t}",
                    expr.span,
                )
            return None
        if len(expr.args) != len(fdef.params):
            self.error(
                f"function {expr.name!r} takes {len(fdef.params)} argument(s), got {len(expr.args)}",
                expr.span,
            )
            return None
        for arg, param in zip(expr.args, fdef.params):
            t = self._type_of(arg, scope, False, qac)
            if t is None:
                continue
            if param.type.is_quantum:
                if not isinstance(arg, fe.Ident) or not t.is_quantum:
                    self.error(
                        f"parameter {param.name!r} of {expr.name!r} requires a quantum variable",
                        arg.span,
                    )
                elif t.kind != param.type.kind:
                    self.error(f"cannot pass {t} as {param.type}", arg.span)
            else:
                if t.is_quantum or not self._assignable(t, param.type):
                    self.error(f"cannot pass {t} as {param.type}", arg.span)
        return fdef.return_type

    def _type_of_method(
        self, expr: fe.MethodCall, scope: _Scope, as_statement: bool, qac: set[str]
    ) -> RhymeType | None:
        recv_t = self._type_of(expr.receiver, scope, False, qac)
        if recv_t is None:
            return None
        if not recv_t.is_quantum:
            self.error(f"type {recv_t} has no methods", expr.span)
            return None
        name = expr.name
        if name not in QUANTUM_METHODS:
            self.error(f"unknown method {name!r} on {recv_t}", expr.span)
            return None
        if not as_statement:
            self.error(f"method {name!r} is a statement, not an expression", expr.span)
            return None
        if name in ("invertAboutMean", "increment", "decrement", "H", "X", "Z"):
            if expr.args:
                self.error(f"{name}() takes no arguments", expr.span)
            if name in ("H", "X", "Z") and recv_t.kind not in (Kind.QBIT, Kind.QBOOL):
                self.error(f"{name}() requires a single qubit (qbit or qbool)", expr.span)
            return None
        if name in ("CNOT", "CCNOT"):
            want = 1 if name == "CNOT" else 2
            if recv_t.kind not in (Kind.QBIT, Kind.QBOOL):
                self.error(f"{name}() target must be a single qubit", expr.span)
            if len(expr.args) != want:
                self.error(f"{name}() takes {want} control qubit(s)", expr.span)
                return None
            for a in expr.args:
                at = self._type_of(a, scope, False, qac)
                if at is not None and at.kind not in (Kind.QBIT, Kind.QBOOL):
                    self.error(f"{name}() controls must be single qubits", a.span)
            return None
        if name == "addPhase":
            if len(expr.args) != 2:
                self.error("addPhase takes (shiftFunction, N)", expr.span)
                return None
            fdef = self._function_ref(expr.args[0], "phase function")
            if fdef is not None and self._require_pure_unary(
                fdef, _counterpart_value_type(recv_t), expr.span, "phase function"
            ):
                if fdef.return_type is None or fdef.return_type.kind not in _INT_LIKE:
                    self.error("phase function must return an int (or bit)", expr.span)
            n = self.fold_const(expr.args[1], scope)
            if not isinstance(n, int) or isinstance(n, bool) or n < 1:
                self.error("addPhase modulus N must be a compile-time integer >= 1", expr.args[1].span)
            return None
        if name == "applyOracle":
            if len(expr.args) != 1:
                self.error("applyOracle takes (predicate)", expr.span)
                return None
            fdef = self._function_ref(expr.args[0], "oracle predicate")
            if fdef is not None and self._require_pure_unary(
                fdef, _counterpart_value_type(recv_t), expr.span, "oracle predicate"
            ):
                if fdef.return_type is None or fdef.return_type.kind != Kind.BOOL:
                    self.error("oracle predicate must return a bool", expr.span)
            return None
        if name == "applyBipartiteInterference":
            if len(expr.args) not in (2, 6):
                self.error(
                    "applyBipartiteInterference takes (split, pair) or (split, pair, u11, u12, u21, u22)",
                    expr.span,
                )
                return None
            value_t = _counterpart_value_type(recv_t)
            split = self._function_ref(expr.args[0], "split function")
            pair = self._function_ref(expr.args[1], "pair function")
            ok = True
            if split is not None and self._require_pure_unary(split, value_t, expr.span, "split function"):
                if split.return_type is None or split.return_type.kind != Kind.BOOL:
                    self.error("split function must return a bool", expr.span)
                    ok = False
            else:
                ok = False
            if pair is not None and self._require_pure_unary(pair, value_t, expr.span, "pair function"):
                rt = pair.return_type
                want = value_t.kind
                if rt is None or not (rt.kind == want or (rt.kind in _INT_LIKE and want in _INT_LIKE)):
                    self.error("pair function must return the register's value type", expr.span)
                    ok = False
            else:
                ok = False
            matrix = None
            if len(expr.args) == 6:
                entries = []
                for a in expr.args[2:]:
                    v = self.fold_const(a, scope)
                    if v is None or isinstance(v, (bool, str, Address, tuple)):
                        self.error("interference matrix entries must be numeric constants", a.span)
                        return None
                    entries.append(complex(v))
                matrix = entries
                u11, u12, u21, u22 = entries
                dev = max(
                    abs(u11 * u11.conjugate() + u21 * u21.conjugate() - 1),
                    abs(u12 * u12.conjugate() + u22 * u22.conjugate() - 1),
                    abs(u11 * u12.conjugate() + u21 * u22.conjugate()),
                )
                if dev > 1e-9:
                    self.error(
                        f"interference matrix is not unitary (max deviation {dev:.3e})", expr.span
                    )
            if ok and split is not None and pair is not None:
                self._validate_bipartition_static(expr, recv_t, split, pair)
            return None
        self.error(f"unknown method {name!r}", expr.span)
        return None

    def _validate_bipartition_static(
        self, expr: fe.MethodCall, recv_t: RhymeType, split: fe.FuncDef, pair: fe.FuncDef
    ) -> None:
        try:
            dim = dimension(recv_t, self.cfg)
        except ValueError:
            return
        if dim > BIPARTITION_CHECK_LIMIT:
            return  # left to the runtime check
        from .purefn import PureFunctionCompiler
        from .typesys import decode_domain

        value_t = _counterpart_value_type(recv_t)
        compiler = PureFunctionCompiler(self.functions, self.cfg)
        try:
            split_fn = compiler.callable_for(split.name)
            pair_fn = compiler.callable_for(pair.name)
            values = decode_domain(recv_t, self.cfg)
            sides = [split_fn(v) for v in values]
            if recv_t.kind == Kind.QINT:
                bits = self.cfg.int_bits
                lo, hi, mask = -(1 << (bits - 1)), (1 << (bits - 1)) - 1, (1 << bits) - 1
                partners = []
                for v in values:
                    p = pair_fn(v)
                    if isinstance(p, bool) or not isinstance(p, int) or not lo <= p <= hi:
                        raise EncodingError(f"pair({v!r}) = {p!r} is not a representable int")
                    partners.append(p & mask)
            else:
                partners = [
                    encode(coerce(pair_fn(v), value_t), recv_t, self.cfg) for v in values
                ]
        except (ClassicalError, EncodingError) as exc:
            self.error(f"split/pair validation failed: {exc}", expr.span)
            return
        if any(not isinstance(s, bool) for s in sides):
            self.error("split function must return a bool", expr.span)
            return
        for pattern in range(dim):
            partner = partners[pattern]
            if partner == pattern:
                continue
            if partners[partner] != pattern:
                self.error(
                    f"split/pair do not form a bipartition: pair({values[pattern]!r}) = "
                    f"{values[partner]!r} but pair({values[partner]!r}) = {values[partners[partner]]!r}",
                    expr.span,
                )
                return
            if sides[partner] == sides[pattern]:
                self.error(
                    f"split/pair do not form a bipartition: {values[pattern]!r} and its pair "
                    f"{values[partner]!r} fall on the same side of the split",
                    expr.span,
                )
                return


def check(program: fe.Program, cfg: TypeConfig | None = None) -> CheckedProgram:
    return _Checker(program, cfg or TypeConfig()).run()


def check_source(source: str, cfg: TypeConfig | None = None) -> CheckedProgram | list[fe.Diagnostic]:
    program, diags = fe.parse_source(source)
    if program is None:
        return diags
    checked = check(program, cfg)
    checked.diagnostics[:0] = diags
    return checked
