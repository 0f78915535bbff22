"""Classical expression/statement evaluator.

This is the base execution machinery for classical code: pure functions used
as phase/split/pair/oracle arguments run entirely in here.  The program
interpreter subclasses it and overrides the hooks for quantum declarations,
measurement assignments, quantum method calls, and quantum conditionals.

Functions see only their parameters, locals, and other functions, so a
function with classical parameters and no print is pure by construction.
"""
from __future__ import annotations

import math
from typing import Any

from . import frontend as fe
from .typesys import Address, Kind, RhymeType, TypeConfig, wrap_int

DEFAULT_FUEL = 10**6

BUILTIN_CONSTANTS: dict[str, float] = {"pi": math.pi, "e": math.e}

_FLOAT_BUILTINS = {
    "cos": math.cos,
    "sin": math.sin,
    "tan": math.tan,
    "sqrt": math.sqrt,
    "exp": math.exp,
    "log": math.log,
}
_INT_BUILTINS = {
    "ceil": math.ceil,
    "floor": math.floor,
}
BUILTIN_FUNCTIONS = set(_FLOAT_BUILTINS) | set(_INT_BUILTINS) | {"abs"}


class ClassicalError(Exception):
    def __init__(self, message: str, span: fe.Span | None = None):
        super().__init__(message)
        self.message = message
        self.span = span


class _Return(Exception):
    def __init__(self, value: Any):
        self.value = value


class Uninitialized:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "<uninitialized>"


UNINIT = Uninitialized()


class Scope:
    """Chained lexical scope holding classical bindings."""

    def __init__(self, parent: "Scope | None" = None):
        self.parent = parent
        self.bindings: dict[str, Any] = {}
        self.types: dict[str, RhymeType] = {}

    def declare(self, name: str, value: Any, vtype: RhymeType) -> None:
        self.bindings[name] = value
        self.types[name] = vtype

    def lookup(self, name: str) -> "Scope | None":
        scope: Scope | None = self
        while scope is not None:
            if name in scope.bindings:
                return scope
            scope = scope.parent
        return None


def coerce(value: Any, target: RhymeType, span: fe.Span | None = None) -> Any:
    """Adapt a classical value to a declared type (numeric widening only)."""
    k = target.kind
    if k == Kind.BIT:
        if value in (0, 1) and not isinstance(value, bool):
            return int(value)
        if isinstance(value, bool):
            return int(value)
        raise ClassicalError(f"bit value must be 0 or 1, got {value!r}", span)
    if k == Kind.INT:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ClassicalError(f"expected an int value, got {value!r}", span)
        return value
    if k == Kind.FLOAT:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ClassicalError(f"expected a float value, got {value!r}", span)
        return float(value)
    if k == Kind.COMPLEX:
        if isinstance(value, bool) or not isinstance(value, (int, float, complex)):
            raise ClassicalError(f"expected a complex value, got {value!r}", span)
        return complex(value)
    if k == Kind.CHAR:
        if isinstance(value, str) and len(value) == 1:
            return value
        raise ClassicalError(f"expected a char value, got {value!r}", span)
    if k == Kind.STRING:
        if isinstance(value, str):
            return value
        raise ClassicalError(f"expected a string value, got {value!r}", span)
    if k == Kind.BOOL:
        if isinstance(value, bool):
            return value
        raise ClassicalError(f"expected a bool value, got {value!r}", span)
    if k == Kind.REF:
        if isinstance(value, Address):
            return value
        raise ClassicalError(f"expected a ref value, got {value!r}", span)
    if k == Kind.BIT_ARRAY:
        bits = tuple(value)
        if any(b not in (0, 1) for b in bits):
            raise ClassicalError(f"bit array elements must be 0 or 1, got {value!r}", span)
        return bits
    raise ClassicalError(f"cannot hold a value of type {target}", span)


def format_value(value: Any, resolve_address=None) -> str:
    """Canonical printed form of a classical value."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, complex):
        im = repr(value.imag)
        sign = "+" if not im.startswith("-") else "-"
        return f"{value.real!r} {sign} {im.lstrip('-')}i"
    if isinstance(value, Address):
        if resolve_address is not None:
            return f"&{resolve_address(value)}"
        return f"&<{'q' if value.quantum else 'c'}{value.index}>"
    if isinstance(value, tuple):
        return "".join(str(b) for b in value)
    return str(value)


class Evaluator:
    """Tree-walking evaluation of classical statements and expressions."""

    def __init__(
        self,
        functions: dict[str, fe.FuncDef],
        cfg: TypeConfig,
        warn=None,
        fuel: int = DEFAULT_FUEL,
    ):
        self.functions = functions
        self.cfg = cfg
        self.warn = warn
        self.fuel_budget = fuel
        self._fuel = 0
        self._depth = 0
        self._warned_sites: set[tuple[int, int]] = set()

    # --- hooks the program interpreter overrides ---

    def quantum_value(self, name: str, span: fe.Span) -> Any:
        raise ClassicalError(f"quantum variable {name!r} cannot be used here", span)

    def is_quantum_var(self, name: str) -> bool:
        return False

    def scope_is_quantum(self, name: str, scope: "Scope") -> bool:
        return False

    def exec_quantum_decl(self, stmt: fe.VarDecl, scope: Scope) -> None:
        raise ClassicalError("quantum declarations are not allowed in classical code", stmt.span)

    def exec_quantum_method(self, expr: fe.MethodCall, scope: Scope) -> Any:
        raise ClassicalError(f"unknown method {expr.name!r}", expr.span)

    def exec_quantum_if(self, stmt: fe.If, scope: Scope) -> None:
        raise ClassicalError("quantum conditionals are not allowed in classical code", stmt.span)

    def exec_print(self, stmt: fe.Print, scope: Scope) -> None:
        raise ClassicalError("print is not allowed in classical functions", stmt.span)

    def measure_var(self, name: str, span: fe.Span) -> Any:
        raise ClassicalError("measurement is not allowed in classical code", span)

    def deref(self, addr: Address, span: fe.Span) -> Any:
        raise ClassicalError("dereference is not allowed in classical functions", span)

    def address_of(self, name: str, scope: Scope, span: fe.Span) -> Address:
        raise ClassicalError("address-of is not allowed in classical functions", span)

    def static_call(self, expr: fe.StaticCall, scope: Scope) -> Any:
        if expr.type.is_quantum and expr.name == "dimension":
            from .typesys import dimension

            return dimension(expr.type, self.cfg)
        raise ClassicalError(f"unknown static method {expr.type}.{expr.name}", expr.span)

    # --- bookkeeping ---

    def _tick(self, span: fe.Span) -> None:
        if self._depth == 0:
            return
        self._fuel -= 1
        if self._fuel <= 0:
            raise ClassicalError(
                "classical function did not terminate within budget", span
            )

    def _warn_once(self, message: str, span: fe.Span) -> None:
        site = (span.line, span.col)
        if self.warn is not None and site not in self._warned_sites:
            self._warned_sites.add(site)
            self.warn(message, span)

    def _wrap_int(self, v: int, span: fe.Span) -> int:
        wrapped = wrap_int(v, self.cfg)
        if wrapped != v:
            self._warn_once(
                f"integer arithmetic wrapped to {wrapped} ({self.cfg.int_bits}-bit two's complement)",
                span,
            )
        return wrapped

    # --- function calls ---

    def call_function(self, name: str, args: list[Any], span: fe.Span) -> Any:
        if name in BUILTIN_FUNCTIONS:
            return self._call_builtin(name, args, span)
        fdef = self.functions.get(name)
        if fdef is None:
            raise ClassicalError(f"undefined function {name!r}", span)
        if fdef.native:
            raise ClassicalError(f"native function {name!r} has no classical body", span)
        if len(args) != len(fdef.params):
            raise ClassicalError(
                f"function {name!r} takes {len(fdef.params)} argument(s), got {len(args)}", span
            )
        frame = Scope()
        for param, arg in zip(fdef.params, args):
            if param.type.is_quantum:
                frame.declare(param.name, arg, param.type)
            else:
                frame.declare(param.name, coerce(arg, param.type, span), param.type)
        fresh = self._depth == 0
        if fresh:
            self._fuel = self.fuel_budget
        self._depth += 1
        try:
            self.exec_block(fdef.body, frame)
        except _Return as ret:
            value = ret.value
            if fdef.return_type is not None and not fdef.return_type.is_quantum:
                value = coerce(value, fdef.return_type, span)
            return value
        finally:
            self._depth -= 1
        if fdef.return_type is not None:
            raise ClassicalError(f"function {name!r} did not return a value", span)
        return None

    def _call_builtin(self, name: str, args: list[Any], span: fe.Span) -> Any:
        if name == "abs":
            if len(args) != 1:
                raise ClassicalError("abs takes one argument", span)
            return abs(args[0])
        if len(args) != 1 or isinstance(args[0], (str, bool, Address, tuple)):
            raise ClassicalError(f"{name} takes one numeric argument", span)
        x = args[0]
        try:
            if name in _FLOAT_BUILTINS:
                return _FLOAT_BUILTINS[name](x)
            return int(_INT_BUILTINS[name](x))
        except (ValueError, OverflowError) as exc:
            raise ClassicalError(f"{name}({x!r}) failed: {exc}", span) from None

    # --- statements ---

    def exec_block(self, block: fe.Block, scope: Scope) -> None:
        inner = Scope(scope)
        for stmt in block.statements:
            self.exec_stmt(stmt, inner)

    def exec_stmt(self, stmt: fe.Stmt, scope: Scope) -> None:
        self._tick(stmt.span)
        if isinstance(stmt, fe.VarDecl):
            if stmt.type.is_quantum:
                self.exec_quantum_decl(stmt, scope)
                return
            if stmt.init is None:
                scope.declare(stmt.name, UNINIT, stmt.type)
                return
            value = self._eval_decl_init(stmt, scope)
            scope.declare(stmt.name, value, stmt.type)
        elif isinstance(stmt, fe.Assign):
            self._exec_assign(stmt, scope)
        elif isinstance(stmt, fe.ExprStmt):
            self.eval_expr(stmt.expr, scope)
        elif isinstance(stmt, fe.IncDec):
            target = stmt.target
            if not isinstance(target, fe.Ident):
                raise ClassicalError("++/-- target must be a variable", stmt.span)
            holder = scope.lookup(target.name)
            if holder is None:
                raise ClassicalError(f"undefined variable {target.name!r}", stmt.span)
            value = holder.bindings[target.name]
            if isinstance(value, bool) or not isinstance(value, int):
                raise ClassicalError("++/-- requires an int variable", stmt.span)
            delta = 1 if stmt.op == "++" else -1
            holder.bindings[target.name] = self._wrap_int(value + delta, stmt.span)
        elif isinstance(stmt, fe.Block):
            self.exec_block(stmt, scope)
        elif isinstance(stmt, fe.If):
            if self._mentions_quantum(stmt.cond):
                self.exec_quantum_if(stmt, scope)
                return
            cond = self.eval_expr(stmt.cond, scope)
            if not isinstance(cond, bool):
                raise ClassicalError("if condition must be a bool", stmt.span)
            if cond:
                self.exec_block(stmt.then, scope)
            elif isinstance(stmt.orelse, fe.If):
                self.exec_stmt(stmt.orelse, scope)
            elif isinstance(stmt.orelse, fe.Block):
                self.exec_block(stmt.orelse, scope)
        elif isinstance(stmt, fe.For):
            inner = Scope(scope)
            if stmt.init is not None:
                self.exec_stmt(stmt.init, inner)
            while True:
                self._tick(stmt.span)
                if stmt.cond is not None:
                    cond = self.eval_expr(stmt.cond, inner)
                    if not isinstance(cond, bool):
                        raise ClassicalError("for condition must be a bool", stmt.span)
                    if not cond:
                        break
                self.exec_block(stmt.body, inner)
                if stmt.update is not None:
                    self.exec_stmt(stmt.update, inner)
        elif isinstance(stmt, fe.Return):
            value = self.eval_expr(stmt.value, scope) if stmt.value is not None else None
            raise _Return(value)
        elif isinstance(stmt, fe.Print):
            self.exec_print(stmt, scope)
        else:
            raise ClassicalError(f"unsupported statement {type(stmt).__name__}", stmt.span)

    def _eval_decl_init(self, stmt: fe.VarDecl, scope: Scope) -> Any:
        # classical declaration; measurement assignment is handled by the interpreter subclass
        init = stmt.init
        if isinstance(init, fe.Ident) and self.is_quantum_var(init.name):
            return coerce(self.measure_var(init.name, stmt.span), stmt.type, stmt.span)
        if isinstance(init, fe.Unary) and init.op == "*":
            addr = self.eval_expr(init.operand, scope)
            if not isinstance(addr, Address):
                raise ClassicalError("dereference requires a ref value", stmt.span)
            return coerce(self.deref(addr, stmt.span), stmt.type, stmt.span)
        return coerce(self.eval_expr(init, scope), stmt.type, stmt.span)

    def _exec_assign(self, stmt: fe.Assign, scope: Scope) -> None:
        target = stmt.target
        if isinstance(target, fe.Ident):
            holder = scope.lookup(target.name)
            if holder is None:
                raise ClassicalError(f"undefined variable {target.name!r}", stmt.span)
            vtype = holder.types[target.name]
            if vtype.is_quantum:
                raise ClassicalError("quantum variables cannot be reassigned", stmt.span)
            value_expr = stmt.value
            if isinstance(value_expr, fe.Ident) and self.is_quantum_var(value_expr.name):
                value = self.measure_var(value_expr.name, stmt.span)
            elif isinstance(value_expr, fe.Unary) and value_expr.op == "*":
                addr = self.eval_expr(value_expr.operand, scope)
                if not isinstance(addr, Address):
                    raise ClassicalError("dereference requires a ref value", stmt.span)
                value = self.deref(addr, stmt.span)
            else:
                value = self.eval_expr(value_expr, scope)
            holder.bindings[target.name] = coerce(value, vtype, stmt.span)
            return
        raise ClassicalError("unsupported assignment target", stmt.span)

    # --- expressions ---

    def _mentions_quantum(self, expr: fe.Expr) -> bool:
        if isinstance(expr, fe.Ident):
            return self.is_quantum_var(expr.name)
        if isinstance(expr, fe.Binary):
            return self._mentions_quantum(expr.left) or self._mentions_quantum(expr.right)
        if isinstance(expr, fe.Unary):
            return self._mentions_quantum(expr.operand)
        if isinstance(expr, fe.OrChain):
            return any(self._mentions_quantum(op) for op in expr.operands)
        if isinstance(expr, (fe.Call, fe.MethodCall, fe.StaticCall)):
            args = expr.args
            base = expr.receiver if isinstance(expr, fe.MethodCall) else None
            return any(self._mentions_quantum(a) for a in args) or (
                base is not None and self._mentions_quantum(base)
            )
        if isinstance(expr, fe.Index):
            return self._mentions_quantum(expr.base) or self._mentions_quantum(expr.index)
        if isinstance(expr, (fe.Length, fe.ImagSuffix)):
            return self._mentions_quantum(expr.base if isinstance(expr, fe.Length) else expr.operand)
        return False

    def eval_expr(self, expr: fe.Expr, scope: Scope) -> Any:
        self._tick(expr.span)
        if isinstance(expr, fe.IntLit):
            return expr.value
        if isinstance(expr, fe.FloatLit):
            return expr.value
        if isinstance(expr, fe.ImagLit):
            return complex(0.0, expr.value)
        if isinstance(expr, fe.CharLit):
            return expr.value
        if isinstance(expr, fe.StringLit):
            return expr.value
        if isinstance(expr, fe.BoolLit):
            return expr.value
        if isinstance(expr, fe.Ident):
            if self.is_quantum_var(expr.name):
                return self.quantum_value(expr.name, expr.span)
            holder = scope.lookup(expr.name)
            if holder is not None:
                value = holder.bindings[expr.name]
                if value is UNINIT:
                    raise ClassicalError(f"use of uninitialized variable {expr.name!r}", expr.span)
                return value
            if expr.name in BUILTIN_CONSTANTS:
                return BUILTIN_CONSTANTS[expr.name]
            raise ClassicalError(f"undefined variable {expr.name!r}", expr.span)
        if isinstance(expr, fe.Unary):
            return self._eval_unary(expr, scope)
        if isinstance(expr, fe.ImagSuffix):
            value = self.eval_expr(expr.operand, scope)
            if isinstance(value, (bool, str, Address, tuple)) or isinstance(value, complex):
                raise ClassicalError("imaginary suffix requires a real operand", expr.span)
            return complex(0.0, float(value))
        if isinstance(expr, fe.Binary):
            return self._eval_binary(expr, scope)
        if isinstance(expr, fe.OrChain):
            # in boolean position: short-circuit logical or
            for op in expr.operands:
                value = self.eval_expr(op, scope)
                if not isinstance(value, bool):
                    raise ClassicalError("'||' operands must be bool here", expr.span)
                if value:
                    return True
            return False
        if isinstance(expr, fe.Call):
            args = [self.eval_expr(a, scope) for a in expr.args]
            return self.call_function(expr.name, args, expr.span)
        if isinstance(expr, fe.MethodCall):
            return self.exec_quantum_method(expr, scope)
        if isinstance(expr, fe.StaticCall):
            return self.static_call(expr, scope)
        if isinstance(expr, fe.Index):
            base = self.eval_expr(expr.base, scope)
            idx = self.eval_expr(expr.index, scope)
            if not isinstance(idx, int) or isinstance(idx, bool):
                raise ClassicalError("index must be an int", expr.span)
            if not isinstance(base, tuple):
                raise ClassicalError("indexing requires an array", expr.span)
            if not 0 <= idx < len(base):
                raise ClassicalError(f"index {idx} out of range (length {len(base)})", expr.span)
            return base[idx]
        if isinstance(expr, fe.Length):
            base = self.eval_expr(expr.base, scope)
            if not isinstance(base, tuple):
                raise ClassicalError(".length requires an array", expr.span)
            return len(base)
        raise ClassicalError(f"unsupported expression {type(expr).__name__}", expr.span)

    def _eval_unary(self, expr: fe.Unary, scope: Scope) -> Any:
        if expr.op == "&":
            if not isinstance(expr.operand, fe.Ident):
                raise ClassicalError("'&' requires a variable name", expr.span)
            return self.address_of(expr.operand.name, scope, expr.span)
        if expr.op == "*":
            addr = self.eval_expr(expr.operand, scope)
            if not isinstance(addr, Address):
                raise ClassicalError("dereference requires a ref value", expr.span)
            return self.deref(addr, expr.span)
        value = self.eval_expr(expr.operand, scope)
        if expr.op == "-":
            if isinstance(value, bool) or not isinstance(value, (int, float, complex)):
                raise ClassicalError("unary '-' requires a numeric operand", expr.span)
            result = -value
            return self._wrap_int(result, expr.span) if isinstance(result, int) else result
        if expr.op == "!":
            if not isinstance(value, bool):
                raise ClassicalError("'!' requires a bool operand", expr.span)
            return not value
        raise ClassicalError(f"unsupported unary operator {expr.op!r}", expr.span)

    def _eval_binary(self, expr: fe.Binary, scope: Scope) -> Any:
        op = expr.op
        if op == "&&":
            left = self.eval_expr(expr.left, scope)
            if not isinstance(left, bool):
                raise ClassicalError("'&&' operands must be bool", expr.span)
            if not left:
                return False
            right = self.eval_expr(expr.right, scope)
            if not isinstance(right, bool):
                raise ClassicalError("'&&' operands must be bool", expr.span)
            return right

        left = self.eval_expr(expr.left, scope)
        right = self.eval_expr(expr.right, scope)

        if op in ("==", "!="):
            result = self._values_equal(left, right, expr.span)
            return result if op == "==" else not result

        if op in ("<", ">", "<=", ">="):
            for side in (left, right):
                if isinstance(side, bool) or not isinstance(side, (int, float)):
                    raise ClassicalError(f"{op!r} requires numeric operands", expr.span)
            return {"<": left < right, ">": left > right, "<=": left <= right, ">=": left >= right}[op]

        for side in (left, right):
            if isinstance(side, bool) or not isinstance(side, (int, float, complex)):
                raise ClassicalError(f"{op!r} requires numeric operands", expr.span)
        if op == "+":
            result = left + right
        elif op == "-":
            result = left - right
        elif op == "*":
            result = left * right
        elif op == "/":
            if right == 0:
                raise ClassicalError("division by zero", expr.span)
            if isinstance(left, complex) or isinstance(right, complex):
                result = left / right
            else:
                result = left / right  # '/' always yields a float on real operands
                return float(result)
        elif op == "%":
            if not isinstance(left, int) or not isinstance(right, int):
                raise ClassicalError("'%' requires int operands", expr.span)
            if right == 0:
                raise ClassicalError("division by zero", expr.span)
            return left % right
        else:
            raise ClassicalError(f"unsupported operator {op!r}", expr.span)
        if isinstance(result, int):
            return self._wrap_int(result, expr.span)
        return result

    def _values_equal(self, left: Any, right: Any, span: fe.Span) -> bool:
        num = (int, float, complex)
        if isinstance(left, bool) or isinstance(right, bool):
            if isinstance(left, bool) and isinstance(right, bool):
                return left == right
            raise ClassicalError("'==' cannot mix bool with other types", span)
        if isinstance(left, num) and isinstance(right, num):
            return left == right
        if type(left) is type(right):
            return left == right
        if isinstance(left, str) and isinstance(right, str):
            return left == right
        raise ClassicalError(
            f"'==' cannot compare {type(left).__name__} with {type(right).__name__}", span
        )
