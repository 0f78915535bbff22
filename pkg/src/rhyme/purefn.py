"""Closure compilation of pure classical functions.

Phase maps, split/pair maps, and oracle predicates get evaluated over entire
register domains (up to 2^21 values), which a tree-walking evaluator cannot
sustain.  This module compiles a pure function's body once into nested Python
closures with slot-allocated locals; calling the result costs a couple of
microseconds.  Semantics match classical.Evaluator exactly (shared coercion,
two's-complement wrapping with one warning per site, fuel budget); a test pins
the two paths against each other on the corpus functions.
"""
from __future__ import annotations

from typing import Any, Callable

from . import frontend as fe
from .classical import (
    BUILTIN_CONSTANTS,
    BUILTIN_FUNCTIONS,
    DEFAULT_FUEL,
    ClassicalError,
    Evaluator,
    coerce,
)
from .typesys import Kind, TypeConfig

_NO_RETURN = None  # statement closures return None to continue, a 1-tuple to return


class _SlotScope:
    def __init__(self, parent: "_SlotScope | None" = None):
        self.parent = parent
        self.slots: dict[str, int] = {}

    def lookup(self, name: str) -> int | None:
        scope: _SlotScope | None = self
        while scope is not None:
            if name in scope.slots:
                return scope.slots[name]
            scope = scope.parent
        return None


class PureFunctionCompiler:
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
        self._fuel_cell = [fuel]
        self.fuel_budget = fuel
        self._warned_sites: set[tuple[int, int]] = set()
        self._compiled: dict[str, Callable[..., Any]] = {}
        self._depth = 0

    # --- public API ---

    def callable_for(self, name: str) -> Callable[..., Any]:
        """A plain Python callable for the named pure function."""
        fn = self._compiled.get(name)
        if fn is None:
            fn = self._compile_function(name)
            self._compiled[name] = fn
        return fn

    def call(self, name: str, args: list[Any], span: fe.Span) -> Any:
        fresh = self._depth == 0
        if fresh:
            self._fuel_cell[0] = self.fuel_budget
        self._depth += 1
        try:
            return self.callable_for(name)(*args)
        except RecursionError:
            raise ClassicalError(
                "classical function did not terminate within budget", span
            ) from None
        finally:
            self._depth -= 1

    # --- helpers shared by the generated closures ---

    def _warn_once(self, message: str, span: fe.Span) -> None:
        site = (span.line, span.col)
        if self.warn is not None and site not in self._warned_sites:
            self._warned_sites.add(site)
            self.warn(message, span)

    def _wrapper(self, span: fe.Span) -> Callable[[int], int]:
        bits = self.cfg.int_bits
        lo = -(1 << (bits - 1))
        hi = (1 << (bits - 1)) - 1
        mask = (1 << bits) - 1
        warn_once = self._warn_once

        def wrap(v: int) -> int:
            if lo <= v <= hi:
                return v
            w = v & mask
            if w > hi:
                w -= mask + 1
            warn_once(
                f"integer arithmetic wrapped to {w} ({bits}-bit two's complement)", span
            )
            return w

        return wrap

    # --- compilation ---

    def _compile_function(self, name: str) -> Callable[..., Any]:
        fdef = self.functions.get(name)
        if fdef is None or fdef.native or fdef.body is None:
            raise ClassicalError(f"{name!r} is not a compilable classical function", fe.Span(0, 0))
        scope = _SlotScope()
        slot_count = [0]
        for param in fdef.params:
            if param.type.is_quantum:
                raise ClassicalError(
                    f"function {name!r} has quantum parameters and cannot run classically",
                    param.span,
                )
            scope.slots[param.name] = slot_count[0]
            slot_count[0] += 1
        param_coerce = [self._coercer(p.type) for p in fdef.params]
        body = self._compile_block(fdef.body, scope, slot_count)
        n_params = len(fdef.params)
        n_slots_box = slot_count  # final count known after compile_block ran
        ret_coerce = (
            self._coercer(fdef.return_type)
            if fdef.return_type is not None and not fdef.return_type.is_quantum
            else None
        )
        fname = fdef.name
        fspan = fdef.span
        fuel = self._fuel_cell

        def call(*args: Any) -> Any:
            if len(args) != n_params:
                raise ClassicalError(
                    f"function {fname!r} takes {n_params} argument(s), got {len(args)}", fspan
                )
            fuel[0] -= 1
            if fuel[0] <= 0:
                raise ClassicalError("classical function did not terminate within budget", fspan)
            env = [None] * n_slots_box[0]
            for i, (arg, co) in enumerate(zip(args, param_coerce)):
                env[i] = co(arg)
            result = body(env)
            if result is _NO_RETURN:
                if fdef.return_type is not None:
                    raise ClassicalError(f"function {fname!r} did not return a value", fspan)
                return None
            value = result[0]
            return ret_coerce(value) if ret_coerce is not None else value

        return call

    def _coercer(self, t) -> Callable[[Any], Any]:
        kind = t.kind
        cfg = self.cfg
        if kind == Kind.FLOAT:
            def co_float(v):
                if isinstance(v, bool) or not isinstance(v, (int, float)):
                    raise ClassicalError(f"expected a float value, got {v!r}")
                return float(v)
            return co_float
        if kind == Kind.INT:
            def co_int(v):
                if isinstance(v, bool) or not isinstance(v, int):
                    raise ClassicalError(f"expected an int value, got {v!r}")
                return v
            return co_int
        if kind == Kind.BOOL:
            def co_bool(v):
                if not isinstance(v, bool):
                    raise ClassicalError(f"expected a bool value, got {v!r}")
                return v
            return co_bool
        return lambda v: coerce(v, t)

    def _compile_block(self, block: fe.Block, scope: _SlotScope, slot_count: list[int]):
        inner = _SlotScope(scope)
        stmts = [self._compile_stmt(s, inner, slot_count) for s in block.statements]
        if len(stmts) == 1:
            return stmts[0]

        def run(env):
            for st in stmts:
                r = st(env)
                if r is not _NO_RETURN:
                    return r
            return _NO_RETURN

        return run

    def _compile_stmt(self, stmt: fe.Stmt, scope: _SlotScope, slot_count: list[int]):
        if isinstance(stmt, fe.VarDecl):
            if stmt.type.is_quantum:
                raise ClassicalError("quantum declaration in a pure function", stmt.span)
            slot = slot_count[0]
            slot_count[0] += 1
            scope.slots[stmt.name] = slot
            if stmt.init is None:
                return lambda env: _NO_RETURN
            value = self._compile_expr(stmt.init, scope)
            co = self._coercer(stmt.type)

            def decl(env):
                env[slot] = co(value(env))
                return _NO_RETURN

            return decl
        if isinstance(stmt, fe.Assign):
            if not isinstance(stmt.target, fe.Ident):
                raise ClassicalError("unsupported assignment target", stmt.span)
            slot = scope.lookup(stmt.target.name)
            if slot is None:
                raise ClassicalError(f"undefined variable {stmt.target.name!r}", stmt.span)
            value = self._compile_expr(stmt.value, scope)

            def assign(env):
                env[slot] = value(env)
                return _NO_RETURN

            return assign
        if isinstance(stmt, fe.IncDec):
            if not isinstance(stmt.target, fe.Ident):
                raise ClassicalError("++/-- target must be a variable", stmt.span)
            slot = scope.lookup(stmt.target.name)
            if slot is None:
                raise ClassicalError(f"undefined variable {stmt.target.name!r}", stmt.span)
            delta = 1 if stmt.op == "++" else -1
            wrap = self._wrapper(stmt.span)
            span = stmt.span

            def incdec(env):
                v = env[slot]
                if isinstance(v, bool) or not isinstance(v, int):
                    raise ClassicalError("++/-- requires an int variable", span)
                env[slot] = wrap(v + delta)
                return _NO_RETURN

            return incdec
        if isinstance(stmt, fe.ExprStmt):
            value = self._compile_expr(stmt.expr, scope)

            def exprstmt(env):
                value(env)
                return _NO_RETURN

            return exprstmt
        if isinstance(stmt, fe.Block):
            return self._compile_block(stmt, scope, slot_count)
        if isinstance(stmt, fe.If):
            cond = self._compile_expr(stmt.cond, scope)
            then = self._compile_block(stmt.then, scope, slot_count)
            span = stmt.span
            if stmt.orelse is None:
                def run_if(env):
                    c = cond(env)
                    if not isinstance(c, bool):
                        raise ClassicalError("if condition must be a bool", span)
                    return then(env) if c else _NO_RETURN

                return run_if
            orelse = (
                self._compile_stmt(stmt.orelse, scope, slot_count)
                if isinstance(stmt.orelse, fe.If)
                else self._compile_block(stmt.orelse, scope, slot_count)
            )

            def run_ifelse(env):
                c = cond(env)
                if not isinstance(c, bool):
                    raise ClassicalError("if condition must be a bool", span)
                return then(env) if c else orelse(env)

            return run_ifelse
        if isinstance(stmt, fe.For):
            inner = _SlotScope(scope)
            init = self._compile_stmt(stmt.init, inner, slot_count) if stmt.init is not None else None
            cond = self._compile_expr(stmt.cond, inner) if stmt.cond is not None else None
            update = self._compile_stmt(stmt.update, inner, slot_count) if stmt.update is not None else None
            body = self._compile_block(stmt.body, inner, slot_count)
            span = stmt.span
            fuel = self._fuel_cell

            def run_for(env):
                if init is not None:
                    r = init(env)
                    if r is not _NO_RETURN:
                        return r
                while True:
                    fuel[0] -= 1
                    if fuel[0] <= 0:
                        raise ClassicalError(
                            "classical function did not terminate within budget", span
                        )
                    if cond is not None:
                        c = cond(env)
                        if not isinstance(c, bool):
                            raise ClassicalError("for condition must be a bool", span)
                        if not c:
                            return _NO_RETURN
                    r = body(env)
                    if r is not _NO_RETURN:
                        return r
                    if update is not None:
                        update(env)

            return run_for
        if isinstance(stmt, fe.Return):
            if stmt.value is None:
                return lambda env: (None,)
            value = self._compile_expr(stmt.value, scope)
            return lambda env: (value(env),)
        raise ClassicalError(
            f"{type(stmt).__name__} is not allowed in a pure classical function", stmt.span
        )

    def _compile_expr(self, expr: fe.Expr, scope: _SlotScope):
        if isinstance(expr, (fe.IntLit, fe.FloatLit, fe.CharLit, fe.StringLit, fe.BoolLit)):
            v = expr.value
            return lambda env: v
        if isinstance(expr, fe.ImagLit):
            v = complex(0.0, expr.value)
            return lambda env: v
        if isinstance(expr, fe.Ident):
            slot = scope.lookup(expr.name)
            if slot is not None:
                return lambda env: env[slot]
            if expr.name in BUILTIN_CONSTANTS:
                v = BUILTIN_CONSTANTS[expr.name]
                return lambda env: v
            raise ClassicalError(f"undefined variable {expr.name!r}", expr.span)
        if isinstance(expr, fe.Unary):
            return self._compile_unary(expr, scope)
        if isinstance(expr, fe.ImagSuffix):
            inner = self._compile_expr(expr.operand, scope)
            span = expr.span

            def imag(env):
                v = inner(env)
                if isinstance(v, (bool, str, complex, tuple)):
                    raise ClassicalError("imaginary suffix requires a real operand", span)
                return complex(0.0, float(v))

            return imag
        if isinstance(expr, fe.Binary):
            return self._compile_binary(expr, scope)
        if isinstance(expr, fe.OrChain):
            parts = [self._compile_expr(op, scope) for op in expr.operands]
            span = expr.span

            def orchain(env):
                for part in parts:
                    v = part(env)
                    if not isinstance(v, bool):
                        raise ClassicalError("'||' operands must be bool here", span)
                    if v:
                        return True
                return False

            return orchain
        if isinstance(expr, fe.Call):
            args = [self._compile_expr(a, scope) for a in expr.args]
            span = expr.span
            if expr.name in BUILTIN_FUNCTIONS:
                helper = Evaluator({}, self.cfg)
                name = expr.name

                def builtin_call(env):
                    return helper._call_builtin(name, [a(env) for a in args], span)

                return builtin_call
            if expr.name not in self.functions:
                raise ClassicalError(f"undefined function {expr.name!r}", span)
            compiled = self._compiled
            callable_for = self.callable_for
            name = expr.name

            def user_call(env):
                fn = compiled.get(name)
                if fn is None:
                    fn = callable_for(name)
                return fn(*[a(env) for a in args])

            return user_call
        if isinstance(expr, fe.Index):
            base = self._compile_expr(expr.base, scope)
            idx = self._compile_expr(expr.index, scope)
            span = expr.span

            def index(env):
                b = base(env)
                i = idx(env)
                if not isinstance(b, tuple):
                    raise ClassicalError("indexing requires an array", span)
                if isinstance(i, bool) or not isinstance(i, int):
                    raise ClassicalError("index must be an int", span)
                if not 0 <= i < len(b):
                    raise ClassicalError(f"index {i} out of range (length {len(b)})", span)
                return b[i]

            return index
        if isinstance(expr, fe.Length):
            base = self._compile_expr(expr.base, scope)
            span = expr.span

            def length(env):
                b = base(env)
                if not isinstance(b, tuple):
                    raise ClassicalError(".length requires an array", span)
                return len(b)

            return length
        raise ClassicalError(
            f"{type(expr).__name__} is not allowed in a pure classical function", expr.span
        )

    def _compile_unary(self, expr: fe.Unary, scope: _SlotScope):
        if expr.op in ("&", "*"):
            raise ClassicalError("refs are not allowed in pure classical functions", expr.span)
        inner = self._compile_expr(expr.operand, scope)
        span = expr.span
        if expr.op == "-":
            wrap = self._wrapper(span)

            def neg(env):
                v = inner(env)
                if isinstance(v, bool) or not isinstance(v, (int, float, complex)):
                    raise ClassicalError("unary '-' requires a numeric operand", span)
                r = -v
                return wrap(r) if isinstance(r, int) else r

            return neg
        if expr.op == "!":
            def bang(env):
                v = inner(env)
                if not isinstance(v, bool):
                    raise ClassicalError("'!' requires a bool operand", span)
                return not v

            return bang
        raise ClassicalError(f"unsupported unary operator {expr.op!r}", expr.span)

    def _compile_binary(self, expr: fe.Binary, scope: _SlotScope):
        op = expr.op
        span = expr.span
        left = self._compile_expr(expr.left, scope)
        right = self._compile_expr(expr.right, scope)
        num = (int, float, complex)

        if op == "&&":
            def land(env):
                lv = left(env)
                if not isinstance(lv, bool):
                    raise ClassicalError("'&&' operands must be bool", span)
                if not lv:
                    return False
                rv = right(env)
                if not isinstance(rv, bool):
                    raise ClassicalError("'&&' operands must be bool", span)
                return rv

            return land

        if op in ("==", "!="):
            want = op == "=="
            helper = Evaluator({}, self.cfg)

            def eq(env):
                return helper._values_equal(left(env), right(env), span) is want

            return eq

        if op in ("<", ">", "<=", ">="):
            import operator

            fn = {"<": operator.lt, ">": operator.gt, "<=": operator.le, ">=": operator.ge}[op]

            def rel(env):
                lv, rv = left(env), right(env)
                for side in (lv, rv):
                    if isinstance(side, bool) or not isinstance(side, (int, float)):
                        raise ClassicalError(f"{op!r} requires numeric operands", span)
                return fn(lv, rv)

            return rel

        if op == "%":
            def mod(env):
                lv, rv = left(env), right(env)
                if isinstance(lv, bool) or isinstance(rv, bool) or not isinstance(lv, int) or not isinstance(rv, int):
                    raise ClassicalError("'%' requires int operands", span)
                if rv == 0:
                    raise ClassicalError("division by zero", span)
                return lv % rv

            return mod

        if op == "/":
            def div(env):
                lv, rv = left(env), right(env)
                for side in (lv, rv):
                    if isinstance(side, bool) or not isinstance(side, num):
                        raise ClassicalError("'/' requires numeric operands", span)
                if rv == 0:
                    raise ClassicalError("division by zero", span)
                out = lv / rv
                return out if isinstance(out, complex) else float(out)

            return div

        wrap = self._wrapper(span)
        if op == "+":
            def add(env):
                lv, rv = left(env), right(env)
                for side in (lv, rv):
                    if isinstance(side, bool) or not isinstance(side, num):
                        raise ClassicalError("'+' requires numeric operands", span)
                r = lv + rv
                return wrap(r) if isinstance(r, int) else r

            return add
        if op == "-":
            def sub(env):
                lv, rv = left(env), right(env)
                for side in (lv, rv):
                    if isinstance(side, bool) or not isinstance(side, num):
                        raise ClassicalError("'-' requires numeric operands", span)
                r = lv - rv
                return wrap(r) if isinstance(r, int) else r

            return sub
        if op == "*":
            def mul(env):
                lv, rv = left(env), right(env)
                for side in (lv, rv):
                    if isinstance(side, bool) or not isinstance(side, num):
                        raise ClassicalError("'*' requires numeric operands", span)
                r = lv * rv
                return wrap(r) if isinstance(r, int) else r

            return mul
        raise ClassicalError(f"unsupported operator {op!r}", expr.span)
