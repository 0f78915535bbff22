"""Program execution: classical statements drive a quantum engine.

Quantum operation semantics live here: equal-superposition preparation, phase
maps, pairwise interference, entangling conditionals, oracle marking, and
inversion about the mean, each realized by evaluating user classical functions
over register basis domains and driving the dense statevector engine.

Truth tables (phase vectors, pair maps, condition masks) are cached per
program session since pure functions are deterministic.  Multi-shot runs
additionally reuse the deterministic pre-measurement prefix: the first shot
records engine operations and snapshots the state right before the first
measurement; later shots verify the same operation keys and jump straight to
the snapshot.  Outcomes are identical to independent executions because no
randomness is consumed before the first measurement.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import frontend as fe
from .checker import CheckedProgram
from .classical import ClassicalError, Evaluator, Scope, coerce, format_value
from .engine import DEFAULT_QUBIT_CAP, Engine
from .purefn import PureFunctionCompiler
from .typesys import (
    Address,
    EncodingError,
    Kind,
    RhymeType,
    decode,
    decode_domain,
    encode,
    width,
)

HADAMARD_2x2 = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0)

_EXACT_QUARTER_PHASES = np.array([1, 1j, -1, -1j], dtype=complex)


class ExecutionError(Exception):
    def __init__(self, message: str, span: fe.Span | None = None):
        super().__init__(message)
        self.message = message
        self.span = span


# ---------------------------------------------------------------------------
# Table construction (pure-function sweeps over register domains)

def build_phase_factors(shifts: np.ndarray, modulus: int) -> np.ndarray:
    """exp(2*pi*i*k/N) per entry, with exact values on quarter turns."""
    ks = np.asarray(shifts, dtype=np.int64) % modulus
    factors = np.exp((2j * np.pi / modulus) * ks)
    quarters, rem = np.divmod(4 * ks, modulus)
    exact = rem == 0
    factors[exact] = _EXACT_QUARTER_PHASES[quarters[exact] % 4]
    return factors


def build_phase_table(shift_fn: Callable[[Any], int], values: list, modulus: int) -> np.ndarray:
    """Shift table k_b = shift(value_b) mod N over a decoded register domain."""
    out = np.empty(len(values), dtype=np.int64)
    for i, v in enumerate(values):
        k = shift_fn(v)
        if isinstance(k, bool):
            k = int(k)
        if not isinstance(k, int):
            raise ExecutionError(f"phase function returned {k!r} for {v!r}; an integer is required")
        out[i] = k % modulus
    return out


def build_pair_tables(
    split_fn: Callable[[Any], bool],
    pair_fn: Callable[[Any], Any],
    values: list,
    encode_value: Callable[[Any], int],
) -> tuple[np.ndarray, np.ndarray]:
    """Patterns of each interfering pair (true-side, false-side).

    Self-mapped values drop out (their amplitude stays put).  Violations of
    the bipartition contract are checked runtime errors naming the values.
    """
    n = len(values)
    sides = np.empty(n, dtype=bool)
    partners = np.empty(n, dtype=np.int64)
    for i, v in enumerate(values):
        side = split_fn(v)
        if not isinstance(side, bool):
            raise ExecutionError(f"split function returned {side!r} for {v!r}; a bool is required")
        sides[i] = side
        partners[i] = encode_value(pair_fn(v))
    for i in range(n):
        j = partners[i]
        if j == i:
            continue
        if partners[j] != i:
            raise ExecutionError(
                f"split/pair do not form a bipartition: pair({values[i]!r}) = {values[j]!r} "
                f"but pair({values[j]!r}) = {values[partners[j]]!r}"
            )
        if sides[j] == sides[i]:
            raise ExecutionError(
                f"split/pair do not form a bipartition: {values[i]!r} and its pair "
                f"{values[j]!r} fall on the same side of the split"
            )
    true_idx = np.flatnonzero(sides & (partners != np.arange(n)))
    return true_idx.astype(np.int64), partners[true_idx]


# ---------------------------------------------------------------------------
# Session state shared across shots

@dataclass
class SharedCaches:
    """Deterministic per-program tables, reusable across shots."""

    tables: dict = field(default_factory=dict)
    compiler: PureFunctionCompiler | None = None


@dataclass
class ShotCache:
    """Deterministic pre-measurement prefix: op keys plus an engine snapshot."""

    trace: list = field(default_factory=list)
    engine: Engine | None = None
    complete: bool = False


@dataclass
class ExecutionResult:
    printed: list[str]
    measurements: list[tuple[str, Any]]

    @property
    def output(self) -> str:
        return "\n".join(self.printed)


@dataclass
class QuantumHandle:
    """Runtime identity of a quantum variable: its register and type."""

    name: str
    reg: str
    type: RhymeType
    qindex: int
    bits: int


class Interpreter(Evaluator):
    def __init__(
        self,
        checked: CheckedProgram,
        rng: np.random.Generator,
        cap: int = DEFAULT_QUBIT_CAP,
        debug: bool = False,
        caches: SharedCaches | None = None,
        shot_cache: ShotCache | None = None,
        warn=None,
    ):
        super().__init__(checked.functions, checked.cfg, warn=warn)
        self.checked = checked
        self.rng = rng
        self.engine = Engine(cap=cap, debug=debug)
        self.caches = caches if caches is not None else SharedCaches()
        if self.caches.compiler is None:
            self.caches.compiler = PureFunctionCompiler(checked.functions, checked.cfg, warn=warn)
        self.compiler = self.caches.compiler
        self.shot_cache = shot_cache
        self._replay_pos: int | None = 0 if (shot_cache and shot_cache.complete) else None
        self._recording = shot_cache is not None and not shot_cache.complete
        self.printed: list[str] = []
        self.measurements: list[tuple[str, Any]] = []
        self.q_registry: list[QuantumHandle] = []
        self._classical_refs: list[str] = []
        self._alloc_counter = 0
        self._mask_stack: list[np.ndarray] = []
        self._module_scope = Scope()
        self._static_qindex = {name: i for i, name in enumerate(checked.module_quantum_vars)}

    # --- entry point ---

    def run(self) -> ExecutionResult:
        try:
            for item in self.checked.program.items:
                if isinstance(item, fe.FuncDef):
                    continue
                self.exec_stmt(item, self._module_scope)
        except ClassicalError as exc:
            raise ExecutionError(exc.message, exc.span) from None
        except EncodingError as exc:
            raise ExecutionError(str(exc)) from None
        if self._recording and self.shot_cache is not None and not self.shot_cache.complete:
            self._freeze()  # measurement-free program: snapshot at the end
        return ExecutionResult(self.printed, self.measurements)

    # --- shot replay machinery ---

    def _freeze(self) -> None:
        assert self.shot_cache is not None
        self.shot_cache.engine = self.engine.clone()
        self.shot_cache.complete = True
        self._recording = False

    def _materialize(self) -> None:
        assert self.shot_cache is not None and self.shot_cache.engine is not None
        self.engine = self.shot_cache.engine.clone()
        self._replay_pos = None

    def _qop(self, key: tuple, thunk: Callable[[], None]) -> None:
        """Run one deterministic engine operation, honoring record/replay."""
        if self._replay_pos is not None:
            cache = self.shot_cache
            if self._replay_pos < len(cache.trace):
                if cache.trace[self._replay_pos] != key:
                    raise ExecutionError(
                        "internal error: shot replay diverged from the recorded prefix"
                    )
                self._replay_pos += 1
                return
            self._materialize()
        elif self._recording:
            self.shot_cache.trace.append(key)
        thunk()

    def _measure_handle(self, handle: QuantumHandle, span: fe.Span) -> Any:
        if self._replay_pos is not None:
            if self._replay_pos != len(self.shot_cache.trace):
                raise ExecutionError(
                    "internal error: measurement arrived before the recorded prefix ended"
                )
            self._materialize()
        elif self._recording:
            self._freeze()
        try:
            pattern = self.engine.measure_register(handle.reg, self.rng)
        except Exception as exc:
            raise ExecutionError(str(exc), span) from None
        value = decode(pattern, handle.type, self.cfg)
        self.measurements.append((handle.name, value))
        return value

    # --- quantum variable management ---

    def _handle_of(self, value: Any, span: fe.Span) -> QuantumHandle:
        if not isinstance(value, QuantumHandle):
            raise ExecutionError("expected a quantum variable", span)
        return value

    def _lookup_handle(self, name: str, scope: Scope, span: fe.Span) -> QuantumHandle:
        holder = scope.lookup(name)
        if holder is None:
            raise ExecutionError(f"undefined variable {name!r}", span)
        return self._handle_of(holder.bindings[name], span)

    def is_quantum_var(self, name: str) -> bool:
        # resolution happens against the current scope in eval_expr; the
        # interpreter stores QuantumHandle values directly, so this hook is
        # only consulted for identifier classification
        return False

    def _declare_quantum(
        self, name: str, vtype: RhymeType, bits: int, scope: Scope, span: fe.Span
    ) -> QuantumHandle:
        top_level = scope is self._module_scope
        if top_level and name in self._static_qindex:
            qindex = self._static_qindex[name]
            reg = name
        else:
            qindex = len(self._static_qindex) + self._alloc_counter
            self._alloc_counter += 1
            reg = f"{name}@{qindex}"
        handle = QuantumHandle(name, reg, vtype, qindex, bits)
        while len(self.q_registry) <= qindex:
            self.q_registry.append(None)  # type: ignore[arg-type]
        self.q_registry[qindex] = handle
        scope.declare(name, handle, vtype)
        self._qop(("alloc", reg, bits), lambda: self.engine.allocate(reg, bits))
        return handle

    def exec_quantum_decl(self, stmt: fe.VarDecl, scope: Scope) -> None:
        vtype = stmt.type
        init = stmt.init
        if init is None:
            raise ExecutionError(f"quantum variable {stmt.name!r} requires an initializer", stmt.span)
        if isinstance(init, fe.StaticCall) and init.name == "zeros":
            length = self.eval_expr(init.args[0], scope)
            if isinstance(length, bool) or not isinstance(length, int) or length < 1:
                raise ExecutionError("qbit.zeros length must be a positive int", stmt.span)
            self._declare_quantum(stmt.name, RhymeType(Kind.QBIT_ARRAY, length), length, scope, stmt.span)
            return
        bits = width(vtype, self.cfg)
        handle = self._declare_quantum(stmt.name, vtype, bits, scope, stmt.span)
        if isinstance(init, fe.StaticCall) and init.name == "all":
            self._qop(("all", handle.reg), lambda: self.engine.prepare_all(handle.reg))
            return
        values = self.checked.superpositions.get(id(init))
        if values is None:
            if isinstance(init, fe.OrChain):
                raise ExecutionError("superposition literal was not folded during checking", stmt.span)
            raw = self.eval_expr(init, scope)
            values = [coerce(raw, vtype.classical(), stmt.span)]
        patterns = tuple(
            encode(v, vtype, self.cfg, warn=self._encode_warn(stmt.span)) for v in values
        )
        self._qop(
            ("prep", handle.reg, patterns),
            lambda: self.engine.prepare_superposition(handle.reg, list(patterns)),
        )

    def _encode_warn(self, span: fe.Span):
        def warn(message: str) -> None:
            self._warn_once(message, span)

        return warn

    # --- measurement, refs ---

    def measure_var(self, name: str, span: fe.Span) -> Any:
        raise ExecutionError("internal: unused hook", span)

    def _eval_decl_init(self, stmt: fe.VarDecl, scope: Scope) -> Any:
        init = stmt.init
        if isinstance(init, fe.Ident):
            holder = scope.lookup(init.name)
            if holder is not None and isinstance(holder.bindings[init.name], QuantumHandle):
                handle = holder.bindings[init.name]
                return coerce(self._measure_handle(handle, stmt.span), stmt.type, stmt.span)
        if isinstance(init, fe.Unary) and init.op == "*":
            addr = self.eval_expr(init.operand, scope)
            if isinstance(addr, QuantumHandle):
                raise ExecutionError(
                    "dereference requires a collapsed qref (measure it into a ref first)", stmt.span
                )
            if not isinstance(addr, Address):
                raise ExecutionError("dereference requires a ref value", stmt.span)
            return coerce(self.deref(addr, stmt.span), stmt.type, stmt.span)
        return coerce(self.eval_expr(init, scope), stmt.type, stmt.span)

    def _exec_assign(self, stmt: fe.Assign, scope: Scope) -> None:
        target = stmt.target
        if isinstance(target, fe.Ident):
            holder = scope.lookup(target.name)
            if holder is not None and not isinstance(holder.bindings[target.name], QuantumHandle):
                value_expr = stmt.value
                if isinstance(value_expr, fe.Ident):
                    src = scope.lookup(value_expr.name)
                    if src is not None and isinstance(src.bindings[value_expr.name], QuantumHandle):
                        handle = src.bindings[value_expr.name]
                        vtype = holder.types[target.name]
                        holder.bindings[target.name] = coerce(
                            self._measure_handle(handle, stmt.span), vtype, stmt.span
                        )
                        return
        super()._exec_assign(stmt, scope)

    def quantum_value(self, name: str, span: fe.Span) -> Any:
        raise ExecutionError("internal: unused hook", span)

    def address_of(self, name: str, scope: Scope, span: fe.Span) -> Address:
        holder = scope.lookup(name)
        if holder is None:
            raise ExecutionError(f"undefined variable {name!r}", span)
        value = holder.bindings[name]
        if isinstance(value, QuantumHandle):
            return Address(value.qindex, True)
        if name not in self._classical_refs:
            self._classical_refs.append(name)
        return Address(self._classical_refs.index(name), False)

    def deref(self, addr: Address, span: fe.Span) -> Any:
        if addr.quantum:
            if not 0 <= addr.index < len(self.q_registry) or self.q_registry[addr.index] is None:
                raise ExecutionError(f"address {addr.index} does not name a quantum variable", span)
            return self._measure_handle(self.q_registry[addr.index], span)
        name = self._classical_refs[addr.index]
        holder = self._module_scope.lookup(name)
        if holder is None:
            raise ExecutionError(f"dangling reference to {name!r}", span)
        return holder.bindings[name]

    def _resolve_address_name(self, addr: Address) -> str:
        if addr.quantum:
            if 0 <= addr.index < len(self.q_registry) and self.q_registry[addr.index] is not None:
                return self.q_registry[addr.index].name
            return f"<q{addr.index}>"
        return self._classical_refs[addr.index]

    def exec_print(self, stmt: fe.Print, scope: Scope) -> None:
        expr = stmt.value
        if isinstance(expr, fe.Unary) and expr.op == "*":
            addr = self.eval_expr(expr.operand, scope)
            if isinstance(addr, QuantumHandle):
                raise ExecutionError(
                    "dereference requires a collapsed qref (measure it into a ref first)", stmt.span
                )
            if not isinstance(addr, Address):
                raise ExecutionError("dereference requires a ref value", stmt.span)
            value = self.deref(addr, stmt.span)
        else:
            value = self.eval_expr(expr, scope)
            if isinstance(value, QuantumHandle):
                raise ExecutionError(
                    "cannot print a quantum variable; assign it to a classical variable first",
                    stmt.span,
                )
        self.printed.append(format_value(value, self._resolve_address_name))

    # --- function calls ---

    def call_function(self, name: str, args: list[Any], span: fe.Span) -> Any:
        info = self.checked.func_info.get(name)
        if info is not None and info.node.native:
            if len(args) != 1 or not isinstance(args[0], QuantumHandle):
                raise ExecutionError(f"native {name!r} takes one quantum variable", span)
            if name == "invertAboutMean":
                self._op_invert_about_mean(args[0])
                return None
            raise ExecutionError(f"unknown native function {name!r}", span)
        if info is not None and info.pure:
            return self.compiler.call(name, args, span)
        return super().call_function(name, args, span)

    # --- quantum methods ---

    def _qubit_target(self, expr: fe.Expr, scope: Scope) -> tuple[QuantumHandle, int]:
        """Resolve a width-1 receiver/argument to (handle, pattern bit index)."""
        if isinstance(expr, fe.Index):
            if not isinstance(expr.base, fe.Ident):
                raise ExecutionError("expected a quantum array variable", expr.span)
            handle = self._lookup_handle(expr.base.name, scope, expr.span)
            idx = self.eval_expr(expr.index, scope)
            if isinstance(idx, bool) or not isinstance(idx, int):
                raise ExecutionError("index must be an int", expr.span)
            if not 0 <= idx < handle.bits:
                raise ExecutionError(
                    f"index {idx} out of range for {handle.name!r} of length {handle.bits}",
                    expr.span,
                )
            return handle, handle.bits - 1 - idx  # element 0 is the most significant bit
        if isinstance(expr, fe.Ident):
            handle = self._lookup_handle(expr.name, scope, expr.span)
            if handle.bits != 1:
                raise ExecutionError(f"{handle.name!r} is not a single qubit", expr.span)
            return handle, 0
        raise ExecutionError("expected a qubit", expr.span)

    def exec_quantum_method(self, call: fe.MethodCall, scope: Scope) -> Any:
        name = call.name
        if name in ("H", "X", "Z", "CNOT", "CCNOT"):
            self._op_gate(call, scope)
            return None
        recv = call.receiver
        if not isinstance(recv, fe.Ident):
            raise ExecutionError(f"method {name!r} requires a quantum variable receiver", call.span)
        handle = self._lookup_handle(recv.name, scope, call.span)
        if name in ("increment", "decrement"):
            self._op_shift_pattern(handle, +1 if name == "increment" else -1, call.span)
        elif name == "invertAboutMean":
            self._op_invert_about_mean(handle)
        elif name == "addPhase":
            fn_name = self._fn_arg(call.args[0])
            modulus = self.eval_expr(call.args[1], scope)
            if isinstance(modulus, bool) or not isinstance(modulus, int) or modulus < 1:
                raise ExecutionError("addPhase modulus N must be an integer >= 1", call.span)
            self._op_add_phase(handle, fn_name, modulus, call.span)
        elif name == "applyOracle":
            self._op_apply_oracle(handle, self._fn_arg(call.args[0]), call.span)
        elif name == "applyBipartiteInterference":
            split_name = self._fn_arg(call.args[0])
            pair_name = self._fn_arg(call.args[1])
            if len(call.args) == 6:
                entries = [complex(self.eval_expr(a, scope)) for a in call.args[2:]]
                matrix = np.array(entries, dtype=complex).reshape(2, 2)
                matrix_key = tuple(entries)
            else:
                matrix = HADAMARD_2x2
                matrix_key = "H"
            self._op_interference(handle, split_name, pair_name, matrix, matrix_key, call.span)
        else:
            raise ExecutionError(f"unknown method {name!r}", call.span)
        return None

    def _fn_arg(self, expr: fe.Expr) -> str:
        if not isinstance(expr, fe.Ident) or expr.name not in self.functions:
            raise ExecutionError("expected a function name", expr.span)
        return expr.name

    def _current_mask(self) -> np.ndarray | None:
        if not self._mask_stack:
            return None
        mask = self._mask_stack[0]
        for extra in self._mask_stack[1:]:
            mask = mask & extra
        return mask

    def _mask_key(self) -> tuple:
        return tuple(id(m) for m in self._mask_stack)

    # --- operation drivers ---

    def _op_gate(self, call: fe.MethodCall, scope: Scope) -> None:
        name = call.name
        target = self._qubit_target(call.receiver, scope)
        mask = self._current_mask()
        if name in ("H", "Z") or (name in ("CNOT", "CCNOT") and False):
            pass
        if name in ("CNOT", "CCNOT"):
            controls = [self._qubit_target(a, scope) for a in call.args]
            if mask is not None:
                raise ExecutionError(f"{name} is not allowed inside a quantum conditional", call.span)
            spots = controls + [target]
            key = ("gate", name, tuple((h.reg, bit) for h, bit in spots))

            def thunk() -> None:
                qubits = [self.engine.qubit_index(h.reg, bit) for h, bit in spots]
                self.engine.apply_gate(name, qubits)

            self._qop(key, thunk)
            return
        handle, bit = target
        if name == "X" and mask is not None:
            # controlled bit flip: pattern permutation XOR within the register
            flip = 1 << bit
            key = ("perm", handle.reg, ("xor", flip), self._mask_key())

            def thunk_masked() -> None:
                perm = np.arange(1 << handle.bits, dtype=np.int64) ^ flip
                self.engine.apply_pattern_permutation(handle.reg, perm, mask=self._current_mask())

            self._qop(key, thunk_masked)
            return
        if mask is not None:
            raise ExecutionError(f"{name} is not allowed inside a quantum conditional", call.span)
        key = ("gate", name, ((handle.reg, bit),))
        self._qop(key, lambda: self.engine.apply_gate(name, [self.engine.qubit_index(handle.reg, bit)]))

    def _op_shift_pattern(self, handle: QuantumHandle, delta: int, span: fe.Span) -> None:
        key = ("perm", handle.reg, ("shift", delta), self._mask_key())

        def thunk() -> None:
            d = 1 << handle.bits
            perm = (np.arange(d, dtype=np.int64) + delta) % d
            self.engine.apply_pattern_permutation(handle.reg, perm, mask=self._current_mask())

        self._qop(key, thunk)

    def _op_invert_about_mean(self, handle: QuantumHandle) -> None:
        self._qop(("iam", handle.reg), lambda: self.engine.invert_about_mean_register(handle.reg))

    def _type_key(self, t: RhymeType) -> tuple:
        return (t.kind.value, t.length)

    def _phase_entry(self, fn_name: str, modulus: int, vtype: RhymeType, span: fe.Span):
        """(sparse_patterns, sparse_factors) or (None, dense_factors), cached."""
        key = ("phase", fn_name, modulus, self._type_key(vtype))
        entry = self.caches.tables.get(key)
        if entry is None:
            values = decode_domain(vtype, self.cfg)
            fn = self.compiler.callable_for(fn_name)
            try:
                shifts = build_phase_table(fn, values, modulus)
            except ClassicalError as exc:
                raise ExecutionError(
                    f"phase function {fn_name!r} failed: {exc.message}", span
                ) from None
            nonzero = np.flatnonzero(shifts)
            if nonzero.size <= len(values) // 8:
                factors = build_phase_factors(shifts[nonzero], modulus)
                entry = (nonzero, factors)
            else:
                entry = (None, build_phase_factors(shifts, modulus))
            self.caches.tables[key] = entry
        return key, entry

    def _op_add_phase(self, handle: QuantumHandle, fn_name: str, modulus: int, span: fe.Span) -> None:
        key, entry = self._phase_entry(fn_name, modulus, handle.type, span)
        patterns, factors = entry
        op_key = ("diag", handle.reg, key, self._mask_key())
        if patterns is None:
            self._qop(
                op_key,
                lambda: self.engine.apply_diagonal(handle.reg, factors, mask=self._current_mask()),
            )
        else:
            self._qop(
                op_key,
                lambda: self.engine.apply_sparse_diagonal(
                    handle.reg, patterns, factors, mask=self._current_mask()
                ),
            )

    def _op_apply_oracle(self, handle: QuantumHandle, fn_name: str, span: fe.Span) -> None:
        # exactly addPhase with shift = predicate ? 1 : 0 at N = 2
        key = ("phase", ("oracle", fn_name), 2, self._type_key(handle.type))
        entry = self.caches.tables.get(key)
        if entry is None:
            values = decode_domain(handle.type, self.cfg)
            fn = self.compiler.callable_for(fn_name)
            try:
                shifts = np.fromiter(
                    (1 if fn(v) else 0 for v in values), dtype=np.int64, count=len(values)
                )
            except ClassicalError as exc:
                raise ExecutionError(
                    f"oracle predicate {fn_name!r} failed: {exc.message}", span
                ) from None
            nonzero = np.flatnonzero(shifts)
            if nonzero.size <= len(values) // 8:
                entry = (nonzero, build_phase_factors(shifts[nonzero], 2))
            else:
                entry = (None, build_phase_factors(shifts, 2))
            self.caches.tables[key] = entry
        patterns, factors = entry
        op_key = ("diag", handle.reg, key, self._mask_key())
        if patterns is None:
            self._qop(
                op_key,
                lambda: self.engine.apply_diagonal(handle.reg, factors, mask=self._current_mask()),
            )
        else:
            self._qop(
                op_key,
                lambda: self.engine.apply_sparse_diagonal(
                    handle.reg, patterns, factors, mask=self._current_mask()
                ),
            )

    def _op_interference(
        self,
        handle: QuantumHandle,
        split_name: str,
        pair_name: str,
        matrix: np.ndarray,
        matrix_key,
        span: fe.Span,
    ) -> None:
        dev = float(np.abs(matrix.conj().T @ matrix - np.eye(2)).max())
        if dev > 1e-9:
            raise ExecutionError(f"interference matrix is not unitary (max deviation {dev:.3e})", span)
        key = ("pairs", split_name, pair_name, self._type_key(handle.type))
        entry = self.caches.tables.get(key)
        if entry is None:
            values = decode_domain(handle.type, self.cfg)
            split_fn = self.compiler.callable_for(split_name)
            pair_fn = self.compiler.callable_for(pair_name)
            counterpart = handle.type.classical()

            def encode_value(v: Any) -> int:
                return encode(coerce(v, counterpart), handle.type, self.cfg)

            try:
                entry = build_pair_tables(split_fn, pair_fn, values, encode_value)
            except (ClassicalError, EncodingError) as exc:
                raise ExecutionError(f"split/pair evaluation failed: {exc}", span) from None
            self.caches.tables[key] = entry
        true_idx, false_idx = entry
        op_key = ("pairs_apply", handle.reg, key, matrix_key, self._mask_key())
        self._qop(
            op_key,
            lambda: self.engine.apply_pairs(
                handle.reg, true_idx, false_idx, matrix, mask=self._current_mask()
            ),
        )

    # --- quantum conditionals ---

    def _quantum_handles_in(self, expr: fe.Expr, scope: Scope) -> dict[str, QuantumHandle]:
        found: dict[str, QuantumHandle] = {}

        def visit(e: fe.Expr) -> None:
            if isinstance(e, fe.Ident):
                holder = scope.lookup(e.name)
                if holder is not None and isinstance(holder.bindings[e.name], QuantumHandle):
                    found[e.name] = holder.bindings[e.name]
            elif isinstance(e, fe.Binary):
                visit(e.left)
                visit(e.right)
            elif isinstance(e, (fe.Unary, fe.ImagSuffix)):
                visit(e.operand)
            elif isinstance(e, fe.OrChain):
                for op in e.operands:
                    visit(op)

        visit(expr)
        return found

    def _condition_mask(self, cond: fe.Expr, scope: Scope, span: fe.Span) -> np.ndarray:
        handles = self._quantum_handles_in(cond, scope)
        if not handles:
            raise ExecutionError("quantum conditional without quantum variables", span)
        names = sorted(handles)
        key = ("mask", id(cond), tuple(handles[n].reg for n in names), self.engine.total_bits)
        cached = self.caches.tables.get(key)
        if cached is not None:
            return cached

        # compile the condition once with the quantum variables as slots
        from .purefn import _SlotScope

        slot_scope = _SlotScope()
        for i, n in enumerate(names):
            slot_scope.slots[n] = i
        base = len(names)
        consts: list[Any] = []
        const_names = self._classical_const_names(cond, set(names))
        for cname in const_names:
            slot_scope.slots[cname] = base + len(consts)
            consts.append(self.checked.const_values[cname])
        try:
            compiled = self.compiler._compile_expr(cond, slot_scope)
        except ClassicalError as exc:
            raise ExecutionError(f"condition compilation failed: {exc.message}", span) from None

        domains = [decode_domain(handles[n].type, self.cfg) for n in names]
        dims = [len(d) for d in domains]
        truth = np.zeros(dims, dtype=bool)
        env = [None] * (base + len(consts))
        env[base:] = consts
        index = [0] * len(names)

        def fill(axis: int) -> None:
            if axis == len(names):
                result = compiled(env)
                if not isinstance(result, bool):
                    raise ExecutionError("quantum condition must evaluate to a bool", span)
                truth[tuple(index)] = result
                return
            for p, v in enumerate(domains[axis]):
                env[axis] = v
                index[axis] = p
                fill(axis + 1)

        fill(0)

        idx = np.arange(self.engine.amps.size, dtype=np.int64)
        coords = []
        for n in names:
            reg = self.engine.register(handles[n].reg)
            coords.append((idx >> reg.offset) & ((1 << reg.width) - 1))
        mask = truth[tuple(coords)]
        self.caches.tables[key] = mask
        return mask

    def _classical_const_names(self, expr: fe.Expr, exclude: set[str]) -> list[str]:
        names: list[str] = []

        def visit(e: fe.Expr) -> None:
            if isinstance(e, fe.Ident):
                if e.name not in exclude and e.name in self.checked.const_values and e.name not in names:
                    names.append(e.name)
            elif isinstance(e, fe.Binary):
                visit(e.left)
                visit(e.right)
            elif isinstance(e, (fe.Unary, fe.ImagSuffix)):
                visit(e.operand)
            elif isinstance(e, fe.OrChain):
                for op in e.operands:
                    visit(op)

        visit(expr)
        return names

    def exec_quantum_if(self, stmt: fe.If, scope: Scope) -> None:
        if stmt.orelse is not None:
            raise ExecutionError("quantum-conditioned if cannot have an else branch", stmt.span)
        # the mask itself is engine-layout dependent; construct lazily inside
        # the first body op so replayed shots skip the construction too
        mask_holder: list[np.ndarray] = []

        class _LazyMask:
            def __init__(self, outer: "Interpreter"):
                self.outer = outer

            def __and__(self, other):
                return self.get() & other

            def __rand__(self, other):
                return other & self.get()

            def get(self):
                if not mask_holder:
                    mask_holder.append(self.outer._condition_mask(stmt.cond, scope, stmt.span))
                return mask_holder[0]

        self._mask_stack.append(_LazyMask(self))  # type: ignore[arg-type]
        try:
            inner = Scope(scope)
            for s in stmt.then.statements:
                self.exec_stmt(s, inner)
        finally:
            self._mask_stack.pop()

    # --- static calls ---

    def static_call(self, expr: fe.StaticCall, scope: Scope) -> Any:
        return super().static_call(expr, scope)


# ---------------------------------------------------------------------------
# Multi-shot driver

_MASK64 = (1 << 64) - 1
_SM64_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """Standard SplitMix64 finalizer; the documented per-shot seed derivation."""
    x = (x + _SM64_GAMMA) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def shot_seed(seed: int, shot_index: int) -> int:
    """Output `shot_index` of a SplitMix64 stream seeded with the run seed."""
    return splitmix64((seed + shot_index * _SM64_GAMMA) & _MASK64)


def interpret_program(
    checked: CheckedProgram,
    rng: np.random.Generator | None = None,
    seed: int = 0,
    cap: int = DEFAULT_QUBIT_CAP,
    debug: bool = False,
    caches: SharedCaches | None = None,
    shot_cache: ShotCache | None = None,
    warn=None,
) -> ExecutionResult:
    if not checked.ok:
        raise ExecutionError("cannot interpret a program with check errors")
    if rng is None:
        rng = np.random.default_rng(shot_seed(seed, 0))
    interp = Interpreter(
        checked, rng, cap=cap, debug=debug, caches=caches, shot_cache=shot_cache, warn=warn
    )
    return interp.run()


def run_shots(
    checked: CheckedProgram,
    shots: int,
    seed: int = 0,
    cap: int = DEFAULT_QUBIT_CAP,
    debug: bool = False,
    warn=None,
) -> dict[str, int]:
    """Execute `shots` independent runs; outcome key is the joined printed lines."""
    caches = SharedCaches()
    shot_cache = ShotCache()
    outcomes: dict[str, int] = {}
    for i in range(shots):
        rng = np.random.default_rng(shot_seed(seed, i))
        result = interpret_program(
            checked, rng=rng, cap=cap, debug=debug, caches=caches, shot_cache=shot_cache, warn=warn
        )
        key = result.output
        outcomes[key] = outcomes.get(key, 0) + 1
    return outcomes
