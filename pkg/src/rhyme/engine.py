"""Dense statevector store over all live quantum registers.

One engine owns one execution's state.  Registers are appended at the most
significant end of the global index, so a register's bit offset (counted from
the least significant bit) never changes after allocation.  Within a register,
pattern bit i sits at absolute qubit (offset + i).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_QUBIT_CAP = 24

_INV_SQRT2 = 1.0 / math.sqrt(2.0)

GATE_MATRICES: dict[str, np.ndarray] = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * _INV_SQRT2,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    # control bits are the most significant sub-index bits: argument order (control..., target)
    "CNOT": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
    "CCNOT": np.eye(8, dtype=complex)[[0, 1, 2, 3, 4, 5, 7, 6]],
}


class EngineError(RuntimeError):
    pass


class CapacityError(EngineError):
    pass


@dataclass(frozen=True)
class Register:
    name: str
    offset: int
    width: int


class Engine:
    def __init__(self, cap: int = DEFAULT_QUBIT_CAP, debug: bool = False):
        self.cap = cap
        self.debug = debug
        self.registers: dict[str, Register] = {}
        self.total_bits = 0
        self.amps = np.ones(1, dtype=np.complex128)

    # --- bookkeeping ---

    def clone(self) -> "Engine":
        other = Engine(cap=self.cap, debug=self.debug)
        other.registers = dict(self.registers)
        other.total_bits = self.total_bits
        other.amps = self.amps.copy()
        return other

    def register(self, name: str) -> Register:
        try:
            return self.registers[name]
        except KeyError:
            raise EngineError(f"unknown quantum register {name!r}") from None

    def qubit_index(self, name: str, bit: int) -> int:
        """Absolute qubit index of pattern bit `bit` (LSB = 0) of a register."""
        reg = self.register(name)
        if not 0 <= bit < reg.width:
            raise EngineError(f"bit {bit} out of range for register {name!r} of width {reg.width}")
        return reg.offset + bit

    def _view(self, reg: Register) -> np.ndarray:
        """Reshape amplitudes to (above-slice, slice, below-slice)."""
        low = 1 << reg.offset
        d = 1 << reg.width
        high = self.amps.size // (low * d)
        return self.amps.reshape(high, d, low)

    def _check(self) -> None:
        if self.debug:
            norm = float(np.linalg.norm(self.amps))
            if not np.isfinite(self.amps).all():
                raise EngineError("non-finite amplitude after operation")
            if abs(norm - 1.0) > 1e-9:
                raise EngineError(f"state norm drifted to {norm!r}")

    # --- allocation and preparation ---

    def allocate(self, name: str, width: int) -> Register:
        if name in self.registers:
            raise EngineError(f"register {name!r} already allocated")
        if width < 1:
            raise EngineError("register width must be >= 1")
        if self.total_bits + width > self.cap:
            raise CapacityError(
                f"simulation capacity exceeded ({self.total_bits + width} qubits > cap {self.cap}); "
                "use compile backend or reduce widths"
            )
        reg = Register(name, self.total_bits, width)
        self.registers[name] = reg
        new = np.zeros(self.amps.size << width, dtype=np.complex128)
        new[: self.amps.size] = self.amps  # appended register starts in |0...0>
        self.amps = new
        self.total_bits += width
        self._check()
        return reg

    def _require_fresh(self, reg: Register) -> np.ndarray:
        view = self._view(reg)
        if reg.width > 0 and view.shape[1] > 1 and np.any(view[:, 1:, :]):
            raise EngineError(f"initializer applied to non-fresh register {reg.name!r}")
        return view

    def prepare_superposition(self, name: str, patterns: list[int]) -> None:
        reg = self.register(name)
        if not patterns:
            raise EngineError("superposition needs at least one value")
        if len(set(patterns)) != len(patterns):
            raise EngineError("superposition values must be distinct")
        d = 1 << reg.width
        for p in patterns:
            if not 0 <= p < d:
                raise EngineError(f"pattern {p} out of range for register {name!r}")
        view = self._require_fresh(reg)
        base = view[:, 0, :].copy()
        view[:, :, :] = 0
        amp = 1.0 / math.sqrt(len(patterns))
        for p in patterns:
            view[:, p, :] = base * amp
        self._check()

    def prepare_all(self, name: str) -> None:
        reg = self.register(name)
        view = self._require_fresh(reg)
        base = view[:, 0, :].copy()
        d = 1 << reg.width
        view[:, :, :] = base[:, None, :] / math.sqrt(d)
        self._check()

    def load_amplitudes(self, name: str, vector: np.ndarray) -> None:
        """Install an arbitrary register state (register must be fresh); test/driver surface."""
        reg = self.register(name)
        vec = np.asarray(vector, dtype=np.complex128).ravel()
        if vec.size != 1 << reg.width:
            raise EngineError(f"vector length {vec.size} does not match register width {reg.width}")
        norm = float(np.linalg.norm(vec))
        if abs(norm - 1.0) > 1e-9:
            raise EngineError(f"vector norm {norm!r} is not 1")
        view = self._require_fresh(reg)
        base = view[:, 0, :].copy()
        view[:, :, :] = base[:, None, :] * vec[None, :, None]
        self._check()

    # --- unitaries ---

    def apply_register_unitary(self, name: str, matrix: np.ndarray) -> None:
        reg = self.register(name)
        d = 1 << reg.width
        m = np.asarray(matrix, dtype=np.complex128)
        if m.shape != (d, d):
            raise EngineError(f"matrix shape {m.shape} does not match register dimension {d}")
        dev = float(np.abs(m.conj().T @ m - np.eye(d)).max())
        if dev > 1e-9:
            raise EngineError(f"matrix is not unitary (max deviation {dev:.3e})")
        view = self._view(reg)
        view[:, :, :] = np.einsum("ij,hjl->hil", m, view)
        self._check()

    def apply_gate(self, gate: str, qubits: list[int]) -> None:
        try:
            m = GATE_MATRICES[gate]
        except KeyError:
            raise EngineError(f"unknown gate {gate!r}") from None
        k = int(math.log2(m.shape[0]))
        if len(qubits) != k:
            raise EngineError(f"{gate} takes {k} qubits, got {len(qubits)}")
        if len(set(qubits)) != len(qubits):
            raise EngineError(f"{gate} qubit indices must be distinct: {qubits}")
        for q in qubits:
            if not 0 <= q < self.total_bits:
                raise EngineError(f"qubit index {q} out of range (total {self.total_bits})")
        n = self.total_bits
        view = self.amps.reshape([2] * n) if n > 0 else self.amps
        # qubit q lives on axis (n-1-q); order axes so qubits[0] is the most significant sub-bit
        axes = [n - 1 - q for q in qubits]
        moved = np.moveaxis(view, axes, range(k))
        shape = moved.shape
        flat = moved.reshape(1 << k, -1)
        flat = m @ flat
        moved = flat.reshape(shape)
        self.amps = np.moveaxis(moved, range(k), axes).reshape(-1).copy()
        self._check()

    # --- structured register operations (drivers for the language semantics) ---

    def apply_diagonal(self, name: str, factors: np.ndarray, mask: np.ndarray | None = None) -> None:
        """Multiply amplitude of register pattern m by factors[m] (only where mask holds)."""
        reg = self.register(name)
        view = self._view(reg)
        f = np.asarray(factors, dtype=np.complex128)
        if mask is None:
            view *= f[None, :, None]
        else:
            full = np.broadcast_to(f[None, :, None], view.shape)
            view[:, :, :] = np.where(mask.reshape(view.shape), full * view, view)
        self._check()

    def apply_sparse_diagonal(
        self, name: str, patterns: np.ndarray, factors: np.ndarray, mask: np.ndarray | None = None
    ) -> None:
        reg = self.register(name)
        view = self._view(reg)
        if mask is None:
            for p, f in zip(patterns, factors):
                view[:, int(p), :] *= f
        else:
            mview = mask.reshape(view.shape)
            for p, f in zip(patterns, factors):
                sel = view[:, int(p), :]
                sel[mview[:, int(p), :]] *= f
        self._check()

    def apply_pattern_permutation(self, name: str, perm: np.ndarray, mask: np.ndarray | None = None) -> None:
        """Move amplitude of pattern m to perm[m]; perm must be a bijection.

        A mask (over the full state) must be invariant under the permutation,
        which holds whenever it only depends on other registers.
        """
        reg = self.register(name)
        d = 1 << reg.width
        p = np.asarray(perm)
        inverse = np.empty(d, dtype=np.int64)
        inverse[p] = np.arange(d)
        view = self._view(reg)
        gathered = view[:, inverse, :]
        if mask is None:
            view[:, :, :] = gathered
        else:
            view[:, :, :] = np.where(mask.reshape(view.shape), gathered, view)
        self._check()

    def apply_pairs(
        self,
        name: str,
        true_patterns: np.ndarray,
        false_patterns: np.ndarray,
        matrix: np.ndarray,
        mask: np.ndarray | None = None,
    ) -> None:
        """Mix amplitudes of paired patterns by a fixed 2x2 unitary."""
        reg = self.register(name)
        u11, u12 = matrix[0]
        u21, u22 = matrix[1]
        view = self._view(reg)
        t = np.asarray(true_patterns)
        f = np.asarray(false_patterns)
        a = view[:, t, :].copy()
        b = view[:, f, :]
        new_a = u11 * a + u12 * b
        new_b = u21 * a + u22 * b
        if mask is None:
            view[:, t, :] = new_a
            view[:, f, :] = new_b
        else:
            mview = mask.reshape(view.shape)
            view[:, t, :] = np.where(mview[:, t, :], new_a, a)
            view[:, f, :] = np.where(mview[:, f, :], new_b, b)
        self._check()

    def invert_about_mean_register(self, name: str) -> None:
        """Per configuration of all other registers, reflect slice amplitudes about their mean."""
        reg = self.register(name)
        view = self._view(reg)
        mu = view.mean(axis=1, keepdims=True)
        np.subtract(2.0 * mu, view, out=view)
        self._check()

    # --- measurement ---

    def marginal_probabilities(self, name: str) -> np.ndarray:
        reg = self.register(name)
        view = self._view(reg)
        return np.einsum("hml,hml->m", view, view.conj()).real

    def measure_register(self, name: str, rng: np.random.Generator) -> int:
        """Sample a pattern by the Born rule, collapse, renormalize; returns the pattern."""
        reg = self.register(name)
        probs = self.marginal_probabilities(name)
        total = float(probs.sum())
        if total < 1e-12:
            raise EngineError("degenerate state: norm vanished before measurement")
        cum = np.cumsum(probs)
        u = rng.random() * total
        pick = int(np.searchsorted(cum, u, side="right"))
        if pick >= probs.size or probs[pick] <= 0.0:
            nonzero = np.flatnonzero(probs > 0.0)
            earlier = nonzero[nonzero <= min(pick, probs.size - 1)]
            pick = int(earlier[-1]) if earlier.size else int(nonzero[0])
        view = self._view(reg)
        keep = view[:, pick, :].copy()
        view[:, :, :] = 0
        view[:, pick, :] = keep / math.sqrt(float(probs[pick]))
        self._check()
        return pick

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))
