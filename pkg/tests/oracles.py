"""Independent dense-matrix oracles used to verify engine and semantics output.

Everything here builds full 2^n x 2^n operators directly from definitions and
applies them by plain matrix-vector products, deliberately sharing no code
with the engine's sliced/vectorized implementations.
"""
import numpy as np


def embed_register_matrix(u: np.ndarray, offset: int, width: int, total_bits: int) -> np.ndarray:
    """Full-space operator for u acting on the register slice [offset, offset+width)."""
    low = np.eye(1 << offset)
    high = np.eye(1 << (total_bits - offset - width))
    return np.kron(np.kron(high, u), low)


def gate_matrix_on_qubits(gate: np.ndarray, qubits: list[int], total_bits: int) -> np.ndarray:
    """Full-space matrix of a k-qubit gate; qubits[0] is the most significant sub-bit."""
    n = total_bits
    k = len(qubits)
    dim = 1 << n
    full = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        sub = 0
        for j, q in enumerate(qubits):
            sub |= ((col >> q) & 1) << (k - 1 - j)
        for sub_out in range(1 << k):
            amp = gate[sub_out, sub]
            if amp == 0:
                continue
            row = col
            for j, q in enumerate(qubits):
                bit = (sub_out >> (k - 1 - j)) & 1
                row = (row & ~(1 << q)) | (bit << q)
            full[row, col] += amp
    return full


def diagonal_phase_matrix(shifts: list[int], modulus: int) -> np.ndarray:
    """diag(exp(2*pi*i*k/N)) from a per-pattern shift table."""
    return np.diag([np.exp(2j * np.pi * (k % modulus) / modulus) for k in shifts])


def bipartite_matrix(dim: int, split, pair, u: np.ndarray) -> np.ndarray:
    """Pairwise 2x2 mixing operator built entry by entry from the split/pair maps."""
    m = np.zeros((dim, dim), dtype=complex)
    for v in range(dim):
        w = pair(v)
        if w == v:
            m[v, v] = 1.0
        elif split(v):
            m[v, v] = u[0, 0]
            m[v, w] = u[0, 1]
        else:
            m[v, v] = u[1, 1]
            m[v, w] = u[1, 0]
    return m


def mean_inversion_matrix(dim: int) -> np.ndarray:
    """2|s><s| - I for the uniform state |s>."""
    return 2.0 * np.full((dim, dim), 1.0 / dim) - np.eye(dim)


def controlled_matrix(dim_cond: int, dim_body: int, predicate, body: np.ndarray,
                      cond_is_high: bool) -> np.ndarray:
    """Apply `body` on the body register exactly where predicate(cond_pattern) holds."""
    total = dim_cond * dim_body
    m = np.zeros((total, total), dtype=complex)
    for c in range(dim_cond):
        block = body if predicate(c) else np.eye(dim_body)
        for a in range(dim_body):
            for b in range(dim_body):
                if cond_is_high:
                    m[c * dim_body + a, c * dim_body + b] = block[a, b]
                else:
                    m[a * dim_cond + c, b * dim_cond + c] = block[a, b]
    return m


def random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def states_equal_up_to_global_phase(a: np.ndarray, b: np.ndarray, tol: float) -> bool:
    overlap = np.vdot(a, b)
    return abs(abs(overlap) - 1.0) <= tol and np.abs(a * np.exp(1j * np.angle(overlap)) - b).max() <= tol
