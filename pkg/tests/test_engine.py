"""Engine tests: allocation, preparation, measurement, unitaries vs dense oracles."""
import math

import numpy as np
import pytest

from rhyme.engine import GATE_MATRICES, CapacityError, Engine, EngineError

from oracles import (
    embed_register_matrix,
    gate_matrix_on_qubits,
    random_state,
    random_unitary,
)


def test_allocate_first_qbit():
    eng = Engine(debug=True)
    eng.allocate("b", 1)
    assert np.allclose(eng.amps, [1, 0])


def test_allocate_appends_tensor_zero():
    eng = Engine(debug=True)
    eng.allocate("b", 1)
    eng.apply_gate("X", [0])  # |1>
    eng.allocate("c", 7)
    assert eng.amps.size == 256
    # qbit stayed at offset 0 in |1>, qchar at offsets 1..7 in |0x00>
    expected_index = 1
    assert eng.amps[expected_index] == 1
    assert np.count_nonzero(eng.amps) == 1


def test_allocate_capacity_error():
    eng = Engine(cap=24)
    with pytest.raises(CapacityError, match="simulation capacity exceeded"):
        eng.allocate("s", 28)  # qstring at string_max_len=4 is 7*4 bits


def test_prepare_superposition_qbit():
    eng = Engine(debug=True)
    eng.allocate("b", 1)
    eng.prepare_superposition("b", [0, 1])
    assert np.allclose(eng.amps, [1 / math.sqrt(2)] * 2)


def test_prepare_single_value_basis_state():
    eng = Engine(debug=True)
    eng.allocate("i", 16)
    eng.prepare_superposition("i", [15])
    assert eng.amps[15] == 1 and np.count_nonzero(eng.amps) == 1


def test_prepare_three_values():
    eng = Engine(debug=True)
    eng.allocate("j", 16)
    eng.prepare_superposition("j", [1, 30, 160])
    nz = np.flatnonzero(eng.amps)
    assert sorted(nz.tolist()) == [1, 30, 160]
    assert np.allclose(eng.amps[nz], 1 / math.sqrt(3))


def test_prepare_rejects_duplicates_and_stale_register():
    eng = Engine()
    eng.allocate("b", 1)
    with pytest.raises(EngineError):
        eng.prepare_superposition("b", [1, 1])
    eng.prepare_superposition("b", [1])
    with pytest.raises(EngineError, match="non-fresh"):
        eng.prepare_superposition("b", [0, 1])


def test_prepare_all_qbit_and_qchar():
    eng = Engine(debug=True)
    eng.allocate("b", 1)
    eng.prepare_all("b")
    assert np.allclose(eng.amps, [1 / math.sqrt(2)] * 2)
    eng2 = Engine(debug=True)
    eng2.allocate("c", 7)
    eng2.prepare_all("c")
    assert np.allclose(eng2.amps, np.full(128, 1 / math.sqrt(128)))


def test_prepare_all_two_char_string():
    eng = Engine(debug=True)
    eng.allocate("s", 14)
    eng.prepare_all("s")
    assert np.allclose(eng.amps, np.full(1 << 14, 2.0**-7))


def test_register_unitary_identity_and_h():
    eng = Engine(debug=True)
    eng.allocate("b", 1)
    eng.apply_register_unitary("b", np.eye(2))
    assert np.allclose(eng.amps, [1, 0])
    eng.apply_register_unitary("b", GATE_MATRICES["H"])
    assert np.allclose(eng.amps, [1 / math.sqrt(2)] * 2)


def test_register_unitary_random_vs_dense_oracle():
    rng = np.random.default_rng(11)
    for _ in range(5):
        eng = Engine(debug=True)
        eng.allocate("lo", 2)
        eng.allocate("mid", 2)
        eng.allocate("hi", 1)
        state = random_state(32, rng)
        eng.amps = state.copy()
        u = random_unitary(4, rng)
        eng.apply_register_unitary("mid", u)
        expected = embed_register_matrix(u, offset=2, width=2, total_bits=5) @ state
        assert np.abs(eng.amps - expected).max() < 1e-12


def test_register_unitary_rejects_non_unitary():
    eng = Engine()
    eng.allocate("b", 1)
    with pytest.raises(EngineError, match="max deviation"):
        eng.apply_register_unitary("b", np.array([[1, 0], [0, 2.0]]))


def test_gate_x_z_and_bell():
    eng = Engine(debug=True)
    eng.allocate("a", 1)
    eng.apply_gate("X", [0])
    assert np.allclose(eng.amps, [0, 1])

    eng = Engine(debug=True)
    eng.allocate("a", 1)
    eng.apply_gate("H", [0])
    eng.apply_gate("Z", [0])
    assert np.allclose(eng.amps, [1 / math.sqrt(2), -1 / math.sqrt(2)])

    eng = Engine(debug=True)
    eng.allocate("a", 1)
    eng.allocate("b", 1)
    eng.apply_gate("H", [0])
    eng.apply_gate("CNOT", [0, 1])  # control a, target b
    expected = np.zeros(4)
    expected[0b00] = expected[0b11] = 1 / math.sqrt(2)
    assert np.allclose(eng.amps, expected)


def test_gate_errors():
    eng = Engine()
    eng.allocate("a", 2)
    with pytest.raises(EngineError, match="distinct"):
        eng.apply_gate("CNOT", [0, 0])
    with pytest.raises(EngineError, match="out of range"):
        eng.apply_gate("X", [5])


@pytest.mark.parametrize("gate,k", [("H", 1), ("X", 1), ("Z", 1), ("CNOT", 2), ("CCNOT", 3)])
def test_gate_involutions_on_random_states(gate, k):
    rng = np.random.default_rng(7)
    for _ in range(5):
        n = 8
        eng = Engine(debug=True)
        eng.allocate("r", n)
        state = random_state(1 << n, rng)
        eng.amps = state.copy()
        qubits = rng.choice(n, size=k, replace=False).tolist()
        eng.apply_gate(gate, qubits)
        eng.apply_gate(gate, qubits)
        assert np.abs(eng.amps - state).max() < 1e-9


def test_gates_vs_dense_oracle():
    rng = np.random.default_rng(13)
    for gate in ("H", "X", "Z", "CNOT", "CCNOT"):
        m = GATE_MATRICES[gate]
        k = int(math.log2(m.shape[0]))
        n = 5
        eng = Engine(debug=True)
        eng.allocate("r", n)
        state = random_state(1 << n, rng)
        eng.amps = state.copy()
        qubits = rng.choice(n, size=k, replace=False).tolist()
        eng.apply_gate(gate, qubits)
        expected = gate_matrix_on_qubits(m, qubits, n) @ state
        assert np.abs(eng.amps - expected).max() < 1e-12


def test_measure_basis_state_certain():
    eng = Engine(debug=True)
    eng.allocate("i", 8)
    eng.prepare_superposition("i", [15])
    before = eng.amps.copy()
    rng = np.random.default_rng(0)
    assert eng.measure_register("i", rng) == 15
    assert np.allclose(eng.amps, before)


def test_measure_phase_invisible():
    counts = {0: 0, 1: 0}
    for seed in range(200):
        eng = Engine()
        eng.allocate("b", 1)
        eng.load_amplitudes("b", np.array([1, -1]) / math.sqrt(2))
        counts[eng.measure_register("b", np.random.default_rng(seed))] += 1
    assert counts[0] + counts[1] == 200
    assert 60 < counts[0] < 140  # ~5 sigma around 100


def test_measure_never_returns_zero_amplitude():
    for seed in range(300):
        eng = Engine()
        eng.allocate("r", 2)
        eng.prepare_superposition("r", [0, 2])
        outcome = eng.measure_register("r", np.random.default_rng(seed))
        assert outcome in (0, 2)


def test_measure_collapses_entangled_partner():
    # (|'A'>|'A'> + |'B'>|'B'>)/sqrt(2) over two 7-bit registers
    eng = Engine(debug=True)
    eng.allocate("c", 7)
    eng.allocate("t", 7)
    eng.prepare_superposition("c", [65, 66])
    eng.prepare_superposition("t", [65])
    # entangle: where c == 66, shift t by +1 (engine-level controlled permutation)
    idx = np.arange(eng.amps.size)
    mask = ((idx >> eng.register("c").offset) & 127) == 66
    perm = (np.arange(128) + 1) % 128
    eng.apply_pattern_permutation("t", perm, mask=mask)

    expected = np.zeros(1 << 14, dtype=complex)
    expected[(65 << 7) | 65] = expected[(66 << 7) | 66] = 1 / math.sqrt(2)
    assert np.abs(eng.amps - expected).max() < 1e-12

    for seed in (1, 2, 3, 4, 5):
        shot = eng.clone()
        rng = np.random.default_rng(seed)
        first = shot.measure_register("c", rng)
        second = shot.measure_register("t", rng)
        assert first == second and first in (65, 66)


def test_measure_statistics_seeded_reproducible():
    def run(seed):
        eng = Engine()
        eng.allocate("r", 4)
        eng.prepare_superposition("r", [0, 3, 9])
        return eng.measure_register("r", np.random.default_rng(seed))

    outcomes = [run(s) for s in range(50)]
    assert outcomes == [run(s) for s in range(50)]
    assert set(outcomes) <= {0, 3, 9}


def test_degenerate_state_is_internal_error():
    eng = Engine()
    eng.allocate("b", 1)
    eng.amps = np.zeros(2, dtype=complex)
    with pytest.raises(EngineError, match="degenerate"):
        eng.measure_register("b", np.random.default_rng(0))
