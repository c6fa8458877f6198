"""Swap-test similarity between two amplitude-encoded registers.

Register layout for an ``n``-qubit pair: ``gamma`` on qubits ``0..n-1``,
``delta`` on ``n..2n-1`` and the ancilla on qubit ``2n`` (ancilla is the most
significant, i.e. ``ancilla (x) delta (x) gamma``).

The ancilla starts in ``|1>``; after H, the per-qubit CSWAP ladder and H again
it reads 1 with probability ``(1 + |<delta|gamma>|^2) / 2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .stateprep import PreparedRegister
from .statevector import (
    DEFAULT_MAX_QUBITS,
    QubitError,
    StateVector,
    apply_cswap,
    apply_hadamard,
    apply_pauli_x,
    new_zero_state,
    probability_of_one,
    sample_bits,
    tensor,
)

DEFAULT_SHOTS = 4096


@dataclass(frozen=True)
class SwapTestConfig:
    shots: int = DEFAULT_SHOTS  # 0 -> exact probability readout
    seed: int = 0
    resimulate: bool = False  # run the full circuit once per shot

    def __post_init__(self):
        if self.shots < 0:
            raise ValueError(f"shots must be >= 0, got {self.shots}")


@dataclass(frozen=True)
class SwapTestResult:
    similarity: float
    p_one: float
    shots_used: int
    ones_count: int
    mode: str  # "exact", "sampled" or "classical"
    raw_similarity: float = float("nan")
    gate_ops: int = 0


def swap_test_state(
    delta: StateVector,
    gamma: StateVector,
    ancilla_init: int = 1,
    max_qubits: int = DEFAULT_MAX_QUBITS,
) -> tuple[StateVector, int]:
    """Run the circuit and return the final joint state and the gate count."""
    if delta.num_qubits != gamma.num_qubits:
        raise QubitError(
            f"register size mismatch: delta has {delta.num_qubits} qubits, "
            f"gamma has {gamma.num_qubits}"
        )
    n = delta.num_qubits
    if 2 * n + 1 > max_qubits:
        raise QubitError(f"swap test needs {2 * n + 1} qubits, cap is {max_qubits}")
    ancilla = new_zero_state(1)
    if ancilla_init:
        apply_pauli_x(ancilla, 0)
    state = tensor(ancilla, delta, gamma, max_qubits=max_qubits)
    a = 2 * n
    apply_hadamard(state, a)
    for i in range(n):
        apply_cswap(state, a, n + i, i)
    apply_hadamard(state, a)
    return state, n + 2


def ancilla_probability(delta_state: StateVector, gamma_state: StateVector) -> float:
    state, _ = swap_test_state(delta_state, gamma_state)
    return probability_of_one(state, state.num_qubits - 1)


def post_circuit_state_check(delta_state: StateVector, gamma_state: StateVector) -> StateVector:
    """Final 3-qubit state for single-qubit registers."""
    if delta_state.num_qubits != 1 or gamma_state.num_qubits != 1:
        raise QubitError("post-circuit state check is defined for single-qubit registers only")
    state, _ = swap_test_state(delta_state, gamma_state)
    return state


def estimate_from_counts(ones: int, shots: int) -> float:
    return 2.0 * ones / shots - 1.0


def sampled_result(p_one: float, shots: int, seed: int, gates_per_shot: int) -> SwapTestResult:
    """Shot-estimated result from the circuit's exact ancilla probability."""
    ones = int(sample_bits(p_one, shots, seed).sum())
    return _from_counts(p_one, ones, shots, gates_per_shot * shots)


def _from_counts(p_one: float, ones: int, shots: int, gates: int) -> SwapTestResult:
    raw = estimate_from_counts(ones, shots)
    return SwapTestResult(min(max(raw, 0.0), 1.0), p_one, shots, ones, "sampled", raw, gates)


def run_swap_test(
    delta: PreparedRegister,
    gamma: PreparedRegister,
    config: SwapTestConfig = SwapTestConfig(shots=0),
    max_qubits: int = DEFAULT_MAX_QUBITS,
) -> SwapTestResult:
    state, gates = swap_test_state(delta.state, gamma.state, max_qubits=max_qubits)
    ancilla = state.num_qubits - 1
    p_one = probability_of_one(state, ancilla)
    if config.shots == 0:
        sim = 2.0 * p_one - 1.0
        return SwapTestResult(min(max(sim, 0.0), 1.0), p_one, 0, 0, "exact", sim, gates)

    if not config.resimulate:
        return sampled_result(p_one, config.shots, config.seed, gates)
    # same PCG64 stream as sample_bits, one uniform per freshly built circuit
    rng = np.random.default_rng(config.seed)
    ones = 0
    for _ in range(config.shots):
        shot_state, _ = swap_test_state(delta.state, gamma.state, max_qubits=max_qubits)
        ones += int(rng.random() < probability_of_one(shot_state, ancilla))
    return _from_counts(p_one, ones, config.shots, gates * config.shots)
