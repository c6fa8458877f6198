"""Minimal statevector simulator.

Qubit 0 is the least-significant bit of the basis-state index, so for a
3-qubit register the basis state ``|q2 q1 q0>`` lives at index
``q2*4 + q1*2 + q0``.  Composing registers with :func:`tensor` puts the first
argument in the most-significant qubits.

Only the gates needed by the swap-test matcher are provided (H, X, RY-style
rotation, CNOT, CSWAP).  Gates act in place and return the state so calls can
be chained.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

DEFAULT_MAX_QUBITS = 24

_SQRT2_INV = 1.0 / np.sqrt(2.0)


class QubitError(ValueError):
    """Invalid qubit count or qubit index."""


@dataclass
class StateVector:
    amplitudes: np.ndarray
    num_qubits: int

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (1 << self.num_qubits,):
            raise QubitError(
                f"expected {1 << self.num_qubits} amplitudes for {self.num_qubits} qubits, "
                f"got shape {self.amplitudes.shape}"
            )

    @classmethod
    def from_amplitudes(cls, amplitudes, max_qubits: int = DEFAULT_MAX_QUBITS) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex).ravel()
        n = int(round(np.log2(len(amps)))) if len(amps) else -1
        if n < 1 or (1 << n) != len(amps):
            raise QubitError(f"amplitude count {len(amps)} is not a power of two >= 2")
        _check_qubit_count(n, max_qubits)
        norm = np.linalg.norm(amps)
        if not np.isclose(norm, 1.0, atol=1e-10):
            raise ValueError(f"amplitudes must be normalized (norm={norm!r})")
        return cls(amps.copy(), n)

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy(), self.num_qubits)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def to_json(self, tol: float = 0.0) -> str:
        """Debug dump: list of ``[basis_index, real, imag]`` for golden files."""
        rows = [
            [i, float(a.real), float(a.imag)]
            for i, a in enumerate(self.amplitudes)
            if abs(a) > tol or tol == 0.0
        ]
        return json.dumps({"num_qubits": self.num_qubits, "amplitudes": rows})


@dataclass(frozen=True)
class ShotRecord:
    outcomes: np.ndarray
    seed: int

    @property
    def shots(self) -> int:
        return int(self.outcomes.shape[0])

    @property
    def ones(self) -> int:
        return int(self.outcomes.sum())


def _check_qubit_count(num_qubits: int, max_qubits: int) -> None:
    if not 1 <= num_qubits <= max_qubits:
        raise QubitError(f"qubit count {num_qubits} outside [1, {max_qubits}]")


def _check_index(state: StateVector, *qubits: int) -> None:
    for q in qubits:
        if not (isinstance(q, (int, np.integer)) and 0 <= q < state.num_qubits):
            raise QubitError(f"qubit index {q!r} out of range for {state.num_qubits} qubits")
    if len(set(qubits)) != len(qubits):
        raise QubitError(f"qubit indices must be distinct, got {qubits}")


def new_zero_state(num_qubits: int, max_qubits: int = DEFAULT_MAX_QUBITS) -> StateVector:
    _check_qubit_count(num_qubits, max_qubits)
    amps = np.zeros(1 << num_qubits, dtype=complex)
    amps[0] = 1.0
    return StateVector(amps, num_qubits)


def basis_state(bits: str) -> StateVector:
    """Basis state from a bitstring written most-significant qubit first, e.g. ``"101"``."""
    n = len(bits)
    state = new_zero_state(n)
    state.amplitudes[0] = 0.0
    state.amplitudes[int(bits, 2)] = 1.0
    return state


def tensor(*states: StateVector, max_qubits: int = DEFAULT_MAX_QUBITS) -> StateVector:
    """Kronecker product; the first state occupies the highest qubits."""
    n = sum(s.num_qubits for s in states)
    _check_qubit_count(n, max_qubits)
    amps = states[0].amplitudes
    for s in states[1:]:
        amps = np.outer(amps, s.amplitudes).ravel()
    return StateVector(amps, n)


def _pair_view(state: StateVector, q: int) -> np.ndarray:
    # axis 1 indexes the value of bit q
    return state.amplitudes.reshape(1 << (state.num_qubits - 1 - q), 2, 1 << q)


def apply_matrix_1q(state: StateVector, q: int, matrix) -> StateVector:
    _check_index(state, q)
    (m00, m01), (m10, m11) = np.asarray(matrix, dtype=complex)
    view = _pair_view(state, q)
    a0 = view[:, 0, :].copy()
    a1 = view[:, 1, :]
    view[:, 0, :] = m00 * a0 + m01 * a1
    view[:, 1, :] = m10 * a0 + m11 * a1
    return state


def apply_hadamard(state: StateVector, q: int) -> StateVector:
    _check_index(state, q)
    view = _pair_view(state, q)
    a0 = view[:, 0, :].copy()
    a1 = view[:, 1, :].copy()
    view[:, 0, :] = (a0 + a1) * _SQRT2_INV
    view[:, 1, :] = (a0 - a1) * _SQRT2_INV
    return state


def apply_pauli_x(state: StateVector, q: int) -> StateVector:
    _check_index(state, q)
    view = _pair_view(state, q)
    view[:, [0, 1], :] = view[:, [1, 0], :]
    return state


def rotation_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]])


def apply_rotation(state: StateVector, q: int, theta: float) -> StateVector:
    """Real rotation ``[[cos t/2, -sin t/2], [sin t/2, cos t/2]]`` on qubit ``q``."""
    if not np.isfinite(theta):
        raise ValueError(f"rotation angle must be finite, got {theta!r}")
    return apply_matrix_1q(state, q, rotation_matrix(theta))


@lru_cache(maxsize=256)
def _cnot_pairs(num_qubits: int, control: int, target: int) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(1 << num_qubits)
    lo = idx[((idx >> control) & 1 == 1) & ((idx >> target) & 1 == 0)]
    return lo, lo | (1 << target)


@lru_cache(maxsize=256)
def _cswap_pairs(num_qubits: int, control: int, a: int, b: int) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(1 << num_qubits)
    sel = ((idx >> control) & 1 == 1) & ((idx >> a) & 1 == 1) & ((idx >> b) & 1 == 0)
    lo = idx[sel]
    return lo, lo ^ (1 << a) ^ (1 << b)


def _swap_indices(state: StateVector, i: np.ndarray, j: np.ndarray) -> None:
    amps = state.amplitudes
    amps[i], amps[j] = amps[j], amps[i].copy()


def apply_cnot(state: StateVector, control: int, target: int) -> StateVector:
    _check_index(state, control, target)
    _swap_indices(state, *_cnot_pairs(state.num_qubits, control, target))
    return state


def apply_cswap(state: StateVector, control: int, a: int, b: int) -> StateVector:
    _check_index(state, control, a, b)
    _swap_indices(state, *_cswap_pairs(state.num_qubits, control, a, b))
    return state


def probability_of_one(state: StateVector, q: int) -> float:
    _check_index(state, q)
    view = _pair_view(state, q)
    p = float(np.sum(np.abs(view[:, 1, :]) ** 2))
    return min(max(p, 0.0), 1.0)


def sample_bits(p_one: float, shots: int, seed: int) -> np.ndarray:
    """``shots`` Bernoulli(p_one) draws from a PCG64 stream seeded with ``seed``."""
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    rng = np.random.default_rng(seed)
    return (rng.random(shots) < p_one).astype(np.uint8)


def sample_measurements(state: StateVector, q: int, shots: int, seed: int) -> ShotRecord:
    """Measure qubit ``q`` on ``shots`` independent re-preparations of ``state``.

    The state itself is not collapsed; every shot stands for a fresh run of the
    circuit that produced it.
    """
    return ShotRecord(sample_bits(probability_of_one(state, q), shots, seed), seed)
