"""Amplitude encoding of real feature vectors.

The circuit path walks a binary tree from the most-significant qubit down.
Level ``l`` holds ``2**l`` angles; angle ``k`` rotates qubit ``n-1-l`` on the
branch where the higher qubits encode ``k``.  Above the last level each angle
splits probability mass between the two subtrees; the last level uses the
signed leaf amplitudes in ``atan2`` so negative entries come out with the
right sign.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .features import FeatureVector
from .statevector import DEFAULT_MAX_QUBITS, StateVector, new_zero_state

NORM_TOL = 1e-10


@dataclass(frozen=True)
class PreparedRegister:
    state: StateVector
    source: FeatureVector
    fidelity: float
    cost: int  # amplitude updates spent preparing the register

    @property
    def num_qubits(self) -> int:
        return self.state.num_qubits


def _as_amplitudes(features, normalize: bool = False) -> tuple[np.ndarray, FeatureVector]:
    if isinstance(features, FeatureVector):
        fv = features
    else:
        arr = np.asarray(features, dtype=float)
        n = int(round(np.log2(len(arr)))) if len(arr) else 0
        fv = FeatureVector(arr, "raw", n, len(arr))
    amps = np.asarray(fv.features, dtype=float)
    size = len(amps)
    if size < 2 or size & (size - 1):
        raise ValueError(f"feature length {size} is not a power of two >= 2")
    norm = np.linalg.norm(amps)
    if normalize and norm > 0:
        amps = amps / norm
        fv = FeatureVector(amps, fv.mode, fv.num_qubits, fv.length)
    elif abs(norm - 1.0) > NORM_TOL:
        raise ValueError(f"features must be unit norm (norm={norm!r}); pass normalize=True to rescale")
    return amps, fv


def angle_tree(features, normalize: bool = False) -> np.ndarray:
    """Rotation angles in level order (``2**n - 1`` of them)."""
    amps, _ = _as_amplitudes(features, normalize)
    n = int(np.log2(len(amps)))
    angles = []
    mass = amps**2
    for level in range(n):
        # subtrees at this level have 2**(n-level) leaves; split each in half
        blocks = amps.reshape(1 << level, 2, -1)
        if level == n - 1:
            left, right = blocks[:, 0, 0], blocks[:, 1, 0]
        else:
            halves = mass.reshape(1 << level, 2, -1).sum(axis=2)
            left, right = np.sqrt(halves[:, 0]), np.sqrt(halves[:, 1])
        angles.append(2.0 * np.arctan2(right, left))
    return np.concatenate(angles)


def leaf_masses(angles: np.ndarray) -> np.ndarray:
    """Probability of every basis state produced by an angle tree."""
    n = int(np.log2(len(angles) + 1))
    probs = np.ones(1)
    for level in range(n):
        theta = angles[(1 << level) - 1 : (1 << (level + 1)) - 1]
        c2, s2 = np.cos(theta / 2) ** 2, np.sin(theta / 2) ** 2
        probs = np.stack([probs * c2, probs * s2], axis=1).ravel()
    return probs


def apply_uniformly_controlled_rotation(state: StateVector, level: int, thetas: np.ndarray) -> int:
    """Rotate qubit ``n-1-level`` by ``thetas[k]`` where the higher qubits read ``k``.

    Returns the number of amplitudes touched.
    """
    n = state.num_qubits
    target = n - 1 - level
    view = state.amplitudes.reshape(1 << level, 2, 1 << target)
    c = np.cos(thetas / 2.0)[:, None]
    s = np.sin(thetas / 2.0)[:, None]
    a0 = view[:, 0, :].copy()
    a1 = view[:, 1, :].copy()
    view[:, 0, :] = c * a0 - s * a1
    view[:, 1, :] = s * a0 + c * a1
    return state.amplitudes.size


def _fidelity(target: np.ndarray, state: StateVector) -> float:
    return float(abs(np.vdot(target, state.amplitudes)) ** 2)


def prepare_by_circuit(
    features, max_qubits: int = DEFAULT_MAX_QUBITS, normalize: bool = False
) -> PreparedRegister:
    amps, fv = _as_amplitudes(features, normalize)
    angles = angle_tree(fv)
    n = int(np.log2(len(amps)))
    state = new_zero_state(n, max_qubits)
    cost = 0
    for level in range(n):
        thetas = angles[(1 << level) - 1 : (1 << (level + 1)) - 1]
        cost += apply_uniformly_controlled_rotation(state, level, thetas)
    return PreparedRegister(state, fv, _fidelity(amps, state), cost)


def prepare_direct(
    features, max_qubits: int = DEFAULT_MAX_QUBITS, normalize: bool = False
) -> PreparedRegister:
    """Write the features straight into the amplitude array (simulation shortcut)."""
    amps, fv = _as_amplitudes(features, normalize)
    state = StateVector.from_amplitudes(amps, max_qubits)
    return PreparedRegister(state, fv, 1.0, len(amps))


PREPARERS = {"circuit": prepare_by_circuit, "direct": prepare_direct}
