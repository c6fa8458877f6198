import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qfploc.stateprep import prepare_by_circuit, prepare_direct
from qfploc.statevector import QubitError, StateVector
from qfploc.swaptest import (
    SwapTestConfig,
    ancilla_probability,
    estimate_from_counts,
    post_circuit_state_check,
    run_swap_test,
    swap_test_state,
)

from oracles import register_swap_test_state, random_unit, swap_test_final_state, swap_test_p_one

# the worked-example vectors after normalization (printed values are 2-decimal roundings)
EXAMPLE_SIMILARITY_UNIT = 0.9592904181883443
EXAMPLE_P_ONE_UNIT = 0.9796452090941721


def reg(v):
    return prepare_by_circuit(v)


def test_worked_example_on_unit_vectors():
    d = prepare_by_circuit([0.43, 0.9], normalize=True)
    g = prepare_by_circuit([0.24, 0.97], normalize=True)
    res = run_swap_test(d, g)
    assert res.mode == "exact"
    assert res.p_one == pytest.approx(EXAMPLE_P_ONE_UNIT, abs=1e-12)
    assert res.similarity == pytest.approx(EXAMPLE_SIMILARITY_UNIT, abs=1e-12)
    assert ancilla_probability(d.state, g.state) == pytest.approx(EXAMPLE_P_ONE_UNIT, abs=1e-12)


def test_identical_and_orthogonal():
    v = random_unit(np.random.default_rng(0), 8)
    res = run_swap_test(reg(v), reg(v))
    assert res.p_one == pytest.approx(1.0) and res.similarity == pytest.approx(1.0)
    res = run_swap_test(reg([1, 0]), reg([0, 1]))
    assert res.p_one == pytest.approx(0.5) and res.similarity == 0.0


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([1, 2, 3, 5]), st.integers(0, 2**31 - 1))
def test_exact_similarity_matches_dot_product(n, seed):
    rng = np.random.default_rng(seed)
    u, v = random_unit(rng, 1 << n), random_unit(rng, 1 << n)
    res = run_swap_test(reg(u), reg(v))
    assert res.p_one == pytest.approx(swap_test_p_one(u, v), abs=1e-12)
    assert res.similarity == pytest.approx(np.dot(u, v) ** 2, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**31 - 1))
def test_symmetric_in_registers(n, seed):
    rng = np.random.default_rng(seed)
    u, v = reg(random_unit(rng, 1 << n)), reg(random_unit(rng, 1 << n))
    assert run_swap_test(u, v).p_one == pytest.approx(run_swap_test(v, u).p_one, abs=1e-13)


def test_ancilla_zero_convention_gives_same_statistic():
    # starting the ancilla in |0> yields the mirrored branch: P(0) equals P(1) of the |1> variant
    rng = np.random.default_rng(3)
    u, v = reg(random_unit(rng, 4)), reg(random_unit(rng, 4))
    s1, _ = swap_test_state(u.state, v.state, ancilla_init=1)
    s0, _ = swap_test_state(u.state, v.state, ancilla_init=0)
    half = s1.amplitudes.size // 2
    assert np.sum(abs(s0.amplitudes[:half]) ** 2) == pytest.approx(np.sum(abs(s1.amplitudes[half:]) ** 2))


def test_final_state_matches_closed_form():
    rng = np.random.default_rng(11)
    for _ in range(50):
        d, g = random_unit(rng, 2), random_unit(rng, 2)
        got = post_circuit_state_check(reg(d).state, reg(g).state).amplitudes
        assert np.allclose(got, swap_test_final_state(d, g), atol=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_per_qubit_ladder_equals_register_swap(n):
    rng = np.random.default_rng(n)
    for _ in range(10):
        d, g = random_unit(rng, 1 << n), random_unit(rng, 1 << n)
        got, _ = swap_test_state(reg(d).state, reg(g).state)
        assert np.allclose(got.amplitudes, register_swap_test_state(d, g), atol=1e-12)


def test_final_state_examples():
    s = post_circuit_state_check(reg([1, 0]).state, reg([1, 0]).state).amplitudes
    assert np.allclose(s[:4], 0.0)
    assert np.sum(abs(s[4:]) ** 2) == pytest.approx(1.0)
    s = post_circuit_state_check(reg([1, 0]).state, reg([0, 1]).state).amplitudes
    assert np.sum(abs(s[:4]) ** 2) == pytest.approx(0.5)
    assert np.sum(abs(s[4:]) ** 2) == pytest.approx(0.5)


def test_state_check_requires_single_qubit():
    v = reg([0.5] * 4).state
    with pytest.raises(QubitError):
        post_circuit_state_check(v, v)


def test_register_mismatch_and_cap():
    with pytest.raises(QubitError):
        run_swap_test(reg([1, 0]), reg([0.5] * 4))
    big = prepare_direct(np.eye(1 << 5)[0])
    with pytest.raises(QubitError):
        run_swap_test(big, big, max_qubits=10)
    assert run_swap_test(big, big, max_qubits=11).similarity == pytest.approx(1.0)


def test_gate_count():
    big = prepare_direct(np.eye(1 << 5)[0])
    assert run_swap_test(big, big).gate_ops == 5 + 2
    res = run_swap_test(big, big, SwapTestConfig(100, 1))
    assert res.gate_ops == 7 * 100


def test_estimator():
    assert estimate_from_counts(4096, 4096) == 1.0
    assert estimate_from_counts(2048, 4096) == 0.0
    assert estimate_from_counts(1000, 4096) < 0


def test_sampled_clamps_and_keeps_raw():
    res = run_swap_test(reg([1, 0]), reg([0, 1]), SwapTestConfig(64, 2))
    assert 0.0 <= res.similarity <= 1.0
    assert res.raw_similarity == estimate_from_counts(res.ones_count, 64)
    assert res.mode == "sampled" and res.shots_used == 64


def test_sampled_is_deterministic():
    rng = np.random.default_rng(1)
    u, v = reg(random_unit(rng, 8)), reg(random_unit(rng, 8))
    cfg = SwapTestConfig(1024, 99)
    assert run_swap_test(u, v, cfg) == run_swap_test(u, v, cfg)


def test_resimulation_matches_shortcut():
    rng = np.random.default_rng(2)
    u, v = reg(random_unit(rng, 4)), reg(random_unit(rng, 4))
    fast = run_swap_test(u, v, SwapTestConfig(200, 5))
    slow = run_swap_test(u, v, SwapTestConfig(200, 5, resimulate=True))
    assert fast == slow


def test_sampled_estimate_within_twelve_sigma():
    rng = np.random.default_rng(4)
    for k in (256, 4096):
        for trial in range(20):
            u, v = reg(random_unit(rng, 8)), reg(random_unit(rng, 8))
            res = run_swap_test(u, v, SwapTestConfig(k, trial))
            p = res.p_one
            sigma = 2 * np.sqrt(p * (1 - p) / k) + 1e-12
            assert abs(res.raw_similarity - (2 * p - 1)) <= 12 * sigma


def test_negative_shots_rejected():
    with pytest.raises(ValueError):
        SwapTestConfig(shots=-1)


def test_statevector_registers_used_as_is():
    # StateVector-level API: works on any pair of equal-width registers
    a = StateVector(np.array([1, 0], dtype=complex), 1)
    b = StateVector(np.array([0, 1], dtype=complex), 1)
    assert ancilla_probability(a, b) == pytest.approx(0.5)
