import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ipsim.evolvers import interaction_frame, exact_evolution
from ipsim.linops import X, Z, expm_hermitian, is_unitary, spectral_norm
from ipsim.models import (LcuDecomposition, SchwingerParams, SumHamiltonian, build_schwinger,
                          lcu_of_hopping, random_pauli_lcu)
from ipsim.qubitization import (BlockEncoding, ancilla_dim, evolution_block,
                                ideal_evolution_encoding, prepare_matrix, prepared_state,
                                qubitization_query_cost, select_matrix, select_prime,
                                signal_block, walk_operator, walk_spectrum_check)

ZX = LcuDecomposition(np.array([0.5, 0.5]), np.array([Z, X]))


def test_prepare_uniform_and_trivial():
    lcu = LcuDecomposition(np.full(8, 0.25), np.array([Z] * 8))
    P = prepare_matrix(lcu)
    assert np.allclose(P[:, 0], np.full(8, 1 / math.sqrt(8)))
    one = prepare_matrix(LcuDecomposition(np.array([2.0]), np.array([Z])))
    assert one.shape == (1, 1) and np.allclose(one, 1)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(0.01, 5), min_size=2, max_size=7))
def test_prepare_amplitudes(ws):
    lcu = LcuDecomposition(np.array(ws), np.array([Z] * len(ws)))
    P = prepare_matrix(lcu)
    assert is_unitary(P, 1e-12)
    col = P[:, 0]
    assert abs(np.vdot(col, col) - 1) <= 1e-12
    fr = np.array(ws) / sum(ws)
    assert np.allclose(np.abs(col[:len(ws)]) ** 2, fr, atol=1e-12)
    assert np.allclose(col[len(ws):], 0)


def test_prepare_rejects_small_ancilla():
    with pytest.raises(ValueError):
        prepare_matrix(random_pauli_lcu(1, 5, np.random.default_rng(0)), anc=4)


def test_select_block_two_paulis():
    S = select_matrix(ZX)
    blk = signal_block(S, prepared_state(ZX), 2)
    assert np.allclose(blk, (Z + X) / 2, atol=1e-15)
    assert np.abs(S @ S - np.eye(4)).max() <= 1e-12


def test_select_hopping_block():
    p = SchwingerParams(2, 1)
    lcu = lcu_of_hopping(p)
    S = select_matrix(lcu)
    assert is_unitary(S, 1e-12)
    assert np.abs(S - S.conj().T).max() <= 1e-14
    blk = signal_block(S, prepared_state(lcu), lcu.dim)
    H = build_schwinger(p)
    assert spectral_norm(blk - H.term("H_h") / lcu.lam) <= 1e-12


def test_walk_known_phases():
    w = walk_operator(LcuDecomposition(np.array([1.0]), np.array([Z])), anc=2)
    ph = w.eigenphases()
    assert np.min(np.abs(ph)) < 1e-12 and np.min(np.abs(np.abs(ph) - np.pi)) < 1e-12
    ph2 = np.sort(walk_operator(ZX).eigenphases())
    assert np.allclose(ph2, [-3 * np.pi / 4, -np.pi / 4, np.pi / 4, 3 * np.pi / 4], atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 31), st.integers(1, 2), st.integers(1, 5))
def test_walk_spectrum_and_pairing(seed, nq, L):
    lcu = random_pauli_lcu(nq, L, np.random.default_rng(seed))
    w = walk_operator(lcu)
    assert walk_spectrum_check(w) <= 1e-9
    z = np.exp(1j * w.eigenphases())
    # the spectrum is closed under conjugation: phases pair as +-phi
    for v in z:
        assert np.min(np.abs(z - v.conj())) <= 1e-8


def test_ideal_encoding_examples():
    w = walk_operator(ZX)
    enc0 = ideal_evolution_encoding(w, 0.0)
    assert spectral_norm(enc0.block() - np.eye(2)) <= 1e-10
    enc = ideal_evolution_encoding(w, 1.0)
    assert spectral_norm(enc.block() - expm_hermitian((Z + X) / 2, 1.0)) <= 1e-9
    enc.verify(expm_hermitian((Z + X) / 2, 1.0))
    U2 = ideal_evolution_encoding(w, 0.6).unitary @ ideal_evolution_encoding(w, 0.9).unitary
    blk = signal_block(U2, w.signal_state, 2)
    assert spectral_norm(blk - expm_hermitian((Z + X) / 2, 1.5)) <= 1e-8


def test_evolution_block_schwinger():
    lcu = lcu_of_hopping(SchwingerParams(2, 1))
    blk, resid = evolution_block(lcu, 0.7)
    assert resid <= 1e-12
    assert spectral_norm(blk - expm_hermitian(lcu.matrix(), 0.7)) <= 1e-12


def test_block_encoding_verify_raises():
    enc = BlockEncoding(np.eye(2, dtype=complex), 1, 1.0, 1e-6)
    enc.verify(np.eye(2))
    with pytest.raises(AssertionError):
        enc.verify(2 * np.eye(2))


@settings(max_examples=10, deadline=None)
@given(st.floats(-3, 3))
def test_select_prime_unitary(t):
    p = SchwingerParams(2, 1)
    H = build_schwinger(p)
    F = H.term("H_E") + H.term("H_M")
    assert is_unitary(select_prime(H.lcus["H_h"], F, t), 1e-10)


def test_select_prime_examples():
    p = SchwingerParams(2, 1)
    H = build_schwinger(p)
    lcu = H.lcus["H_h"]
    F = H.term("H_E") + H.term("H_M")
    assert np.array_equal(select_prime(lcu, F, 0.0), select_matrix(lcu))
    Sp = select_prime(lcu, F, 0.3)
    blk = signal_block(Sp, prepared_state(lcu), lcu.dim)
    HI = interaction_frame(H, ("H_E", "H_M"), 0, 1)
    assert spectral_norm(blk - HI(0.3) / lcu.lam) <= 1e-12


def test_query_cost_examples():
    assert qubitization_query_cost(0.0, 1.0, 0.1) == math.ceil(math.log(10)) == 3
    le = math.log(1000)
    assert qubitization_query_cost(1.0, 10.0, 1e-3) == math.ceil(10 + le / math.log(math.e + le / 10))
    with pytest.raises(ValueError):
        qubitization_query_cost(1.0, 1.0, 0.7)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 100), st.floats(1e-8, 0.4))
def test_query_cost_doubling(at, eps):
    a = qubitization_query_cost(at, 1.0, eps)
    b = qubitization_query_cost(2 * at, 1.0, eps)
    assert a <= b <= 2 * a + math.ceil(math.log(1 / eps)) + 1


def test_ancilla_dim():
    assert [ancilla_dim(L) for L in (1, 2, 3, 8, 9)] == [1, 2, 4, 8, 16]
