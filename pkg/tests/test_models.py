import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ipsim.linops import I2, X, Y, Z, expm_hermitian, spectral_norm
from ipsim.models import (DimensionCapError, LcuDecomposition, NeutrinoParams, PenaltySystem,
                          SchwingerParams, SumHamiltonian, build_neutrino, build_penalty,
                          build_schwinger, gauss_operators, gauss_projector, lcu_of_hopping,
                          neutrino_ip_ham, pauli_sum, random_pauli_lcu, random_sum_hamiltonian,
                          split_hopping)


def schwinger_by_index(N, Lam, a=1.0, g=1.0, m=0.5):
    """Independent construction from explicit basis enumeration.

    Basis: occupation bits of N sites (qubit |1> = occupied), then N-1 link
    levels e = 0..2*Lam (field value e - Lam), in row-major order.
    Hopping moves a fermion from site r to r+1 while lowering link r by one
    (cyclically), with amplitude 1/(2a), plus the reverse move.
    """
    D = 2 * Lam + 1
    states = list(itertools.product(*([range(2)] * N + [range(D)] * (N - 1))))
    pos = {s: k for k, s in enumerate(states)}
    dim = len(states)
    H = np.zeros((dim, dim), dtype=complex)
    for k, s in enumerate(states):
        bits, links = s[:N], s[N:]
        H[k, k] += g * g * a / 2 * sum((e - Lam) ** 2 for e in links)
        H[k, k] += m / 2 * sum((-1) ** j * (1 - 2 * b) for j, b in enumerate(bits))
        for r in range(N - 1):
            if bits[r] == 1 and bits[r + 1] == 0:
                nb = list(bits)
                nb[r], nb[r + 1] = 0, 1
                nl = list(links)
                nl[r] = (nl[r] - 1) % D
                j = pos[tuple(nb) + tuple(nl)]
                H[j, k] += 1 / (2 * a)
                H[k, j] += 1 / (2 * a)
    return H


def test_schwinger_small_structure():
    p = SchwingerParams(2, 1)
    H = build_schwinger(p)
    assert H.dim == 12 and H.labels == ["H_E", "H_M", "H_h"]
    assert set(np.round(np.diag(H.term("H_E")).real, 12)) == {0.0, 0.5}
    HE, HM = H.term("H_E"), H.term("H_M")
    assert np.allclose(HE @ HM, HM @ HE)
    assert np.allclose(HE, np.diag(np.diag(HE))) and np.allclose(HM, np.diag(np.diag(HM)))


@pytest.mark.parametrize("N,a", [(2, 1.0), (4, 1.0), (4, 0.5)])
def test_schwinger_matches_index_oracle(N, a):
    p = SchwingerParams(N, 1, a=a, g=1.3, m=0.7)
    H = build_schwinger(p).matrix()
    assert np.allclose(H, H.conj().T, atol=1e-14)
    assert np.abs(H - schwinger_by_index(N, 1, a, 1.3, 0.7)).max() <= 1e-12


def test_schwinger_cutoff_two_matches_oracle():
    p = SchwingerParams(2, 2)
    assert np.abs(build_schwinger(p).matrix() - schwinger_by_index(2, 2)).max() <= 1e-12


@pytest.mark.parametrize("N,a,L,lam", [(5, 0.5, 32, 8.0), (2, 1.0, 8, 1.0)])
def test_hopping_lcu_counts(N, a, L, lam):
    lcu = lcu_of_hopping(SchwingerParams(N, 1, a=a), allow_odd=True)
    assert lcu.L == L
    assert lcu.lam == pytest.approx(lam, abs=0)


def test_hopping_lcu_reconstruction_and_unitarity():
    p = SchwingerParams(4, 1)
    lcu = lcu_of_hopping(p)
    H = build_schwinger(p)
    assert np.abs(lcu.matrix() - H.term("H_h")).max() <= 1e-12
    Us = lcu.dense_unitaries()
    eye = np.eye(lcu.dim)
    assert all(np.abs(U @ U.conj().T - eye).max() < 1e-12 for U in Us)
    # the adjoint pairing is an involution that really pairs adjoints
    adj = lcu.adjoint_index
    assert np.array_equal(adj[adj], np.arange(lcu.L))
    assert all(np.allclose(Us[adj[k]], Us[k].conj().T) for k in range(lcu.L))


@pytest.mark.parametrize("N,Lam,a", [(2, 1, 1.0), (4, 1, 0.7), (2, 2, 2.0), (3, 1, 1.0)])
def test_hopping_norm_below_lambda_prime(N, Lam, a):
    p = SchwingerParams(N, Lam, a=a)
    H = build_schwinger(p, allow_odd=True)
    assert spectral_norm(H.term("H_h")) <= (N - 1) / a + 1e-12


def test_even_odd_split():
    p = SchwingerParams(4, 1)
    H = build_schwinger(p)
    Hs = split_hopping(H, p)
    assert Hs.labels == ["H_E", "H_M", "H_h_odd", "H_h_even"]
    assert np.array_equal(Hs.term("H_h_odd") + Hs.term("H_h_even"), H.term("H_h"))
    lcu = lcu_of_hopping(p)
    A, B = lcu.unitaries[0], lcu.unitaries[1]
    assert spectral_norm(A @ B - B @ A) <= 1e-12
    # links of one parity are disjoint, so their pieces commute
    odd = Hs.lcus["H_h_odd"]
    assert odd.L == 16


def test_odd_N_needs_flag():
    with pytest.raises(ValueError):
        build_schwinger(SchwingerParams(3, 1))
    build_schwinger(SchwingerParams(3, 1), allow_odd=True)


def test_dimension_cap():
    with pytest.raises(DimensionCapError):
        build_schwinger(SchwingerParams(6, 2))


def test_gauss_projector_n2():
    p = SchwingerParams(2, 1)
    P = gauss_projector(p)
    assert np.abs(P @ P - P).max() <= 1e-10
    H = build_schwinger(p).matrix()
    assert spectral_norm(H @ P - P @ H) <= 1e-9
    # brute-force enumeration: sites counted from 1, even sites +1 when occupied,
    # odd sites -1 when empty; open ends contribute zero field
    count = 0
    for n1, n2, e in itertools.product(range(2), range(2), (-1, 0, 1)):
        q1, q2 = n1 - 1, n2
        if e - 0 - q1 == 0 and 0 - e - q2 == 0:
            count += 1
    assert int(round(np.trace(P).real)) == count == 2


def test_gauss_projector_n4_commutes():
    p = SchwingerParams(4, 1)
    P = gauss_projector(p)
    H = build_schwinger(p).matrix()
    assert spectral_norm(H @ P - P @ H) <= 1e-9
    assert len(gauss_operators(p)) == 4


def kron_chain(ops):
    out = np.ones((1, 1))
    for o in ops:
        out = np.kron(out, o)
    return out


def neutrino_oracle(p):
    N = p.N
    s2, c2 = np.sin(2 * p.theta), np.cos(2 * p.theta)

    def single(op, i):
        return kron_chain([op if j == i else I2 for j in range(N)])

    H = np.zeros((2 ** N, 2 ** N), dtype=complex)
    for i, w in enumerate(p.omegas):
        H += w / 2 * (s2 * single(X, i) - c2 * single(Z, i))
        H += p.lambda_e / 2 * single(Z, i)
    for i in range(N):
        for j in range(i + 1, N):
            for P in (X, Y, Z):
                ops = [I2] * N
                ops[i], ops[j] = P, P
                H += p.mu / (2 * N) * p.J[i, j] * kron_chain(ops)
    return H


def test_neutrino_single_site():
    p = NeutrinoParams(1, (1.7,), 0.3, 0.9, 2.0)
    H = build_neutrino(p).matrix()
    ref = 1.7 / 2 * (np.sin(0.6) * X - np.cos(0.6) * Z) + 0.9 / 2 * Z
    assert np.allclose(H, ref)


def test_neutrino_diagonal_when_unmixed():
    H = build_neutrino(NeutrinoParams(3, (1, 2, 3), 0.0, 1.0, 0.0)).matrix()
    assert np.allclose(H, np.diag(np.diag(H)))


def test_neutrino_random_vs_oracle(rng):
    J = rng.uniform(0, 2, size=(3, 3))
    J = np.triu(J, 1) + np.triu(J, 1).T
    p = NeutrinoParams(3, tuple(rng.uniform(0.5, 2, 3)), rng.uniform(0, 1), rng.uniform(0, 5),
                       rng.uniform(0, 2), J)
    assert np.abs(build_neutrino(p).matrix() - neutrino_oracle(p)).max() <= 1e-12


def test_neutrino_param_validation():
    with pytest.raises(ValueError):
        NeutrinoParams(2, (1, 1), 0.1, 1, 1, J=np.array([[0, 3], [3, 0]]))
    with pytest.raises(ValueError):
        NeutrinoParams(2, (1, 1), 0.1, 1, 1, J=np.array([[0, 1], [0.5, 0]]))
    with pytest.raises(DimensionCapError):
        build_neutrino(NeutrinoParams(13, 1.0, 0.1, 1, 1))


def test_neutrino_ip_examples():
    p = NeutrinoParams(3, (1, 2, 3), 0.2, 4.0, 1.0)
    H = build_neutrino(p)
    nu = H.term("H_vac") + H.term("H_nu_nu")
    Hip = neutrino_ip_ham(p)
    assert np.allclose(Hip(0.0), nu, atol=1e-12)
    flat = neutrino_ip_ham(p.replace(theta=0.0))
    assert np.allclose(flat(0.0), flat(0.83), atol=1e-12)
    Hm = H.term("H_matter")
    for tau in (0.1, 0.77, 2.4):
        ref = expm_hermitian(Hm, -tau) @ nu @ expm_hermitian(Hm, tau)
        assert spectral_norm(Hip(tau) - ref) <= 1e-10
        assert abs(spectral_norm(Hip(tau)) - spectral_norm(nu)) <= 1e-10
    Hip.check()


def test_penalty_examples():
    H0 = build_penalty(X, np.diag([0.0, 1.0]), 0.0)
    assert np.allclose(H0.matrix(), X)
    H5 = build_penalty(X, np.diag([0.0, 1.0]), 5.0)
    assert np.allclose(H5.matrix(), [[0, 1], [1, 5]])
    with pytest.raises(ValueError):
        build_penalty(X, np.diag([0.5, 1.0]), 1.0)
    with pytest.raises(ValueError):
        PenaltySystem(X, np.diag([0.0, 1.0]), -1.0)


def test_penalty_spectrum_bands(rng):
    from conftest import rand_herm
    H_f = rand_herm(rng, 4)
    nf = spectral_norm(H_f)
    P = np.diag([0.0, 0.0, 1.0, 1.0]).astype(complex)
    lam = 100 * nf
    ev = np.linalg.eigvalsh(H_f + lam * P)
    low = np.linalg.eigvalsh(H_f[:2, :2])
    assert np.abs(ev[:2] - low).max() <= 2 * nf ** 2 / lam
    assert np.all(np.abs(ev[2:] - lam) <= 2 * nf)


def test_lcu_validation():
    with pytest.raises(ValueError):
        LcuDecomposition(np.array([1.0, -0.5]), np.array([X, Z]))
    with pytest.raises(ValueError):
        LcuDecomposition(np.array([1.0]), np.array([X + Z]))
    with pytest.raises(ValueError):
        LcuDecomposition(np.array([1.0, 2.0]), np.array([X]))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 31), st.integers(1, 2), st.integers(1, 6))
def test_lcu_lambda_and_matrix(seed, nq, L):
    rng = np.random.default_rng(seed)
    lcu = random_pauli_lcu(nq, L, rng)
    assert lcu.lam == float(np.sum(lcu.weights))
    ref = sum(w * U for w, U in zip(lcu.weights, lcu.unitaries))
    assert np.allclose(lcu.matrix(), ref)
    assert spectral_norm(lcu.matrix()) <= lcu.lam + 1e-12
    both = lcu.concat(lcu)
    assert both.L == 2 * L and np.allclose(both.matrix(), 2 * lcu.matrix())
    assert np.allclose(lcu.subset(range(L)).matrix(), lcu.matrix())


def test_sum_hamiltonian_api():
    H = SumHamiltonian.from_terms([("a", Z), ("b", X)], fast_forward=[True, False])
    assert H.dim == 2 and len(H) == 2
    F, rest = H.split_frame("a")
    assert np.array_equal(F, Z) and rest == ["b"]
    assert H.frame_is_diagonal("a") and not H.frame_is_diagonal(("a", "b"))
    with pytest.raises(KeyError):
        H.term("c")
    with pytest.raises(ValueError):
        SumHamiltonian(["a", "a"], [Z, X], [False, False])
    with pytest.raises(ValueError):
        SumHamiltonian(["a"], [X], [True])
    H2 = H.with_term("c", Y)
    assert np.allclose(H2.matrix(), X + Y + Z)
    H3 = H.replace("b", [("b1", 0.5 * X), ("b2", 0.5 * X)])
    assert np.allclose(H3.matrix(), H.matrix()) and H3.labels == ["a", "b1", "b2"]


def test_random_sum_hamiltonian_frame_diagonal(rng):
    H = random_sum_hamiltonian(2, 3, rng)
    assert H.frame_is_diagonal("H0")
    for lab in H.labels:
        assert np.allclose(H.lcus[lab].matrix(), H.term(lab))


def test_pauli_sum():
    assert np.allclose(pauli_sum({"XZ": 0.5, "II": 1.0}), 0.5 * np.kron(X, Z) + np.eye(4))
