import numpy as np
import pytest

from discordlab import qmat
from conftest import random_density, random_hermitian

SX = np.array([[0, 1], [1, 0]], dtype=complex)


def test_tensor_identity():
    assert np.array_equal(qmat.tensor(np.eye(2), np.eye(2)), np.eye(4))


def test_tensor_basis_order():
    out = qmat.tensor(np.diag([1, 0]), np.diag([0, 1]))
    assert np.array_equal(out, np.diag([0, 1, 0, 0]))


def test_tensor_bit_flip():
    ket00 = np.array([1, 0, 0, 0])
    assert np.array_equal(qmat.tensor(SX, SX) @ ket00, [0, 0, 0, 1])


def test_tensor_dimension_cap():
    with pytest.raises(qmat.DimensionError):
        qmat.tensor(np.eye(8), np.eye(9))


def test_partial_trace_product():
    rng = np.random.default_rng(1)
    a, b = random_density(rng, 2), random_density(rng, 3)
    assert np.allclose(qmat.partial_trace(np.kron(a, b), (2, 3), "A"), a, atol=1e-14)
    assert np.allclose(qmat.partial_trace(np.kron(a, b), (2, 3), "B"), b, atol=1e-14)


def test_partial_trace_bell():
    psi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert np.allclose(qmat.partial_trace(np.outer(psi, psi), (2, 2), "B"), np.eye(2) / 2)


def test_partial_trace_index_loop_oracle():
    rng = np.random.default_rng(2)
    rho = random_density(rng, 6)
    da, db = 2, 3
    expected = np.zeros((db, db), dtype=complex)
    for i in range(da):
        for j in range(db):
            for k in range(db):
                expected[j, k] += rho[i * db + j, i * db + k]
    assert np.allclose(qmat.partial_trace(rho, (da, db), "B"), expected, atol=1e-15)


def test_partial_trace_preserves_trace_and_rejects_bad_dims():
    rng = np.random.default_rng(3)
    m = random_density(rng, 6)
    for keep in "AB":
        assert abs(np.trace(qmat.partial_trace(m, (3, 2), keep)) - 1) < 1e-14
    with pytest.raises(qmat.DimensionError):
        qmat.partial_trace(m, (2, 2), "A")


def test_tensor_partial_trace_round_trip():
    rng = np.random.default_rng(4)
    for _ in range(200):
        da, db = rng.integers(1, 9, size=2)
        a = rng.normal(size=(da, da)) + 1j * rng.normal(size=(da, da))
        b = rng.normal(size=(db, db)) + 1j * rng.normal(size=(db, db))
        out = qmat.partial_trace(qmat.tensor(a, b), (da, db), "A")
        assert np.allclose(out, a * np.trace(b), rtol=0, atol=1e-12 * max(1, np.abs(a * np.trace(b)).max()))


def test_swap_subsystems():
    rng = np.random.default_rng(5)
    a, b = random_density(rng, 2), random_density(rng, 3)
    assert np.allclose(qmat.swap_subsystems(np.kron(a, b), (2, 3)), np.kron(b, a))


def test_eigh_diagonal():
    lam, v = qmat.eigh(np.diag([3.0, 1.0, 2.0]))
    assert np.allclose(lam, [1, 2, 3])
    assert np.allclose(np.abs(v), np.eye(3)[:, [1, 2, 0]])


def test_eigh_pauli_x():
    lam, v = qmat.eigh(SX)
    assert np.allclose(lam, [-1, 1])
    r = 1 / np.sqrt(2)
    assert np.allclose(v[:, 0], [r, -r])
    assert np.allclose(v[:, 1], [r, r])


def test_eigh_phase_convention():
    rng = np.random.default_rng(6)
    for _ in range(50):
        _, v = qmat.eigh(random_hermitian(rng, 5))
        for col in v.T:
            k = np.argmax(np.abs(col))
            assert abs(col[k].imag) < 1e-12 and col[k].real > 0


def test_eigh_rejects_non_hermitian():
    with pytest.raises(qmat.NotHermitianError):
        qmat.eigh(np.array([[1, 2], [0, 1]]))


def test_eigh_random_reconstruction():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        d = int(rng.integers(2, 17))
        h = random_hermitian(rng, d)
        dec = qmat.eigh(h)
        assert np.all(np.diff(dec.values) >= 0)
        assert np.linalg.norm(dec.reconstruct() - h) <= 1e-10 * np.linalg.norm(h)
        assert np.linalg.norm(dec.vectors.conj().T @ dec.vectors - np.eye(d)) <= 1e-12 * d


def test_exp_of_zero_scale_is_identity():
    rng = np.random.default_rng(8)
    h = random_hermitian(rng, 4)
    assert np.allclose(qmat.matrix_function(h, "exp", scale=0.0), np.eye(4), atol=1e-14)


def test_exp_pauli_identity():
    out = qmat.matrix_function(SX, "exp", scale=-1j * np.pi / 2)
    assert np.allclose(out, -1j * SX, atol=1e-15)


def test_unitarity():
    rng = np.random.default_rng(9)
    for _ in range(200):
        d = int(rng.integers(2, 17))
        u = qmat.unitary_from_hamiltonian(random_hermitian(rng, d), rng.uniform(-10, 10))
        assert np.linalg.norm(u.conj().T @ u - np.eye(d)) <= 1e-12


def test_expm1_matches_exp_minus_identity():
    rng = np.random.default_rng(10)
    h = random_hermitian(rng, 4)
    a = qmat.matrix_function(h, "expm1", scale=-0.3j)
    b = qmat.matrix_function(h, "exp", scale=-0.3j) - np.eye(4)
    assert np.allclose(a, b, atol=1e-14)


def test_log_and_xlogx_on_support():
    m = np.diag([0.5, 0.5, 0.0])
    assert np.allclose(qmat.matrix_function(m, "log"), np.diag([np.log(0.5)] * 2 + [0]))
    assert np.allclose(qmat.matrix_function(m, "xlogx"), np.diag([0.5 * np.log(0.5)] * 2 + [0]))


def test_as_matrix_validation():
    with pytest.raises(qmat.DimensionError):
        qmat.as_matrix(np.ones((2, 3)))
    with pytest.raises(ValueError):
        qmat.as_matrix([[np.nan, 0], [0, 1]])
