import numpy as np
import pytest

from opspread import opspace
from opspread.models import PAULI, haar_unitary


def random_hermitian(d, rng):
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return 0.5 * (a + a.conj().T)


def test_pauli_basis_d2():
    basis = opspace.build_basis(2)
    assert basis.size == 3
    np.testing.assert_allclose(basis.elements[0], PAULI["x"] / np.sqrt(2), atol=1e-15)
    np.testing.assert_allclose(basis.elements[1], PAULI["y"] / np.sqrt(2), atol=1e-15)
    np.testing.assert_allclose(basis.elements[2], PAULI["z"] / np.sqrt(2), atol=1e-15)


@pytest.mark.parametrize("d", [2, 3, 4, 5, 8])
def test_basis_orthonormal_traceless(d):
    basis = opspace.build_basis(d)
    assert basis.elements.shape == (d * d - 1, d, d)
    flat = basis.elements.reshape(d * d - 1, -1)
    gram = flat.conj() @ flat.T  # Tr(E_a^dag E_b), elements are Hermitian
    np.testing.assert_allclose(gram, np.eye(d * d - 1), atol=1e-12)
    traces = np.trace(basis.elements, axis1=1, axis2=2)
    assert np.max(np.abs(traces)) <= 1e-12
    herm = basis.elements - np.conj(np.transpose(basis.elements, (0, 2, 1)))
    assert np.max(np.abs(herm)) <= 1e-14


def test_build_basis_rejects_small_dimension():
    with pytest.raises(opspace.InvalidDimensionError):
        opspace.build_basis(1)


def test_coords_match_trace_oracle():
    # closed-form coordinates against the defining traces Tr(op E_alpha)
    d = 4
    rng = np.random.default_rng(11)
    basis = opspace.build_basis(d)
    op = random_hermitian(d, rng)
    oracle = np.einsum("aij,ji->a", basis.elements, op).real
    np.testing.assert_allclose(basis.coords(op), oracle, atol=1e-13)


def test_matrix_coords_round_trip():
    d = 5
    rng = np.random.default_rng(3)
    basis = opspace.build_basis(d)
    r = rng.standard_normal(basis.size)
    np.testing.assert_allclose(basis.coords(basis.matrix(r)), r, atol=1e-12)


def test_bloch_of_maximally_mixed_is_zero():
    basis = opspace.build_basis(3)
    r = opspace.bloch_from_density(np.eye(3) / 3, basis)
    assert np.max(np.abs(r)) <= 1e-14


def test_bloch_of_ground_projector():
    basis = opspace.build_basis(2)
    rho = np.diag([1.0, 0.0]).astype(complex)
    np.testing.assert_allclose(
        opspace.bloch_from_density(rho, basis), [0, 0, 1 / np.sqrt(2)], atol=1e-14
    )


def test_purity_identity_pure_state_d4():
    # ||r||^2 = Tr(rho^2) - 1/d = 3/4 for any pure state at d=4
    rng = np.random.default_rng(5)
    psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    psi /= np.linalg.norm(psi)
    basis = opspace.build_basis(4)
    r = opspace.bloch_from_density(np.outer(psi, psi.conj()), basis)
    assert abs(r @ r - 0.75) <= 1e-12


def test_density_bloch_round_trip():
    d = 4
    rng = np.random.default_rng(7)
    basis = opspace.build_basis(d)
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = a @ a.conj().T
    rho /= np.trace(rho).real
    r = opspace.bloch_from_density(rho, basis)
    np.testing.assert_allclose(opspace.density_from_bloch(r, basis), rho, atol=1e-12)


def test_bloch_from_density_validation():
    basis = opspace.build_basis(2)
    with pytest.raises(opspace.InvalidStateError):
        opspace.bloch_from_density(np.array([[0.0, 1.0], [0.0, 1.0]]), basis)
    with pytest.raises(opspace.InvalidStateError):
        opspace.bloch_from_density(np.eye(2), basis)  # trace 2
    with pytest.raises(opspace.InvalidStateError):
        opspace.bloch_from_density(np.eye(3) / 3, basis)  # wrong shape


def test_overstretched_bloch_vector_goes_negative():
    # doubling a pure-state Bloch vector leaves the physical set
    basis = opspace.build_basis(2)
    r = opspace.bloch_from_density(np.diag([1.0, 0.0]).astype(complex), basis)
    rho = opspace.density_from_bloch(2.0 * r, basis)
    assert np.linalg.eigvalsh(rho).min() < -1e-3


def test_density_from_bloch_length_check():
    basis = opspace.build_basis(3)
    with pytest.raises(opspace.InvalidDimensionError):
        basis.matrix(np.zeros(5))


def test_vec_convention():
    # row-major stacking: vec(A X B) = (A kron B^T) vec(X)
    rng = np.random.default_rng(2)
    a, x, b = (rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
               for _ in range(3))
    lhs = opspace.vec(a @ x @ b)
    rhs = np.kron(a, b.T) @ opspace.vec(x)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)
    np.testing.assert_allclose(opspace.unvec(opspace.vec(x)), x)


def test_adjoint_superoperator_identity():
    s = opspace.adjoint_superoperator(np.eye(3))
    np.testing.assert_allclose(s.matrix, np.eye(9), atol=1e-14)


def test_adjoint_superoperator_pauli_flip():
    # sigma_x sigma_z sigma_x = -sigma_z
    s = opspace.adjoint_superoperator(PAULI["x"])
    np.testing.assert_allclose(s.apply(PAULI["z"]), -PAULI["z"], atol=1e-14)


def test_adjoint_superoperator_matches_conjugation():
    d = 4
    rng = np.random.default_rng(21)
    u = haar_unitary(d, rng)
    o = random_hermitian(d, rng)
    s = opspace.adjoint_superoperator(u)
    np.testing.assert_allclose(s.apply(o), u.conj().T @ o @ u, atol=1e-12)
    # the superoperator of a unitary is itself unitary
    assert opspace.is_unitary(s.matrix)


def test_adjoint_superoperator_rejects_nonunitary():
    with pytest.raises(opspace.InvalidUnitaryError):
        opspace.adjoint_superoperator(np.ones((2, 2)))


def test_superoperator_composition_order():
    # adjoint action of U1 U2 = (action of U2 superop) then (U1 superop)
    rng = np.random.default_rng(31)
    u1, u2 = haar_unitary(3, rng), haar_unitary(3, rng)
    o = random_hermitian(3, rng)
    s12 = opspace.adjoint_superoperator(u1 @ u2)
    s1 = opspace.adjoint_superoperator(u1)
    s2 = opspace.adjoint_superoperator(u2)
    np.testing.assert_allclose(
        s12.apply(o), (s2 @ s1).apply(o), atol=1e-10
    )


def test_norm_preserved_under_conjugation():
    d = 4
    rng = np.random.default_rng(41)
    basis = opspace.build_basis(d)
    u = haar_unitary(d, rng)
    o = random_hermitian(d, rng)
    r0 = basis.coords(o)
    r1 = basis.coords(u.conj().T @ o @ u)
    assert abs(r0 @ r0 - r1 @ r1) <= 1e-10


def test_hs_inner():
    assert opspace.hs_inner(PAULI["x"], PAULI["x"]) == pytest.approx(2.0)
    assert opspace.hs_inner(PAULI["x"], PAULI["y"]) == pytest.approx(0.0)
