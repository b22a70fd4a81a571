import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given

from fermiwasser.algebra import (FaithfulEvenState, canonical_standard_form, commutant, homogeneous_basis,
                                 klein_isomorphism, modular_data, modular_generator_map, modular_superoperator,
                                 parity_parts, state_vector, tomita_operator, twisted_commutant)
from fermiwasser.errors import NotFaithfulError, StructureError
from fermiwasser.numerics import spans_equal, vec
from fermiwasser.sampling import parity_grading, random_state
from strategies import complex_matrix, seeds, small_n


def _setup(seed, n):
    rng = np.random.default_rng(seed)
    u = parity_grading(n - 1, 1)
    mu = random_state(n, rng, u)
    return rng, mu, canonical_standard_form(n, u)


def test_state_validation():
    with pytest.raises(NotFaithfulError):
        FaithfulEvenState(np.diag([1.0, 0.0]))
    with pytest.raises(NotFaithfulError):
        FaithfulEvenState(np.diag([0.7, 0.7]))
    with pytest.raises(NotFaithfulError):
        FaithfulEvenState(np.array([[0.5, 0.3], [0.1, 0.5]]))
    with pytest.raises(ValueError):
        FaithfulEvenState(np.eye(2) / 2, np.diag([1.0, 2.0]))
    odd = FaithfulEvenState(np.array([[0.5, 0.2], [0.2, 0.5]]), np.diag([1.0, -1.0]))
    assert not odd.even
    with pytest.raises(StructureError):
        canonical_standard_form(3, np.diag([1.0, -1.0]))


@given(seeds, small_n)
def test_cone_vector_and_conjugation(seed, n):
    rng, mu, alg = _setup(seed, n)
    lam = state_vector(alg, mu)
    a = complex_matrix(rng, n)
    # Lambda implements mu, is fixed by J and by the grading
    assert np.vdot(lam, alg.left(a) @ lam) == pytest.approx(np.trace(mu.density @ a))
    assert np.allclose(alg.j(lam), lam)
    assert np.allclose(alg.g @ lam, lam)
    assert np.allclose(alg.j.squared(), np.eye(n * n))
    # J A J is the commutant
    assert np.allclose(alg.j.conjugate_operator(alg.left(a)), alg.right(np.conj(a)))
    assert np.allclose(alg.j_map(alg.left(a)), alg.right(a.T))


@given(seeds, small_n)
def test_tomita_operator_and_modular_data(seed, n):
    rng, mu, alg = _setup(seed, n)
    lam = state_vector(alg, mu)
    s = tomita_operator(alg, mu)
    a = complex_matrix(rng, n)
    assert np.allclose(s(alg.left(a) @ lam), alg.left(a.conj().T) @ lam)
    md = modular_data(alg, mu)
    assert np.allclose(md.J.matrix, alg.j.matrix, atol=1e-9)
    assert np.allclose(md.Delta, np.kron(mu.density, np.linalg.inv(mu.density).T), atol=1e-9)
    t = rng.normal()
    sigma = modular_superoperator(alg, mu, t)
    assert np.allclose(sigma.matrix, sla.expm(1j * t * modular_generator_map(mu).matrix), atol=1e-9)
    # KMS-type invariance of the state under sigma_t
    assert abs(np.trace(mu.density @ sigma(a)) - np.trace(mu.density @ a)) < 1e-10


@given(seeds, small_n)
def test_twisted_commutant_routes(seed, n):
    rng, mu, alg = _setup(seed, n)
    comm = commutant(alg.algebra_basis, alg.hilbert_dim)
    assert len(comm) == n * n
    assert spans_equal(comm, alg.commutant_basis)[0]
    assert spans_equal(twisted_commutant(alg), alg.twisted_basis)[0]
    assert np.allclose(alg.klein @ alg.klein, alg.g)
    c = complex_matrix(rng, n)
    assert np.allclose(alg.read_twist(alg.twist(c)), c)
    assert np.allclose(alg.read_left(alg.left(c)), c)
    fwd, back = klein_isomorphism(alg, 0.5), klein_isomorphism(alg, -0.5)
    assert np.allclose(back(fwd(alg.right(c))), alg.right(c))
    w = alg.twisted_carrier
    assert np.allclose(w @ alg.twist(c) @ w.conj().T, np.kron(c, np.eye(n)))
    assert np.allclose(w @ state_vector(alg, mu), vec(mu.coordinate_dual().sqrt))


@given(seeds, small_n)
def test_homogeneous_basis_and_parity_parts(seed, n):
    rng = np.random.default_rng(seed)
    u = parity_grading(n - 1, 1)
    basis, par = homogeneous_basis(u)
    for b, p in zip(basis, par):
        assert np.allclose(u @ b @ u.conj().T, (-1) ** p * b)
    a = complex_matrix(rng, n)
    plus, minus = parity_parts(a, u)
    assert np.allclose(plus + minus, a)
    assert np.allclose(u @ minus @ u.conj().T, -minus)
