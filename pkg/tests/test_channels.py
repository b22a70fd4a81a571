import numpy as np
import pytest
from hypothesis import given

from fermiwasser.channels import Channel, commutator_map, superop_to_choi_index
from fermiwasser.numerics import matrix_units
from fermiwasser.sampling import parity_grading, random_channel
from strategies import complex_matrix, positive_definite, seeds, small_n


def _kraus(rng, n, m, r=2):
    q, _ = np.linalg.qr(complex_matrix(rng, n * r, m))
    return [q[i * n:(i + 1) * n] for i in range(r)]


@given(seeds, small_n, small_n)
def test_kraus_channel_acts_as_sum(seed, n, m):
    rng = np.random.default_rng(seed)
    ks = _kraus(rng, n, m)
    e = Channel.from_kraus(ks)
    a = complex_matrix(rng, n)
    assert np.allclose(e(a), sum(k.conj().T @ a @ k for k in ks))
    assert e.is_unital() and e.is_cp()


@given(seeds, small_n, small_n)
def test_choi_convention_and_round_trip(seed, n, m):
    rng = np.random.default_rng(seed)
    e = random_channel(n, m, rng)
    explicit = sum(np.kron(u, e(u)) for u in matrix_units(n))
    assert np.allclose(e.choi, explicit)
    back = Channel.from_choi(e.choi, n, m)
    assert np.array_equal(back.matrix, e.matrix)
    perm = superop_to_choi_index(n, m)
    assert np.array_equal(e.matrix.reshape(-1), e.choi.reshape(-1)[perm])


@given(seeds, small_n)
def test_composition_and_adjoint(seed, n):
    rng = np.random.default_rng(seed)
    e, f = random_channel(n, n, rng), random_channel(n, n, rng)
    a, b = complex_matrix(rng, n), complex_matrix(rng, n)
    assert np.allclose((f @ e)(a), f(e(a)))
    # Hilbert-Schmidt adjoint: Tr(b^H E(a)) = Tr(E^dag(b)^H a)
    lhs = np.trace(b.conj().T @ e(a))
    rhs = np.trace(e.adjoint()(b).conj().T @ a)
    assert lhs == pytest.approx(rhs)


@given(seeds, small_n)
def test_unitary_channel_is_multiplicative_and_state_map_is_product(seed, n):
    rng = np.random.default_rng(seed)
    u, _ = np.linalg.qr(complex_matrix(rng, n))
    e = Channel.unitary(u)
    assert e.multiplicativity_residual() < 1e-12
    rho = positive_definite(rng, n)
    rho /= np.trace(rho)
    s = Channel.state_map(rho, 3)
    a = complex_matrix(rng, n)
    assert np.allclose(s(a), np.trace(rho @ a) * np.eye(3))
    assert s.compatibility_residual(rho, np.eye(3) / 3) < 1e-12


def test_transpose_is_positive_but_not_cp():
    t = Channel.from_function(lambda a: a.T, 2, antimultiplicative=True)
    assert t.is_positive_sampled()
    assert not t.is_cp()
    assert t.multiplicativity_residual() < 1e-15
    assert (t @ t).distance(Channel.identity(2)) == 0.0
    assert not (t @ t).antimultiplicative


@given(seeds, small_n)
def test_commutator_map_and_evenness(seed, n):
    rng = np.random.default_rng(seed)
    h, a = complex_matrix(rng, n), complex_matrix(rng, n)
    assert np.allclose(commutator_map(h)(a), h @ a - a @ h)
    u = parity_grading(n - 1, 1)
    e = random_channel(n, n, rng, grading_in=u, grading_out=u)
    assert e.is_even(u, u)
    assert e.is_cp() and e.is_unital()


def test_shape_errors():
    with pytest.raises(ValueError):
        Channel(np.eye(3), 2, 2)
    with pytest.raises(ValueError):
        Channel.identity(2)(np.eye(3))
    with pytest.raises(ValueError):
        Channel.identity(2) @ Channel.identity(3)
