"""Random states, unitaries and state-compatible channels for tests and demos."""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.stats import unitary_group

from .algebra import FaithfulEvenState
from .channels import Channel
from .numerics import dagger, herm_eig, nullspace
from .transport import choi_constraint_rows, product_choi


def parity_grading(n_even: int, n_odd: int) -> np.ndarray:
    """``diag(1, ..., 1, -1, ..., -1)``."""
    return np.diag(np.r_[np.ones(n_even), -np.ones(n_odd)]).astype(complex)


def _rng(rng) -> np.random.Generator:
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


def random_unitary(n: int, rng=None) -> np.ndarray:
    if n == 1:
        return np.exp(2j * np.pi * _rng(rng).random()) * np.ones((1, 1))
    return unitary_group.rvs(n, random_state=_rng(rng))


def random_even_unitary(u, rng=None) -> np.ndarray:
    """Haar-random unitary on each eigenspace of the grading ``u``."""
    rng = _rng(rng)
    u = np.asarray(u, dtype=complex)
    w, v = np.linalg.eigh((u + dagger(u)) / 2)
    out = np.zeros_like(u)
    for sign in (1.0, -1.0):
        cols = v[:, np.isclose(w, sign)]
        if cols.shape[1]:
            out += cols @ random_unitary(cols.shape[1], rng) @ dagger(cols)
    return out


def random_density(n: int, rng=None, grading_u=None, floor: float = 0.05) -> np.ndarray:
    """Ginibre density matrix, made even by averaging, with eigenvalues at least ``floor / n``."""
    rng = _rng(rng)
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = g @ dagger(g)
    if grading_u is not None:
        u = np.asarray(grading_u, dtype=complex)
        rho = (rho + u @ rho @ dagger(u)) / 2
    rho /= np.trace(rho).real
    rho = (1 - floor) * rho + floor * np.eye(n) / n
    return (rho + dagger(rho)) / 2


def random_state(n: int, rng=None, grading_u=None, floor: float = 0.05) -> FaithfulEvenState:
    return FaithfulEvenState(random_density(n, rng, grading_u, floor), grading_u)


def random_channel(n: int, m: int, rng=None, kraus: int = 2, grading_in=None, grading_out=None) -> Channel:
    """Unital CP map ``M_n -> M_m`` (Heisenberg picture) from a random Stinespring isometry.

    With both gradings given the map is made even by averaging with ``gamma o E o gamma``.
    """
    rng = _rng(rng)
    g = rng.normal(size=(n * kraus, m)) + 1j * rng.normal(size=(n * kraus, m))
    iso, _ = np.linalg.qr(g)
    ks = [iso[i * n:(i + 1) * n, :] for i in range(kraus)]   # n x m blocks, sum K^H K = 1
    e = Channel.from_kraus(ks)
    if grading_in is not None and grading_out is not None:
        e = (e + Channel.unitary(grading_out).compose(e.compose(Channel.unitary(grading_in)))) * 0.5
    return e


def random_compatible_channel(mu: FaithfulEvenState, nu: FaithfulEvenState, rng=None,
                              intertwinings: Sequence[tuple[Channel, Channel]] = (),
                              even: bool = True, spread: float = 0.8) -> Channel:
    """Random CP unital map ``E`` with ``nu o E = mu`` and the given intertwinings.

    A random Choi matrix is projected onto the affine constraint set and then mixed
    with the (strictly positive) product plan: ``C0 + t (C - C0)`` with ``t`` a
    fraction ``spread`` of the largest value keeping positivity.
    """
    rng = _rng(rng)
    n, m = mu.n, nu.n
    pairs = list(intertwinings)
    if even:
        pairs.append((Channel.unitary(mu.grading_u), Channel.unitary(nu.grading_u)))
    rows, rhs = choi_constraint_rows(mu, nu, pairs)
    c0 = product_choi(mu, nu)
    d = n * m
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    c = g @ dagger(g) / d
    # orthogonal projection of vec(C) onto {L x = z}, then Hermitian part
    x = c.reshape(-1)
    pinv = np.linalg.pinv(rows)
    x = x - pinv @ (rows @ x - rhs)
    step = x.reshape(d, d)
    step = (step + dagger(step)) / 2 - c0
    # keep the step inside the constraint space after symmetrizing
    ker = nullspace(rows)
    step = (ker @ (dagger(ker) @ step.reshape(-1))).reshape(d, d)
    step = (step + dagger(step)) / 2
    w, v = herm_eig(c0)
    s = v @ np.diag(w ** -0.5) @ dagger(v)
    lam_min = herm_eig(s @ step @ s)[0][0]
    t = 1.0 if lam_min >= 0 else min(1.0, spread / -lam_min)
    return Channel.from_choi(c0 + t * step, n, m)


def random_state_with_symmetry(n: int, rng=None, grading_u=None, floor: float = 0.05
                               ) -> tuple[FaithfulEvenState, np.ndarray]:
    """Even state and a symmetric unitary ``w`` commuting with the grading, ``w rho w^H = conj(rho)``.

    ``rho = V D V^H`` with ``V`` block-diagonal for a real diagonal grading and
    ``w = conj(V) V^H``.  Such a ``w`` gives a mu-copying map, see
    :func:`fermiwasser.detailed_balance.symmetric_copying_unitary`.
    """
    rng = _rng(rng)
    u = np.eye(n, dtype=complex) if grading_u is None else np.asarray(grading_u, dtype=complex)
    if np.linalg.norm(u - np.diag(np.diag(u).real)) > 1e-12:
        raise ValueError("the grading must be real diagonal")
    v = random_even_unitary(u, rng)
    p = rng.dirichlet(np.ones(n))
    p = (1 - floor) * p + floor / n
    rho = v @ np.diag(p) @ dagger(v)
    return FaithfulEvenState((rho + dagger(rho)) / 2, u), np.conj(v) @ dagger(v)


def random_coordinates(n: int, d: int, rng=None, hermitian: bool = False) -> list[np.ndarray]:
    rng = _rng(rng)
    ks = [rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)) for _ in range(d)]
    if hermitian:
        ks = [(k + dagger(k)) / 2 for k in ks]
    return [k / np.sqrt(n) for k in ks]


def random_system(n: int, rng=None, n_odd: int | None = None, d: int = 1,
                  dynamics: Sequence[str] = ("alpha",), mu: FaithfulEvenState | None = None,
                  name: str = "A"):
    """Graded system on ``M_n`` with random even state, coordinates and compatible dynamics."""
    from .wasserstein import GradedSystem

    rng = _rng(rng)
    if mu is None:
        u = parity_grading(n - (n // 2 if n_odd is None else n_odd), n // 2 if n_odd is None else n_odd)
        mu = random_state(n, rng, u)
    dyn = {nm: random_compatible_channel(mu, mu, rng) for nm in dynamics}
    return GradedSystem(mu, tuple(random_coordinates(n, d, rng)), dyn, None, name)
