"""Matrix factors in canonical standard form, gradings and modular data.

``A = M_n`` acts on ``G = C^n (x) C^n`` (identified with ``M_n`` through
row-major ``vec``) by left multiplication ``a -> kron(a, 1)``.  The commutant
consists of the operators ``kron(1, c)``; an element of the commutant is
described by its *coordinate* matrix ``c``.  In these conventions

* the cone vector of a density ``rho`` is ``vec(rho^{1/2})``,
* ``J vec(X) = vec(X^H)``, i.e. ``J = swap o conj``,
* the grading ``a -> u a u^H`` is implemented by ``g = kron(u, conj(u))``,
* the Klein unitary is ``g^{1/2} = p_+ - i p_-`` with ``p_(+/-) = (1 +/- g)/2``,
* ``j(x) = J x^H J`` sends ``kron(a, 1)`` to ``kron(1, a^T)``,
* a state ``mu`` read on the commutant (or twisted commutant) has coordinate
  density ``rho^T`` and coordinate grading ``conj(u)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .channels import Channel
from .errors import NotCyclicError, NotFaithfulError, StructureError
from .numerics import (TOL_PD, AntilinearOperator, antilinear_polar, as_matrix, dagger, herm_eig,
                       is_hermitian, logm_pd, matrix_units, nullspace, powm, svd_rank, swap_operator,
                       unvec, vec)


def _check_grading(u) -> np.ndarray:
    u = as_matrix(u)
    n = u.shape[0]
    if u.shape != (n, n):
        raise StructureError("grading unitary must be square")
    eye = np.eye(n)
    if np.linalg.norm(u @ u - eye) > 1e-10 or np.linalg.norm(u - dagger(u)) > 1e-10:
        raise StructureError("grading unitary must be a self-adjoint involution (u^2 = 1)")
    return u


@dataclass(frozen=True, eq=False)
class FaithfulEvenState:
    """Faithful state on ``M_n`` given by its density; evenness is w.r.t. ``grading_u``."""

    density: np.ndarray
    grading_u: np.ndarray | None = None

    def __post_init__(self):
        rho = as_matrix(self.density)
        if not is_hermitian(rho):
            raise NotFaithfulError("density is not Hermitian")
        rho = (rho + dagger(rho)) / 2
        if abs(np.trace(rho) - 1) > 1e-10:
            raise NotFaithfulError("density does not have unit trace")
        if np.linalg.eigvalsh(rho)[0] <= TOL_PD:
            raise NotFaithfulError("state not faithful")
        object.__setattr__(self, "density", rho)
        u = np.eye(rho.shape[0]) if self.grading_u is None else _check_grading(self.grading_u)
        object.__setattr__(self, "grading_u", u)

    @property
    def n(self) -> int:
        return self.density.shape[0]

    def __call__(self, a) -> complex:
        return complex(np.trace(self.density @ a))

    def evenness_residual(self) -> float:
        u = self.grading_u
        return float(np.linalg.norm(u @ self.density @ dagger(u) - self.density))

    @property
    def even(self) -> bool:
        return self.evenness_residual() <= 1e-10

    @cached_property
    def sqrt(self) -> np.ndarray:
        return powm(self.density, 0.5)

    @cached_property
    def inv_sqrt(self) -> np.ndarray:
        return powm(self.density, -0.5)

    @cached_property
    def log(self) -> np.ndarray:
        return logm_pd(self.density)

    def coordinate_dual(self) -> "FaithfulEvenState":
        """The state read on the (twisted) commutant, in coordinates."""
        return FaithfulEvenState(self.density.T, np.conj(self.grading_u))

    def close_to(self, other: "FaithfulEvenState", tol: float = 1e-9) -> bool:
        return (np.linalg.norm(self.density - other.density) <= tol
                and np.linalg.norm(self.grading_u - other.grading_u) <= tol)


@dataclass(frozen=True, eq=False)
class StandardFormAlgebra:
    """``M_n`` in canonical standard form with a grading ``a -> u a u^H``."""

    n: int
    grading_u: np.ndarray

    @property
    def hilbert_dim(self) -> int:
        return self.n * self.n

    @cached_property
    def identity(self) -> np.ndarray:
        return np.eye(self.hilbert_dim)

    def left(self, a) -> np.ndarray:
        """Operator on ``G`` representing ``a`` in ``A``."""
        return np.kron(as_matrix(a), np.eye(self.n))

    def right(self, c) -> np.ndarray:
        """Commutant operator with coordinate ``c``."""
        return np.kron(np.eye(self.n), as_matrix(c))

    def twist(self, c) -> np.ndarray:
        """Twisted-commutant operator ``g^{1/2} (1 (x) c) g^{-1/2}`` with coordinate ``c``."""
        return self.klein @ self.right(c) @ dagger(self.klein)

    def read_left(self, x) -> np.ndarray:
        """Inverse of :meth:`left` (partial trace divided by ``n``)."""
        x = np.asarray(x).reshape(self.n, self.n, self.n, self.n)
        return np.einsum("ikjk->ij", x) / self.n

    def read_right(self, x) -> np.ndarray:
        x = np.asarray(x).reshape(self.n, self.n, self.n, self.n)
        return np.einsum("kikj->ij", x) / self.n

    def read_twist(self, x) -> np.ndarray:
        return self.read_right(dagger(self.klein) @ x @ self.klein)

    @cached_property
    def algebra_basis(self) -> list[np.ndarray]:
        return [self.left(e) for e in matrix_units(self.n)]

    @cached_property
    def commutant_basis(self) -> list[np.ndarray]:
        return [self.right(e) for e in matrix_units(self.n)]

    @cached_property
    def twisted_basis(self) -> list[np.ndarray]:
        return [self.twist(e) for e in matrix_units(self.n)]

    @cached_property
    def omega(self) -> np.ndarray:
        return vec(np.eye(self.n) / np.sqrt(self.n)).astype(complex)

    @cached_property
    def swap(self) -> np.ndarray:
        return swap_operator(self.n)

    @cached_property
    def j(self) -> AntilinearOperator:
        """Modular conjugation ``J vec(X) = vec(X^H)``."""
        return AntilinearOperator(self.swap)

    @cached_property
    def g(self) -> np.ndarray:
        u = self.grading_u
        return np.kron(u, np.conj(u))

    @cached_property
    def p_plus(self) -> np.ndarray:
        return (self.identity + self.g) / 2

    @cached_property
    def p_minus(self) -> np.ndarray:
        return (self.identity - self.g) / 2

    @cached_property
    def klein(self) -> np.ndarray:
        """``g^{1/2} = p_+ - i p_-``."""
        return self.p_plus - 1j * self.p_minus

    def j_map(self, x) -> np.ndarray:
        """``j(x) = J x^H J``, a linear *-antiautomorphism of ``B(G)``."""
        return self.swap @ np.asarray(x).T @ self.swap

    def gamma(self, x) -> np.ndarray:
        """Grading automorphism ``x -> g x g`` on ``B(G)``."""
        return self.g @ x @ self.g

    def gamma_coord(self, a) -> np.ndarray:
        u = self.grading_u
        return u @ a @ dagger(u)

    @cached_property
    def twisted_carrier(self) -> np.ndarray:
        """Unitary ``W = swap g^{-1/2}`` carrying the twisted commutant to canonical layout.

        ``W twist(c) W^H = kron(c, 1)`` and ``W vec(rho^{1/2}) = vec((rho^T)^{1/2})``.
        """
        return self.swap @ dagger(self.klein)

    @cached_property
    def commutant_carrier(self) -> np.ndarray:
        return self.swap

    def coordinate_dual(self) -> "StandardFormAlgebra":
        """Canonical algebra describing the (twisted) commutant in coordinates."""
        return StandardFormAlgebra(self.n, np.conj(self.grading_u))


def canonical_standard_form(n: int, grading_u=None) -> StandardFormAlgebra:
    u = np.eye(n, dtype=complex) if grading_u is None else _check_grading(grading_u)
    if u.shape != (n, n):
        raise StructureError("grading unitary has the wrong size")
    return StandardFormAlgebra(n, u)


def state_vector(alg: StandardFormAlgebra, mu: FaithfulEvenState) -> np.ndarray:
    """Cone vector ``Lambda_mu = vec(rho^{1/2})``."""
    if mu.n != alg.n:
        raise ValueError("state and algebra sizes differ")
    return vec(mu.sqrt)


@dataclass(frozen=True)
class ModularData:
    S: AntilinearOperator
    J: AntilinearOperator
    Delta: np.ndarray
    generator: np.ndarray


def tomita_operator(alg: StandardFormAlgebra, mu: FaithfulEvenState) -> AntilinearOperator:
    """``S a Lambda = a^H Lambda`` assembled on the spanning set ``{E_ij Lambda}``."""
    lam = state_vector(alg, mu)
    frame = np.array([b @ lam for b in alg.algebra_basis]).T
    frame_star = np.array([dagger(b) @ lam for b in alg.algebra_basis]).T
    s = np.linalg.svd(frame, compute_uv=False)
    if svd_rank(s) < alg.hilbert_dim:
        raise NotCyclicError("vector not cyclic")
    # S conj(frame) = frame_star
    return AntilinearOperator(frame_star @ np.linalg.inv(np.conj(frame)))


def modular_data(alg: StandardFormAlgebra, mu: FaithfulEvenState) -> ModularData:
    s = tomita_operator(alg, mu)
    j, delta_half = antilinear_polar(s)
    delta = delta_half @ delta_half
    w, v = herm_eig((delta + dagger(delta)) / 2, tol=1e-8)
    generator = (v * np.log(w)) @ dagger(v)
    return ModularData(s, j, delta, generator)


def modular_superoperator(alg: StandardFormAlgebra, mu: FaithfulEvenState, t: float) -> Channel:
    """``sigma_t(a) = rho^{it} a rho^{-it}``."""
    return Channel.unitary(powm(mu.density, 1j * t))


def modular_generator_map(mu: FaithfulEvenState) -> Channel:
    """``a -> [log rho, a]``; ``sigma_t = exp(i t ad(log rho))``."""
    from .channels import commutator_map
    return commutator_map(mu.log)


def commutant(generators: Sequence[np.ndarray], hilbert_dim: int) -> list[np.ndarray]:
    """Hilbert-Schmidt orthonormal basis of ``{x : [x, g_i] = 0 for all i}``."""
    d = hilbert_dim
    eye = np.eye(d)
    rows = [np.kron(eye, np.asarray(g).T) - np.kron(np.asarray(g), eye) for g in generators]
    if not rows:
        rows = [np.zeros((1, d * d))]
    basis = nullspace(np.vstack(rows))
    return [unvec(basis[:, k], d) for k in range(basis.shape[1])]


def twisted_commutant(alg: StandardFormAlgebra) -> list[np.ndarray]:
    """Basis of ``A^wr = g^{1/2} A' g^{-1/2}`` obtained from the commutant nullspace."""
    kl = alg.klein
    return [kl @ c @ dagger(kl) for c in commutant(alg.algebra_basis, alg.hilbert_dim)]


def klein_isomorphism(alg: StandardFormAlgebra, direction: float = 0.5) -> Callable[[np.ndarray], np.ndarray]:
    """``gamma^{+1/2}(x) = g^{1/2} x g^{-1/2}`` or its inverse for ``direction = -1/2``."""
    kl = alg.klein
    if direction == 0.5:
        return lambda x: kl @ x @ dagger(kl)
    if direction == -0.5:
        return lambda x: dagger(kl) @ x @ kl
    raise ValueError("direction must be +1/2 or -1/2")


def homogeneous_basis(u) -> tuple[list[np.ndarray], np.ndarray]:
    """Basis of ``M_n`` of grading eigen-elements and their parities (0 even, 1 odd)."""
    u = _check_grading(u)
    w, v = np.linalg.eigh(u)
    signs = np.sign(w).real
    mats, parity = [], []
    n = u.shape[0]
    for p in range(n):
        for q in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[p, q] = 1.0
            mats.append(v @ e @ dagger(v))
            parity.append(0 if signs[p] * signs[q] > 0 else 1)
    return mats, np.array(parity)


def parity_parts(a, u) -> tuple[np.ndarray, np.ndarray]:
    """``(a_+, a_-)`` with ``a_(+/-) = (a +/- u a u^H) / 2``."""
    ga = u @ a @ dagger(u)
    return (a + ga) / 2, (a - ga) / 2
