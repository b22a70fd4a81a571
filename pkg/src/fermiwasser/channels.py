"""Linear maps between matrix algebras, stored as superoperators.

A map ``E : M_n -> M_m`` is held as the ``m^2 x n^2`` matrix acting on
row-major ``vec``.  The Choi matrix is ``C = sum_ij E_ij (x) E(E_ij)``
(input factor first), which is PSD exactly when ``E`` is completely positive.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .numerics import TOL_PD, as_matrix, dagger, matrix_units, vec

CHOI_CONVENTION = "C = sum_ij E_ij (x) E(E_ij); input factor first; row-major vec"


@dataclass(frozen=True, eq=False)
class Channel:
    """Superoperator of a linear map ``M_n -> M_m``.

    ``antimultiplicative`` marks reversing operations, which are unital and
    positive but not completely positive; nothing downstream assumes CP unless
    :meth:`is_cp` says so.
    """

    matrix: np.ndarray
    in_dim: int
    out_dim: int
    antimultiplicative: bool = False
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.out_dim ** 2, self.in_dim ** 2):
            raise ValueError(f"superoperator shape {m.shape} does not match {self.in_dim}->{self.out_dim}")
        object.__setattr__(self, "matrix", m)

    # construction
    @classmethod
    def from_function(cls, f: Callable[[np.ndarray], np.ndarray], n: int, m: int | None = None,
                      **kw) -> "Channel":
        m = n if m is None else m
        cols = [vec(as_matrix(f(e))) for e in matrix_units(n)]
        return cls(np.array(cols).T, n, m, **kw)

    @classmethod
    def identity(cls, n: int) -> "Channel":
        return cls(np.eye(n * n), n, n, name="id")

    @classmethod
    def unitary(cls, u) -> "Channel":
        """``a -> u a u^H``."""
        u = as_matrix(u)
        return cls(np.kron(u, np.conj(u)), u.shape[1], u.shape[0])

    @classmethod
    def from_kraus(cls, kraus: Sequence[np.ndarray]) -> "Channel":
        """``a -> sum_k K_k^H a K_k`` (Heisenberg picture, unital iff sum K K^H = 1)."""
        ks = [as_matrix(k) for k in kraus]
        mat = sum(np.kron(dagger(k), k.T) for k in ks)
        n, m = ks[0].shape
        return cls(mat, n, m)

    @classmethod
    def state_map(cls, rho, m: int) -> "Channel":
        """``a -> Tr(rho a) 1_m``, the channel of a product plan."""
        rho = as_matrix(rho)
        n = rho.shape[0]
        return cls(np.outer(vec(np.eye(m)), vec(rho.T)), n, m)

    @classmethod
    def from_choi(cls, choi, n: int, m: int, **kw) -> "Channel":
        c = np.asarray(choi, dtype=complex).reshape(n, m, n, m)
        return cls(c.transpose(1, 3, 0, 2).reshape(m * m, n * n), n, m, **kw)

    # basic operations
    def __call__(self, a) -> np.ndarray:
        a = as_matrix(a)
        if a.shape != (self.in_dim, self.in_dim):
            raise ValueError(f"input has shape {a.shape}, expected {(self.in_dim, self.in_dim)}")
        return (self.matrix @ vec(a)).reshape(self.out_dim, self.out_dim)

    @property
    def choi(self) -> np.ndarray:
        n, m = self.in_dim, self.out_dim
        return self.matrix.reshape(m, m, n, n).transpose(2, 0, 3, 1).reshape(n * m, n * m)

    def compose(self, first: "Channel") -> "Channel":
        """``self o first``."""
        if first.out_dim != self.in_dim:
            raise ValueError("dimension mismatch in composition")
        anti = self.antimultiplicative != first.antimultiplicative
        return Channel(self.matrix @ first.matrix, first.in_dim, self.out_dim, antimultiplicative=anti)

    def __matmul__(self, first: "Channel") -> "Channel":
        return self.compose(first)

    def adjoint(self) -> "Channel":
        """Hilbert-Schmidt (trace) adjoint ``E^dagger : M_m -> M_n``."""
        return Channel(dagger(self.matrix), self.out_dim, self.in_dim)

    def _combine(self, other: "Channel", sign: float) -> "Channel":
        if (other.in_dim, other.out_dim) != (self.in_dim, self.out_dim):
            raise ValueError("dimension mismatch")
        return Channel(self.matrix + sign * other.matrix, self.in_dim, self.out_dim)

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __mul__(self, s: complex) -> "Channel":
        return Channel(s * self.matrix, self.in_dim, self.out_dim, self.antimultiplicative)

    __rmul__ = __mul__

    def distance(self, other: "Channel") -> float:
        return float(np.linalg.norm(self.matrix - other.matrix))

    # properties
    def unital_residual(self) -> float:
        return float(np.linalg.norm(self(np.eye(self.in_dim)) - np.eye(self.out_dim)))

    def is_unital(self, tol: float = 1e-10) -> bool:
        return self.unital_residual() <= tol

    def hermiticity_residual(self) -> float:
        worst = 0.0
        for e in matrix_units(self.in_dim):
            worst = max(worst, np.linalg.norm(self(dagger(e)) - dagger(self(e))))
        return float(worst)

    def is_hermiticity_preserving(self, tol: float = 1e-10) -> bool:
        return self.hermiticity_residual() <= tol

    def choi_min_eig(self) -> float:
        c = self.choi
        return float(np.linalg.eigvalsh((c + dagger(c)) / 2)[0])

    def is_cp(self, tol: float = TOL_PD) -> bool:
        return self.is_hermiticity_preserving(1e-9) and self.choi_min_eig() >= -max(tol, 1e-10)

    def is_positive_sampled(self, rng: np.random.Generator | None = None, samples: int = 200,
                            tol: float = 1e-10) -> bool:
        """Heuristic positivity check on random PSD inputs (not a proof)."""
        rng = np.random.default_rng(0) if rng is None else rng
        n = self.in_dim
        for _ in range(samples):
            k = rng.integers(1, n + 1)
            g = rng.normal(size=(n, k)) + 1j * rng.normal(size=(n, k))
            out = self(g @ dagger(g))
            out = (out + dagger(out)) / 2
            if np.linalg.eigvalsh(out)[0] < -tol * max(1.0, np.linalg.norm(out)):
                return False
        return True

    def evenness_residual(self, u_in, u_out) -> float:
        """``||E o gamma_in - gamma_out o E||`` with gradings ``a -> u a u^H``."""
        return self.intertwining_residual(Channel.unitary(u_in), Channel.unitary(u_out))

    def is_even(self, u_in, u_out, tol: float = 1e-9) -> bool:
        return self.evenness_residual(u_in, u_out) <= tol

    def intertwining_residual(self, alpha: "Channel", beta: "Channel") -> float:
        """``||E o alpha - beta o E||``."""
        return float(np.linalg.norm(self.matrix @ alpha.matrix - beta.matrix @ self.matrix))

    def compatibility_residual(self, rho_in, rho_out) -> float:
        """``||nu o E - mu||`` for densities ``rho_out`` of ``nu`` and ``rho_in`` of ``mu``."""
        # nu(E(a)) = <vec(rho_out^T), E vec(a)>_bilinear
        pulled = vec(np.asarray(rho_out).T) @ self.matrix
        return float(np.linalg.norm(pulled - vec(np.asarray(rho_in).T)))

    def multiplicativity_residual(self) -> float:
        worst = 0.0
        es = matrix_units(self.in_dim)
        for a in es:
            for b in es:
                if self.antimultiplicative:
                    d = self(a @ b) - self(b) @ self(a)
                else:
                    d = self(a @ b) - self(a) @ self(b)
                worst = max(worst, float(np.linalg.norm(d)))
        return worst


def apply(e: Channel, a) -> np.ndarray:
    return e(a)


def commutator_map(h) -> Channel:
    """``ad(h) : a -> h a - a h``."""
    h = as_matrix(h)
    n = h.shape[0]
    eye = np.eye(n)
    return Channel(np.kron(h, eye) - np.kron(eye, h.T), n, n)


def superop_to_choi_index(n: int, m: int) -> np.ndarray:
    """Permutation ``perm`` with ``vec(superop)[p] == vec(choi)[perm[p]]``."""
    idx = np.arange(n * m * n * m).reshape(n, m, n, m)
    return idx.transpose(1, 3, 0, 2).reshape(-1)
