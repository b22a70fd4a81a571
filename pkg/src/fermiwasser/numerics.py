"""Dense complex linear algebra kernel.

Conventions
-----------
Vectorization is row-major throughout the package::

    vec(X) = X.reshape(-1),    vec(A @ X @ B) = kron(A, B.T) @ vec(X)

so that left multiplication ``X -> a X`` is ``kron(a, I)`` and right
multiplication ``X -> X c`` is ``kron(I, c.T)``.  Inner products are
conjugate-linear in the first slot, ``<x, y> = x^H y``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla

from .errors import NotFaithfulError, NotHermitianError

TOL_RANK = 1e-9
TOL_PD = 1e-12
TOL_HERM = 1e-10
TOL_SPAN = 1e-8


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or 0 in m.shape:
        raise ValueError(f"expected a non-empty 2-d array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def kron(a, b) -> np.ndarray:
    """Kronecker product, ``kron(a, b)[i*q + k, j*s + l] = a[i, j] * b[k, l]``."""
    return np.kron(as_matrix(a), as_matrix(b))


def vec(x) -> np.ndarray:
    return np.asarray(x).reshape(-1)


def unvec(v, rows: int, cols: int | None = None) -> np.ndarray:
    return np.asarray(v).reshape(rows, rows if cols is None else cols)


def swap_operator(n: int, m: int | None = None) -> np.ndarray:
    """Permutation with ``swap @ vec(X) = vec(X.T)`` for ``X`` of shape ``(n, m)``."""
    m = n if m is None else m
    p = np.zeros((n * m, n * m))
    for i in range(n):
        for j in range(m):
            p[j * n + i, i * m + j] = 1.0
    return p


def matrix_unit(n: int, i: int, j: int, m: int | None = None) -> np.ndarray:
    e = np.zeros((n, n if m is None else m), dtype=complex)
    e[i, j] = 1.0
    return e


def matrix_units(n: int) -> list[np.ndarray]:
    """``E_ij`` ordered so that entry ``i*n + j`` matches ``vec``."""
    return [matrix_unit(n, i, j) for i in range(n) for j in range(n)]


def dagger(a) -> np.ndarray:
    return np.conj(np.asarray(a)).T


def is_hermitian(h, tol: float = TOL_HERM) -> bool:
    h = np.asarray(h)
    scale = max(1.0, np.linalg.norm(h))
    return h.shape[0] == h.shape[1] and np.linalg.norm(h - dagger(h)) <= tol * scale


def hermitian_part(h) -> np.ndarray:
    h = np.asarray(h)
    return (h + dagger(h)) / 2


def herm_eig(h, tol: float = TOL_HERM) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition ``h = V diag(w) V^H`` of a Hermitian matrix, ``w`` ascending."""
    h = as_matrix(h)
    if not is_hermitian(h, tol):
        raise NotHermitianError("matrix is not Hermitian within tolerance")
    w, v = np.linalg.eigh(hermitian_part(h))
    return w, v


def matrix_function(h, f: Callable[[np.ndarray], np.ndarray], domain: str = "real",
                    tol_pd: float = TOL_PD) -> np.ndarray:
    """Apply ``f`` to the spectrum of a Hermitian matrix.

    ``domain`` is ``"real"`` (no check), ``"nonnegative"`` or ``"positive"``; the
    latter is required for logarithms and negative or imaginary powers.
    """
    w, v = herm_eig(h)
    if domain == "positive" and w[0] <= tol_pd:
        raise NotFaithfulError("state not faithful: eigenvalue %.3g <= tol_pd" % w[0])
    if domain == "nonnegative":
        if w[0] < -tol_pd * max(1.0, abs(w[-1])):
            raise NotFaithfulError("matrix is not positive semidefinite")
        w = np.clip(w, 0.0, None)
    fw = np.asarray(f(w.astype(complex) if domain == "positive" else w))
    return (v * fw) @ dagger(v)


def sqrtm_psd(h) -> np.ndarray:
    return matrix_function(h, np.sqrt, "nonnegative")


def powm(h, p: complex) -> np.ndarray:
    """``h**p`` for positive definite ``h`` (any complex exponent)."""
    return matrix_function(h, lambda w: w ** p, "positive")


def logm_pd(h) -> np.ndarray:
    return matrix_function(h, np.log, "positive")


def svd_rank(s: np.ndarray, tol_rank: float = TOL_RANK) -> int:
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol_rank * s[0]))


def nullspace(rows, tol_rank: float = TOL_RANK) -> np.ndarray:
    """Orthonormal kernel basis as the columns of the returned matrix."""
    a = np.asarray(rows, dtype=complex)
    if a.ndim == 1:
        a = a[None, :]
    ncols = a.shape[1]
    if a.shape[0] == 0:
        return np.eye(ncols, dtype=complex)
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    r = svd_rank(s, tol_rank)
    return dagger(vh[r:])


def orth(cols, tol_rank: float = TOL_RANK) -> np.ndarray:
    """Orthonormal basis for the column span."""
    a = np.asarray(cols, dtype=complex)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    return u[:, : svd_rank(s, tol_rank)]


def principal_angles(a_cols, b_cols) -> np.ndarray:
    """Principal angles (radians, descending) between two column spans."""
    return sla.subspace_angles(np.asarray(a_cols, dtype=complex), np.asarray(b_cols, dtype=complex))


def span_of_matrices(mats: Sequence[np.ndarray]) -> np.ndarray:
    return orth(np.array([vec(m) for m in mats]).T)


def spans_equal(mats_a: Sequence[np.ndarray], mats_b: Sequence[np.ndarray],
                tol: float = TOL_SPAN) -> tuple[bool, float]:
    """Compare the linear spans of two operator families.

    Returns ``(equal, max_angle)``; spans of different dimension are unequal
    and report an angle of ``pi/2``.
    """
    qa, qb = span_of_matrices(mats_a), span_of_matrices(mats_b)
    if qa.shape[1] != qb.shape[1]:
        return False, np.pi / 2
    ang = float(np.max(principal_angles(qa, qb))) if qa.shape[1] else 0.0
    return ang <= tol, ang


@dataclass(frozen=True)
class AntilinearOperator:
    """Conjugate-linear map ``x -> matrix @ conj(x)``.

    Algebra of such maps (``L`` linear, ``s = M conj``):

    * ``s1 o s2 = M1 conj(M2)`` is linear,
    * ``s o L = (M conj(L)) conj`` and ``L o s = (L M) conj``,
    * the adjoint is fixed by ``<x, s* y> = conj<s x, y> = <y, s x>``.
      Writing ``<y, s x> = sum_ij conj(y_i) M_ij conj(x_j) = sum_j conj(x_j) (M^T conj(y))_j``
      gives ``s* y = M^T conj(y)``, i.e. ``s* = (M^T) conj``,
    * hence ``s* s = M^T conj(M)``, a positive linear operator.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix)
        if m.shape[0] != m.shape[1]:
            raise ValueError("antilinear operator must be square")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, x) -> np.ndarray:
        return self.matrix @ np.conj(x)

    def adjoint(self) -> "AntilinearOperator":
        return AntilinearOperator(self.matrix.T)

    def then(self, other: "AntilinearOperator") -> np.ndarray:
        """Linear matrix of ``other o self``."""
        return other.matrix @ np.conj(self.matrix)

    def compose_linear(self, lin) -> "AntilinearOperator":
        """``self o lin``."""
        return AntilinearOperator(self.matrix @ np.conj(lin))

    def premultiply(self, lin) -> "AntilinearOperator":
        """``lin o self``."""
        return AntilinearOperator(np.asarray(lin) @ self.matrix)

    def conjugate_operator(self, a) -> np.ndarray:
        """Linear operator ``s o a o s^{-1}``; for an involution ``J`` this is ``J a J``."""
        return self.matrix @ np.conj(a) @ np.linalg.inv(self.matrix)

    def is_antiunitary(self, tol: float = 1e-10) -> bool:
        m = self.matrix
        return np.linalg.norm(dagger(m) @ m - np.eye(self.dim)) <= tol

    def squared(self) -> np.ndarray:
        return self.matrix @ np.conj(self.matrix)


def antilinear_polar(s: AntilinearOperator, tol_pd: float = TOL_PD
                     ) -> tuple[AntilinearOperator, np.ndarray]:
    """Polar decomposition ``s = j o delta_half`` of an invertible antilinear map.

    ``delta_half = (s* s)^{1/2}`` (linear, positive definite) and
    ``j = s o delta_half^{-1}`` is antiunitary.
    """
    m = s.matrix
    sts = m.T @ np.conj(m)
    w, v = herm_eig(hermitian_part(sts), tol=1e-8)
    if w[0] <= tol_pd * max(1.0, w[-1]):
        raise NotFaithfulError("antilinear map is singular (vector not separating)")
    delta_half = (v * np.sqrt(w)) @ dagger(v)
    delta_half_inv = (v / np.sqrt(w)) @ dagger(v)
    return s.compose_linear(delta_half_inv), delta_half
