"""Primal-dual interior-point solver for small Hermitian semidefinite programs.

Problem::

    minimize    Re <C, X>
    subject to  Re <A_k, X> = b_k,   X Hermitian PSD

with ``<A, X> = Tr(A^H X)``.  The solver works on the real symmetric embedding
``phi(X) = [[Re X, -Im X], [Im X, Re X]]``, which doubles trace pairings:
``<phi(A), phi(X)> = 2 Re <A, X>``.  The real problem therefore uses the
right-hand sides ``2 b`` and its objective is twice the complex one; both
factors are undone when reporting.  An optimal real ``Y`` need not be of the
embedded form, but its average with ``Omega Y Omega^T`` (``Omega = [[0,-1],[1,0]]``)
is, has the same value and stays feasible; ``X`` is read off from that average.

Search directions use HKM scaling with a Mehrotra predictor-corrector step.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from .numerics import dagger, svd_rank


@dataclass
class SdpOptions:
    tol_feas: float = 1e-8
    tol_gap: float = 1e-7
    max_iter: int = 200
    tol_consistency: float = 1e-9


@dataclass
class SdpProblem:
    """Hermitian SDP data; ``constraints`` is a sequence of ``(A_k, b_k)`` pairs."""

    objective: np.ndarray
    constraint_mats: np.ndarray
    rhs: np.ndarray
    options: SdpOptions = field(default_factory=SdpOptions)

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=complex)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError("objective must be square")
        self.objective = (c + dagger(c)) / 2
        a = np.asarray(self.constraint_mats, dtype=complex).reshape(-1, *c.shape)
        self.constraint_mats = (a + np.conj(a.transpose(0, 2, 1))) / 2
        self.rhs = np.asarray(self.rhs, dtype=float).reshape(-1)
        if self.rhs.shape[0] != self.constraint_mats.shape[0]:
            raise ValueError("one right-hand side per constraint is required")

    @classmethod
    def from_pairs(cls, objective, constraints: Sequence[tuple[np.ndarray, float]], **opts) -> "SdpProblem":
        d = np.asarray(objective).shape[0]
        mats = np.array([a for a, _ in constraints], dtype=complex).reshape(-1, d, d)
        rhs = np.array([b for _, b in constraints], dtype=float)
        return cls(objective, mats, rhs, SdpOptions(**opts))

    @property
    def dim(self) -> int:
        return self.objective.shape[0]

    def residual(self, x) -> float:
        """Max constraint violation ``|Re<A_k, X> - b_k|``."""
        if self.rhs.size == 0:
            return 0.0
        vals = np.einsum("kij,ij->k", np.conj(self.constraint_mats), x).real
        return float(np.max(np.abs(vals - self.rhs)))

    def value(self, x) -> float:
        return float(np.real(np.vdot(self.objective, x)))

    def to_json(self) -> str:
        """Dump for cross-checks with external solvers (complex as ``[re, im]``)."""
        def enc(m):
            return np.stack([np.real(m), np.imag(m)], axis=-1).tolist()
        return json.dumps({"objective": enc(self.objective),
                           "constraints": [{"A": enc(a), "b": float(b)}
                                           for a, b in zip(self.constraint_mats, self.rhs)],
                           "pairing": "Re Tr(A^H X)"})


@dataclass
class SdpSolution:
    X: np.ndarray
    value: float
    primal_residual: float
    dual_gap: float
    status: str
    iterations: int = 0
    dual_value: float = float("nan")
    y: np.ndarray | None = None
    polished: bool = False

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def embed(x) -> np.ndarray:
    """``[[Re X, -Im X], [Im X, Re X]]``."""
    x = np.asarray(x)
    re, im = np.real(x), np.imag(x)
    return np.block([[re, -im], [im, re]])


def unembed(y) -> np.ndarray:
    d = y.shape[0] // 2
    y11, y12, y21, y22 = y[:d, :d], y[:d, d:], y[d:, :d], y[d:, d:]
    return (y11 + y22) / 2 + 1j * (y21 - y12) / 2


def _real_rows(mats: np.ndarray) -> np.ndarray:
    """Rows ``r(A)`` with ``r(A) . r(X) = Re <A, X>``."""
    k = mats.shape[0]
    return np.hstack([np.real(mats).reshape(k, -1), np.imag(mats).reshape(k, -1)])


def reduce_constraints(p: SdpProblem) -> tuple[np.ndarray, np.ndarray, bool, float]:
    """Rank-revealing reduction to orthonormal constraint rows.

    Returns ``(mats, rhs, consistent, inconsistency)``.
    """
    d = p.dim
    if p.rhs.size == 0:
        return np.zeros((0, d, d), dtype=complex), np.zeros(0), True, 0.0
    rows = _real_rows(p.constraint_mats)
    u, s, vh = np.linalg.svd(rows, full_matrices=False)
    r = svd_rank(s)
    ur, sr, vr = u[:, :r], s[:r], vh[:r]
    new_rhs = (ur.T @ p.rhs) / sr
    fitted = ur @ (ur.T @ p.rhs)
    bad = float(np.linalg.norm(fitted - p.rhs) / (1.0 + np.linalg.norm(p.rhs)))
    mats = (vr[:, : d * d] + 1j * vr[:, d * d:]).reshape(r, d, d)
    mats = (mats + np.conj(mats.transpose(0, 2, 1))) / 2
    return mats, new_rhs, bad <= p.options.tol_consistency, bad


def _max_step(x_chol: np.ndarray, dx: np.ndarray) -> float:
    li = sla.solve_triangular(x_chol, np.eye(x_chol.shape[0]), lower=True)
    m = li @ dx @ li.T
    lam = np.linalg.eigvalsh((m + m.T) / 2)[0]
    return np.inf if lam >= 0 else -1.0 / lam


def _ipm(cr, ar, br, x0, opts: SdpOptions):
    big = cr.shape[0]
    k = ar.shape[0]
    aflat = ar.reshape(k, -1)
    nb, nc = np.linalg.norm(br), np.linalg.norm(cr)

    def a_op(x):
        return aflat @ x.reshape(-1)

    def at_op(y):
        return (aflat.T @ y).reshape(big, big)

    anorm = np.max(np.linalg.norm(aflat, axis=1)) if k else 1.0
    if x0 is None:
        xi = max(10.0, np.sqrt(big), big * np.max((1 + np.abs(br)) / (1 + anorm))) if k else 10.0
        x = xi * np.eye(big)
    else:
        x = x0.copy()
    eta = max(10.0, np.sqrt(big), anorm, nc)
    z = eta * np.eye(big)
    y = np.zeros(k)
    best = None
    status = "max_iter"
    it = 0
    for it in range(1, opts.max_iter + 1):
        rp = br - a_op(x)
        rd = cr - z - at_op(y)
        xz = float(np.sum(x * z))
        pobj, dobj = float(np.sum(cr * x)), float(br @ y)
        relp = np.linalg.norm(rp) / (1 + nb)
        reld = np.linalg.norm(rd) / (1 + nc)
        gap = max(abs(pobj - dobj), xz) / 2 / (1 + abs(pobj) / 2)
        score = max(relp / opts.tol_feas, reld / opts.tol_feas, gap / opts.tol_gap)
        if best is None or score < best[0]:
            best = (score, x.copy(), y.copy(), z.copy(), relp, reld, gap, pobj, dobj)
        if relp <= opts.tol_feas and reld <= opts.tol_feas and gap <= opts.tol_gap:
            status = "optimal"
            break
        try:
            lz = np.linalg.cholesky(z)
            lx = np.linalg.cholesky(x)
        except np.linalg.LinAlgError:
            break
        zinv = sla.cho_solve((lz, True), np.eye(big))
        g = x @ ar @ zinv
        schur = aflat @ g.reshape(k, -1).T
        schur = (schur + schur.T) / 2
        try:
            chol_s = sla.cho_factor(schur)
            solve = lambda r: sla.cho_solve(chol_s, r)
        except np.linalg.LinAlgError:
            solve = lambda r: np.linalg.lstsq(schur, r, rcond=None)[0]
        mu = xz / big
        xrdz = x @ rd @ zinv

        def direction(sig, corr):
            target = sig * mu * zinv - x - (corr if corr is not None else 0.0)
            dy = solve(rp - a_op(target) + a_op(xrdz))
            dz = rd - at_op(dy)
            dx = target - x @ dz @ zinv
            return (dx + dx.T) / 2, dy, (dz + dz.T) / 2

        dxp, dyp, dzp = direction(0.0, None)
        ap = min(1.0, _max_step(lx, dxp))
        ad = min(1.0, _max_step(lz, dzp))
        sig = (np.sum((x + ap * dxp) * (z + ad * dzp)) / xz) ** 3 if xz > 0 else 0.0
        sig = float(min(1.0, max(0.0, sig)))
        dx, dy, dz = direction(sig, dxp @ dzp @ zinv)
        tau = 0.98
        ap = min(1.0, tau * _max_step(lx, dx))
        ad = min(1.0, tau * _max_step(lz, dz))
        if ap < 1e-12 and ad < 1e-12:
            break
        x = x + ap * dx
        y = y + ad * dy
        z = z + ad * dz
    if status != "optimal" and best is not None:
        _, x, y, z, relp, reld, gap, pobj, dobj = best
    else:
        relp, reld = np.linalg.norm(br - a_op(x)) / (1 + nb), np.linalg.norm(cr - z - at_op(y)) / (1 + nc)
        pobj, dobj = float(np.sum(cr * x)), float(br @ y)
        gap = max(abs(pobj - dobj), float(np.sum(x * z))) / 2 / (1 + abs(pobj) / 2)
    return x, y, z, status, it, pobj, dobj, gap


def _face_basis(x: np.ndarray) -> np.ndarray | None:
    """Eigenvectors spanning the numerical range of ``x`` (largest relative eigenvalue gap)."""
    w, v = np.linalg.eigh(x)
    w, v = w[::-1], v[:, ::-1]
    top = w[0]
    if top <= 0:
        return None
    small = np.maximum(w, top * 1e-300)
    ratios = small[:-1] / small[1:]
    r = int(np.argmax(ratios)) + 1
    if ratios[r - 1] < 1e4:
        return v
    return v[:, :r]


def _kkt_residual(c, mats, rhs, l, y):
    z = c - np.einsum("k,kab->ab", y, mats)
    f1 = z @ l
    f2 = np.einsum("kab,ba->k", mats, l @ dagger(l)).real - rhs
    return np.r_[f1.real.reshape(-1), f1.imag.reshape(-1), f2], z


def _kkt_jacobian(z, mats, l):
    d, r = l.shape
    k = mats.shape[0]
    m = np.kron(z, np.eye(r))                                   # Z dL, row-major vec
    al = np.einsum("kab,bj->kaj", mats, l).reshape(k, -1)       # vec(A_k L)
    top = np.block([[m.real, -m.imag, -al.real.T], [m.imag, m.real, -al.imag.T]])
    bottom = np.hstack([2 * al.real, 2 * al.imag, np.zeros((k, k))])
    return np.vstack([top, bottom])


def _refine(p: SdpProblem, mats: np.ndarray, rhs: np.ndarray, sol: SdpSolution, steps: int = 30) -> None:
    """Newton refinement of the optimality conditions on the numerical face of ``sol.X``.

    With ``X = L L^H`` of the detected rank and ``Z(y) = C - sum_k y_k A_k`` the
    conditions ``Z L = 0`` and ``Re<A_k, L L^H> = b_k`` are solved by Gauss-Newton
    (minimum-norm steps absorb the gauge ``L -> L U``).  At a solution with
    ``Z >= 0`` the point is primal feasible, dual feasible and complementary, so it is
    accepted as optimal with its exact duality gap.  Interior-point iterates only
    pin the face to about the square root of their gap; this step removes that limit.
    """
    if sol.y is None or mats.shape[0] == 0 or sol.y.shape[0] != mats.shape[0]:
        return
    v = _face_basis(sol.X)
    if v is None:
        return
    w = np.linalg.eigvalsh(sol.X)[::-1][: v.shape[1]]
    l = v * np.sqrt(np.maximum(w, 0.0))[None, :]
    y = np.asarray(sol.y, dtype=float).copy()
    c = p.objective
    d, r = l.shape
    scale = 1.0 + np.linalg.norm(c) + np.linalg.norm(rhs)
    f, z = _kkt_residual(c, mats, rhs, l, y)
    norm = np.linalg.norm(f)
    for _ in range(steps):
        if norm <= 1e-15 * scale:
            break
        jac = _kkt_jacobian(z, mats, l)
        step, *_ = np.linalg.lstsq(jac, -f, rcond=None)
        dl = step[: d * r].reshape(d, r) + 1j * step[d * r: 2 * d * r].reshape(d, r)
        l_new, y_new = l + dl, y + step[2 * d * r:]
        f_new, z_new = _kkt_residual(c, mats, rhs, l_new, y_new)
        if np.linalg.norm(f_new) >= norm:
            break
        l, y, f, z, norm = l_new, y_new, f_new, z_new, np.linalg.norm(f_new)
    x = l @ dagger(l)
    x = (x + dagger(x)) / 2
    zmin = np.linalg.eigvalsh((z + dagger(z)) / 2)[0]
    res, val = p.residual(x), p.value(x)
    dual = float(rhs @ y)
    gap = abs(val - dual) / (1 + abs(val))
    opts = p.options
    if (norm <= 1e-10 * scale and zmin >= -1e-10 * scale
            and res <= opts.tol_feas * (1 + np.max(np.abs(p.rhs), initial=0.0))
            and gap <= max(opts.tol_gap, sol.dual_gap if np.isfinite(sol.dual_gap) else 0.0)):
        sol.X, sol.value, sol.primal_residual = x, val, res
        sol.dual_gap, sol.dual_value, sol.y, sol.polished = gap, dual, y, True
        sol.status = "optimal"


def solve(p: SdpProblem, seed=None, polish: bool = True) -> SdpSolution:
    """Solve ``p``; ``seed`` is an optional strictly feasible Hermitian starting point."""
    opts = p.options
    d = p.dim
    mats, rhs, consistent, bad = reduce_constraints(p)
    if not consistent:
        return SdpSolution(np.zeros((d, d), dtype=complex), float("nan"), bad, float("nan"), "infeasible")
    cr = embed(p.objective)
    ar = np.array([embed(a) for a in mats]).reshape(-1, 2 * d, 2 * d)
    br = 2 * rhs
    x0 = None
    if seed is not None:
        seed = np.asarray(seed, dtype=complex)
        if np.linalg.eigvalsh((seed + dagger(seed)) / 2)[0] > 1e-8:
            x0 = embed((seed + dagger(seed)) / 2)
    y_real, yv, _, status, it, pobj, dobj, gap = _ipm(cr, ar, br, x0, opts)
    omega = np.block([[np.zeros((d, d)), -np.eye(d)], [np.eye(d), np.zeros((d, d))]])
    y_avg = (y_real + omega @ y_real @ omega.T) / 2
    x = unembed(y_avg)
    x = (x + dagger(x)) / 2
    sol = SdpSolution(x, p.value(x), p.residual(x), gap, status, it, dobj / 2, yv)
    if status == "optimal":
        lam = np.linalg.eigvalsh(x)[0]
        if sol.primal_residual > opts.tol_feas * (1 + np.max(np.abs(p.rhs), initial=0.0)) or lam < -1e-12:
            sol.status = "max_iter"
    if polish:
        _refine(p, mats, rhs, sol)
    return sol


def feasible_point(p: SdpProblem, seed=None, min_eig: float = 1e-6):
    """Strictly feasible point: the seed if it qualifies, otherwise a phase-one solve.

    Returns ``None`` when the constraints are detectably inconsistent.
    """
    mats, rhs, consistent, _ = reduce_constraints(p)
    if not consistent:
        return None
    if seed is not None:
        seed = np.asarray(seed, dtype=complex)
        if p.residual(seed) <= 1e-10 and np.linalg.eigvalsh((seed + dagger(seed)) / 2)[0] >= min_eig:
            return seed
    phase_one = SdpProblem(np.zeros((p.dim, p.dim)), p.constraint_mats, p.rhs,
                           SdpOptions(tol_feas=1e-12, tol_gap=1.0, max_iter=p.options.max_iter))
    sol = solve(phase_one)
    if sol.primal_residual > 1e-8:
        return None
    return sol.X
