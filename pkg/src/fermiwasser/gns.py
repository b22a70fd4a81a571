"""Cyclic (GNS) representation of a tabulated plan, used as an independent validation path.

Monomials are ``c_(i,j) = a_i (x) b_j`` with the ``A`` factor on the left.  In the
fermionic case products and adjoints carry the Koszul signs

    (a (x) b)(c (x) d) = (-1)^{|b||c|} ac (x) bd,      (a (x) b)^* = (-1)^{|a||b|} a^* (x) b^*,

and in the usual case no signs appear.  The Gram matrix ``G[I, J] = omega(c_I^* c_J)``
defines the GNS space; with ``G = V diag(l) V^H`` (kept eigenvalues only) the class of a
monomial combination ``x`` has orthonormal coordinates ``diag(l)^{1/2} V^H x``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import canonical_standard_form, state_vector
from .errors import NotAPlanError
from .numerics import TOL_PD, dagger
from .transport import RawPlanTable


def _coefficients(basis: list[np.ndarray], x) -> np.ndarray:
    """Expansion coefficients of ``x`` in an orthogonal operator basis."""
    norms = np.array([np.vdot(b, b).real for b in basis])
    return np.array([np.vdot(b, x) for b in basis]) / norms


@dataclass
class GnsData:
    gram: np.ndarray
    dim: int
    coords: np.ndarray            # maps monomial coefficient vectors to GNS coordinates
    lift: np.ndarray              # GNS coordinates -> one preimage in monomial space
    omega: np.ndarray             # cyclic vector
    h: np.ndarray                 # grading operator h_omega
    klein: np.ndarray             # h_omega^{1/2} = q_+ - i q_-
    raw: RawPlanTable
    prod_a: np.ndarray
    prod_b: np.ndarray
    signed: bool

    def vector(self, a, b) -> np.ndarray:
        """GNS coordinates of ``[a (x) b]``."""
        return self.coords @ _monomial(self.raw, a, b)

    def rep(self, a, b) -> np.ndarray:
        """``pi(a (x) b)`` on the GNS space (general, not necessarily homogeneous)."""
        ca = _coefficients(self.raw.basis_a, a)
        cb = _coefficients(self.raw.basis_b, b)
        na, nb = len(self.raw.basis_a), len(self.raw.basis_b)
        pa, pb = self.raw.parity_a, self.raw.parity_b
        # column (k,l): sum_pq ca_p cb_q sign(q,k) prod_a[p,k,:] (x) prod_b[q,l,:]
        left = np.einsum("p,pkr->kr", ca, self.prod_a)
        mat = np.zeros((na * nb, na * nb), dtype=complex)
        for parity in (0, 1):
            sel = pb == parity
            if not np.any(sel):
                continue
            rb = np.einsum("q,qls->ls", cb * sel, self.prod_b)
            sign_k = (-1.0) ** (parity * pa) if self.signed else np.ones(na)
            block = np.einsum("k,kr,ls->rskl", sign_k, left, rb).reshape(na * nb, na * nb)
            mat += block
        return self.coords @ mat @ self.lift


def _monomial(raw: RawPlanTable, a, b) -> np.ndarray:
    return np.kron(_coefficients(raw.basis_a, a), _coefficients(raw.basis_b, b))


def _product_tensor(basis: list[np.ndarray]) -> np.ndarray:
    """``t[i, k, :]`` = coefficients of ``basis[i] @ basis[k]``."""
    nb = len(basis)
    flat = np.array([b.reshape(-1) for b in basis])
    norms = np.einsum("ij,ij->i", np.conj(flat), flat).real
    prods = np.einsum("iab,kbc->ikac", np.array(basis), np.array(basis)).reshape(nb, nb, -1)
    return np.einsum("ikx,rx->ikr", prods, np.conj(flat)) / norms


def _adjoint_tensor(basis: list[np.ndarray]) -> np.ndarray:
    """``t[i, k, :]`` = coefficients of ``basis[i]^H @ basis[k]``."""
    nb = len(basis)
    flat = np.array([b.reshape(-1) for b in basis])
    norms = np.einsum("ij,ij->i", np.conj(flat), flat).real
    arr = np.array(basis)
    prods = np.einsum("iba,kbc->ikac", np.conj(arr), arr).reshape(nb, nb, -1)
    return np.einsum("ikx,rx->ikr", prods, np.conj(flat)) / norms


def gns_of_plan(raw: RawPlanTable, tol: float = 1e-10) -> GnsData:
    signed = raw.kind == "fermionic"
    na, nb = len(raw.basis_a), len(raw.basis_b)
    pa, pb = raw.parity_a, raw.parity_b
    adj_a, adj_b = _adjoint_tensor(raw.basis_a), _adjoint_tensor(raw.basis_b)
    # G[(i,j),(k,l)] = s(i,j) s'(j,k) sum_pq adj_a[i,k,p] T[p,q] adj_b[j,l,q]
    gram = np.einsum("ikp,pq,jlq->ijkl", adj_a, raw.values, adj_b)
    if signed:
        s_inv = (-1.0) ** np.outer(pa, pb)                 # (i, j)
        s_prod = (-1.0) ** np.outer(pb, pa)                # (j, k)
        gram = gram * s_inv[:, :, None, None] * s_prod[None, :, :, None]
    gram = gram.reshape(na * nb, na * nb)
    gram = (gram + dagger(gram)) / 2
    w, v = np.linalg.eigh(gram)
    scale = max(1.0, abs(w[-1]))
    if w[0] < -max(TOL_PD, 1e-9) * scale:
        raise NotAPlanError(f"not a state: Gram matrix has eigenvalue {w[0]:.3g}")
    keep = w > tol * scale
    lam, vr = w[keep], v[:, keep]
    coords = np.sqrt(lam)[:, None] * dagger(vr)
    lift = vr / np.sqrt(lam)[None, :]
    prod_a, prod_b = _product_tensor(raw.basis_a), _product_tensor(raw.basis_b)
    one_a = np.eye(raw.basis_a[0].shape[0])
    one_b = np.eye(raw.basis_b[0].shape[0])
    omega = coords @ _monomial(raw, one_a, one_b)
    signs = (-1.0) ** (pa[:, None] + pb[None, :]).reshape(-1)
    h = coords @ np.diag(signs) @ lift
    dim = lam.size
    eye = np.eye(dim)
    klein = (eye + h) / 2 - 1j * (eye - h) / 2
    return GnsData(gram, dim, coords, lift, omega, h, klein, raw, prod_a, prod_b, signed)


def supercommutation_residual(gns: GnsData, rng: np.random.Generator | None = None, samples: int = 5) -> float:
    """``pi(a x 1) eta^{+-1/2}(pi(1 x b)) = eta^{+-1/2}(pi(1 x b)) pi(a x 1)`` on random ``a, b``."""
    rng = np.random.default_rng(0) if rng is None else rng
    raw = gns.raw
    n = raw.basis_a[0].shape[0]
    one_a, one_b = np.eye(n), np.eye(raw.basis_b[0].shape[0])
    kl, kli = gns.klein, dagger(gns.klein)
    worst = 0.0
    for _ in range(samples):
        ca = rng.normal(size=len(raw.basis_a)) + 1j * rng.normal(size=len(raw.basis_a))
        cb = rng.normal(size=len(raw.basis_b)) + 1j * rng.normal(size=len(raw.basis_b))
        a = sum(c * x for c, x in zip(ca, raw.basis_a))
        b = sum(c * x for c, x in zip(cb, raw.basis_b))
        v, w = gns.rep(a, one_b), gns.rep(one_a, b)
        for t in (kl @ w @ kli, kli @ w @ kl):
            worst = max(worst, float(np.linalg.norm(v @ t - t @ v)))
    return worst


def _nu_frame(gns: GnsData):
    raw = gns.raw
    alg_b = canonical_standard_form(raw.nu.n, raw.nu.grading_u)
    lam = state_vector(alg_b, raw.nu)
    one_a = np.eye(raw.mu.n)
    frame = np.array([b @ lam for b in raw.basis_b]).T
    images = np.array([gns.vector(one_a, b) for b in raw.basis_b]).T
    u_nu = images @ np.linalg.inv(frame)
    return alg_b, lam, u_nu


def channel_via_projection(gns: GnsData):
    """``E(a) = u_nu^* P_nu pi(a x 1) u_nu`` with ``u_nu b L_nu = [1 x b]``.

    Returns a function ``a -> E(a)`` and the isometry defect of ``u_nu``.
    """
    alg_b, _, u_nu = _nu_frame(gns)
    defect = float(np.linalg.norm(dagger(u_nu) @ u_nu - np.eye(u_nu.shape[1])))
    one_b = np.eye(gns.raw.basis_b[0].shape[0])

    def e(a):
        op = dagger(u_nu) @ gns.rep(a, one_b) @ u_nu
        return alg_b.read_left(op)

    return e, defect


def cost_norm_form(gns: GnsData, ks, ls) -> float:
    """``sum_i || pi_mu(k_i) Omega - pi_nu(l_i) Omega ||^2`` in the GNS space."""
    alg_b, lam, u_nu = _nu_frame(gns)
    one_b = np.eye(gns.raw.basis_b[0].shape[0])
    total = 0.0
    for k, l in zip(ks, ls):
        vk = gns.vector(k, one_b)
        vl = u_nu @ (alg_b.left(l) @ lam)
        total += float(np.linalg.norm(vk - vl) ** 2)
    return total
