"""Transport plans, their channel parametrization and the usual/fermionic translation.

A plan from ``mu`` (on ``A = M_n``) to ``nu`` (on ``B = M_m``) is stored through
its channel ``E : A -> B``.  Its two readings are

* usual:      ``omega(a . b')  = <L_nu, E(a) b' L_nu>``    for ``b'`` in ``B'``,
* fermionic:  ``omega(a x_F c) = <L_nu, E(a) c L_nu>``     for ``c`` in ``B^wr``.

With ``b' = b'_+ + b'_-`` (parity parts in ``B'``) and ``c = g^{1/2} b' g^{-1/2}``
one has ``c L_nu = g^{1/2} b' L_nu`` and the Klein unitary acts as ``1`` and
``-i`` on even and odd vectors, whence the table translation

    omega_F(a x_F gamma^{1/2}(b')) = omega(a . b'_+) - i omega(a . b'_-).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .algebra import (FaithfulEvenState, StandardFormAlgebra, canonical_standard_form, homogeneous_basis,
                      modular_generator_map, parity_parts, state_vector)
from .channels import Channel, superop_to_choi_index
from .duals import accardi_dual, kms_dual, twisted_dual
from .errors import CompatibilityError, NotAPlanError, StructureError
from .numerics import TOL_PD, dagger, matrix_units, unvec

TAGS = ("plain", "graded", "fermionic", "modular", "kms")


@dataclass(frozen=True, eq=False)
class TransportPlan:
    channel: Channel
    mu: FaithfulEvenState
    nu: FaithfulEvenState
    tags: frozenset = field(default_factory=frozenset)
    kind: str = "usual"

    @property
    def alg_a(self) -> StandardFormAlgebra:
        return canonical_standard_form(self.mu.n, self.mu.grading_u)

    @property
    def alg_b(self) -> StandardFormAlgebra:
        return canonical_standard_form(self.nu.n, self.nu.grading_u)

    def with_tags(self, tags: Iterable[str]) -> "TransportPlan":
        return replace(self, tags=frozenset(tags))


def _plan_tags(e: Channel, mu: FaithfulEvenState, nu: FaithfulEvenState, tol: float) -> set[str]:
    tags = {"plain"}
    if mu.even and nu.even and e.evenness_residual(mu.grading_u, nu.grading_u) <= tol:
        tags |= {"graded", "fermionic"}
    if modular_residual(e, mu, nu) <= tol * 10:
        tags.add("modular")
    return tags


def modular_residual(e: Channel, mu: FaithfulEvenState, nu: FaithfulEvenState) -> float:
    """``||E o ad(log rho_mu) - ad(log rho_nu) o E||`` (intertwining of the modular groups)."""
    return e.intertwining_residual(modular_generator_map(mu), modular_generator_map(nu))


def validate_plan_channel(e: Channel, mu: FaithfulEvenState, nu: FaithfulEvenState, tol: float = 1e-9):
    if (e.in_dim, e.out_dim) != (mu.n, nu.n):
        raise NotAPlanError("channel dimensions do not match the states")
    if e.unital_residual() > tol:
        raise NotAPlanError("channel is not unital")
    if e.hermiticity_residual() > tol:
        raise NotAPlanError("channel is not hermiticity preserving")
    if e.choi_min_eig() < -max(TOL_PD, tol):
        raise NotAPlanError("channel is not completely positive")
    r = e.compatibility_residual(mu.density, nu.density)
    if r > tol:
        raise CompatibilityError(f"state compatibility violated (||nu o E - mu|| = {r:.3g})")


def plan_from_channel(e: Channel, mu: FaithfulEvenState, nu: FaithfulEvenState,
                      tol: float = 1e-9) -> TransportPlan:
    """The plan ``omega = delta_nu o (E . id)`` of a state-compatible channel."""
    validate_plan_channel(e, mu, nu, tol)
    return TransportPlan(e, mu, nu, frozenset(_plan_tags(e, mu, nu, tol)))


def product_plan(mu: FaithfulEvenState, nu: FaithfulEvenState) -> TransportPlan:
    """``mu . nu'``, whose channel is ``a -> mu(a) 1``."""
    return plan_from_channel(Channel.state_map(mu.density, nu.n), mu, nu)


def diagonal_plan(nu: FaithfulEvenState, fermionic: bool = True) -> TransportPlan:
    """The diagonal plan of ``nu``; its channel is the identity."""
    tags = {"plain", "modular", "kms"}
    if nu.even:
        tags |= {"graded", "fermionic"}
    elif fermionic:
        raise StructureError("fermionic diagonal plan needs an even state")
    return TransportPlan(Channel.identity(nu.n), nu, nu, frozenset(tags),
                         "fermionic" if fermionic else "usual")


# evaluation
def usual_eval(plan: TransportPlan, a, b_prime) -> complex:
    """``omega(a . b')`` for ``b'`` an operator of the commutant ``B'`` on ``G_B``."""
    alg_b = plan.alg_b
    lam = state_vector(alg_b, plan.nu)
    return complex(np.vdot(lam, alg_b.left(plan.channel(a)) @ b_prime @ lam))


def fermionic_eval(plan: TransportPlan, a, b_twisted) -> complex:
    """``omega(a x_F c)`` for ``c`` an operator of the twisted commutant ``B^wr`` on ``G_B``."""
    if "fermionic" not in plan.tags:
        raise StructureError("plan does not carry the fermionic tag")
    alg_b = plan.alg_b
    lam = state_vector(alg_b, plan.nu)
    return complex(np.vdot(lam, alg_b.left(plan.channel(a)) @ b_twisted @ lam))


@dataclass
class RawPlanTable:
    """Values ``omega(a_i (x) b_j)`` on a product basis.

    ``basis_a`` holds ``n x n`` matrices of ``A``; ``basis_b`` holds operators on
    ``G_B`` belonging to ``B'`` (``kind="usual"``) or ``B^wr`` (``kind="fermionic"``).
    """

    kind: str
    values: np.ndarray
    basis_a: list
    basis_b: list
    parity_a: np.ndarray
    parity_b: np.ndarray
    mu: FaithfulEvenState
    nu: FaithfulEvenState


def _bases(mu: FaithfulEvenState, nu: FaithfulEvenState, kind: str):
    alg_b = canonical_standard_form(nu.n, nu.grading_u)
    basis_a, par_a = homogeneous_basis(mu.grading_u)
    coords, par_b = homogeneous_basis(np.conj(nu.grading_u))
    emb = alg_b.right if kind == "usual" else alg_b.twist
    return basis_a, par_a, [emb(c) for c in coords], par_b


def raw_table(plan: TransportPlan, kind: str | None = None) -> RawPlanTable:
    """Tabulate a plan on homogeneous bases (the GNS-validation input)."""
    kind = plan.kind if kind is None else kind
    basis_a, par_a, basis_b, par_b = _bases(plan.mu, plan.nu, kind)
    alg_b = plan.alg_b
    lam = state_vector(alg_b, plan.nu)
    rows = np.array([dagger(alg_b.left(plan.channel(a))) @ lam for a in basis_a])
    cols = np.array([b @ lam for b in basis_b])
    return RawPlanTable(kind, np.conj(rows) @ cols.T, basis_a, basis_b, par_a, par_b, plan.mu, plan.nu)


def table_from_values(values, mu: FaithfulEvenState, nu: FaithfulEvenState, kind: str = "usual") -> RawPlanTable:
    """Wrap a bare value array in the homogeneous bases used by :func:`raw_table`."""
    basis_a, par_a, basis_b, par_b = _bases(mu, nu, kind)
    values = np.asarray(values, dtype=complex)
    if values.shape != (len(basis_a), len(basis_b)):
        raise ValueError(f"table shape {values.shape} does not match {(len(basis_a), len(basis_b))}")
    return RawPlanTable(kind, values, basis_a, basis_b, par_a, par_b, mu, nu)


def channel_from_raw(raw: RawPlanTable, tol: float = 1e-8) -> Channel:
    """Recover ``E`` from a table by solving against the frame ``{b_j L_nu}``.

    Row ``i`` of the table is ``<E(a_i)^H L_nu, b_j L_nu>``, so ``x_i = E(a_i)^H L_nu``
    solves ``F^H x_i = conj(row_i)`` with ``F = [b_j L_nu]``; then
    ``E(a_i)^H = unvec(x_i) rho_nu^{-1/2}`` since ``L_nu`` is separating.
    """
    n, m = raw.mu.n, raw.nu.n
    alg_b = canonical_standard_form(m, raw.nu.grading_u)
    lam = state_vector(alg_b, raw.nu)
    frame = np.array([b @ lam for b in raw.basis_b]).T
    sol, *_ = np.linalg.lstsq(dagger(frame), np.conj(raw.values.T), rcond=None)
    fit = np.linalg.norm(dagger(frame) @ sol - np.conj(raw.values.T))
    if fit > tol * (1 + np.linalg.norm(raw.values)):
        raise NotAPlanError("not a transport plan: table is inconsistent")
    images = [dagger(unvec(sol[:, i], m) @ raw.nu.inv_sqrt) for i in range(len(raw.basis_a))]
    # images of the basis of A -> superoperator on matrix units
    coeff = np.array([a.reshape(-1) for a in raw.basis_a]).T  # columns vec(a_i)
    img = np.array([x.reshape(-1) for x in images]).T
    e = Channel(img @ np.linalg.inv(coeff), n, m)
    try:
        validate_plan_channel(e, raw.mu, raw.nu, tol=max(tol, 1e-8))
    except (NotAPlanError, CompatibilityError) as exc:
        raise NotAPlanError(f"not a transport plan: {exc}") from exc
    return e


def usual_to_fermionic_table(raw: RawPlanTable) -> RawPlanTable:
    """Apply the Klein translation column by column (homogeneous ``B'`` basis assumed)."""
    if raw.kind != "usual":
        raise StructureError("expected a usual table")
    alg_b = canonical_standard_form(raw.nu.n, raw.nu.grading_u)
    phase = np.where(raw.parity_b == 0, 1.0, -1j)
    vals = raw.values * phase[None, :]
    basis = [alg_b.klein @ b @ dagger(alg_b.klein) for b in raw.basis_b]
    return RawPlanTable("fermionic", vals, raw.basis_a, basis, raw.parity_a, raw.parity_b, raw.mu, raw.nu)


def fermionic_to_usual_table(raw: RawPlanTable) -> RawPlanTable:
    if raw.kind != "fermionic":
        raise StructureError("expected a fermionic table")
    alg_b = canonical_standard_form(raw.nu.n, raw.nu.grading_u)
    phase = np.where(raw.parity_b == 0, 1.0, 1j)
    vals = raw.values * phase[None, :]
    basis = [dagger(alg_b.klein) @ b @ alg_b.klein for b in raw.basis_b]
    return RawPlanTable("usual", vals, raw.basis_a, basis, raw.parity_a, raw.parity_b, raw.mu, raw.nu)


def to_fermionic(plan: TransportPlan) -> TransportPlan:
    """Graded usual plan -> fermionic plan with the same channel."""
    if "graded" not in plan.tags:
        raise StructureError("plan is not graded")
    return replace(plan, kind="fermionic")


def to_usual(plan: TransportPlan) -> TransportPlan:
    if "fermionic" not in plan.tags:
        raise StructureError("plan is not fermionic")
    return replace(plan, kind="usual")


def marginal_residuals(plan: TransportPlan) -> dict[str, float]:
    """``omega(a x 1) = mu(a)`` and ``omega(1 x c) = nu^wr(c)`` (or ``nu'(c)``)."""
    alg_b = plan.alg_b
    lam = state_vector(alg_b, plan.nu)
    evaluate = fermionic_eval if plan.kind == "fermionic" else usual_eval
    emb = alg_b.twist if plan.kind == "fermionic" else alg_b.right
    left = max(abs(evaluate(plan, a, alg_b.identity) - plan.mu(a)) for a in matrix_units(plan.mu.n))
    right = max(abs(evaluate(plan, np.eye(plan.mu.n), emb(c)) - np.vdot(lam, emb(c) @ lam))
                for c in matrix_units(plan.nu.n))
    return {"left": float(left), "right": float(right)}


# balance
@dataclass
class BalanceReport:
    dynamics: dict
    kms: dict
    modular: float
    grading: float

    def max_residual(self, include_kms: bool = True, include_modular: bool = True) -> float:
        vals = list(self.dynamics.values()) + [self.grading]
        if include_modular:
            vals.append(self.modular)
        if include_kms:
            vals += list(self.kms.values())
        return max(vals) if vals else 0.0


def check_balance(plan: TransportPlan, sys_a, sys_b, tol: float = 1e-9) -> tuple[BalanceReport, TransportPlan]:
    """Residuals ``||E o alpha_u - beta_u o E||`` (and modular / KMS variants); updated tags."""
    names = sorted(sys_a.dynamics)
    if names != sorted(sys_b.dynamics):
        raise StructureError("systems have different dynamics index sets")
    e = plan.channel
    dyn = {nm: e.intertwining_residual(sys_a.dynamics[nm], sys_b.dynamics[nm]) for nm in names}
    ka, kb = sys_a.kms_dynamics(), sys_b.kms_dynamics()
    kms = {nm: e.intertwining_residual(ka[nm], kb[nm]) for nm in names}
    mod = modular_residual(e, plan.mu, plan.nu)
    grad = e.evenness_residual(plan.mu.grading_u, plan.nu.grading_u)
    rep = BalanceReport(dyn, kms, mod, grad)
    tags = set(plan.tags) - {"modular", "kms", "balanced"}
    if max(dyn.values(), default=0.0) <= tol:
        tags.add("balanced")
        if mod <= tol * 10:
            tags.add("modular")
            if max(kms.values(), default=0.0) <= tol * 10:
                tags.add("kms")
    return rep, plan.with_tags(tags)


# plan transforms
def plan_dual(plan: TransportPlan) -> TransportPlan:
    """``omega'`` from ``nu'`` to ``mu'``: channel ``E'`` in commutant coordinates."""
    ed = accardi_dual(plan.channel, plan.mu, plan.nu)
    mu_d, nu_d = plan.mu.coordinate_dual(), plan.nu.coordinate_dual()
    return TransportPlan(ed, nu_d, mu_d, frozenset(_plan_tags(ed, nu_d, mu_d, 1e-8)), plan.kind)


def plan_kms(plan: TransportPlan) -> TransportPlan:
    """``omega^sigma`` from ``nu`` to ``mu`` with channel ``E^sigma``."""
    es = kms_dual(plan.channel, plan.mu, plan.nu)
    return TransportPlan(es, plan.nu, plan.mu, frozenset(_plan_tags(es, plan.nu, plan.mu, 1e-8)), plan.kind)


def plan_twisted(plan: TransportPlan) -> TransportPlan:
    """``omega^wr`` from ``nu^wr`` to ``mu^wr`` with channel ``E^wr`` (coordinates)."""
    et = twisted_dual(plan.channel, plan.mu, plan.nu)
    mu_t, nu_t = plan.mu.coordinate_dual(), plan.nu.coordinate_dual()
    return TransportPlan(et, nu_t, mu_t, frozenset(_plan_tags(et, nu_t, mu_t, 1e-8)), "fermionic")


def plan_copy(plan: TransportPlan, kappa_a: Channel, kappa_b: Channel) -> TransportPlan:
    """``omega^kappa`` with channel ``kappa_B o E o kappa_A^{-1}`` between the copies.

    ``kappa_a``/``kappa_b`` are the copying maps in twisted-commutant coordinates.
    """
    inv_a = Channel(np.linalg.inv(kappa_a.matrix), kappa_a.out_dim, kappa_a.in_dim)
    e = kappa_b.compose(plan.channel.compose(inv_a))
    mu_k = pushforward_state(plan.mu, kappa_a)
    nu_k = pushforward_state(plan.nu, kappa_b)
    return TransportPlan(e, mu_k, nu_k, frozenset(_plan_tags(e, mu_k, nu_k, 1e-8)), plan.kind)


def pushforward_state(mu: FaithfulEvenState, iso: Channel) -> FaithfulEvenState:
    """State ``mu o iso^{-1}`` on the image algebra, graded by ``conj(u)`` coordinates."""
    inv = np.linalg.inv(iso.matrix)
    dens_t = (mu.density.T.reshape(-1) @ inv).reshape(iso.out_dim, iso.out_dim)
    return FaithfulEvenState(dens_t.T, np.conj(mu.grading_u))


def twisted_sign_formula(plan: TransportPlan, a, b_twisted) -> complex:
    """``omega(a_+ b_+ + a_+ b_- + a_- b_+ - a_- b_-)`` (parity parts of ``a`` and ``c``)."""
    alg_b = plan.alg_b
    ap, am = parity_parts(a, plan.mu.grading_u)
    bp, bm = parity_parts(b_twisted, alg_b.g)
    f = lambda x, y: fermionic_eval(plan, x, y)
    return f(ap, bp) + f(ap, bm) + f(am, bp) - f(am, bm)


# constraint rows on Choi matrices
def choi_constraint_rows(mu: FaithfulEvenState, nu: FaithfulEvenState,
                         intertwinings: Sequence[tuple[Channel, Channel]] = ()
                         ) -> tuple[np.ndarray, np.ndarray]:
    """Complex rows ``L`` and values ``z`` with ``L @ vec(C) = z`` for the plan constraints.

    Encodes unitality, ``nu o E = mu`` and ``E o alpha = beta o E`` for each pair.
    """
    n, m = mu.n, nu.n
    big = n * m
    rows, rhs = [], []
    # unital: sum_i C[(i,k),(i,l)] = delta_kl
    for k in range(m):
        for l in range(m):
            r = np.zeros((n, m, n, m), dtype=complex)
            r[np.arange(n), k, np.arange(n), l] = 1.0
            rows.append(r.reshape(-1))
            rhs.append(1.0 if k == l else 0.0)
    # compatibility: sum_kl rho_nu[l,k] C[(i,k),(j,l)] = rho_mu[j,i]
    for i in range(n):
        for j in range(n):
            r = np.zeros((n, m, n, m), dtype=complex)
            r[i, :, j, :] = nu.density.T
            rows.append(r.reshape(-1))
            rhs.append(mu.density[j, i])
    perm = superop_to_choi_index(n, m)
    for alpha, beta in intertwinings:
        block = np.kron(np.eye(m * m), alpha.matrix.T) - np.kron(beta.matrix, np.eye(n * n))
        conv = np.zeros((block.shape[0], big * big), dtype=complex)
        conv[:, perm] = block
        rows.extend(conv)
        rhs.extend([0.0] * block.shape[0])
    return np.array(rows), np.array(rhs, dtype=complex)


def rows_to_hermitian(rows: np.ndarray, rhs: np.ndarray, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Split ``Tr(M C) = z`` into two real Hermitian constraints ``Re<H, C> = b``."""
    mats = rows.reshape(-1, dim, dim).transpose(0, 2, 1)
    mh = np.conj(mats.transpose(0, 2, 1))
    h1 = (mats + mh) / 2
    h2 = (mats - mh) / 2j
    return np.concatenate([h1, h2]), np.concatenate([np.real(rhs), np.imag(rhs)])


def product_choi(mu: FaithfulEvenState, nu: FaithfulEvenState) -> np.ndarray:
    return np.kron(mu.density.T, np.eye(nu.n))
