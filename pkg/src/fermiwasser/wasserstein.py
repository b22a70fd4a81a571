"""Graded systems, transport cost and the three fermionic Wasserstein distances.

Every distance is computed as an SDP over Choi matrices of usual transport
plans between the systems with the grading added to their dynamics; the
fermionic plans correspond to these one-to-one with the same channel, and the
cost only depends on the channel.
"""

from __future__ import annotations

import csv
import io as _io
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .algebra import FaithfulEvenState, StandardFormAlgebra, canonical_standard_form, modular_generator_map
from .channels import Channel
from .duals import kms_dual, twisted_dual
from .errors import CompatibilityError, SolverError, StructureError
from .numerics import dagger, span_of_matrices
from .sdp import SdpOptions, SdpProblem, SdpSolution, solve
from .transport import (TransportPlan, choi_constraint_rows, plan_from_channel, product_choi, raw_table,
                        rows_to_hermitian)

TOL_SYSTEM = 1e-9
GRADING_NAME = "gamma"
CLASSES = ("F", "Fsigma", "Fsigmasigma")
CHAIN_SLACK = 1e-6

# Accuracy needed to resolve distances near zero: W ~ 1e-6 means cost ~ 1e-12.
DEFAULT_OPTIONS = SdpOptions(tol_feas=1e-10, tol_gap=1e-10, max_iter=150)


@dataclass(frozen=True, eq=False)
class GradedSystem:
    """``(A, alpha, mu, k)`` on ``A = M_n`` with grading taken from ``mu.grading_u``.

    ``copying_map`` (see :mod:`fermiwasser.detailed_balance`) makes the system
    reversible; its reversing operation must then be one of the dynamics.
    """

    mu: FaithfulEvenState
    coords: tuple
    dynamics: Mapping[str, Channel] = field(default_factory=dict)
    copying_map: object = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(np.asarray(k, dtype=complex) for k in self.coords))
        object.__setattr__(self, "dynamics", dict(sorted(self.dynamics.items())))
        n = self.mu.n
        if not self.coords:
            raise StructureError("a system needs at least one coordinate")
        if any(k.shape != (n, n) for k in self.coords):
            raise StructureError("coordinates must be n x n matrices")
        if not self.mu.even:
            raise StructureError("state is not even")
        u = self.mu.grading_u
        for nm, alpha in self.dynamics.items():
            if (alpha.in_dim, alpha.out_dim) != (n, n):
                raise StructureError(f"dynamics {nm!r} has the wrong size")
            if alpha.evenness_residual(u, u) > TOL_SYSTEM:
                raise StructureError(f"dynamics {nm!r} is not even")
            if alpha.compatibility_residual(self.mu.density, self.mu.density) > TOL_SYSTEM:
                raise CompatibilityError(f"state is not invariant under {nm!r}")
        if self.copying_map is not None:
            theta = self.copying_map.theta
            if not any(alpha.distance(theta) <= TOL_SYSTEM for alpha in self.dynamics.values()):
                raise StructureError("reversing operation of the copying map must be part of the dynamics")

    @property
    def n(self) -> int:
        return self.mu.n

    @property
    def d(self) -> int:
        return len(self.coords)

    @property
    def grading_u(self) -> np.ndarray:
        return self.mu.grading_u

    @property
    def alg(self) -> StandardFormAlgebra:
        return canonical_standard_form(self.n, self.grading_u)

    @property
    def is_hermitian(self) -> bool:
        """``{k_i^*} = {k_i}`` as multisets (up to 1e-12)."""
        remaining = list(self.coords)
        for k in self.coords:
            hits = [i for i, x in enumerate(remaining) if np.linalg.norm(x - dagger(k)) <= 1e-12]
            if not hits:
                return False
            remaining.pop(hits[0])
        return True

    def kms_dynamics(self) -> dict[str, Channel]:
        return {nm: kms_dual(a, self.mu, self.mu) for nm, a in self.dynamics.items()}

    def with_dynamics(self, dynamics: Mapping[str, Channel], keep_copying: bool = True) -> "GradedSystem":
        return GradedSystem(self.mu, self.coords, dynamics, self.copying_map if keep_copying else None, self.name)

    def with_coords(self, coords: Sequence) -> "GradedSystem":
        return replace(self, coords=tuple(coords))


def generates_algebra(mats: Sequence[np.ndarray], n: int, max_len: int | None = None) -> bool:
    """Whether ``1`` and the given matrices generate ``M_n`` (span of iterated products)."""
    def as_mats(cols):
        return [cols[:, i].reshape(n, n) for i in range(cols.shape[1])]

    basis = as_mats(span_of_matrices([np.eye(n, dtype=complex)]))
    max_len = n * n if max_len is None else max_len
    for _ in range(max_len):
        cand = as_mats(span_of_matrices(basis + [w @ m for w in basis for m in mats]))
        if len(cand) == len(basis):
            break
        basis = cand
    return len(basis) == n * n


# cost
@dataclass
class CostReport:
    value: float
    terms: np.ndarray
    norm_form: float | None = None

    @property
    def norm_form_gap(self) -> float:
        return float("nan") if self.norm_form is None else abs(self.value - self.norm_form)


def _cost_terms(e: Channel, ks, ls, mu: FaithfulEvenState, nu: FaithfulEvenState) -> np.ndarray:
    out = []
    for k, l in zip(ks, ls):
        ek = e(k)
        t = mu(dagger(k) @ k) + nu(dagger(l) @ l) - nu(dagger(ek) @ l) - nu(dagger(l) @ ek)
        out.append(t.real)
    return np.array(out)


def cost(sys_a: GradedSystem, sys_b: GradedSystem, plan: TransportPlan | Channel,
         norm_form: bool = True) -> CostReport:
    """Sum over coordinates of ``mu(k^* k) + nu(l^* l) - nu(E(k)^* l) - nu(l^* E(k))``.

    With ``norm_form`` the value is recomputed as ``sum ||pi(k) Omega - pi(l) Omega||^2``
    in the cyclic representation of the usual plan.
    """
    if sys_a.d != sys_b.d:
        raise StructureError("systems have different numbers of coordinates")
    if isinstance(plan, Channel):
        plan = plan_from_channel(plan, sys_a.mu, sys_b.mu, tol=1e-7)
    if plan.mu is not sys_a.mu and not plan.mu.close_to(sys_a.mu):
        raise CompatibilityError("plan does not start at the first system's state")
    if plan.nu is not sys_b.mu and not plan.nu.close_to(sys_b.mu):
        raise CompatibilityError("plan does not end at the second system's state")
    terms = _cost_terms(plan.channel, sys_a.coords, sys_b.coords, sys_a.mu, sys_b.mu)
    rep = CostReport(float(terms.sum()), terms)
    if norm_form:
        from .gns import cost_norm_form, gns_of_plan
        gns = gns_of_plan(raw_table(plan, "usual"))
        rep.norm_form = cost_norm_form(gns, sys_a.coords, sys_b.coords)
    return rep


# system transforms
def with_grading_as_dynamics(sys: GradedSystem) -> GradedSystem:
    """``A^gamma``: the grading automorphism added to the dynamics (idempotent)."""
    if GRADING_NAME in sys.dynamics:
        return sys
    dyn = dict(sys.dynamics)
    dyn[GRADING_NAME] = Channel.unitary(sys.grading_u)
    return sys.with_dynamics(dyn)


def kms_dual_system(sys: GradedSystem) -> GradedSystem:
    """``A^sigma``: dynamics replaced by their KMS duals; state and coordinates kept."""
    return sys.with_dynamics(sys.kms_dynamics(), keep_copying=False)


def twisted_dual_system(sys: GradedSystem) -> GradedSystem:
    """``A^wr`` in twisted-commutant coordinates.

    The twisted commutant element ``g^{1/2} j(k^*) g^{-1/2}`` has coordinate
    ``conj(k)``; state and grading become ``rho^T`` and ``conj(u)``.
    """
    mu_t = sys.mu.coordinate_dual()
    dyn = {nm: twisted_dual(a, sys.mu, sys.mu) for nm, a in sys.dynamics.items()}
    return GradedSystem(mu_t, tuple(np.conj(k) for k in sys.coords), dyn, None, sys.name + "^wr")


def twisted_coordinate_operators(sys: GradedSystem) -> list[np.ndarray]:
    """``k_i^wr = gamma^{1/2}(j(k_i^*))`` as operators on ``G_A`` (direct route)."""
    alg = sys.alg
    kl = alg.klein
    return [kl @ alg.j_map(alg.left(dagger(k))) @ dagger(kl) for k in sys.coords]


# the SDP
def _intertwinings(sys_a: GradedSystem, sys_b: GradedSystem, cls: str):
    if cls not in CLASSES:
        raise ValueError(f"unknown class {cls!r}; expected one of {CLASSES}")
    if sorted(sys_a.dynamics) != sorted(sys_b.dynamics):
        raise StructureError("systems must share dynamics names")
    if sys_a.d != sys_b.d:
        raise StructureError("systems must have the same number of coordinates")
    ga, gb = with_grading_as_dynamics(sys_a), with_grading_as_dynamics(sys_b)
    pairs = [(ga.dynamics[nm], gb.dynamics[nm]) for nm in ga.dynamics]
    if cls in ("Fsigma", "Fsigmasigma"):
        pairs.append((modular_generator_map(sys_a.mu), modular_generator_map(sys_b.mu)))
    if cls == "Fsigmasigma":
        ka, kb = ga.kms_dynamics(), gb.kms_dynamics()
        pairs += [(ka[nm], kb[nm]) for nm in ka]
    return pairs


def cost_objective(sys_a: GradedSystem, sys_b: GradedSystem) -> tuple[np.ndarray, float]:
    """``(H, c)`` with ``cost(E) = c + Re<H, C_E>`` on Choi matrices.

    ``Tr(rho_nu E(k)^H l) = Tr(C M)`` with ``M = kron(conj(k), l rho_nu)`` for
    Hermitian ``C``, hence ``H = -(M + M^H)``.
    """
    mu, nu = sys_a.mu, sys_b.mu
    const = 0.0
    h = np.zeros((mu.n * nu.n,) * 2, dtype=complex)
    for k, l in zip(sys_a.coords, sys_b.coords):
        const += (mu(dagger(k) @ k) + nu(dagger(l) @ l)).real
        m = np.kron(np.conj(k), l @ nu.density)
        h -= m + dagger(m)
    return h, const


def transport_sdp(sys_a: GradedSystem, sys_b: GradedSystem, cls: str,
                  options: SdpOptions | None = None) -> tuple[SdpProblem, float]:
    rows, rhs = choi_constraint_rows(sys_a.mu, sys_b.mu, _intertwinings(sys_a, sys_b, cls))
    mats, b = rows_to_hermitian(rows, rhs, sys_a.n * sys_b.n)
    h, const = cost_objective(sys_a, sys_b)
    return SdpProblem(h, mats, b, options or DEFAULT_OPTIONS), const


@dataclass
class WassersteinResult:
    value: float
    cls: str
    plan: TransportPlan | None
    status: str
    cost: float
    solution: SdpSolution
    chain: dict = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"

    def summary(self) -> dict:
        return {"class": self.cls, "value": self.value, "cost": self.cost, "status": self.status,
                "primal_residual": self.solution.primal_residual, "dual_gap": self.solution.dual_gap,
                "iterations": self.solution.iterations}


def _solve_class(sys_a: GradedSystem, sys_b: GradedSystem, cls: str,
                 options: SdpOptions | None) -> WassersteinResult:
    prob, const = transport_sdp(sys_a, sys_b, cls, options)
    seed = product_choi(sys_a.mu, sys_b.mu)
    sol = solve(prob, seed=seed)
    if sol.status == "infeasible":
        raise SolverError("transport constraints are inconsistent")
    val = const + sol.value
    plan = None
    e = Channel.from_choi(sol.X, sys_a.n, sys_b.n)
    try:
        plan = plan_from_channel(e, sys_a.mu, sys_b.mu, tol=1e-6)
    except (CompatibilityError, ValueError):
        plan = None
    return WassersteinResult(float(np.sqrt(max(val, 0.0))), cls, plan, sol.status, float(val), sol)


def wasserstein_all(sys_a: GradedSystem, sys_b: GradedSystem,
                    options: SdpOptions | None = None) -> dict[str, WassersteinResult]:
    """All three classes; raises if the chain ``W^F <= W^F_sigma <= W^F_sigmasigma`` breaks."""
    res = {cls: _solve_class(sys_a, sys_b, cls, options) for cls in CLASSES}
    vals = [res[c].value for c in CLASSES]
    ok = vals[0] <= vals[1] + CHAIN_SLACK and vals[1] <= vals[2] + CHAIN_SLACK
    chain = {"values": dict(zip(CLASSES, vals)), "ok": ok}
    for r in res.values():
        r.chain = chain
    if not ok and all(r.optimal for r in res.values()):
        raise SolverError(f"monotonicity chain violated: {vals}")
    return res


def wasserstein(sys_a: GradedSystem, sys_b: GradedSystem, cls: str = "Fsigmasigma",
                options: SdpOptions | None = None, check_chain: bool = True) -> WassersteinResult:
    """``W^F_cls(A, B)`` with an optimal plan.

    With ``check_chain`` all three classes are solved and the monotonicity chain
    is verified (cheap at the supported sizes).
    """
    if cls not in CLASSES:
        raise ValueError(f"unknown class {cls!r}; expected one of {CLASSES}")
    if check_chain:
        return wasserstein_all(sys_a, sys_b, options)[cls]
    return _solve_class(sys_a, sys_b, cls, options)


def results_csv(rows: Sequence[tuple[str, WassersteinResult]]) -> str:
    """Results table: pair id, class, value, solver status, residual summary."""
    buf = _io.StringIO()
    w = csv.writer(buf)
    w.writerow(["pair", "class", "value", "status", "primal_residual", "dual_gap"])
    for pair, r in rows:
        w.writerow([pair, r.cls, f"{r.value:.12g}", r.status,
                    f"{r.solution.primal_residual:.3g}", f"{r.solution.dual_gap:.3g}"])
    return buf.getvalue()


# faithfulness
@dataclass
class IsomorphismReport:
    iota: Channel
    multiplicativity: float
    adjoint: float
    evenness: float
    intertwining: dict
    coordinates: float
    state: float
    inverse: float | None = None

    def max_residual(self) -> float:
        vals = [self.multiplicativity, self.adjoint, self.evenness, self.coordinates, self.state]
        vals += list(self.intertwining.values())
        if self.inverse is not None:
            vals.append(self.inverse)
        return max(vals)


def _iso_report(iota: Channel, sys_a: GradedSystem, sys_b: GradedSystem) -> IsomorphismReport:
    units = [np.eye(sys_a.n)[:, [i]] @ np.eye(sys_a.n)[[j], :] for i in range(sys_a.n) for j in range(sys_a.n)]
    mult = max(np.linalg.norm(iota(a @ b) - iota(a) @ iota(b)) for a in units for b in units)
    adj = max(np.linalg.norm(iota(dagger(a)) - dagger(iota(a))) for a in units)
    even = iota.evenness_residual(sys_a.grading_u, sys_b.grading_u)
    inter = {nm: iota.intertwining_residual(sys_a.dynamics[nm], sys_b.dynamics[nm]) for nm in sys_a.dynamics}
    coords = max(np.linalg.norm(iota(k) - l) for k, l in zip(sys_a.coords, sys_b.coords))
    state = iota.compatibility_residual(sys_a.mu.density, sys_b.mu.density)
    return IsomorphismReport(iota, float(mult), float(adj), float(even), inter, float(coords), float(state))


def extract_isomorphism(sys_a: GradedSystem, sys_b: GradedSystem, cls: str = "Fsigma",
                        tol: float = 1e-6, options: SdpOptions | None = None) -> IsomorphismReport:
    """Isomorphism ``iota = E_omega`` from a zero-cost optimal plan.

    For ``cls="F"`` both ``W^F(A, B)`` and ``W^F(B, A)`` must vanish and the two
    optimal channels must be mutually inverse.
    """
    for s in (sys_a, sys_b):
        if not s.is_hermitian:
            raise StructureError("coordinates are not hermitian")
        if not generates_algebra(list(s.coords), s.n):
            raise StructureError("coordinates do not generate the algebra")
    if sys_a.n != sys_b.n:
        raise StructureError("algebras of different size cannot be isomorphic")
    fwd = wasserstein(sys_a, sys_b, cls, options, check_chain=False)
    if fwd.value > tol or fwd.plan is None:
        raise StructureError(f"W^{cls}(A, B) = {fwd.value:.3g} is not zero")
    rep = _iso_report(fwd.plan.channel, sys_a, sys_b)
    if cls == "F":
        back = wasserstein(sys_b, sys_a, cls, options, check_chain=False)
        if back.value > tol or back.plan is None:
            raise StructureError(f"W^F(B, A) = {back.value:.3g} is not zero")
        rep.inverse = float(back.plan.channel.compose(fwd.plan.channel).distance(Channel.identity(sys_a.n)))
    return rep
