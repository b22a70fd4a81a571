"""Copying maps, reversing operations and fermionic detailed balance (FDB).

A copying map is an even *-isomorphism ``kappa : A -> A^wr`` implemented by a
unitary ``K`` on ``G_A``, ``kappa(a) = K a K^H``.  In coordinates (see
:mod:`fermiwasser.algebra`) it is a superoperator ``M_n -> M_n`` from matrices
of ``A`` to twisted-commutant coordinates.  From it we get

* the reversing operation ``theta = j o gamma^{-1/2} o kappa`` on ``A``,
* the reverse ``E^<- = kappa_A^{-1} o E^wr o kappa_B`` of a channel,
* the copy ``A^kappa`` of a system and its reverse ``A^<-``.

FDB of a reversible system means ``alpha^kappa = alpha^wr`` for every dynamics,
equivalently ``alpha^<- = alpha``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import FaithfulEvenState, StandardFormAlgebra, canonical_standard_form, state_vector
from .channels import Channel
from .duals import kms_dual, twisted_dual
from .errors import StructureError
from .numerics import TOL_SPAN, dagger, matrix_units
from .sampling import _rng, parity_grading, random_compatible_channel, random_coordinates, random_state_with_symmetry
from .sdp import SdpOptions
from .transport import pushforward_state
from .wasserstein import GradedSystem, wasserstein_all

TOL_COPY = 1e-9
TOL_FDB = 1e-7
BOUND_SLACK = 1e-5
THETA_NAME = "theta"


def _antimult_residual(f: Channel, n: int) -> float:
    units = matrix_units(n)
    return max(float(np.linalg.norm(f(a @ b) - f(b) @ f(a))) for a in units for b in units)


def _mult_residual(f: Channel, n: int) -> float:
    units = matrix_units(n)
    return max(float(np.linalg.norm(f(a @ b) - f(a) @ f(b))) for a in units for b in units)


def _adjoint_residual(f: Channel, n: int) -> float:
    return max(float(np.linalg.norm(f(dagger(a)) - dagger(f(a)))) for a in matrix_units(n))


@dataclass(frozen=True, eq=False)
class ReversingOperation:
    """Even *-anti-automorphism ``theta`` with ``theta o theta = id`` and ``mu o theta = mu``."""

    theta: Channel
    residuals: dict

    @property
    def ok(self) -> bool:
        return max(self.residuals.values()) <= TOL_COPY


def reversing_residuals(theta: Channel, mu: FaithfulEvenState) -> dict[str, float]:
    n = mu.n
    u = mu.grading_u
    return {"involution": theta.compose(theta).distance(Channel.identity(n)),
            "antimultiplicative": _antimult_residual(theta, n),
            "adjoint": _adjoint_residual(theta, n),
            "unital": theta.unital_residual(),
            "state": theta.compatibility_residual(mu.density, mu.density),
            "even": theta.evenness_residual(u, u)}


@dataclass(frozen=True, eq=False)
class CopyingMap:
    """``kappa(a) = K a K^H`` from ``A`` onto its twisted commutant.

    ``kappa`` and ``kappa_inv`` act on coordinates; ``theta`` is the associated
    reversing operation (meaningful when ``is_mu_copying``).
    """

    K: np.ndarray
    alg: StandardFormAlgebra
    mu: FaithfulEvenState
    kappa: Channel
    kappa_inv: Channel
    theta: Channel
    residuals: dict = field(default_factory=dict)

    @property
    def is_copying(self) -> bool:
        keys = ("span", "multiplicative", "adjoint", "even", "grading_commutes")
        return all(self.residuals[k] <= TOL_COPY for k in keys)

    @property
    def is_mu_copying(self) -> bool:
        return self.is_copying and self.residuals["copied_state"] <= TOL_COPY \
            and self.residuals["square_is_grading"] <= TOL_COPY

    @property
    def copied_state(self) -> FaithfulEvenState:
        """``mu^kappa = mu o kappa^{-1}`` in twisted-commutant coordinates."""
        return pushforward_state(self.mu, self.kappa)

    def kappa_twisted(self, c) -> np.ndarray:
        """``kappa_{A^wr}``: twisted-commutant coordinate ``c`` to ``K twist(c) K^H`` read in ``A``."""
        return self.alg.read_left(self.K @ self.alg.twist(c) @ dagger(self.K))

    def reversing_operation(self) -> ReversingOperation:
        return reversing_from_copying(self)


def make_copying_map(alg: StandardFormAlgebra, mu: FaithfulEvenState, K) -> CopyingMap:
    """Wrap a unitary ``K`` with ``K A K^H`` inside ``A^wr``; all invariants are evaluated."""
    K = np.asarray(K, dtype=complex)
    dim = alg.hilbert_dim
    if K.shape != (dim, dim):
        raise StructureError("K has the wrong size")
    if np.linalg.norm(dagger(K) @ K - np.eye(dim)) > 1e-10:
        raise StructureError("K is not unitary")
    n = alg.n
    span = 0.0
    for a in matrix_units(n):
        x = K @ alg.left(a) @ dagger(K)
        span = max(span, float(np.linalg.norm(alg.twist(alg.read_twist(x)) - x)))
    if span > TOL_SPAN:
        raise StructureError(f"K A K^H is not inside the twisted commutant (residual {span:.3g})")
    kappa = Channel.from_function(lambda a: alg.read_twist(K @ alg.left(a) @ dagger(K)), n)
    kappa_inv = Channel(np.linalg.inv(kappa.matrix), n, n)
    kl = alg.klein

    def theta_fn(a):
        return alg.read_left(alg.j_map(dagger(kl) @ K @ alg.left(a) @ dagger(K) @ kl))

    theta = Channel.from_function(theta_fn, n, antimultiplicative=True, name=THETA_NAME)
    mu_k = pushforward_state(mu, kappa)
    lam = state_vector(alg, mu)
    res = {"span": span,
           "multiplicative": _mult_residual(kappa, n),
           "adjoint": _adjoint_residual(kappa, n),
           "even": kappa.evenness_residual(mu.grading_u, np.conj(mu.grading_u)),
           "grading_commutes": float(np.linalg.norm(K @ alg.g - alg.g @ K)),
           "copied_state": float(np.linalg.norm(mu_k.density - mu.coordinate_dual().density)),
           "square_is_grading": float(np.linalg.norm(K @ K - alg.g)),
           "fixes_cone_vector": float(np.linalg.norm(K @ lam - lam)),
           "commutes_with_J": float(np.linalg.norm(K @ alg.swap - alg.swap @ np.conj(K))),
           # J of the twisted commutant is g J, so K J_A = J_{A^wr} K reads K J = g J K
           "intertwines_J": float(np.linalg.norm(K @ alg.swap - alg.g @ alg.swap @ np.conj(K)))}
    return CopyingMap(K, alg, mu, kappa, kappa_inv, theta, res)


def reversing_from_copying(cm: CopyingMap) -> ReversingOperation:
    """``theta = j o gamma^{-1/2} o kappa``; requires a mu-copying map."""
    if not cm.is_mu_copying:
        raise StructureError("the copying map is not mu-copying")
    return ReversingOperation(cm.theta, reversing_residuals(cm.theta, cm.mu))


def symmetric_copying_unitary(alg: StandardFormAlgebra, w) -> np.ndarray:
    """``K = g^{1/2} F (w (x) conj(w))`` with ``F`` the swap.

    For a symmetric unitary ``w`` commuting with the grading this gives
    ``kappa(a) = twist(w a w^H)``, ``K^2 = g`` and ``theta(a) = conj(w) a^T w``;
    ``w rho w^H = conj(rho)`` makes it mu-copying.
    """
    w = np.asarray(w, dtype=complex)
    return alg.klein @ alg.swap @ np.kron(w, np.conj(w))


# channels and systems
def reverse_channel(e: Channel, cm_a: CopyingMap, cm_b: CopyingMap) -> Channel:
    """``E^<- = kappa_A^{-1} o E^wr o kappa_B : B -> A`` for ``E : A -> B``."""
    etw = twisted_dual(e, cm_a.mu, cm_b.mu)
    return cm_a.kappa_inv.compose(etw.compose(cm_b.kappa))


def reverse_channel_residuals(e: Channel, cm_a: CopyingMap, cm_b: CopyingMap) -> dict[str, float]:
    """``||E^<- - theta_A o E^sigma o theta_B||`` and ``||E^<-<- - E||``."""
    rev = reverse_channel(e, cm_a, cm_b)
    via_theta = cm_a.theta.compose(kms_dual(e, cm_a.mu, cm_b.mu).compose(cm_b.theta))
    out = {"theta_form": rev.distance(via_theta)}
    if cm_a.is_mu_copying and cm_b.is_mu_copying:
        out["double_reverse"] = reverse_channel(rev, cm_b, cm_a).distance(e)
    return out


def _require_reversible(sys: GradedSystem) -> CopyingMap:
    cm = sys.copying_map
    if cm is None or not cm.is_mu_copying:
        raise StructureError("system is not reversible (no mu-copying map)")
    return cm


def make_reversible(sys: GradedSystem, K, name: str = THETA_NAME) -> GradedSystem:
    """Attach the copying map of ``K`` and add its reversing operation to the dynamics."""
    cm = make_copying_map(sys.alg, sys.mu, K)
    if not cm.is_mu_copying:
        raise StructureError("K does not define a mu-copying map")
    dyn = dict(sys.dynamics)
    dyn[name] = cm.theta
    return GradedSystem(sys.mu, sys.coords, dyn, cm, sys.name)


@dataclass
class FdbReport:
    kappa_form: dict
    reverse_form: dict
    tol: float = TOL_FDB

    @property
    def residual(self) -> float:
        return max(self.kappa_form.values(), default=0.0)

    @property
    def holds(self) -> bool:
        return self.residual <= self.tol

    @property
    def forms_agree(self) -> float:
        return max((abs(self.kappa_form[k] - self.reverse_form[k]) for k in self.kappa_form), default=0.0)


def check_fdb(sys: GradedSystem, tol: float = TOL_FDB) -> FdbReport:
    """Residuals ``||alpha^kappa - alpha^wr||`` and ``||alpha^<- - alpha||`` per dynamics."""
    cm = _require_reversible(sys)
    kform, rform = {}, {}
    for nm, alpha in sys.dynamics.items():
        copied = cm.kappa.compose(alpha.compose(cm.kappa_inv))
        kform[nm] = copied.distance(twisted_dual(alpha, sys.mu, sys.mu))
        rform[nm] = reverse_channel(alpha, cm, cm).distance(alpha)
    return FdbReport(kform, rform, tol)


def reverse_system(sys: GradedSystem) -> GradedSystem:
    """``A^<- = (A, alpha^<-, mu, k)``."""
    cm = _require_reversible(sys)
    dyn = {nm: _keep_flag(reverse_channel(a, cm, cm), a) for nm, a in sys.dynamics.items()}
    return GradedSystem(sys.mu, sys.coords, dyn, cm, sys.name + "^<-")


def _keep_flag(new: Channel, old: Channel) -> Channel:
    return Channel(new.matrix, new.in_dim, new.out_dim, old.antimultiplicative, old.name)


def copy_system(sys: GradedSystem) -> GradedSystem:
    """``A^kappa = (A^wr, kappa alpha kappa^{-1}, mu o kappa^{-1}, kappa(k))`` in coordinates.

    When the copying map is mu-copying the copy is reversible with copying map
    ``kappa_{A^wr}``, realized on the canonical layout as ``W K W^H`` with the
    carrier ``W`` of the twisted commutant.
    """
    cm = sys.copying_map
    if cm is None:
        raise StructureError("system has no copying map")
    mu_k = cm.copied_state
    dyn = {nm: _keep_flag(cm.kappa.compose(a.compose(cm.kappa_inv)), a) for nm, a in sys.dynamics.items()}
    coords = tuple(cm.kappa(k) for k in sys.coords)
    new_cm = None
    if cm.is_mu_copying:
        alg_c = canonical_standard_form(sys.n, mu_k.grading_u)
        carrier = cm.alg.twisted_carrier
        new_cm = make_copying_map(alg_c, mu_k, carrier @ cm.K @ dagger(carrier))
    return GradedSystem(mu_k, coords, dyn, new_cm, sys.name + "^kappa")


def theta_coordinates(sys: GradedSystem) -> GradedSystem:
    """``A_theta``: coordinates replaced by ``theta(k_i^*)``."""
    cm = _require_reversible(sys)
    return sys.with_coords([cm.theta(dagger(k)) for k in sys.coords])


def symmetrized_dynamics(sys: GradedSystem, names=None) -> GradedSystem:
    """Replace ``alpha`` by ``(alpha + alpha^<-)/2``, which satisfies FDB."""
    cm = _require_reversible(sys)
    names = [nm for nm in sys.dynamics if nm != THETA_NAME] if names is None else names
    dyn = dict(sys.dynamics)
    for nm in names:
        a = sys.dynamics[nm]
        dyn[nm] = (a + reverse_channel(a, cm, cm)) * 0.5
    return GradedSystem(sys.mu, sys.coords, dyn, cm, sys.name + "^sym")


def random_reversible_system(n: int, rng=None, n_odd: int | None = None, d: int = 1,
                             dynamics=("alpha",), name: str = "A") -> GradedSystem:
    """Random reversible system built from the symmetric copying construction.

    The state has a block-even eigenbasis ``V`` so ``w = conj(V) V^H`` yields a
    mu-copying ``K``; the dynamics are random even compatible channels.
    """
    rng = _rng(rng)
    n_odd = n // 2 if n_odd is None else n_odd
    mu, w = random_state_with_symmetry(n, rng, parity_grading(n - n_odd, n_odd))
    dyn = {nm: random_compatible_channel(mu, mu, rng) for nm in dynamics}
    base = GradedSystem(mu, tuple(random_coordinates(n, d, rng)), dyn, None, name)
    return make_reversible(base, symmetric_copying_unitary(base.alg, w))


def identity_dynamics(sys: GradedSystem) -> GradedSystem:
    """Same algebra, state, coordinates and copying map; every dynamics except ``theta`` trivial."""
    cm = _require_reversible(sys)
    dyn = {nm: (a if nm == THETA_NAME else Channel.identity(sys.n)) for nm, a in sys.dynamics.items()}
    return GradedSystem(sys.mu, sys.coords, dyn, cm, sys.name + "^id")


@dataclass
class DeviationReport:
    distances: dict
    bounds: dict
    slack: float = BOUND_SLACK

    @property
    def ok(self) -> bool:
        return all(b["holds"] for b in self.bounds.values())

    def to_dict(self) -> dict:
        return {"distances": self.distances, "bounds": self.bounds, "ok": self.ok}


def fdb_deviation(sys_a: GradedSystem, sys_b: GradedSystem, options: SdpOptions | None = None,
                  slack: float = BOUND_SLACK) -> DeviationReport:
    """Deviation of ``A`` from FDB bounded through its distance to an FDB system ``B``.

    ``W_sigma(A, A^<-) <= 2 W_sigma(A, B)``, ``W_sigma(A^<-, A) <= 2 W_sigma(B, A)`` and
    ``W_sigmasigma(A, A^<-) <= 2 W_sigmasigma(A, B)``.
    """
    _require_reversible(sys_a)
    if not check_fdb(sys_b).holds:
        raise StructureError("the comparison system does not satisfy FDB")
    rev = reverse_system(sys_a)
    pairs = {"A,A<-": (sys_a, rev), "A<-,A": (rev, sys_a), "A,B": (sys_a, sys_b), "B,A": (sys_b, sys_a)}
    dist = {}
    for key, (x, y) in pairs.items():
        res = wasserstein_all(x, y, options)
        dist[key] = {cls: r.value for cls, r in res.items()}
    bounds = {}
    for label, lhs, rhs, cls in [("sigma", "A,A<-", "A,B", "Fsigma"),
                                 ("sigma_reversed", "A<-,A", "B,A", "Fsigma"),
                                 ("sigmasigma", "A,A<-", "A,B", "Fsigmasigma")]:
        left, right = dist[lhs][cls], 2 * dist[rhs][cls]
        bounds[label] = {"lhs": left, "rhs": right, "holds": bool(left <= right + slack)}
    return DeviationReport(dist, bounds, slack)
