"""Dual maps of state-compatible unital positive maps.

All duals are returned in *coordinates*: a map ``B' -> A'`` (or
``B^wr -> A^wr``) is stored as a :class:`Channel` ``M_m -> M_n`` acting on the
coordinate matrices of the (twisted) commutants, see :mod:`fermiwasser.algebra`.
"""

from __future__ import annotations

import numpy as np

from .algebra import FaithfulEvenState, StandardFormAlgebra, canonical_standard_form, state_vector
from .channels import Channel
from .errors import CompatibilityError, StructureError
from .numerics import dagger, matrix_units, vec

TOL_COMPAT = 1e-9


def transpose_map(n: int) -> Channel:
    return Channel.from_function(lambda a: a.T, n, antimultiplicative=True)


def _algebras(e: Channel, mu: FaithfulEvenState, nu: FaithfulEvenState):
    if mu.n != e.in_dim or nu.n != e.out_dim:
        raise ValueError("state sizes do not match the map")
    return (canonical_standard_form(mu.n, mu.grading_u), canonical_standard_form(nu.n, nu.grading_u))


def check_compatible(e: Channel, mu: FaithfulEvenState, nu: FaithfulEvenState, tol: float = TOL_COMPAT):
    r = e.compatibility_residual(mu.density, nu.density)
    if r > tol:
        raise CompatibilityError(f"state compatibility violated (||nu o E - mu|| = {r:.3g})")


def accardi_dual(e: Channel, mu: FaithfulEvenState, nu: FaithfulEvenState,
                 alg_a: StandardFormAlgebra | None = None, alg_b: StandardFormAlgebra | None = None
                 ) -> Channel:
    """Dual ``E' : B' -> A'`` from the defining relation

    ``<Lambda_mu, a E'(b') Lambda_mu> = <Lambda_nu, E(a) b' Lambda_nu>``

    solved as a dense linear system over matrix-unit bases.
    """
    check_compatible(e, mu, nu)
    if alg_a is None or alg_b is None:
        alg_a, alg_b = _algebras(e, mu, nu)
    n, m = e.in_dim, e.out_dim
    lam_a, lam_b = state_vector(alg_a, mu), state_vector(alg_b, nu)
    units_a, units_b = matrix_units(n), matrix_units(m)
    # M[i, k] = <Lam_mu, a_i c_k Lam_mu>,  R[i, j] = <Lam_nu, E(a_i) b'_j Lam_nu>
    right_a = np.array([alg_a.right(c) @ lam_a for c in units_a])
    mat = np.conj(np.array([dagger(alg_a.left(a)) @ lam_a for a in units_a])) @ right_a.T
    ea = [alg_b.left(e(a)) for a in units_a]
    right_b = np.array([alg_b.right(c) @ lam_b for c in units_b])
    rhs = np.conj(np.array([dagger(x) @ lam_b for x in ea])) @ right_b.T
    x = np.linalg.solve(mat, rhs)
    return Channel(x, m, n)


def kms_dual(e: Channel, mu: FaithfulEvenState, nu: FaithfulEvenState) -> Channel:
    """``E^sigma = j_A o E' o j_B``; in coordinates ``b -> E'(b^T)^T``."""
    ed = accardi_dual(e, mu, nu)
    return transpose_map(e.in_dim).compose(ed.compose(transpose_map(e.out_dim)))


def petz_dual(e: Channel, mu: FaithfulEvenState, nu: FaithfulEvenState) -> Channel:
    """Closed form ``b -> rho_mu^{-1/2} E^dag(rho_nu^{1/2} b rho_nu^{1/2}) rho_mu^{-1/2}``.

    Used as an independent cross-check of :func:`kms_dual`.
    """
    check_compatible(e, mu, nu)
    adj = e.adjoint()
    return Channel.unitary(mu.inv_sqrt).compose(adj.compose(Channel.unitary(nu.sqrt)))


def twisted_dual(e: Channel, mu: FaithfulEvenState, nu: FaithfulEvenState,
                 tol_even: float = 1e-9) -> Channel:
    """``E^wr = gamma_A^{1/2} o E' o gamma_B^{-1/2}`` in twisted-commutant coordinates.

    The twisted commutant element with coordinate ``c`` is ``g^{1/2} (1 (x) c) g^{-1/2}``,
    so in coordinates the Klein conjugations cancel and the matrix coincides with
    that of ``E'``; the grading of the coordinate algebras is ``conj(u)``.
    """
    if not (mu.even and nu.even):
        raise StructureError("states must be even")
    r = e.evenness_residual(mu.grading_u, nu.grading_u)
    if r > tol_even:
        raise StructureError(f"map is not even (residual {r:.3g})")
    ed = accardi_dual(e, mu, nu)
    return Channel(ed.matrix, ed.in_dim, ed.out_dim, antimultiplicative=e.antimultiplicative)


def twisted_dual_solve(e: Channel, mu: FaithfulEvenState, nu: FaithfulEvenState,
                       form: str = "a_first") -> Channel:
    """Solve one bilinear relation for a map ``B^wr -> A^wr`` directly (no Klein formula).

    ``form="a_first"``:   ``<L_mu, a F(b) L_mu> = <L_nu, E(a) b L_nu>``
    ``form="dual_first"``: ``<L_mu, F(b) a L_mu> = <L_nu, E(a) b L_nu>``

    The first solution is :func:`twisted_dual`.  The second one differs from it by
    the grading, ``F = E^wr o gamma_B``, because ``A`` and ``A^wr`` supercommute
    rather than commute; on odd pairs the two left-hand sides have opposite signs.
    """
    check_compatible(e, mu, nu)
    alg_a, alg_b = _algebras(e, mu, nu)
    n, m = e.in_dim, e.out_dim
    lam_a, lam_b = state_vector(alg_a, mu), state_vector(alg_b, nu)
    units_a, units_b = matrix_units(n), matrix_units(m)
    mat = np.empty((n * n, n * n), dtype=complex)
    for i, a in enumerate(units_a):
        la = alg_a.left(a)
        for k, c in enumerate(units_a):
            tw = alg_a.twist(c)
            x = la @ tw if form == "a_first" else tw @ la
            mat[i, k] = np.vdot(lam_a, x @ lam_a)
    right_b = np.array([alg_b.twist(c) @ lam_b for c in units_b])
    rhs = np.conj(np.array([dagger(alg_b.left(e(a))) @ lam_b for a in units_a])) @ right_b.T
    return Channel(np.linalg.solve(mat, rhs), m, n)


def twisted_dual_operator(e: Channel, mu: FaithfulEvenState, nu: FaithfulEvenState, b_tw) -> np.ndarray:
    """Apply ``E^wr`` to an operator ``b_tw`` of ``B^wr`` acting on ``G_B``; result acts on ``G_A``."""
    alg_a, alg_b = _algebras(e, mu, nu)
    etw = twisted_dual(e, mu, nu)
    return alg_a.twist(etw(alg_b.read_twist(b_tw)))


def defining_relation_residuals(e: Channel, dual_coords: Channel, mu: FaithfulEvenState,
                                nu: FaithfulEvenState, twisted: bool) -> dict[str, float]:
    """Residuals of the bilinear relations characterizing ``E'`` or ``E^wr``.

    For the dual only the form ``<L, a E'(b') L>`` exists; for the twisted dual
    both ``<L, a E^wr(b) L>`` and ``<L, E^wr(b) a L>`` are checked against
    ``<L_nu, E(a) b L_nu>``.
    """
    alg_a, alg_b = _algebras(e, mu, nu)
    lam_a, lam_b = state_vector(alg_a, mu), state_vector(alg_b, nu)
    emb_a = alg_a.twist if twisted else alg_a.right
    emb_b = alg_b.twist if twisted else alg_b.right
    left_form, right_form = 0.0, 0.0
    for a in matrix_units(e.in_dim):
        la = alg_a.left(a)
        lea = alg_b.left(e(a))
        for y in matrix_units(e.out_dim):
            target = np.vdot(lam_b, lea @ emb_b(y) @ lam_b)
            x = emb_a(dual_coords(y))
            left_form = max(left_form, abs(np.vdot(lam_a, la @ x @ lam_a) - target))
            right_form = max(right_form, abs(np.vdot(lam_a, x @ la @ lam_a) - target))
    out = {"a_first": float(left_form)}
    if twisted:
        out["dual_first"] = float(right_form)
    return out


def compose_dual_check(e: Channel, f: Channel, mu: FaithfulEvenState, nu: FaithfulEvenState,
                       xi: FaithfulEvenState) -> float:
    """``||(F o E)^wr - E^wr o F^wr||`` for ``E : A -> B``, ``F : B -> C``."""
    lhs = twisted_dual(f.compose(e), mu, xi)
    rhs = twisted_dual(e, mu, nu).compose(twisted_dual(f, nu, xi))
    return lhs.distance(rhs)


def dual_of_dual(e: Channel, mu: FaithfulEvenState, nu: FaithfulEvenState) -> Channel:
    """``E''`` computed by dualizing ``E'`` w.r.t. the coordinate states ``nu'``, ``mu'``."""
    ed = accardi_dual(e, mu, nu)
    return accardi_dual(ed, nu.coordinate_dual(), mu.coordinate_dual())
