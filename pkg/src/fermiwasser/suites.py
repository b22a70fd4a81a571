"""Seeded property suites behind ``fermiwasser verify``.

Each suite draws a few random instances and records named residuals against
tolerances. The same seed reproduces the same report.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .algebra import (canonical_standard_form, commutant, homogeneous_basis, modular_data, state_vector,
                      twisted_commutant)
from .car_lattice import LatticeConfig, build_frame, verify_lattice_standard_form
from .duals import (accardi_dual, compose_dual_check, defining_relation_residuals, dual_of_dual, kms_dual,
                    petz_dual, twisted_dual_solve)
from .gns import gns_of_plan, supercommutation_residual
from .numerics import powm, spans_equal
from .sampling import parity_grading, random_compatible_channel, random_state, random_system
from .sdp import solve
from .transport import (fermionic_to_usual_table, marginal_residuals, plan_from_channel, product_choi, raw_table,
                        to_fermionic, usual_to_fermionic_table)
from .wasserstein import transport_sdp, wasserstein_all
from .detailed_balance import check_fdb, identity_dynamics, random_reversible_system, symmetrized_dynamics


@dataclass
class Check:
    suite: str
    name: str
    residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual) and self.residual <= self.tol)

    def to_dict(self) -> dict:
        return {"suite": self.suite, "check": self.name, "residual": self.residual, "tol": self.tol,
                "pass": self.passed}


def _worst(values) -> float:
    return float(max(values, default=0.0))


def modular_suite(rng, samples: int = 4) -> list[Check]:
    j_err, delta_err, fix_err = [], [], []
    for i in range(samples):
        n = 2 + i % 2
        mu = random_state(n, rng, parity_grading(n - 1, 1))
        alg = canonical_standard_form(n, mu.grading_u)
        md = modular_data(alg, mu)
        j_err.append(np.linalg.norm(md.J.matrix - alg.j.matrix))
        delta_err.append(np.linalg.norm(md.Delta - np.kron(mu.density, np.linalg.inv(mu.density).T)))
        lam = state_vector(alg, mu)
        d_it = powm(md.Delta, 0.7j)
        fix_err.append(np.linalg.norm(d_it @ lam - lam))
    return [Check("modular", "J_polar_vs_canonical", _worst(j_err), 1e-9),
            Check("modular", "Delta_action", _worst(delta_err), 1e-9),
            Check("modular", "Delta_it_fixes_Lambda", _worst(fix_err), 1e-9)]


def commutant_suite(rng, samples: int = 2) -> list[Check]:
    dims, sup, collapse = [], [], []
    for n in (2, 3)[:samples]:
        u = parity_grading(n - 1, 1)
        alg = canonical_standard_form(n, u)
        dims.append(abs(len(commutant(alg.algebra_basis, alg.hilbert_dim)) - n * n))
        basis, par = homogeneous_basis(u)
        for a, pa in zip(basis, par):
            for c, pc in zip(basis, par):
                x, y = alg.left(a), alg.twist(np.conj(c))
                sup.append(np.linalg.norm(x @ y - (-1) ** (pa * pc) * y @ x))
        triv = canonical_standard_form(n)
        collapse.append(spans_equal(twisted_commutant(triv), commutant(triv.algebra_basis, n * n))[1])
    return [Check("commutant", "commutant_dimension", _worst(dims), 0.0),
            Check("commutant", "supercommutation", _worst(sup), 1e-10),
            Check("commutant", "trivial_grading_collapse", _worst(collapse), 1e-8)]


def duals_suite(rng, samples: int = 3) -> list[Check]:
    rel, rel_solve, dd, petz, comp, kms2 = [], [], [], [], [], []
    for _ in range(samples):
        u = parity_grading(1, 1)
        mu, nu, xi = (random_state(2, rng, u) for _ in range(3))
        e = random_compatible_channel(mu, nu, rng)
        f = random_compatible_channel(nu, xi, rng)
        rel.append(defining_relation_residuals(e, accardi_dual(e, mu, nu), mu, nu, twisted=False)["a_first"])
        for form in ("a_first", "dual_first"):
            sol = twisted_dual_solve(e, mu, nu, form)
            rel_solve.append(defining_relation_residuals(e, sol, mu, nu, twisted=True)[form])
        dd.append(dual_of_dual(e, mu, nu).distance(e))
        petz.append(kms_dual(e, mu, nu).distance(petz_dual(e, mu, nu)))
        kms2.append(kms_dual(kms_dual(e, mu, nu), nu, mu).distance(e))
        comp.append(compose_dual_check(e, f, mu, nu, xi))
    return [Check("duals", "accardi_relation", _worst(rel), 1e-9),
            Check("duals", "twisted_relations", _worst(rel_solve), 1e-9),
            Check("duals", "double_dual", _worst(dd), 1e-8),
            Check("duals", "kms_involution", _worst(kms2), 1e-8),
            Check("duals", "petz_closed_form", _worst(petz), 1e-8),
            Check("duals", "twisted_composition", _worst(comp), 1e-8)]


def transport_suite(rng, samples: int = 3) -> list[Check]:
    roundtrip, marg, sup = [], [], []
    for _ in range(samples):
        u = parity_grading(1, 1)
        mu, nu = random_state(2, rng, u), random_state(2, rng, u)
        plan = plan_from_channel(random_compatible_channel(mu, nu, rng), mu, nu)
        raw = raw_table(plan, "usual")
        back = fermionic_to_usual_table(usual_to_fermionic_table(raw))
        roundtrip.append(np.max(np.abs(back.values - raw.values)))
        fplan = to_fermionic(plan)
        marg.append(max(marginal_residuals(fplan).values()))
        sup.append(supercommutation_residual(gns_of_plan(raw_table(fplan)), rng))
    return [Check("transport", "bijection_roundtrip", _worst(roundtrip), 1e-10),
            Check("transport", "fermionic_marginals", _worst(marg), 1e-10),
            Check("transport", "gns_supercommutation", _worst(sup), 1e-9)]


def metric_suite(rng, samples: int = 1) -> list[Check]:
    zero, chain, sym = [], [], []
    for _ in range(samples):
        a = random_system(2, rng, name="A")
        b = random_system(2, rng, name="B")
        self_d = wasserstein_all(b, b)
        zero.append(self_d["F"].value)
        ab, ba = wasserstein_all(a, b), wasserstein_all(b, a)
        vals = [ab[c].value for c in ("F", "Fsigma", "Fsigmasigma")]
        chain.append(max(vals[0] - vals[1], vals[1] - vals[2], 0.0))
        sym.append(abs(ab["Fsigmasigma"].value - ba["Fsigmasigma"].value))
    return [Check("metric", "self_distance", _worst(zero), 1e-6),
            Check("metric", "chain", _worst(chain), 1e-6),
            Check("metric", "sigmasigma_symmetry", _worst(sym), 1e-5)]


def sdp_suite(rng, samples: int = 2) -> list[Check]:
    seed_res, gaps = [], []
    for _ in range(samples):
        a, b = random_system(2, rng), random_system(2, rng)
        prob, _ = transport_sdp(a, b, "Fsigmasigma")
        seed_res.append(prob.residual(product_choi(a.mu, b.mu)))
        sol = solve(prob, seed=product_choi(a.mu, b.mu))
        gaps.append(sol.dual_gap if sol.optimal else np.inf)
    return [Check("sdp", "product_seed_feasible", _worst(seed_res), 1e-10),
            Check("sdp", "duality_gap", _worst(gaps), 1e-7)]


def detailed_balance_suite(rng, samples: int = 2) -> list[Check]:
    copy, theta, fdb = [], [], []
    for _ in range(samples):
        a = random_reversible_system(3, rng)
        cm = a.copying_map
        # the literal K J = J K residual is O(1) by construction; K J = g J K is the correct form
        copy.append(max(v for k, v in cm.residuals.items() if k != "commutes_with_J"))
        theta.append(max(cm.reversing_operation().residuals.values()))
        fdb.append(max(check_fdb(identity_dynamics(a)).residual, check_fdb(symmetrized_dynamics(a)).residual))
    return [Check("detailed_balance", "copying_map", _worst(copy), 1e-9),
            Check("detailed_balance", "reversing_operation", _worst(theta), 1e-9),
            Check("detailed_balance", "fdb_constructions", _worst(fdb), 1e-8)]


def car_lattice_suite(rng, samples: int = 2) -> list[Check]:
    out = []
    for k in (1, 2)[:samples]:
        rep = verify_lattice_standard_form(build_frame(LatticeConfig.random(k, rng)))
        out.append(Check("car_lattice", f"standard_form_k{k}", 0.0 if rep["ok"] else 1.0, 0.0))
    return out


SUITES: dict[str, Callable] = {
    "modular": modular_suite,
    "commutant": commutant_suite,
    "duals": duals_suite,
    "transport": transport_suite,
    "sdp": sdp_suite,
    "metric": metric_suite,
    "detailed_balance": detailed_balance_suite,
    "car_lattice": car_lattice_suite,
}


def run_suites(seed: int = 0, names=None) -> list[Check]:
    """Run the named suites (all by default), each from its own child of ``seed``."""
    names = list(SUITES) if not names else list(names)
    unknown = [nm for nm in names if nm not in SUITES]
    if unknown:
        raise KeyError(f"unknown suites {unknown}; choose from {list(SUITES)}")
    children = np.random.SeedSequence(seed).spawn(len(SUITES))
    streams = dict(zip(SUITES, children))
    checks: list[Check] = []
    for nm in names:
        checks.extend(SUITES[nm](np.random.default_rng(streams[nm])))
    return checks
