"""Fermionic lattice example: two copies ``M`` and ``iota(M)`` of ``k`` modes in one Fock space.

Modes are ordered ``1..k`` (the lattice ``M``) followed by ``k+1..2k`` (``iota(l) = l + k``),
and realized by the Jordan-Wigner matrices

    a_l = Z (x) ... (x) Z (x) s (x) 1 (x) ... (x) 1,     s = |0><1|,

on ``(C^2)^{(x) 2k}``.  Basis strings in ``D_L`` are strictly increasing, and
``f_s = a_{s_1}^+ ... a_{s_m}^+ f_0`` is then exactly the occupation basis vector of
``s``.  With this ordering ``A(M)`` is the left tensor factor ``M_{2^k} (x) 1``, so the
lattice is already in the canonical standard form of :mod:`fermiwasser.algebra` with
``rho_M = diag(p_s)`` and grading ``diag((-1)^{|s|})``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, reduce
from itertools import combinations, product

import numpy as np

from .algebra import FaithfulEvenState, canonical_standard_form
from .channels import Channel
from .detailed_balance import THETA_NAME, CopyingMap, make_copying_map, reversing_residuals
from .errors import ConfigError, StructureError
from .numerics import AntilinearOperator, antilinear_polar, dagger, principal_angles, span_of_matrices, svd_rank
from .wasserstein import GradedSystem

MAX_MODES = 3
_Z = np.diag([1.0, -1.0]).astype(complex)
_S = np.array([[0, 1], [0, 0]], dtype=complex)


@dataclass(frozen=True)
class LatticeConfig:
    """``k = |M|`` and probabilities ``p_s`` over subsets of ``M``.

    ``probabilities[i]`` belongs to the subset whose occupation bits, mode 1 first,
    spell ``i`` in binary.
    """

    k: int
    probabilities: tuple

    def __post_init__(self):
        if not 1 <= self.k <= MAX_MODES:
            raise ConfigError(f"k must be between 1 and {MAX_MODES}")
        p = np.asarray(self.probabilities, dtype=float).reshape(-1)
        if p.size != 2 ** self.k:
            raise ConfigError(f"expected {2 ** self.k} probabilities, got {p.size}")
        if np.any(p <= 0) or abs(p.sum() - 1) > 1e-10:
            raise ConfigError("probabilities must be strictly positive and sum to 1")
        object.__setattr__(self, "probabilities", tuple(float(x) for x in p))

    @classmethod
    def uniform(cls, k: int) -> "LatticeConfig":
        return cls(k, tuple(np.full(2 ** k, 2.0 ** -k)))

    @classmethod
    def random(cls, k: int, rng=None, floor: float = 0.05) -> "LatticeConfig":
        rng = np.random.default_rng(rng)
        p = (1 - floor) * rng.dirichlet(np.ones(2 ** k)) + floor / 2 ** k
        return cls(k, tuple(p / p.sum()))


def subsets(k: int) -> list[tuple[int, ...]]:
    """Strictly increasing strings over ``1..k`` in basis order."""
    out = []
    for bits in product((0, 1), repeat=k):
        out.append(tuple(i + 1 for i, b in enumerate(bits) if b))
    return out


def jordan_wigner(modes: int) -> list[np.ndarray]:
    """Annihilators ``a_1..a_modes``."""
    eye = np.eye(2, dtype=complex)
    return [reduce(np.kron, [_Z] * l + [_S] + [eye] * (modes - l - 1)) for l in range(modes)]


def creation_string(ops: list[np.ndarray], string, dim: int) -> np.ndarray:
    """``f_s = a_{s_1}^+ ... a_{s_m}^+ f_0`` for a (not necessarily ordered) string of 1-based modes."""
    v = np.zeros(dim, dtype=complex)
    v[0] = 1.0
    for l in reversed(string):
        v = dagger(ops[l - 1]) @ v
    return v


@dataclass(frozen=True, eq=False)
class FockFrame:
    cfg: LatticeConfig
    ops: tuple           # a_1..a_{2k}
    g: np.ndarray
    lam: np.ndarray
    K: np.ndarray

    @property
    def k(self) -> int:
        return self.cfg.k

    @property
    def dim(self) -> int:
        return 4 ** self.k

    def iota(self, l: int) -> int:
        return l + self.k

    def f(self, string) -> np.ndarray:
        return creation_string(list(self.ops), string, self.dim)

    def monomials(self, modes) -> list[np.ndarray]:
        """Basis of the algebra generated by ``a_l`` for ``l`` in ``modes``."""
        eye = np.eye(self.dim, dtype=complex)
        out = [eye]
        for l in modes:
            a = self.ops[l - 1]
            choices = [a, dagger(a), a @ dagger(a), dagger(a) @ a]
            out = [x @ c for x in out for c in choices]
        return out

    @cached_property
    def algebra_m(self) -> list[np.ndarray]:
        return self.monomials(range(1, self.k + 1))

    @cached_property
    def algebra_rest(self) -> list[np.ndarray]:
        return self.monomials(range(self.k + 1, 2 * self.k + 1))

    @property
    def grading_u(self) -> np.ndarray:
        """Grading of ``A(M)`` on the left factor ``C^{2^k}``."""
        return np.diag([(-1.0) ** len(s) for s in subsets(self.k)]).astype(complex)

    @property
    def density(self) -> np.ndarray:
        return np.diag(self.cfg.probabilities).astype(complex)

    def state(self) -> FaithfulEvenState:
        return FaithfulEvenState(self.density, self.grading_u)

    def reduce(self, x) -> np.ndarray:
        """Matrix of ``x`` in ``A(M) = M_{2^k} (x) 1``."""
        n = 2 ** self.k
        return np.einsum("ikjk->ij", np.asarray(x).reshape(n, n, n, n)) / n

    def mode(self, l: int) -> np.ndarray:
        """``a_l`` for ``l`` in ``M`` as a ``2^k x 2^k`` matrix."""
        if not 1 <= l <= self.k:
            raise ValueError("mode outside M")
        return self.reduce(self.ops[l - 1])


def build_frame(cfg: LatticeConfig, trivial_grading: bool = False) -> FockFrame:
    """Jordan-Wigner operators, grading, ``Lambda_mu = sum_s p_s^{1/2} f_{s iota(s)}`` and ``K``.

    ``trivial_grading`` replaces ``g`` by the identity (negative control only).
    """
    k = cfg.k
    modes = 2 * k
    dim = 4 ** k
    ops = jordan_wigner(modes)
    g = np.diag([(-1.0) ** bin(i).count("1") for i in range(dim)]).astype(complex)
    if trivial_grading:
        g = np.eye(dim, dtype=complex)
    lam = np.zeros(dim, dtype=complex)
    for s, p in zip(subsets(k), cfg.probabilities):
        lam += np.sqrt(p) * creation_string(ops, list(s) + [l + k for l in s], dim)
    K = np.zeros((dim, dim), dtype=complex)
    for s in subsets(k):
        for t in subsets(k):
            src = creation_string(ops, list(s) + [l + k for l in t], dim)
            dst = creation_string(ops, list(t) + [l + k for l in s], dim)
            K += (-1.0) ** ((len(s) + 1) * len(t)) * np.outer(dst, np.conj(src))
    return FockFrame(cfg, tuple(ops), g, lam, K)


def copying_unitary(frame: FockFrame) -> np.ndarray:
    """``K f_{s iota(t)} = (-1)^{(|s|+1)|t|} f_{t iota(s)}``."""
    return frame.K


def _span_angle(a: list[np.ndarray], b: list[np.ndarray]) -> float:
    qa, qb = span_of_matrices(a), span_of_matrices(b)
    if qa.shape[1] != qb.shape[1]:
        return float(np.pi / 2)
    return float(np.max(principal_angles(qa, qb)))


def modular_conjugation(frame: FockFrame) -> AntilinearOperator:
    """``J`` from the polar decomposition of ``S a Lambda = a^* Lambda`` on ``A(M)``."""
    lam = frame.lam
    cols = np.array([x @ lam for x in frame.algebra_m]).T
    cols_star = np.array([dagger(x) @ lam for x in frame.algebra_m]).T
    s = AntilinearOperator(cols_star @ np.linalg.pinv(np.conj(cols)))
    return antilinear_polar(s)[0]


def verify_lattice_standard_form(frame: FockFrame) -> dict:
    """Residuals of the standard-form facts of the lattice; ``report["ok"]`` summarizes."""
    k, dim, ops, g, lam, K = frame.k, frame.dim, frame.ops, frame.g, frame.lam, frame.K
    eye = np.eye(dim)
    car = 0.0
    for i, j in product(range(2 * k), repeat=2):
        ai, aj = ops[i], ops[j]
        car = max(car, np.linalg.norm(ai @ dagger(aj) + dagger(aj) @ ai - (i == j) * eye),
                  np.linalg.norm(ai @ aj + aj @ ai))
    parity = 0.0
    for m in range(2 * k + 1):
        for s in combinations(range(1, 2 * k + 1), m):
            v = frame.f(s)
            parity = max(parity, np.linalg.norm(g @ v - (-1.0) ** m * v))
    odd = max(np.linalg.norm(g @ a @ g + a) for a in ops)
    alg_m = frame.algebra_m
    rank_cyc = svd_rank(np.linalg.svd(np.array([x @ lam for x in alg_m]).T, compute_uv=False))
    J = modular_conjugation(frame)
    commutant = [J.conjugate_operator(x) for x in alg_m]       # A' = J A J
    rank_sep = svd_rank(np.linalg.svd(np.array([x @ lam for x in commutant]).T, compute_uv=False))
    comm_res = max(np.linalg.norm(x @ y - y @ x) for x in alg_m[:: max(1, len(alg_m) // 8)] for y in commutant)
    half = (eye + g) / 2 - 1j * (eye - g) / 2
    twisted = [half @ c @ dagger(half) for c in commutant]
    angle = _span_angle(twisted, frame.algebra_rest)
    n = 2 ** k
    state_res = max(abs(np.vdot(lam, x @ lam) - np.trace(frame.density @ frame.reduce(x))) for x in alg_m)
    kappa_res = max(np.linalg.norm(K @ ops[l] @ dagger(K) - ops[l + k]) for l in range(k))
    mu_k = max(abs(np.vdot(lam, y @ lam) - np.vdot(lam, dagger(K) @ y @ K @ lam)) for y in frame.algebra_rest)
    jk = J.matrix
    report = {
        "car": float(car),
        "parity": float(parity),
        "modes_odd": float(odd),
        "state": float(state_res),
        "cyclic_rank": int(rank_cyc),
        "separating_rank": int(rank_sep),
        "full_rank": int(dim),
        "commutant_residual": float(comm_res),
        "twisted_commutant_angle": angle,
        "K_unitary": float(np.linalg.norm(dagger(K) @ K - eye)),
        "K_fixes_lambda": float(np.linalg.norm(K @ lam - lam)),
        "K_squared_is_g": float(np.linalg.norm(K @ K - g)),
        "K_commutes_g": float(np.linalg.norm(K @ g - g @ K)),
        "kappa_modes": float(kappa_res),
        "copied_state": float(mu_k),
        "K_commutes_J": float(np.linalg.norm(K @ jk - jk @ np.conj(K))),
        "K_intertwines_J": float(np.linalg.norm(K @ jk - g @ jk @ np.conj(K))),
        "J_is_swap_conj": float(np.linalg.norm(jk - canonical_standard_form(n).swap)),
    }
    report["ok"] = bool(
        max(report["car"], report["parity"], report["modes_odd"]) <= 1e-12
        and report["state"] <= 1e-10
        and rank_cyc == dim and rank_sep == dim
        and angle <= 1e-8
        and max(report["K_fixes_lambda"], report["K_squared_is_g"], report["kappa_modes"],
                report["copied_state"], report["K_unitary"]) <= 1e-9)
    return report


def lattice_copying_map(frame: FockFrame) -> CopyingMap:
    mu = frame.state()
    return make_copying_map(canonical_standard_form(2 ** frame.k, mu.grading_u), mu, frame.K)


def to_graded_system(frame: FockFrame, dynamics: dict[str, Channel], coordinates, name: str = "lattice"
                     ) -> GradedSystem:
    """Reversible system on ``A(M) = M_{2^k}`` with the lattice copying map; ``theta`` is added."""
    cm = lattice_copying_map(frame)
    if not cm.is_mu_copying:
        raise StructureError("lattice K is not mu-copying")
    dyn = dict(dynamics)
    dyn[THETA_NAME] = cm.theta
    return GradedSystem(frame.state(), tuple(coordinates), dyn, cm, name)


def lattice_theta_residuals(frame: FockFrame) -> dict[str, float]:
    cm = lattice_copying_map(frame)
    return reversing_residuals(cm.theta, cm.mu)


def generalized_amplitude_damping(gamma: float, p: float) -> Channel:
    """Even single-mode channel (Heisenberg picture) whose invariant state is ``diag(p, 1-p)``."""
    c, s = np.sqrt(1 - gamma), np.sqrt(gamma)
    kraus = [np.sqrt(p) * np.array([[1, 0], [0, c]]), np.sqrt(p) * np.array([[0, s], [0, 0]]),
             np.sqrt(1 - p) * np.array([[c, 0], [0, 1]]), np.sqrt(1 - p) * np.array([[0, 0], [s, 0]])]
    return Channel.from_kraus(kraus)
