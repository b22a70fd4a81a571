import json

import numpy as np
import pytest
from hypothesis import given, settings

from fermiwasser.sdp import SdpProblem, embed, feasible_point, solve, unembed
from oracles import admm_sdp
from strategies import complex_matrix, seeds


@given(seeds)
def test_embedding_roundtrip(seed):
    rng = np.random.default_rng(seed)
    x, a = complex_matrix(rng, 3), complex_matrix(rng, 3)
    assert np.allclose(unembed(embed(x)), x)
    # the real embedding doubles the real trace pairing
    assert np.isclose(np.trace(embed(a).T @ embed(x)), 2 * np.vdot(a, x).real)


@given(seeds)
def test_min_eigenvalue_program(seed):
    """min Re Tr(C X) over density matrices is the smallest eigenvalue of C."""
    rng = np.random.default_rng(seed)
    c = complex_matrix(rng, 3)
    c = c + c.conj().T
    p = SdpProblem.from_pairs(c, [(np.eye(3), 1.0)])
    sol = solve(p)
    assert sol.optimal
    assert abs(sol.value - np.linalg.eigvalsh(c)[0]) < 1e-8
    assert np.linalg.eigvalsh(sol.X)[0] > -1e-10 and p.residual(sol.X) < 1e-9


@settings(max_examples=5)
@given(seeds)
def test_against_first_order_oracle(seed):
    rng = np.random.default_rng(seed)
    d = 3
    c = complex_matrix(rng, d)
    c = c + c.conj().T
    mats = [np.eye(d)]
    for _ in range(3):
        a = complex_matrix(rng, d)
        mats.append(a + a.conj().T)
    x0 = np.eye(d) / d
    rhs = np.array([np.vdot(a, x0).real for a in mats])
    p = SdpProblem(c, np.array(mats), rhs)
    sol = solve(p, seed=x0)
    ref, _, _ = admm_sdp(c, np.array(mats), rhs)
    assert sol.optimal
    assert abs(sol.value - ref) < 1e-5 * (1 + abs(ref))


def test_infeasible_and_phase_one():
    e = np.eye(2)
    p = SdpProblem.from_pairs(np.zeros((2, 2)), [(e, 1.0), (2 * e, 3.0)])
    assert solve(p).status == "infeasible"
    assert feasible_point(p) is None
    q = SdpProblem.from_pairs(np.zeros((2, 2)), [(e, 1.0), (np.diag([1.0, -1.0]), 0.2)])
    x = feasible_point(q)
    assert q.residual(x) < 1e-8 and np.linalg.eigvalsh(x)[0] > 0


def test_to_json_and_validation():
    p = SdpProblem.from_pairs(np.diag([1.0, 2.0]), [(np.eye(2), 1.0)])
    data = json.loads(p.to_json())
    assert data["constraints"][0]["b"] == 1.0
    assert np.array(data["objective"]).shape == (2, 2, 2)
    with pytest.raises(ValueError):
        SdpProblem(np.ones((2, 3)), np.zeros((0, 2, 3)), [])
    with pytest.raises(ValueError):
        SdpProblem(np.eye(2), np.array([np.eye(2)]), [1.0, 2.0])
