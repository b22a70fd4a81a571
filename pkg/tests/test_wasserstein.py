import numpy as np
import pytest

from fermiwasser.algebra import FaithfulEvenState
from fermiwasser.channels import Channel
from fermiwasser.errors import CompatibilityError, StructureError
from fermiwasser.sampling import random_state, random_system
from fermiwasser.wasserstein import (CLASSES, GradedSystem, extract_isomorphism, generates_algebra, results_csv,
                                     wasserstein, wasserstein_all)

SZ = np.diag([1.0, -1.0])


@pytest.fixture(scope="module")
def pair():
    rng = np.random.default_rng(21)
    return random_system(2, rng, d=2, dynamics=(), name="A"), random_system(2, rng, d=2, dynamics=(), name="B")


def test_self_distance_and_chain(pair):
    a, b = pair
    res = wasserstein_all(a, b)
    vals = [res[c].value for c in CLASSES]
    assert vals[0] <= vals[1] + 1e-6 <= vals[2] + 2e-6
    assert all(r.optimal and r.chain["ok"] for r in res.values())
    assert wasserstein(b, b, "Fsigmasigma").value < 1e-6
    # the plan is a valid plan achieving the value
    r = res["Fsigmasigma"]
    assert r.plan is not None and abs(r.cost - r.value ** 2) < 1e-9


def test_fsigmasigma_symmetric(pair):
    a, b = pair
    assert abs(wasserstein(a, b).value - wasserstein(b, a).value) < 1e-5


def test_results_csv(pair):
    a, b = pair
    r = wasserstein(a, b, "F", check_chain=False)
    lines = results_csv([("ab", r)]).strip().splitlines()
    assert lines[0] == "pair,class,value,status,primal_residual,dual_gap"
    row = lines[1].split(",")
    assert row[:2] == ["ab", "F"] and row[3] == "optimal"
    assert float(row[2]) == pytest.approx(r.value, rel=1e-10)
    with pytest.raises(ValueError):
        wasserstein(a, b, "G")


def test_system_validation():
    mu = FaithfulEvenState(np.diag([0.4, 0.6]), SZ)
    with pytest.raises(StructureError):
        GradedSystem(mu, ())
    with pytest.raises(StructureError):
        GradedSystem(mu, (np.eye(3),))
    x = np.array([[0.0, 1.0], [1.0, 0.0]])
    mixing = Channel.from_function(lambda a: (a + x @ a @ x) / 2 + 0.2 * np.trace(a @ SZ) * x, 2)
    with pytest.raises(StructureError):
        GradedSystem(FaithfulEvenState(np.eye(2) / 2, SZ), (SZ,), {"x": mixing})
    phase = Channel.unitary(np.diag([1.0, 1j]))
    s = GradedSystem(mu, (SZ,), {"p": phase})
    assert s.is_hermitian and not s.with_coords([np.array([[0, 1], [0, 0]])]).is_hermitian
    with pytest.raises(CompatibilityError):
        GradedSystem(FaithfulEvenState(np.eye(2) / 2, SZ), (SZ,), {"p": Channel.state_map(np.diag([0.3, 0.7]), 2)})
    assert not FaithfulEvenState(np.array([[0.5, 0.1], [0.1, 0.5]]), SZ).even


def test_generates_algebra():
    x = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert generates_algebra([x, SZ], 2)
    assert not generates_algebra([SZ], 2)


def test_extract_isomorphism_errors():
    rng = np.random.default_rng(4)
    a = random_system(2, rng, dynamics=(), d=2)
    with pytest.raises(StructureError):
        extract_isomorphism(a, a)  # random coordinates are not hermitian
    h = random_system(3, rng, d=2, dynamics=(), name="H")
    with pytest.raises(StructureError):
        extract_isomorphism(a, h)
    mu = random_state(2, rng, SZ)
    diag_only = GradedSystem(mu, (SZ,))
    with pytest.raises(StructureError):
        extract_isomorphism(diag_only, diag_only)
