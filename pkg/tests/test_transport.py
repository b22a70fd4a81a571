import numpy as np
import pytest
from hypothesis import given

from fermiwasser.channels import Channel
from fermiwasser.errors import CompatibilityError, NotAPlanError, StructureError
from fermiwasser.gns import channel_via_projection, gns_of_plan, supercommutation_residual
from fermiwasser.sampling import parity_grading, random_compatible_channel, random_state, random_system
from fermiwasser.transport import (check_balance, channel_from_raw, diagonal_plan, fermionic_eval,
                                   fermionic_to_usual_table, marginal_residuals, plan_dual, plan_from_channel,
                                   plan_kms, plan_twisted, product_plan, raw_table, table_from_values,
                                   to_fermionic, to_usual, twisted_sign_formula, usual_to_fermionic_table)
from fermiwasser.wasserstein import cost
from strategies import seeds, small_n


def _plan(seed, n=2, m=2):
    rng = np.random.default_rng(seed)
    mu = random_state(n, rng, parity_grading(n - 1, 1))
    nu = random_state(m, rng, parity_grading(m - 1, 1))
    return rng, plan_from_channel(random_compatible_channel(mu, nu, rng), mu, nu)


@given(seeds, small_n, small_n)
def test_plan_marginals_and_tags(seed, n, m):
    _, plan = _plan(seed, n, m)
    assert {"plain", "graded", "fermionic"} <= plan.tags
    assert max(marginal_residuals(plan).values()) < 1e-10
    assert max(marginal_residuals(to_fermionic(plan)).values()) < 1e-10
    assert to_usual(to_fermionic(plan)).kind == "usual"


@given(seeds, small_n)
def test_raw_table_roundtrip_and_extraction(seed, n):
    _, plan = _plan(seed, n, 2)
    raw = raw_table(plan, "usual")
    ferm = usual_to_fermionic_table(raw)
    # the translated table is the fermionic tabulation of the same channel
    assert np.allclose(ferm.values, raw_table(to_fermionic(plan)).values, atol=1e-10)
    assert np.allclose(fermionic_to_usual_table(ferm).values, raw.values, atol=1e-12)
    assert channel_from_raw(raw).distance(plan.channel) < 1e-8
    rebuilt = table_from_values(raw.values, plan.mu, plan.nu)
    assert channel_from_raw(rebuilt).distance(plan.channel) < 1e-8


@given(seeds)
def test_twisted_sign_rule(seed):
    rng, plan = _plan(seed)
    fplan = to_fermionic(plan)
    alg_b = plan.alg_b
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    c = alg_b.twist(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    ap, am = np.diag(np.diag(a)), a - np.diag(np.diag(a))
    # only the odd-odd part picks up a sign
    assert abs(fermionic_eval(fplan, ap, c) - twisted_sign_formula(fplan, ap, c)) < 1e-10
    g = alg_b.g
    cm = (c - g @ c @ g) / 2
    assert abs(fermionic_eval(fplan, am, cm) + twisted_sign_formula(fplan, am, cm)) < 1e-10


@given(seeds)
def test_gns_reproduces_channel(seed):
    rng, plan = _plan(seed)
    for kind in ("usual", "fermionic"):
        gns = gns_of_plan(raw_table(plan, kind))
        assert gns.dim <= plan.mu.n ** 2 * plan.nu.n ** 2
        e, defect = channel_via_projection(gns)
        assert defect < 1e-8
        a = rng.normal(size=(2, 2))
        assert np.allclose(e(a), plan.channel(a), atol=1e-8)
    assert supercommutation_residual(gns_of_plan(raw_table(to_fermionic(plan))), rng) < 1e-9


def test_cost_norm_form_matches_closed_form():
    rng = np.random.default_rng(5)
    a, b = random_system(2, rng, d=2, dynamics=()), random_system(2, rng, d=2, dynamics=())
    plan = plan_from_channel(random_compatible_channel(a.mu, b.mu, rng), a.mu, b.mu)
    rep = cost(a, b, plan)
    assert rep.value >= 0 and rep.norm_form_gap < 1e-9


def test_plan_transforms():
    _, plan = _plan(9)
    for t in (plan_dual(plan), plan_kms(plan), plan_twisted(plan)):
        assert max(marginal_residuals(t).values()) < 1e-9
    assert plan_kms(plan_kms(plan)).channel.distance(plan.channel) < 1e-8
    assert plan_twisted(plan).kind == "fermionic"
    d = diagonal_plan(plan.nu)
    assert {"modular", "kms", "fermionic"} <= d.tags
    assert max(marginal_residuals(d).values()) < 1e-12
    prod = product_plan(plan.mu, plan.nu)
    assert "modular" in prod.tags


def test_balance_tags():
    rng = np.random.default_rng(1)
    sys_a = random_system(2, rng, dynamics=())
    rep, tagged = check_balance(product_plan(sys_a.mu, sys_a.mu), sys_a, sys_a)
    assert "balanced" in tagged.tags and rep.max_residual() < 1e-9
    sys_b = random_system(2, rng, dynamics=("alpha",))
    with pytest.raises(StructureError):
        check_balance(product_plan(sys_a.mu, sys_b.mu), sys_a, sys_b)


def test_invalid_plans():
    rng = np.random.default_rng(2)
    u = parity_grading(1, 1)
    mu, nu = random_state(2, rng, u), random_state(2, rng, u)
    with pytest.raises(NotAPlanError):
        plan_from_channel(Channel.from_function(lambda a: 2 * a, 2), mu, mu)
    with pytest.raises(NotAPlanError):
        plan_from_channel(Channel.from_function(lambda a: a.T, 2), mu, mu)
    with pytest.raises(CompatibilityError):
        plan_from_channel(Channel.identity(2), mu, nu)
    raw = raw_table(product_plan(mu, nu))
    bad = raw.values.copy()
    bad[0, 0] += 0.5
    with pytest.raises(NotAPlanError):
        channel_from_raw(table_from_values(bad, mu, nu))
    with pytest.raises(ValueError):
        table_from_values(bad[:, :2], mu, nu)
    with pytest.raises(StructureError):
        fermionic_to_usual_table(raw)
