import json

import numpy as np
import pytest
from hypothesis import given

from fermiwasser import io
from fermiwasser.car_lattice import LatticeConfig, generalized_amplitude_damping
from fermiwasser.detailed_balance import random_reversible_system
from fermiwasser.errors import ConfigError, NotAPlanError
from fermiwasser.sampling import parity_grading, random_compatible_channel, random_state, random_system
from fermiwasser.transport import plan_from_channel, raw_table
from strategies import complex_matrix, seeds


@given(seeds)
def test_matrix_encoding_bit_exact(seed):
    m = complex_matrix(np.random.default_rng(seed), 3, 2)
    back = io.decode_matrix(json.loads(json.dumps(io.encode_matrix(m))))
    assert np.array_equal(back, m)


@given(seed=seeds)
def test_system_roundtrip_bit_exact(tmp_path_factory, seed):
    rng = np.random.default_rng(seed)
    s = random_reversible_system(2 + seed % 2, rng, d=2)
    path = tmp_path_factory.mktemp("sys") / "a.json"
    io.save_system(s, path)
    t = io.load_system(path)
    assert np.array_equal(t.mu.density, s.mu.density) and np.array_equal(t.mu.grading_u, s.mu.grading_u)
    assert all(np.array_equal(x, y) for x, y in zip(t.coords, s.coords))
    assert all(np.array_equal(t.dynamics[k].choi, s.dynamics[k].choi) for k in s.dynamics)
    assert np.array_equal(t.copying_map.K, s.copying_map.K)
    assert t.dynamics["theta"].antimultiplicative


def test_plan_roundtrip_channel_and_raw():
    rng = np.random.default_rng(3)
    u = parity_grading(1, 1)
    mu, nu = random_state(2, rng, u), random_state(2, rng, u)
    plan = plan_from_channel(random_compatible_channel(mu, nu, rng), mu, nu)
    d = json.loads(json.dumps(io.plan_to_dict(plan)))
    assert io.plan_from_dict(d).channel.distance(plan.channel) == 0.0
    raw = {"type": "raw", "mu": d["mu"], "nu": d["nu"], "table": io.encode_matrix(raw_table(plan).values)}
    assert io.plan_from_dict(raw).channel.distance(plan.channel) < 1e-8
    with pytest.raises(ConfigError):
        io.plan_from_dict({**d, "tags": ["bogus"]})
    with pytest.raises(ConfigError):
        io.plan_from_dict({**d, "tags": ["kms"]})
    with pytest.raises(ConfigError):
        io.plan_from_dict({**raw, "table": raw["table"][:2]})
    with pytest.raises(ConfigError):
        io.plan_from_dict({**d, "type": "other"})
    bad = np.array(raw["table"])
    bad[0, 0, 0] += 1.0
    with pytest.raises(NotAPlanError):
        io.plan_from_dict({**raw, "table": bad.tolist()})


def test_lattice_spec():
    cfg = LatticeConfig(1, (0.3, 0.7))
    spec = io.lattice_to_dict(cfg, {"gad": generalized_amplitude_damping(0.2, 0.3)}, [np.diag([1.0, -1.0])])
    frame, sys_l = io.lattice_from_dict(json.loads(json.dumps(spec)))
    assert frame.cfg == cfg and set(sys_l.dynamics) == {"gad", "theta"}
    frame2, none = io.lattice_from_dict({"k": 2})
    assert none is None and frame2.dim == 16


def test_malformed_inputs(tmp_path):
    with pytest.raises(ConfigError):
        io.decode_matrix([[1.0, 2.0, 3.0]])
    with pytest.raises(ConfigError):
        io.decode_matrix([["a", "b"]])
    with pytest.raises(ConfigError):
        io.system_from_dict({"format": "other/9"})
    with pytest.raises(ConfigError):
        io.system_from_dict({"density": io.encode_matrix(np.eye(2) / 2)})
    with pytest.raises(ConfigError):
        io.channel_from_dict({"convention": "other", "in_dim": 1, "out_dim": 1, "choi": [[[1, 0]]]})
    with pytest.raises(ConfigError):
        io.channel_from_dict({"in_dim": 2, "out_dim": 2, "choi": [[[1, 0]]]})
    with pytest.raises(ConfigError):
        io.load_json(tmp_path / "missing.json")
    (tmp_path / "bad.json").write_text("{not json")
    with pytest.raises(ConfigError):
        io.load_json(tmp_path / "bad.json")
    with pytest.raises(ConfigError):
        io.lattice_from_dict({"k": 1, "probabilities": [0.2, 0.2]})


def test_jsonable_reports():
    s = random_system(2, np.random.default_rng(0))
    out = json.loads(io.dumps({"x": np.float64(1.5), "b": np.bool_(True), "z": 1j, "m": np.eye(2),
                               "c": s.mu.density.astype(complex)}))
    assert out["x"] == 1.5 and out["b"] is True and out["z"] == [0.0, 1.0]
    assert np.array(out["c"]).shape == (2, 2, 2)
