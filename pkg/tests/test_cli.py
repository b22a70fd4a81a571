import json
import sys

import numpy as np
import pytest

from fermiwasser import io
from fermiwasser.cli import EXIT_ASSERT, EXIT_CONFIG, EXIT_OK, EXIT_SOLVER, fixture_path, run
from fermiwasser.detailed_balance import random_reversible_system
from fermiwasser.errors import SolverError
from fermiwasser.wasserstein import transport_sdp
from oracles import admm_sdp

# W of the bundled qubit pair; all three classes coincide on it.  Frozen from
# the interior-point solve and confirmed by the first-order oracle below.
QUBIT_PAIR_W = 1.45782815761


def test_fixture_distance_csv(capsys):
    assert run(["distance", "--fixture", "qubit_pair", "--class", "Fsigmasigma", "--format", "csv"]) == EXIT_OK
    header, row = capsys.readouterr().out.strip().splitlines()
    assert header.startswith("pair,class,value,status")
    fields = row.split(",")
    assert fields[:2] == ["qubit_pair", "Fsigmasigma"] and fields[3] == "optimal"
    assert float(fields[2]) == pytest.approx(QUBIT_PAIR_W, abs=1e-9)


def test_fixture_value_against_oracle():
    a, b = io.load_pair(fixture_path("qubit_pair"))
    prob, const = transport_sdp(a, b, "Fsigmasigma")
    value, _, _ = admm_sdp(prob.objective, prob.constraint_mats, prob.rhs)
    assert np.sqrt(const + value) == pytest.approx(QUBIT_PAIR_W, abs=1e-6)


def test_distance_json_and_files(tmp_path, capsys):
    rng = np.random.default_rng(4)
    a, b = random_reversible_system(2, rng, name="A"), random_reversible_system(2, rng, name="B")
    io.save_system(a, tmp_path / "a.json")
    io.save_system(b, tmp_path / "b.json")
    out = tmp_path / "r.json"
    assert run(["distance", str(tmp_path / "a.json"), str(tmp_path / "b.json"), "--out", str(out)]) == EXIT_OK
    data = json.loads(out.read_text())
    assert [d["class"] for d in data] == ["F", "Fsigma", "Fsigmasigma"]
    assert all(d["status"] == "optimal" for d in data)
    assert np.array(data[0]["plan_choi"]).shape == (4, 4, 2)


def test_report_with_threads(tmp_path, capsys, monkeypatch):
    pair = tmp_path / "p.json"
    pair.write_text(fixture_path("qubit_pair").read_text())
    monkeypatch.setenv("FERMIWASSER_THREADS", "2")
    assert run(["report", str(pair), str(pair), "--class", "F", "--format", "csv"]) == EXIT_OK
    assert len(capsys.readouterr().out.strip().splitlines()) == 3
    monkeypatch.setenv("FERMIWASSER_THREADS", "zero")
    assert run(["report", str(pair)]) == EXIT_CONFIG


def test_verify_deterministic(capsys):
    assert run(["verify", "--suite", "modular", "--suite", "duals", "--seed", "5"]) == EXIT_OK
    first = capsys.readouterr().out
    assert run(["verify", "--suite", "modular", "--suite", "duals", "--seed", "5"]) == EXIT_OK
    assert capsys.readouterr().out == first
    assert all(c["pass"] for c in json.loads(first)["checks"])


def test_fdb_and_lattice(tmp_path, capsys):
    assert run(["fdb", "--fixture", "qubit_pair"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["ok"]
    a = random_reversible_system(2, np.random.default_rng(2))
    io.save_system(a, tmp_path / "a.json")
    assert run(["fdb", str(tmp_path / "a.json"), "--construct", "identity", "--format", "csv"]) == EXIT_OK
    capsys.readouterr()
    # A itself does not satisfy FDB, so using it as the comparison system is an assertion failure
    assert run(["fdb", str(tmp_path / "a.json"), str(tmp_path / "a.json")]) == EXIT_ASSERT
    capsys.readouterr()
    assert run(["lattice", "--k", "2"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["ok"]


def test_exit_codes(tmp_path, capsys):
    assert run(["distance", str(tmp_path / "missing.json")]) == EXIT_CONFIG
    assert run(["bogus"]) == EXIT_CONFIG
    assert run(["verify", "--suite", "nope"]) == EXIT_CONFIG
    assert run(["lattice", "--k", "0"]) == EXIT_CONFIG
    assert run(["distance"]) == EXIT_CONFIG


def test_solver_exit_code(monkeypatch, capsys):
    # the package re-exports a function of the same name, so go through sys.modules
    wmod = sys.modules["fermiwasser.wasserstein"]
    real_solve = wmod.solve

    def stalled(prob, seed=None):
        sol = real_solve(prob, seed=seed)
        sol.status = "max_iter"
        return sol

    monkeypatch.setattr(wmod, "solve", stalled)
    assert run(["distance", "--fixture", "qubit_pair", "--format", "csv"]) == EXIT_SOLVER
    assert "max_iter" in capsys.readouterr().out

    def broken(*args, **kwargs):
        raise SolverError("factorization failed")

    monkeypatch.setattr("fermiwasser.cli.wasserstein_all", broken)
    assert run(["distance", "--fixture", "qubit_pair"]) == EXIT_SOLVER
