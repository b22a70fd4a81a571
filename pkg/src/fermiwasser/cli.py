"""``fermiwasser`` command line: distances, property suites, FDB reports and the CAR lattice.

Exit codes: 0 ok, 1 a checked property failed, 2 bad configuration or input,
3 the SDP solver did not reach optimality.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from pathlib import Path

from . import io
from .car_lattice import LatticeConfig, build_frame, verify_lattice_standard_form
from .detailed_balance import check_fdb, fdb_deviation, identity_dynamics, symmetrized_dynamics
from .errors import ConfigError, FermiwasserError, SolverError
from .sdp import SdpOptions
from .suites import SUITES, run_suites
from .wasserstein import CLASSES, DEFAULT_OPTIONS, results_csv, wasserstein_all

EXIT_OK, EXIT_ASSERT, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3
FIXTURES = ("qubit_pair",)


def threads() -> int:
    raw = os.environ.get("FERMIWASSER_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"FERMIWASSER_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError("FERMIWASSER_THREADS must be at least 1")
    return n


def fixture_path(name: str) -> Path:
    if name not in FIXTURES:
        raise ConfigError(f"unknown fixture {name!r}; available: {', '.join(FIXTURES)}")
    return Path(str(resources.files("fermiwasser") / "data" / f"{name}.json"))


def _options(args) -> SdpOptions:
    return SdpOptions(tol_feas=args.tol_feas, tol_gap=args.tol_gap, max_iter=DEFAULT_OPTIONS.max_iter)


def _pair_from_args(args):
    """Two system files, one pair file, or a bundled fixture."""
    if args.fixture:
        return args.fixture, io.load_pair(fixture_path(args.fixture))
    paths = args.inputs
    if len(paths) == 1:
        return Path(paths[0]).stem, io.load_pair(paths[0])
    if len(paths) == 2:
        return f"{Path(paths[0]).stem},{Path(paths[1]).stem}", (io.load_system(paths[0]), io.load_system(paths[1]))
    raise ConfigError("give two system files, one pair file, or --fixture")


def _flat_csv(rows: list[dict]) -> str:
    buf = _io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(io.to_jsonable(rows))
    return buf.getvalue()


def _distance_job(label, pair, options, classes):
    res = wasserstein_all(pair[0], pair[1], options)
    return label, {c: res[c] for c in classes}


def _distance_payload(jobs, fmt: str):
    rows = [(label, r) for label, res in jobs for r in res.values()]
    if fmt == "csv":
        text = results_csv(rows)
    else:
        text = io.dumps([{"pair": label, **r.summary(), "chain": r.chain,
                          "plan_choi": r.solution.X} for label, r in rows])
    solved = all(r.optimal for _, r in rows)
    return text, solved


def cmd_distance(args) -> tuple[str, int]:
    label, pair = _pair_from_args(args)
    classes = [args.cls] if args.cls else list(CLASSES)
    text, solved = _distance_payload([_distance_job(label, pair, _options(args), classes)], args.format)
    return text, EXIT_OK if solved else EXIT_SOLVER


def cmd_report(args) -> tuple[str, int]:
    if not args.inputs:
        raise ConfigError("report needs one or more pair files")
    pairs = [(Path(p).stem, io.load_pair(p)) for p in args.inputs]
    classes = [args.cls] if args.cls else list(CLASSES)
    opts = _options(args)
    with ThreadPoolExecutor(max_workers=threads()) as pool:
        jobs = list(pool.map(lambda lp: _distance_job(lp[0], lp[1], opts, classes), pairs))
    text, solved = _distance_payload(jobs, args.format)
    return text, EXIT_OK if solved else EXIT_SOLVER


def cmd_verify(args) -> tuple[str, int]:
    try:
        checks = run_suites(args.seed, args.suite)
    except KeyError as exc:
        raise ConfigError(str(exc)) from None
    rows = [c.to_dict() for c in checks]
    text = _flat_csv(rows) if args.format == "csv" else io.dumps({"seed": args.seed, "checks": rows})
    return text, EXIT_OK if all(c.passed for c in checks) else EXIT_ASSERT


def cmd_fdb(args) -> tuple[str, int]:
    if args.construct:
        if len(args.inputs) != 1:
            raise ConfigError("--construct takes exactly one system file")
        sys_a = io.load_system(args.inputs[0])
        build = identity_dynamics if args.construct == "identity" else symmetrized_dynamics
        sys_b = build(sys_a)
    else:
        _, (sys_a, sys_b) = _pair_from_args(args)
    rep_a, rep_b = check_fdb(sys_a), check_fdb(sys_b)
    out = {"A": {"fdb_residual": rep_a.residual, "holds": rep_a.holds, "residuals": rep_a.kappa_form},
           "B": {"fdb_residual": rep_b.residual, "holds": rep_b.holds, "residuals": rep_b.kappa_form}}
    code = EXIT_OK
    if rep_b.holds:
        dev = fdb_deviation(sys_a, sys_b, _options(args))
        out.update(dev.to_dict())
        code = EXIT_OK if dev.ok else EXIT_ASSERT
    else:
        out["ok"] = False
        code = EXIT_ASSERT
    if args.format == "csv":
        rows = [{"bound": k, **v} for k, v in out.get("bounds", {}).items()]
        return _flat_csv(rows), code
    return io.dumps(out), code


def cmd_lattice(args) -> tuple[str, int]:
    if args.inputs:
        frame, system = io.lattice_from_dict(io.load_json(args.inputs[0]))
    else:
        cfg = LatticeConfig.uniform(args.k) if args.seed is None else LatticeConfig.random(args.k, args.seed)
        frame, system = build_frame(cfg), None
    rep = verify_lattice_standard_form(frame)
    rep = {"k": frame.k, "probabilities": list(frame.cfg.probabilities), **rep}
    if system is not None:
        fdb = check_fdb(system)
        rep["system_fdb_residual"] = fdb.residual
    if args.format == "csv":
        rows = [{"check": k, "value": v} for k, v in rep.items() if not isinstance(v, (list, dict))]
        return _flat_csv(rows), EXIT_OK if rep["ok"] else EXIT_ASSERT
    return io.dumps(rep), EXIT_OK if rep["ok"] else EXIT_ASSERT


COMMANDS = {"distance": cmd_distance, "verify": cmd_verify, "fdb": cmd_fdb, "lattice": cmd_lattice,
            "report": cmd_report}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--class", dest="cls", choices=CLASSES, help="restrict to one Wasserstein class")
    common.add_argument("--tol-gap", type=float, default=DEFAULT_OPTIONS.tol_gap)
    common.add_argument("--tol-feas", type=float, default=DEFAULT_OPTIONS.tol_feas)
    common.add_argument("--seed", type=int, default=None, help="seed for randomized suites")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    parser = argparse.ArgumentParser(prog="fermiwasser", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("distance", parents=[common], help="W values and optimal plan Choi matrices")
    p.add_argument("inputs", nargs="*", help="two system files or one pair file")
    p.add_argument("--fixture", choices=FIXTURES)
    p = sub.add_parser("report", parents=[common], help="results table over many pair files")
    p.add_argument("inputs", nargs="*")
    p = sub.add_parser("verify", parents=[common], help="seeded property suites")
    p.add_argument("--suite", action="append", choices=list(SUITES))
    p = sub.add_parser("fdb", parents=[common], help="detailed balance checks and deviation bounds")
    p.add_argument("inputs", nargs="*", help="systems A and B (B satisfying FDB), or one pair file")
    p.add_argument("--fixture", choices=FIXTURES)
    p.add_argument("--construct", choices=("identity", "symmetrized"), help="build B from A")
    p = sub.add_parser("lattice", parents=[common], help="build and verify the CAR lattice frame")
    p.add_argument("inputs", nargs="*", help="optional lattice spec file")
    p.add_argument("--k", type=int, default=2)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    if args.command == "verify" and args.seed is None:
        args.seed = 0
    try:
        threads()
        text, code = COMMANDS[args.command](args)
    except SolverError as exc:
        print(f"fermiwasser: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (FermiwasserError, OSError) as exc:
        print(f"fermiwasser: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    return code


def main() -> None:
    sys.exit(run())
