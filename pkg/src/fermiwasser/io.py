"""JSON formats for systems, channels, plans, lattice specs and reports.

Complex numbers are ``[re, im]`` pairs and matrices are row-major nested
arrays. Python's ``json`` writes floats with ``repr``, which round-trips every
double exactly, so a saved system reloads bit for bit.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .algebra import FaithfulEvenState, canonical_standard_form
from .car_lattice import LatticeConfig, build_frame, to_graded_system
from .channels import CHOI_CONVENTION, Channel
from .detailed_balance import make_copying_map
from .errors import ConfigError
from .transport import TAGS, TransportPlan, channel_from_raw, plan_from_channel, table_from_values
from .wasserstein import GradedSystem

SYSTEM_FORMAT = "fermiwasser.system/1"


def encode_matrix(m) -> list:
    m = np.asarray(m, dtype=complex)
    return np.stack([m.real, m.imag], axis=-1).tolist()


def decode_matrix(data) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"malformed matrix: {exc}") from exc
    if arr.ndim < 1 or arr.shape[-1] != 2:
        raise ConfigError("matrix entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def _field(data: dict, key: str):
    try:
        return data[key]
    except (KeyError, TypeError):
        raise ConfigError(f"missing field {key!r}") from None


def channel_to_dict(e: Channel) -> dict:
    return {"convention": CHOI_CONVENTION, "in_dim": e.in_dim, "out_dim": e.out_dim,
            "antimultiplicative": e.antimultiplicative, "choi": encode_matrix(e.choi)}


def channel_from_dict(data: dict, name: str | None = None) -> Channel:
    conv = data.get("convention", CHOI_CONVENTION)
    if conv != CHOI_CONVENTION:
        raise ConfigError(f"unsupported Choi convention {conv!r}")
    n, m = int(_field(data, "in_dim")), int(_field(data, "out_dim"))
    choi = decode_matrix(_field(data, "choi"))
    if choi.shape != (n * m, n * m):
        raise ConfigError(f"Choi matrix has shape {choi.shape}, expected {(n * m, n * m)}")
    return Channel.from_choi(choi, n, m, antimultiplicative=bool(data.get("antimultiplicative", False)),
                             name=name)


def state_to_dict(mu: FaithfulEvenState) -> dict:
    return {"density": encode_matrix(mu.density), "grading": encode_matrix(mu.grading_u)}


def state_from_dict(data: dict) -> FaithfulEvenState:
    grading = data.get("grading")
    return FaithfulEvenState(decode_matrix(_field(data, "density")),
                             None if grading is None else decode_matrix(grading))


def system_to_dict(sys: GradedSystem) -> dict:
    out = {"format": SYSTEM_FORMAT, "name": sys.name, "n": sys.n, **state_to_dict(sys.mu),
           "coordinates": [encode_matrix(k) for k in sys.coords],
           "dynamics": {nm: channel_to_dict(a) for nm, a in sys.dynamics.items()}}
    if sys.copying_map is not None:
        out["copying_unitary"] = encode_matrix(sys.copying_map.K)
    return out


def system_from_dict(data: dict) -> GradedSystem:
    if data.get("format", SYSTEM_FORMAT) != SYSTEM_FORMAT:
        raise ConfigError(f"unknown system format {data.get('format')!r}")
    mu = state_from_dict(data)
    coords = [decode_matrix(k) for k in _field(data, "coordinates")]
    dyn = {nm: channel_from_dict(c, nm) for nm, c in data.get("dynamics", {}).items()}
    cm = None
    if data.get("copying_unitary") is not None:
        alg = canonical_standard_form(mu.n, mu.grading_u)
        cm = make_copying_map(alg, mu, decode_matrix(data["copying_unitary"]))
    return GradedSystem(mu, tuple(coords), dyn, cm, data.get("name", ""))


def plan_to_dict(plan: TransportPlan) -> dict:
    return {"type": "channel", "kind": plan.kind, **channel_to_dict(plan.channel),
            "mu": state_to_dict(plan.mu), "nu": state_to_dict(plan.nu), "tags": sorted(plan.tags)}


def plan_from_dict(data: dict, tol: float = 1e-9) -> TransportPlan:
    """Channel plan files are validated; raw tables are rebuilt through the channel extraction."""
    kind = _field(data, "type")
    mu, nu = state_from_dict(_field(data, "mu")), state_from_dict(_field(data, "nu"))
    if kind == "channel":
        e = channel_from_dict(data)
    elif kind == "raw":
        try:
            table = table_from_values(decode_matrix(_field(data, "table")), mu, nu, data.get("kind", "usual"))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        e = channel_from_raw(table)
    else:
        raise ConfigError(f"plan type must be 'channel' or 'raw', got {kind!r}")
    plan = plan_from_channel(e, mu, nu, tol=tol)
    tags = set(data.get("tags", []))
    if not tags <= set(TAGS):
        raise ConfigError(f"unknown plan tags {sorted(tags - set(TAGS))}")
    if not tags <= plan.tags:
        raise ConfigError(f"plan does not carry the declared tags {sorted(tags - plan.tags)}")
    return plan


def lattice_from_dict(data: dict, name: str = "lattice"):
    """``{k, probabilities, dynamics, coordinates}`` -> (frame, reversible system or None).

    The system is built only when coordinates are given; ``theta`` is added to
    the dynamics automatically.
    """
    k = int(_field(data, "k"))
    probs = data.get("probabilities")
    cfg = LatticeConfig.uniform(k) if probs is None else LatticeConfig(k, tuple(probs))
    frame = build_frame(cfg)
    coords = [decode_matrix(c) for c in data.get("coordinates", [])]
    if not coords:
        return frame, None
    dyn = {nm: channel_from_dict(c, nm) for nm, c in data.get("dynamics", {}).items()}
    return frame, to_graded_system(frame, dyn, coords, data.get("name", name))


def lattice_to_dict(cfg: LatticeConfig, dynamics: dict[str, Channel] | None = None, coordinates=()) -> dict:
    return {"k": cfg.k, "probabilities": list(cfg.probabilities),
            "dynamics": {nm: channel_to_dict(a) for nm, a in (dynamics or {}).items()},
            "coordinates": [encode_matrix(c) for c in coordinates]}


def to_jsonable(obj: Any):
    """Reports may hold numpy scalars, complex numbers and arrays."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return encode_matrix(obj) if np.iscomplexobj(obj) else obj.tolist()
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), indent=1)


def load_json(path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None


def save_system(sys: GradedSystem, path) -> None:
    Path(path).write_text(json.dumps(system_to_dict(sys)))


def load_system(path) -> GradedSystem:
    return system_from_dict(load_json(path))


def load_pair(path) -> tuple[GradedSystem, GradedSystem]:
    """A pair file is ``{"A": system, "B": system}``."""
    data = load_json(path)
    return system_from_dict(_field(data, "A")), system_from_dict(_field(data, "B"))
