"""JSON/CSV serialisation for behaviors, certificates, schedules and configs."""

from __future__ import annotations

import csv
import io as _io
import json
from dataclasses import asdict, fields
from importlib import resources
from pathlib import Path

import numpy as np

from lfsim import qsim
from lfsim.behavior import Behavior
from lfsim.estimator import EstimatorInputs
from lfsim.ewfs import QA, QB, ScenarioConfig
from lfsim.lfpoly import LFCertificate
from lfsim.spacetime import Event, ProtocolSchedule, Timings

BEHAVIOR_HEADER = ("x", "y", "a", "b", "p")


class ConfigError(ValueError):
    """Malformed input file or unknown configuration key."""


# ---------------------------------------------------------------- behaviors


def behavior_to_csv(bh: Behavior) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BEHAVIOR_HEADER)
    for x, y, a, b, p in bh.rows():
        w.writerow([x, y, a, b, repr(p)])
    return buf.getvalue()


def behavior_from_csv(text: str) -> Behavior:
    reader = csv.reader(_io.StringIO(text))
    rows = [r for r in reader if r and any(cell.strip() for cell in r)]
    if not rows or tuple(c.strip() for c in rows[0]) != BEHAVIOR_HEADER:
        raise ConfigError(f"behavior CSV must start with the header {','.join(BEHAVIOR_HEADER)}")
    body = rows[1:]
    if len(body) != 16:
        raise ConfigError(f"behavior CSV needs exactly 16 data rows, got {len(body)}")
    try:
        parsed = [(int(x), int(y), int(a), int(b), float(p)) for x, y, a, b, p in body]
        return Behavior.from_rows(parsed)
    except ValueError as exc:
        raise ConfigError(f"bad behavior row: {exc}") from exc


def behavior_to_json(bh: Behavior) -> dict:
    return {"rows": [dict(zip(BEHAVIOR_HEADER, r)) for r in bh.rows()]}


def behavior_from_json(obj) -> Behavior:
    rows = obj.get("rows") if isinstance(obj, dict) else obj
    if not isinstance(rows, list):
        raise ConfigError("behavior JSON needs a 'rows' list")
    if len(rows) != 16:
        raise ConfigError(f"behavior JSON needs exactly 16 rows, got {len(rows)}")
    try:
        return Behavior.from_rows((r["x"], r["y"], r["a"], r["b"], r["p"]) for r in rows)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad behavior row: {exc}") from exc


def load_behavior(path: str | Path) -> Behavior:
    path = Path(path)
    text = _read(path)
    if path.suffix.lower() == ".json":
        return behavior_from_json(_parse_json(text, path))
    return behavior_from_csv(text)


# ------------------------------------------------------------- certificates


def certificate_to_dict(cert: LFCertificate) -> dict:
    out: dict = {"feasible": cert.feasible, "gap": cert.gap}
    if cert.feasible:
        out["weights"] = cert.weights.tolist()
        out["bob_given_c"] = [
            {"c": c, "y": y + 1, "b": bv, "p": float(cert.bob_given_c[c, ib, y])}
            for c in range(2)
            for y in range(2)
            for ib, bv in enumerate((1, -1))
        ]
        out["joint_given_c_x2"] = [
            {"c": c, "y": y + 1, "a": av, "b": bv, "p": float(cert.joint_given_c[c, ia, ib, y])}
            for c in range(2)
            for y in range(2)
            for ia, av in enumerate((1, -1))
            for ib, bv in enumerate((1, -1))
        ]
    else:
        variant, value = cert.violated_facet
        out["violated_facet"] = {
            "variant": variant,
            "chsh": value,
            "signs": cert.facet_signs.tolist(),
            "bound": 2.0,
        }
    return out


# ---------------------------------------------------------------- schedules


def schedule_to_json(s: ProtocolSchedule) -> dict:
    return {"T": s.T, "bob_offset": s.bob_offset, "events": [asdict(e) for e in s.events]}


def schedule_from_json(obj) -> ProtocolSchedule:
    if not isinstance(obj, dict) or "events" not in obj:
        raise ConfigError("schedule JSON needs 'T', 'bob_offset' and 'events'")
    try:
        events = tuple(
            Event(str(e["label"]), float(e["t"]), float(e["pos"]), float(e.get("duration", 0.0)))
            for e in obj["events"]
        )
        return ProtocolSchedule(events, float(obj["T"]), float(obj.get("bob_offset", 0.0)))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad schedule: {exc}") from exc


def timings_from_dict(obj: dict) -> Timings:
    return _build(Timings, obj, "timings")


# ------------------------------------------------------------------ configs

SCENARIO_KEYS = {
    "state",
    "amplitudes",
    "n_friend",
    "scramble_seed",
    "alice_x2_angle",
    "bob_angle_1",
    "bob_angle_2",
    "p_dep",
    "noise_point",
    "pullout_fraction",
}


def _initial_state(cfg: dict) -> qsim.QuantumState:
    if "amplitudes" in cfg:
        amps = cfg["amplitudes"]
        if not isinstance(amps, list) or len(amps) != 4:
            raise ConfigError("'amplitudes' must list 4 entries (real or [re, im])")
        vec = np.array([complex(*a) if isinstance(a, list) else complex(a) for a in amps])
        norm = np.linalg.norm(vec)
        if norm == 0:
            raise ConfigError("'amplitudes' must not all be zero")
        return qsim.QuantumState(vec / norm, (QA, QB))
    return qsim.bell_state((QA, QB), str(cfg.get("state", "phi+")))


def scenario_from_dict(cfg: dict) -> ScenarioConfig:
    unknown = set(cfg) - SCENARIO_KEYS
    if unknown:
        raise ConfigError(f"unknown scenario keys: {', '.join(sorted(unknown))}")
    default = ScenarioConfig()
    try:
        return ScenarioConfig(
            initial_state=_initial_state(cfg),
            n_friend=int(cfg.get("n_friend", default.n_friend)),
            scramble_seed=None if cfg.get("scramble_seed") is None else int(cfg["scramble_seed"]),
            alice_x2_angle=float(cfg.get("alice_x2_angle", default.alice_x2_angle)),
            bob_angles=(
                float(cfg.get("bob_angle_1", default.bob_angles[0])),
                float(cfg.get("bob_angle_2", default.bob_angles[1])),
            ),
            noise_p=float(cfg.get("p_dep", default.noise_p)),
            noise_point=str(cfg.get("noise_point", default.noise_point)),
            pullout_fraction=float(cfg.get("pullout_fraction", default.pullout_fraction)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def estimator_from_dict(cfg: dict) -> EstimatorInputs:
    return _build(EstimatorInputs, cfg, "estimator")


def _build(cls, cfg: dict, what: str):
    names = {f.name: f for f in fields(cls)}
    unknown = set(cfg) - set(names)
    if unknown:
        raise ConfigError(f"unknown {what} keys: {', '.join(sorted(unknown))}")
    try:
        return cls(**cfg)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def parse_override(text: str) -> tuple[str, object]:
    """``key=value`` with the value parsed as JSON when possible."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form key=value")
    key, raw = text.split("=", 1)
    key = key.strip()
    if not key:
        raise ConfigError(f"override {text!r} has an empty key")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def load_preset(name: str) -> dict:
    files = resources.files("lfsim") / "presets"
    path = files / f"{name}.json"
    if not path.is_file():
        available = sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".json"))
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(available)}")
    return json.loads(path.read_text())


def load_json(path: str | Path) -> dict:
    path = Path(path)
    return _parse_json(_read(path), path)


def _read(path: Path) -> str:
    try:
        return path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _parse_json(text: str, path: Path):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc


def rows_to_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = _io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    return buf.getvalue()


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    raise TypeError(f"cannot serialise {type(o).__name__}")
