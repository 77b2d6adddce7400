"""Scenario documents: parsing, validation, serialisation and dispatch.

A scenario is a JSON object::

    {
      "name": "paper_fig2",
      "description": "...",                       # optional
      "protocol": {"kind": "sign"},               # or unit_vector | linear |
                                                  # {"kind": "saturated", "radius": 0.1}
      "topologies": {
        "G1": {"weights": [[0, 1], [1, 0]]},      # dense, row i = what agent i reads
        "G2": {"n": 2, "edges": [{"from": 0, "to": 1, "weight": 1.0}]}
      },
      "schedule": {"mode": "cycle", "window": 0.8,
                   "entries": [{"topology": "G1", "dwell": 0.4}, ...]},
      "initial_state": {"values": [[0.0], [4.0]]}
                    or {"uniform": {"low": 0, "high": 10, "n": 10, "d": 1}},
      "sim": {"dt": 0.001, "t_max": 10, "tolerance": 0.01, "delay": 0,
              "seed": 0, "stop_on_converge": true},
      "application": {"kind": "consensus"}        # see APPLICATION_KEYS
    }

An edge ``{"from": j, "to": i}`` means agent ``i`` listens to ``j``. Random
initial states draw from ``sim.seed``. For the iterative applications
(estimation, optimisation) dwell times count iterations.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np

from . import applications as apps
from .errors import DomainError, ScenarioParseError, ScenarioValidationError
from .graph import SwitchingSchedule, Topology
from .protocol import KINDS, LINEAR, SATURATED, SIGN, UNIT_VECTOR, ProtocolKind
from .simulator import SimConfig, Trace, run

CONSENSUS = "consensus"
RENDEZVOUS = "rendezvous"
ESTIMATION = "estimation"
OPTIMIZATION = "optimization"
FORMATION = "formation"

APPLICATION_KEYS = {
    CONSENSUS: {"kind"},
    RENDEZVOUS: {"kind"},
    ESTIMATION: {"kind", "A", "H", "process_std", "measurement_std", "gain", "x_true", "steps"},
    OPTIMIZATION: {"kind", "objectives", "gamma", "alpha0", "step_schedule", "iterations"},
    FORMATION: {"kind", "distance", "distances", "attraction", "damping", "speed", "velocities"},
}
ALLOWED_PROTOCOLS = {
    CONSENSUS: {SIGN, SATURATED, LINEAR, UNIT_VECTOR},
    RENDEZVOUS: {UNIT_VECTOR},
    ESTIMATION: {UNIT_VECTOR},
    OPTIMIZATION: {SIGN},
    FORMATION: {UNIT_VECTOR},
}
TOP_KEYS = {"name", "description", "protocol", "topologies", "schedule", "initial_state", "sim", "application"}
SIM_KEYS = {"dt", "t_max", "tolerance", "delay", "seed", "stop_on_converge"}


@dataclass(frozen=True)
class Scenario:
    name: str
    protocol: ProtocolKind
    schedule: SwitchingSchedule
    initial: dict
    sim: SimConfig
    application: str = CONSENSUS
    params: dict = field(default_factory=dict)
    window: float | None = None
    description: str = ""

    @property
    def n(self) -> int:
        return self.schedule.n

    @property
    def union_window(self) -> float:
        """Window for the union spanning-tree certificate (defaults to one period)."""
        return self.window if self.window is not None else self.schedule.period

    def initial_state(self) -> np.ndarray:
        if "values" in self.initial:
            x = np.array(self.initial["values"], dtype=float)
            return x[:, None] if x.ndim == 1 else x
        u = self.initial["uniform"]
        rng = np.random.default_rng(self.sim.seed)
        return rng.uniform(u["low"], u["high"], size=(u["n"], u.get("d", 1)))

    def with_overrides(self, seed=None, dt=None, t_max=None) -> "Scenario":
        changes = {k: v for k, v in (("seed", seed), ("dt", dt), ("t_max", t_max)) if v is not None}
        return replace(self, sim=replace(self.sim, **changes)) if changes else self

    def with_protocol(self, protocol: ProtocolKind) -> "Scenario":
        return replace(self, protocol=protocol)

    # application objects

    def objectives(self) -> list[apps.LocalObjective]:
        return [apps.LocalObjective(o["q"], o["b"]) for o in self.params["objectives"]]

    def system_model(self) -> apps.LinearSystemModel:
        p = self.params
        return apps.LinearSystemModel(
            A=p["A"], H=tuple(p["H"]), process_std=p.get("process_std", 0.0),
            measurement_std=p.get("measurement_std", 0.0),
        )

    def formation_spec(self) -> apps.FormationSpec:
        p = self.params
        kw = {k: p[k] for k in ("attraction", "damping", "speed") if k in p}
        if "distances" in p:
            return apps.FormationSpec(np.array(p["distances"], dtype=float), **kw)
        return apps.FormationSpec.uniform(self.n, p["distance"], **kw)


# -- serialisation ---------------------------------------------------------------

def _num(x):
    x = float(x)
    return int(x) if x.is_integer() and abs(x) < 2**53 else x


def topology_to_dict(t: Topology) -> dict:
    return {"weights": [[_num(v) for v in row] for row in t.weights]}


def scenario_to_dict(s: Scenario) -> dict:
    protocol = {"kind": s.protocol.tag}
    if s.protocol.radius is not None:
        protocol["radius"] = s.protocol.radius
    schedule = {
        "mode": s.schedule.mode,
        "entries": [{"topology": tid, "dwell": dwell} for tid, dwell in s.schedule.entries],
    }
    if s.window is not None:
        schedule["window"] = s.window
    doc = {
        "name": s.name,
        "description": s.description,
        "protocol": protocol,
        "topologies": {tid: topology_to_dict(t) for tid, t in s.schedule.table.items()},
        "schedule": schedule,
        "initial_state": copy.deepcopy(s.initial),
        "sim": {
            "dt": s.sim.dt, "t_max": s.sim.t_max, "tolerance": s.sim.tolerance,
            "delay": s.sim.delay, "seed": s.sim.seed, "stop_on_converge": s.sim.stop_on_converge,
        },
        "application": {"kind": s.application, **copy.deepcopy(s.params)},
    }
    if not s.description:
        del doc["description"]
    return doc


def dump_scenario(s: Scenario) -> str:
    return json.dumps(scenario_to_dict(s), indent=2) + "\n"


# -- parsing and validation ------------------------------------------------------

def parse_scenario(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(exc.msg, exc.lineno, exc.colno) from None
    return scenario_from_dict(doc)


def load_scenario(path) -> Scenario:
    return parse_scenario(Path(path).read_text(encoding="utf-8"))


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _matrix(value, where, errors, square=False):
    """Return a float array or record why ``value`` is not a numeric matrix."""
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        errors.append(f"{where}: must be a non-empty list of rows")
        return None
    if len({len(r) for r in value}) != 1 or not value[0]:
        errors.append(f"{where}: rows must be non-empty and of equal length")
        return None
    if not all(_is_number(v) for r in value for v in r):
        errors.append(f"{where}: entries must be finite numbers")
        return None
    m = np.array(value, dtype=float)
    if square and m.shape[0] != m.shape[1]:
        errors.append(f"{where}: must be square, got {m.shape[0]}x{m.shape[1]}")
        return None
    return m


def _parse_topology(tid, spec, errors) -> Topology | None:
    where = f"topologies.{tid}"
    if not isinstance(spec, dict):
        errors.append(f"{where}: must be an object with 'weights' or 'n' + 'edges'")
        return None
    if "weights" in spec:
        w = _matrix(spec["weights"], f"{where}.weights", errors, square=True)
        if w is None:
            return None
    elif "edges" in spec:
        n = spec.get("n")
        if not _is_int(n) or n < 1:
            errors.append(f"{where}.n: must be a positive integer")
            return None
        w = np.zeros((n, n))
        for k, e in enumerate(spec["edges"] if isinstance(spec["edges"], list) else [None]):
            ew = f"{where}.edges[{k}]"
            if not isinstance(e, dict) or not {"from", "to"} <= e.keys():
                errors.append(f"{ew}: must be an object with 'from', 'to' and optional 'weight'")
                continue
            src, dst, weight = e["from"], e["to"], e.get("weight", 1.0)
            if not (_is_int(src) and _is_int(dst) and 0 <= src < n and 0 <= dst < n):
                errors.append(f"{ew}: agent indices must be integers in [0, {n})")
                continue
            if not _is_number(weight):
                errors.append(f"{ew}.weight: must be a finite number")
                continue
            w[dst, src] = weight
    else:
        errors.append(f"{where}: needs either 'weights' or 'edges'")
        return None
    bad = len(errors)
    if np.any(w < 0):
        i, j = np.argwhere(w < 0)[0]
        errors.append(f"{where}: weights must be nonnegative (W[{i}][{j}] = {w[i, j]:g})")
    if np.any(np.diag(w) != 0):
        errors.append(f"{where}: self-loops are not allowed (diagonal must be zero)")
    if len(errors) > bad:
        return None
    return Topology(w)


def _parse_protocol(spec, errors) -> ProtocolKind | None:
    if not isinstance(spec, dict) or spec.get("kind") not in KINDS:
        errors.append(f"protocol.kind: must be one of {list(KINDS)}")
        return None
    try:
        return ProtocolKind(spec["kind"], spec.get("radius"))
    except DomainError as exc:
        errors.append(f"protocol: {exc}")
        return None


def _parse_schedule(spec, table, errors):
    if not isinstance(spec, dict) or not isinstance(spec.get("entries"), list) or not spec["entries"]:
        errors.append("schedule.entries: must be a non-empty list")
        return None, None
    mode = spec.get("mode", "cycle")
    ok = True
    if mode not in ("cycle", "once"):
        errors.append(f"schedule.mode: must be 'cycle' or 'once', got {mode!r}")
        ok = False
    entries = []
    for k, e in enumerate(spec["entries"]):
        where = f"schedule.entries[{k}]"
        if not isinstance(e, dict):
            errors.append(f"{where}: must be an object with 'topology' and 'dwell'")
            ok = False
            continue
        tid, dwell = e.get("topology"), e.get("dwell")
        if tid not in table:
            errors.append(f"{where}.topology: {tid!r} is not defined in topologies")
            ok = False
        if not _is_number(dwell) or dwell <= 0:
            errors.append(f"{where}.dwell: must be a positive number, got {dwell!r}")
            ok = False
        entries.append((tid, dwell))
    window = spec.get("window")
    if window is not None and (not _is_number(window) or window <= 0):
        errors.append(f"schedule.window: must be a positive number, got {window!r}")
        ok = False
    sizes = {t.n for t in table.values() if t is not None}
    if len(sizes) > 1:
        errors.append(f"topologies: all topologies must share the same n, got {sorted(sizes)}")
        ok = False
    if not ok or any(table.get(tid) is None for tid, _ in entries):
        return None, window
    used = {tid: table[tid] for tid, _ in entries}
    return SwitchingSchedule(entries=tuple(entries), table=used, mode=mode), window


def _parse_initial(spec, errors):
    if not isinstance(spec, dict) or ("values" in spec) == ("uniform" in spec):
        errors.append("initial_state: must have exactly one of 'values' or 'uniform'")
        return None, None
    if "values" in spec:
        v = spec["values"]
        if isinstance(v, list) and v and all(_is_number(x) for x in v):
            return {"values": list(v)}, (len(v), 1)
        m = _matrix(v, "initial_state.values", errors)
        return (None, None) if m is None else ({"values": v}, m.shape)
    u = spec["uniform"]
    if not isinstance(u, dict):
        errors.append("initial_state.uniform: must be an object")
        return None, None
    bad = len(errors)
    if not (_is_number(u.get("low")) and _is_number(u.get("high")) and u["low"] <= u["high"]):
        errors.append("initial_state.uniform: needs numeric low <= high")
    if not _is_int(u.get("n")) or u["n"] < 1:
        errors.append("initial_state.uniform.n: must be a positive integer")
    if not _is_int(u.get("d", 1)) or u.get("d", 1) < 1:
        errors.append("initial_state.uniform.d: must be a positive integer")
    if len(errors) > bad:
        return None, None
    return {"uniform": dict(u)}, (u["n"], u.get("d", 1))


def _parse_sim(spec, errors) -> SimConfig | None:
    if spec is None:
        spec = {}
    if not isinstance(spec, dict):
        errors.append("sim: must be an object")
        return None
    unknown = set(spec) - SIM_KEYS
    if unknown:
        errors.append(f"sim: unknown keys {sorted(unknown)}")
    kw = {k: spec[k] for k in SIM_KEYS & spec.keys()}
    bad = len(errors)
    for key in ("dt", "t_max", "tolerance"):
        if key in kw and not _is_number(kw[key]):
            errors.append(f"sim.{key}: must be a finite number")
    for key in ("delay", "seed"):
        if key in kw and not _is_int(kw[key]):
            errors.append(f"sim.{key}: must be an integer")
    if "stop_on_converge" in kw and not isinstance(kw["stop_on_converge"], bool):
        errors.append("sim.stop_on_converge: must be true or false")
    if len(errors) > bad:
        return None
    try:
        return SimConfig(**kw)
    except DomainError as exc:
        errors.extend(str(exc).split("; "))
        return None


def _validate_application(kind, params, n, d, errors):
    p = params
    if kind == ESTIMATION:
        bad = len(errors)
        A = _matrix(p.get("A"), "application.A", errors, square=True)
        H = p.get("H")
        if not isinstance(H, list) or (n is not None and len(H) != n):
            errors.append(f"application.H: must list one measurement matrix per agent ({n})")
        else:
            for i, h in enumerate(H):
                m = _matrix(h, f"application.H[{i}]", errors)
                if m is not None and A is not None and m.shape[1] != A.shape[0]:
                    errors.append(f"application.H[{i}]: needs {A.shape[0]} columns")
        if A is not None and d is not None and d != A.shape[0]:
            errors.append(f"initial_state: estimates must have dimension {A.shape[0]}, got {d}")
        x_true = p.get("x_true")
        if not isinstance(x_true, list) or not all(_is_number(v) for v in x_true) or (A is not None and len(x_true) != A.shape[0]):
            errors.append("application.x_true: must be a numeric vector matching A")
        if not _is_number(p.get("gain")):
            errors.append("application.gain: must be a number")
        if not _is_int(p.get("steps")) or p["steps"] < 1:
            errors.append("application.steps: must be a positive integer")
        ms = p.get("measurement_std", 0.0)
        if not (_is_number(p.get("process_std", 0.0)) and p.get("process_std", 0.0) >= 0):
            errors.append("application.process_std: must be a nonnegative number")
        if not ((_is_number(ms) and ms >= 0) or (isinstance(ms, list) and all(_is_number(r) and r >= 0 for r in ms))):
            errors.append("application.measurement_std: must be nonnegative")
        return len(errors) == bad
    if kind == OPTIMIZATION:
        bad = len(errors)
        objs = p.get("objectives")
        if not isinstance(objs, list) or (n is not None and len(objs) != n):
            errors.append(f"application.objectives: need one objective per agent ({n})")
        else:
            for i, o in enumerate(objs):
                if not (isinstance(o, dict) and _is_number(o.get("q")) and _is_number(o.get("b")) and o["q"] > 0):
                    errors.append(f"application.objectives[{i}]: needs numeric b and q > 0")
        for key in ("gamma", "alpha0"):
            if not (_is_number(p.get(key)) and p[key] > 0):
                errors.append(f"application.{key}: must be a positive number")
        if p.get("step_schedule", "diminishing") not in ("diminishing", "constant"):
            errors.append("application.step_schedule: must be 'diminishing' or 'constant'")
        if not _is_int(p.get("iterations")) or p["iterations"] < 1:
            errors.append("application.iterations: must be a positive integer")
        if d is not None and d != 1:
            errors.append(f"initial_state: optimisation needs scalar states, got d={d}")
        return len(errors) == bad
    if kind == FORMATION:
        bad = len(errors)
        if ("distance" in p) == ("distances" in p):
            errors.append("application: formation needs exactly one of 'distance' or 'distances'")
        elif "distance" in p and not (_is_number(p["distance"]) and p["distance"] >= 0):
            errors.append("application.distance: must be a nonnegative number")
        elif "distances" in p:
            m = _matrix(p["distances"], "application.distances", errors, square=True)
            if m is not None and n is not None and m.shape[0] != n:
                errors.append(f"application.distances: must be {n}x{n}")
            elif m is not None and np.any(m < 0):
                errors.append("application.distances: must be nonnegative")
        lam1, lam2 = p.get("attraction", 0.5), p.get("damping", 0.5)
        if not (_is_number(lam1) and _is_number(lam2) and 0 < lam1 < 1 and 0 < lam2 < 1 and math.isclose(lam1 + lam2, 1.0)):
            errors.append("application: attraction and damping gains must lie in (0, 1) and sum to 1")
        if not (_is_number(p.get("speed", 1.0)) and p.get("speed", 1.0) > 0):
            errors.append("application.speed: must be positive")
        if "velocities" in p:
            v = _matrix(p["velocities"], "application.velocities", errors)
            if v is not None and (n, d) != v.shape:
                errors.append(f"application.velocities: must be {n}x{d}")
        if d is not None and d not in (2, 3):
            errors.append(f"initial_state: formation needs 2D or 3D positions, got d={d}")
        return len(errors) == bad
    if kind == RENDEZVOUS and d is not None and d not in (2, 3):
        errors.append(f"initial_state: rendezvous needs 2D or 3D positions, got d={d}")
        return False
    return True


def scenario_from_dict(doc: Any) -> Scenario:
    """Validate a decoded scenario document; raises with every problem found."""
    errors: list[str] = []
    if not isinstance(doc, dict):
        raise ScenarioValidationError(["scenario: top level must be a JSON object"])
    unknown = set(doc) - TOP_KEYS
    if unknown:
        errors.append(f"scenario: unknown keys {sorted(unknown)}")
    name = doc.get("name")
    if not isinstance(name, str) or not name:
        errors.append("name: must be a non-empty string")
    for key in ("protocol", "topologies", "schedule", "initial_state", "application"):
        if key not in doc:
            errors.append(f"{key}: missing")

    app = doc.get("application", {})
    kind = app.get("kind") if isinstance(app, dict) else None
    if kind not in APPLICATION_KEYS:
        errors.append(f"application.kind: must be one of {sorted(APPLICATION_KEYS)}")
        kind = None
    params = {k: v for k, v in app.items() if k != "kind"} if isinstance(app, dict) else {}
    if kind is not None:
        extra = set(app) - APPLICATION_KEYS[kind]
        if extra:
            errors.append(f"application: unknown keys for {kind!r}: {sorted(extra)}")

    protocol = _parse_protocol(doc.get("protocol"), errors) if "protocol" in doc else None
    if protocol is not None and kind is not None and protocol.tag not in ALLOWED_PROTOCOLS[kind]:
        errors.append(f"protocol.kind: {protocol.tag!r} is not usable with a {kind!r} application "
                      f"(allowed: {sorted(ALLOWED_PROTOCOLS[kind])})")

    table = {}
    tops = doc.get("topologies", {})
    if not isinstance(tops, dict) or not tops:
        errors.append("topologies: must be a non-empty object")
    else:
        table = {tid: _parse_topology(tid, spec, errors) for tid, spec in tops.items()}
    schedule, window = _parse_schedule(doc.get("schedule"), table, errors) if "schedule" in doc else (None, None)
    initial, shape = _parse_initial(doc.get("initial_state"), errors) if "initial_state" in doc else (None, None)
    sim = _parse_sim(doc.get("sim"), errors)

    n = schedule.n if schedule is not None else None
    d = shape[1] if shape is not None else None
    if shape is not None and n is not None and shape[0] != n:
        errors.append(f"initial_state: has {shape[0]} agents but topologies have n={n}")
    if protocol is not None and d is not None and kind in (CONSENSUS, None):
        if protocol.vector and d < 2:
            errors.append("initial_state: unit-vector protocol needs d >= 2")
        if not protocol.vector and d != 1:
            errors.append(f"initial_state: {protocol.tag} protocol needs scalar states (d=1), got d={d}")
    if kind is not None and kind != CONSENSUS:
        _validate_application(kind, params, n, d, errors)

    if errors:
        raise ScenarioValidationError(errors)
    return Scenario(
        name=name, protocol=protocol, schedule=schedule, initial=initial, sim=sim,
        application=kind, params=params, window=window, description=doc.get("description", ""),
    )


# -- dispatch ---------------------------------------------------------------------

def run_scenario(s: Scenario) -> Trace:
    """Run whichever application the scenario describes."""
    x0 = s.initial_state()
    if s.application == CONSENSUS:
        return run(s)
    if s.application == RENDEZVOUS:
        return apps.rendezvous_run(x0, s.schedule, s.sim)
    if s.application == FORMATION:
        v0 = s.params.get("velocities")
        return apps.formation_run(x0, v0, s.formation_spec(), s.schedule, s.sim)
    if s.application == OPTIMIZATION:
        p = s.params
        return apps.optimization_run(
            x0[:, 0], s.objectives(), s.schedule, p["gamma"], p["alpha0"], p["iterations"],
            p.get("step_schedule", "diminishing"),
        )
    p = s.params
    return apps.estimation_run(
        s.system_model(), s.schedule, p["gain"], p["x_true"], x0, p["steps"], seed=s.sim.seed,
    )
