"""Fixed-step integration of the consensus fields with Lyapunov monitoring."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.spatial.distance import pdist

from .errors import DomainError
from .graph import SwitchingSchedule, Topology
from .protocol import ProtocolKind, as_state

TOPOLOGY_SWITCH = "topology_switch"
CONVERGED = "converged"
BOUND_VIOLATION = "bound_violation"

TRACE_HEADER = ("t", "agent", "dim", "value", "V", "topology_id")
EVENT_HEADER = ("t", "kind", "detail")


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-3
    t_max: float = 10.0
    tolerance: float = 1e-2
    delay: int = 0
    seed: int = 0
    stop_on_converge: bool = True

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise DomainError("; ".join(problems))

    def problems(self) -> list[str]:
        out = []
        if not (self.dt > 0 and math.isfinite(self.dt)):
            out.append(f"sim.dt must be positive, got {self.dt}")
        elif not self.t_max >= self.dt:
            out.append(f"sim.t_max must be >= dt, got {self.t_max}")
        if not self.tolerance > 0:
            out.append(f"sim.tolerance must be positive, got {self.tolerance}")
        if not (isinstance(self.delay, (int, np.integer)) and self.delay >= 0):
            out.append(f"sim.delay must be a nonnegative integer number of steps, got {self.delay!r}")
        return out

    @property
    def steps(self) -> int:
        return int(round(self.t_max / self.dt))


@dataclass(frozen=True)
class Event:
    t: float
    kind: str
    detail: str = ""


@dataclass
class Trace:
    """Sampled run: one entry per instant, spaced ``dt`` apart.

    ``metrics`` carries application-specific series as
    ``name -> (labels, values)`` with ``values`` shaped ``(T, len(labels))``.
    """

    times: np.ndarray
    states: np.ndarray
    lyapunov: np.ndarray
    topology_ids: list[str]
    dt: float
    events: list[Event] = field(default_factory=list)
    metrics: dict[str, tuple[list[str], np.ndarray]] = field(default_factory=dict)

    def __len__(self):
        return len(self.times)

    @property
    def n(self) -> int:
        return self.states.shape[1]

    @property
    def d(self) -> int:
        return self.states.shape[2]

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def first_crossing(self, tolerance: float) -> float | None:
        hits = np.flatnonzero(self.lyapunov <= tolerance)
        return float(self.times[hits[0]]) if hits.size else None

    @property
    def converged_at(self) -> float | None:
        for e in self.events:
            if e.kind == CONVERGED:
                return e.t
        return None

    def events_of(self, kind: str) -> list[Event]:
        return [e for e in self.events if e.kind == kind]

    def write_csv(self, target) -> None:
        """Write ``t,agent,dim,value,V,topology_id`` rows to a path or text stream."""
        with _open_text(target) as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRACE_HEADER)
            for k, t in enumerate(self.times):
                t, v, tid = repr(float(t)), repr(float(self.lyapunov[k])), self.topology_ids[k]
                for i in range(self.n):
                    for j in range(self.d):
                        w.writerow((t, i, j, repr(float(self.states[k, i, j])), v, tid))

    def write_events_csv(self, target) -> None:
        with _open_text(target) as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(EVENT_HEADER)
            for e in self.events:
                w.writerow((repr(float(e.t)), e.kind, e.detail))

    def write_metrics_csv(self, target) -> None:
        """Application metrics as ``t,metric,key,value`` rows."""
        with _open_text(target) as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("t", "metric", "key", "value"))
            for name, (labels, values) in self.metrics.items():
                for k, t in enumerate(self.times):
                    for label, v in zip(labels, values[k]):
                        w.writerow((repr(float(t)), name, label, repr(float(v))))

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


class _open_text:
    def __init__(self, target):
        self.target = target
        self.owned = isinstance(target, (str, Path))

    def __enter__(self):
        if self.owned:
            self.fh = open(self.target, "w", newline="", encoding="utf-8")
            return self.fh
        return self.target

    def __exit__(self, *exc):
        if self.owned:
            self.fh.close()


def lyapunov_scalar(state) -> float:
    """Range ``max(x) - min(x)`` of a scalar swarm."""
    x = np.asarray(state, dtype=float).reshape(-1)
    return float(x.max() - x.min())


def lyapunov_vector(state) -> float:
    """Diameter of the agent point cloud."""
    x = np.asarray(state, dtype=float)
    if x.shape[0] < 2:
        return 0.0
    return float(pdist(x).max())


def lyapunov(state) -> float:
    x = np.asarray(state, dtype=float)
    if x.ndim == 1 or x.shape[1] == 1:
        return lyapunov_scalar(x)
    return lyapunov_vector(x)


def step(state, topology: Topology, protocol: ProtocolKind, dt: float, stale_state=None) -> np.ndarray:
    """One forward-Euler step; neighbors are read from ``stale_state`` when given."""
    if not dt > 0:
        raise DomainError(f"dt must be positive, got {dt}")
    x = np.asarray(state, dtype=float)
    if stale_state is not None and np.shape(stale_state) != x.shape:
        raise DomainError(f"stale state shape {np.shape(stale_state)} != state shape {x.shape}")
    return x + dt * protocol.field(x, topology, stale_state)


def overshoot_ceiling(topologies, n: int, dt: float) -> float:
    """``n * dt * (max row sum)``: how far one Euler step can push the range up."""
    if isinstance(topologies, Topology):
        topologies = [topologies]
    elif isinstance(topologies, SwitchingSchedule):
        topologies = list(topologies.table.values())
    return n * dt * max(float(t.row_sums().max()) for t in topologies)


def simulate(
    x0,
    schedule: SwitchingSchedule | Topology,
    protocol: ProtocolKind,
    config: SimConfig,
    lyapunov_fn: Callable[[np.ndarray], float] | None = None,
) -> Trace:
    """Integrate ``protocol`` from ``x0`` under ``schedule``.

    Stops at ``t_max``, or at the first instant with ``V <= tolerance`` when
    ``config.stop_on_converge`` is set.
    """
    if isinstance(schedule, Topology):
        schedule = SwitchingSchedule.static(schedule)
    x = as_state(x0)
    n, d = x.shape
    if n != schedule.n:
        raise DomainError(f"initial state has {n} agents, schedule has {schedule.n}")
    if protocol.vector and d < 2:
        raise DomainError("unit-vector protocol needs d >= 2")
    if not protocol.vector and d != 1:
        raise DomainError(f"{protocol} protocol needs d = 1, got d = {d}")
    if lyapunov_fn is None:
        lyapunov_fn = lyapunov_vector if d > 1 else lyapunov_scalar

    steps = config.steps
    dt, tau = config.dt, config.delay
    states = np.empty((steps + 1, n, d))
    values = np.empty(steps + 1)
    ids: list[str] = []
    events: list[Event] = []
    states[0] = x
    values[0] = lyapunov_fn(x)
    converged = False
    last = steps
    prev_id = None
    for k in range(steps + 1):
        t = k * dt
        tid = schedule.id_at(t)
        ids.append(tid)
        if prev_id is not None and tid != prev_id:
            events.append(Event(t, TOPOLOGY_SWITCH, f"{prev_id}->{tid}"))
        prev_id = tid
        if not converged and values[k] <= config.tolerance:
            converged = True
            events.append(Event(t, CONVERGED, f"V={values[k]:.6g}"))
            if config.stop_on_converge:
                last = k
                break
        if k == steps:
            break
        stale = states[k - tau] if k >= tau else states[0]
        states[k + 1] = step(states[k], schedule.table[tid], protocol, dt, stale if tau else None)
        values[k + 1] = lyapunov_fn(states[k + 1])
    return Trace(
        times=np.arange(last + 1) * dt,
        states=states[: last + 1].copy(),
        lyapunov=values[: last + 1].copy(),
        topology_ids=ids[: last + 1],
        dt=dt,
        events=events,
    )


def run(scenario) -> Trace:
    """Simulate a consensus or rendezvous scenario (anything exposing
    ``initial_state()``, ``schedule``, ``protocol`` and ``sim``)."""
    return simulate(scenario.initial_state(), scenario.schedule, scenario.protocol, scenario.sim)


def finite_time_bound(x0, w_min: float, sides: int = 2) -> float:
    """Convergence-time bound ``range / (sides * w_min)``.

    ``sides=2`` is the two-sided rate (max and min agents both move);
    ``sides=1`` is the rate guaranteed when only one extreme agent must move.
    """
    if not w_min > 0:
        raise DomainError(f"w_min must be positive, got {w_min}")
    return lyapunov_scalar(x0) / (sides * w_min)


def check_bound(trace: Trace, bound: float, tolerance: float) -> bool:
    """True iff ``V <= tolerance`` is first reached by ``bound + dt``.

    A failed check appends a ``bound_violation`` event to the trace.
    """
    t = trace.first_crossing(tolerance)
    ok = t is not None and t <= bound + trace.dt
    if not ok:
        seen = "never" if t is None else f"at t={t:.6g}"
        trace.events.append(Event(float(trace.times[-1]), BOUND_VIOLATION, f"bound={bound:.6g}; crossed {seen}"))
    return ok


@dataclass(frozen=True)
class BoundReport:
    crossing: float | None
    two_sided: float
    one_sided: float
    two_sided_ok: bool
    one_sided_ok: bool


def bound_report(trace: Trace, w_min: float, tolerance: float, slack: float | None = None) -> BoundReport:
    """Compare the first crossing time with both finite-time bounds."""
    slack = trace.dt if slack is None else slack
    x0 = trace.states[0]
    tight, loose = finite_time_bound(x0, w_min, 2), finite_time_bound(x0, w_min, 1)
    t = trace.first_crossing(tolerance)
    return BoundReport(
        crossing=t,
        two_sided=tight,
        one_sided=loose,
        two_sided_ok=t is not None and t <= tight + slack,
        one_sided_ok=t is not None and t <= loose + slack,
    )


def chattering_amplitude(trace: Trace, tail_fraction: float) -> float:
    """Peak-to-peak Lyapunov value over the last ``tail_fraction`` of the trace."""
    if not 0 < tail_fraction <= 1:
        raise DomainError(f"tail_fraction must be in (0, 1], got {tail_fraction}")
    if len(trace) == 0:
        raise DomainError("empty trace")
    count = max(1, int(math.ceil(tail_fraction * len(trace))))
    tail = trace.lyapunov[-count:]
    return float(tail.max() - tail.min())


def max_lyapunov_increase(trace: Trace) -> float:
    """Largest step-to-step rise of V (<= 0 for a nonincreasing trace)."""
    if len(trace) < 2:
        return 0.0
    return float(np.diff(trace.lyapunov).max())
