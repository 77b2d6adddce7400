"""Application drivers: rendezvous, distributed estimation, distributed
optimisation and distance-based formation control."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError
from .graph import SwitchingSchedule, Topology, has_spanning_tree
from .protocol import ProtocolKind, UNIT_VECTOR, as_state, unit_vectors
from .simulator import CONVERGED, Event, SimConfig, TOPOLOGY_SWITCH, Trace, lyapunov_vector, simulate

log = logging.getLogger(__name__)


# -- rendezvous --------------------------------------------------------------

def rendezvous_run(positions0, topology: Topology | SwitchingSchedule, config: SimConfig) -> Trace:
    """Drive agents to a common point with the unit-vector protocol."""
    x0 = as_state(positions0)
    if x0.shape[1] not in (2, 3):
        raise DomainError(f"rendezvous is defined for 2D/3D positions, got d={x0.shape[1]}")
    tops = [topology] if isinstance(topology, Topology) else list(topology.table.values())
    if isinstance(topology, Topology) and not has_spanning_tree(topology):
        log.warning("rendezvous topology has no spanning tree; agents may not meet")
    elif not isinstance(topology, Topology) and not any(has_spanning_tree(t) for t in tops):
        log.warning("no topology in the schedule has a spanning tree; agents may not meet")
    return simulate(x0, topology, ProtocolKind(UNIT_VECTOR), config, lyapunov_vector)


def _iteration_topology(topology, k: int) -> Topology:
    """Topology used by iteration ``k >= 1``; schedule dwell counts iterations."""
    if isinstance(topology, Topology):
        return topology
    return topology.table[topology.id_at(float(k - 1))]


def _iteration_ids(topology, iterations: int) -> list[str]:
    if isinstance(topology, Topology):
        return ["G"] * (iterations + 1)
    return [topology.id_at(float(k)) for k in range(iterations + 1)]


# -- distributed estimation ----------------------------------------------------

@dataclass(frozen=True)
class LinearSystemModel:
    """``x[k+1] = A x[k] + v``, ``y_i = H_i x + r_i`` with Gaussian noise."""

    A: np.ndarray
    H: tuple[np.ndarray, ...]
    process_std: float = 0.0
    measurement_std: tuple[float, ...] | float = 0.0

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        if A.shape[0] != A.shape[1]:
            raise DomainError(f"A must be square, got {A.shape}")
        H = tuple(np.atleast_2d(np.asarray(h, dtype=float)) for h in self.H)
        if not H:
            raise DomainError("need at least one measurement matrix")
        for i, h in enumerate(H):
            if h.shape[1] != A.shape[0]:
                raise DomainError(f"H[{i}] has {h.shape[1]} columns, system order is {A.shape[0]}")
        rho = self.measurement_std
        rho = tuple(float(r) for r in rho) if np.ndim(rho) else (float(rho),) * len(H)
        if len(rho) != len(H):
            raise DomainError("one measurement noise std per agent expected")
        if self.process_std < 0 or any(r < 0 for r in rho):
            raise DomainError("noise standard deviations must be nonnegative")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "measurement_std", rho)

    @property
    def order(self) -> int:
        return self.A.shape[0]

    @property
    def agents(self) -> int:
        return len(self.H)

    def propagate(self, x, rng: np.random.Generator) -> np.ndarray:
        return self.A @ x + self.process_std * rng.standard_normal(self.order)

    def measure(self, x, rng: np.random.Generator) -> list[np.ndarray]:
        return [h @ x + r * rng.standard_normal(h.shape[0]) for h, r in zip(self.H, self.measurement_std)]


def prediction_weights(topology: Topology) -> np.ndarray:
    """Row-stochastic averaging weights over each agent's neighbors and itself."""
    p = topology.weights + np.eye(topology.n)
    return p / p.sum(axis=1, keepdims=True)


def estimation_step(estimates, measurements, model: LinearSystemModel, topology: Topology, gain: float) -> np.ndarray:
    """One consensus + innovation update.

    Prediction averages ``A x_j`` over ``N_i + {i}``; the correction adds
    ``gain`` times the sum of unit-normalised innovations over the same set.
    """
    xhat = np.atleast_2d(np.asarray(estimates, dtype=float))
    n, m = xhat.shape
    if n != topology.n or n != model.agents or m != model.order:
        raise DomainError(f"estimates {xhat.shape} inconsistent with n={topology.n}, m={model.order}")
    if len(measurements) != n:
        raise DomainError(f"expected {n} measurements, got {len(measurements)}")
    ys = [np.atleast_1d(np.asarray(y, dtype=float)) for y in measurements]
    for j, (y, h) in enumerate(zip(ys, model.H)):
        if y.shape != (h.shape[0],):
            raise DomainError(f"measurement {j} has shape {y.shape}, expected ({h.shape[0]},)")

    pred = prediction_weights(topology) @ (xhat @ model.A.T)
    out = pred.copy()
    if gain == 0:
        return out
    listens = topology.support | np.eye(n, dtype=bool)
    for i in range(n):
        correction = np.zeros(m)
        for j in np.flatnonzero(listens[i]):
            r = ys[j] - model.H[j] @ pred[i]
            norm = np.linalg.norm(r)
            if norm > 0:
                correction += model.H[j].T @ (r / norm)
        out[i] += gain * correction
    return out


def estimation_run(
    model: LinearSystemModel,
    topology: Topology | SwitchingSchedule,
    gain: float,
    x_true0,
    estimates0,
    steps: int,
    seed: int = 0,
) -> Trace:
    """Track a noisy linear system; ``metrics['estimation_error']`` holds
    ``||xhat_i - x||`` per agent and step."""
    rng = np.random.default_rng(seed)
    x = np.atleast_1d(np.asarray(x_true0, dtype=float))
    xhat = np.atleast_2d(np.asarray(estimates0, dtype=float))
    n, m = xhat.shape
    states = np.empty((steps + 1, n, m))
    truth = np.empty((steps + 1, m))
    states[0], truth[0] = xhat, x
    for k in range(1, steps + 1):
        x = model.propagate(x, rng)
        ys = model.measure(x, rng)
        xhat = estimation_step(xhat, ys, model, _iteration_topology(topology, k), gain)
        states[k], truth[k] = xhat, x
    errors = np.linalg.norm(states - truth[:, None, :], axis=2)
    spread = np.array([lyapunov_vector(s) if m > 1 else float(np.ptp(s)) for s in states])
    trace = Trace(
        times=np.arange(steps + 1, dtype=float),
        states=states,
        lyapunov=spread,
        topology_ids=_iteration_ids(topology, steps),
        dt=1.0,
    )
    trace.metrics["estimation_error"] = ([str(i) for i in range(n)], errors)
    trace.metrics["true_state"] = ([str(c) for c in range(m)], truth)
    return trace


def steady_state_error_band(trace: Trace, tail_fraction: float = 0.5) -> tuple[float, float]:
    """``(mean, max)`` estimation error over the tail of an estimation trace."""
    errors = trace.metrics["estimation_error"][1]
    count = max(1, int(math.ceil(tail_fraction * len(errors))))
    tail = errors[-count:]
    return float(tail.mean()), float(tail.max())


# -- distributed optimisation ---------------------------------------------------

@dataclass(frozen=True)
class LocalObjective:
    """``f(x) = q/2 (x - b)^2`` with curvature ``q > 0``."""

    q: float
    b: float

    def __post_init__(self):
        if not self.q > 0:
            raise DomainError(f"local objective needs q > 0, got {self.q}")

    def __call__(self, x):
        return 0.5 * self.q * (np.asarray(x) - self.b) ** 2

    def grad(self, x):
        return self.q * (np.asarray(x) - self.b)


def global_minimizer(objectives: Sequence[LocalObjective]) -> float:
    q = np.array([f.q for f in objectives])
    b = np.array([f.b for f in objectives])
    return float((q * b).sum() / q.sum())


def global_objective(objectives: Sequence[LocalObjective], x) -> np.ndarray:
    """Average of the local objectives evaluated at ``x`` (elementwise)."""
    return sum(f(x) for f in objectives) / len(objectives)


def step_size(k: int, alpha0: float, schedule: str = "diminishing") -> float:
    """``alpha0 / k`` (``k >= 1``) or the constant ``alpha0``."""
    if schedule == "diminishing":
        return alpha0 / k
    if schedule == "constant":
        return alpha0
    raise DomainError(f"unknown step-size schedule {schedule!r}")


def optimization_step(states, objectives: Sequence[LocalObjective], topology: Topology, alpha: float, gamma: float) -> np.ndarray:
    """Gradient step on each local objective plus a sign-consensus pull."""
    x = np.asarray(states, dtype=float).reshape(-1)
    if len(objectives) != x.size or topology.n != x.size:
        raise DomainError(f"{x.size} states, {len(objectives)} objectives, n={topology.n}")
    if not alpha > 0 or not gamma > 0:
        raise DomainError("alpha and gamma must be positive")
    grads = np.array([f.grad(xi) for f, xi in zip(objectives, x)])
    pull = (topology.weights * np.sign(x[None, :] - x[:, None])).sum(axis=1)
    return x - alpha * grads + gamma * alpha * pull


def optimization_run(
    x0,
    objectives: Sequence[LocalObjective],
    topology: Topology | SwitchingSchedule,
    gamma: float,
    alpha0: float,
    iterations: int,
    schedule: str = "diminishing",
) -> Trace:
    """Iterate the distributed gradient scheme; time axis is the iteration
    index. ``metrics['objective']`` holds the global objective at each x_i."""
    x = np.asarray(x0, dtype=float).reshape(-1)
    states = np.empty((iterations + 1, x.size, 1))
    states[0, :, 0] = x
    for k in range(1, iterations + 1):
        x = optimization_step(x, objectives, _iteration_topology(topology, k), step_size(k, alpha0, schedule), gamma)
        states[k, :, 0] = x
    values = states[:, :, 0]
    trace = Trace(
        times=np.arange(iterations + 1, dtype=float),
        states=states,
        lyapunov=np.ptp(values, axis=1),
        topology_ids=_iteration_ids(topology, iterations),
        dt=1.0,
    )
    trace.metrics["objective"] = ([str(i) for i in range(x.size)], global_objective(objectives, values))
    return trace


# -- formation control -----------------------------------------------------------

@dataclass(frozen=True)
class FormationSpec:
    """Target distances ``distances[i, j]`` for each edge and control gains."""

    distances: np.ndarray
    attraction: float = 0.5
    damping: float = 0.5
    speed: float = 1.0

    def __post_init__(self):
        d = np.array(self.distances, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise DomainError(f"distance matrix must be square, got {d.shape}")
        if np.any(d < 0):
            raise DomainError("target distances must be nonnegative")
        if not (0 < self.attraction < 1 and 0 < self.damping < 1):
            raise DomainError("gains must lie strictly between 0 and 1")
        if not math.isclose(self.attraction + self.damping, 1.0, abs_tol=1e-12):
            raise DomainError("attraction + damping gains must sum to 1")
        if not self.speed > 0:
            raise DomainError("speed scale must be positive")
        d.setflags(write=False)
        object.__setattr__(self, "distances", d)

    @classmethod
    def uniform(cls, n: int, distance: float, **kw) -> "FormationSpec":
        d = np.full((n, n), float(distance))
        np.fill_diagonal(d, 0.0)
        return cls(d, **kw)


def soft_saturate(y):
    """``y / sqrt(1 + |y|^2)``; vectors are saturated along the last axis."""
    y = np.asarray(y, dtype=float)
    if y.ndim == 0:
        return float(y / math.sqrt(1.0 + y * y))
    return y / np.sqrt(1.0 + np.sum(y * y, axis=-1, keepdims=True))


def formation_accelerations(positions, velocities, spec: FormationSpec, topology: Topology) -> np.ndarray:
    x = np.asarray(positions, dtype=float)
    p = np.asarray(velocities, dtype=float)
    if x.ndim != 2 or x.shape[1] not in (2, 3) or p.shape != x.shape:
        raise DomainError(f"positions/velocities must be matching (n, 2|3) arrays, got {x.shape}, {p.shape}")
    n = x.shape[0]
    if topology.n != n or spec.distances.shape != (n, n):
        raise DomainError("topology, spec and state disagree on n")
    support = topology.support
    degree = support.sum(axis=1)
    rel = x[None, :, :] - x[:, None, :]  # rel[i, j] = x_j - x_i
    dist = np.linalg.norm(rel, axis=2)
    err = dist - spec.distances
    # edge gain: speed * attraction / |N_i| * sigma(dist - target)
    scale = spec.speed * spec.attraction / np.maximum(degree, 1)[:, None]
    gain = np.where(support, scale * err / np.sqrt(1.0 + err * err), 0.0)
    attract = np.einsum("ij,ijk->ik", gain, unit_vectors(rel))
    return attract - spec.speed * spec.damping * soft_saturate(p)


def formation_step(positions, velocities, spec: FormationSpec, topology: Topology, dt: float):
    """Euler step of the double integrator; returns ``(positions, velocities)``."""
    if not dt > 0:
        raise DomainError(f"dt must be positive, got {dt}")
    x = np.asarray(positions, dtype=float)
    p = np.asarray(velocities, dtype=float)
    acc = formation_accelerations(x, p, spec, topology)
    return x + dt * p, p + dt * acc


def edge_list(topology: Topology) -> list[tuple[int, int]]:
    """Undirected agent pairs ``(i, j)``, ``i < j``, linked in either direction."""
    s = topology.support | topology.support.T
    return [(int(i), int(j)) for i, j in zip(*np.nonzero(np.triu(s, 1)))]


def formation_errors(positions, spec: FormationSpec, pairs) -> np.ndarray:
    x = np.asarray(positions, dtype=float)
    return np.array([np.linalg.norm(x[i] - x[j]) - spec.distances[i, j] for i, j in pairs])


def formation_run(
    positions0,
    velocities0,
    spec: FormationSpec,
    topology: Topology | SwitchingSchedule,
    config: SimConfig,
) -> Trace:
    """Integrate the formation controller. ``lyapunov`` holds the largest
    absolute edge-distance error; ``metrics['distance_error']`` the signed
    error per edge."""
    schedule = SwitchingSchedule.static(topology) if isinstance(topology, Topology) else topology
    x = as_state(positions0)
    p = np.zeros_like(x) if velocities0 is None else as_state(velocities0, d=x.shape[1])
    if x.shape[1] not in (2, 3):
        raise DomainError(f"formation is defined for 2D/3D positions, got d={x.shape[1]}")
    pairs = sorted({e for t in schedule.table.values() for e in edge_list(t)})
    steps, dt = config.steps, config.dt
    states = np.empty((steps + 1, *x.shape))
    errs = np.empty((steps + 1, len(pairs)))
    ids, events = [], []
    prev = None
    converged = False
    for k in range(steps + 1):
        t = k * dt
        tid = schedule.id_at(t)
        ids.append(tid)
        if prev is not None and tid != prev:
            events.append(Event(t, TOPOLOGY_SWITCH, f"{prev}->{tid}"))
        prev = tid
        states[k] = x
        errs[k] = formation_errors(x, spec, pairs)
        worst = float(np.abs(errs[k]).max()) if pairs else 0.0
        if not converged and worst <= config.tolerance:
            converged = True
            events.append(Event(t, CONVERGED, f"max edge error={worst:.6g}"))
        if k < steps:
            x, p = formation_step(x, p, spec, schedule.table[tid], dt)
    trace = Trace(
        times=np.arange(steps + 1) * dt,
        states=states,
        lyapunov=np.abs(errs).max(axis=1) if pairs else np.zeros(steps + 1),
        topology_ids=ids,
        dt=dt,
        events=events,
    )
    trace.metrics["distance_error"] = ([f"{i}-{j}" for i, j in pairs], errs)
    return trace
