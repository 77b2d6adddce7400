"""Weighted communication topologies and switching schedules.

Edge convention: ``W[i, j] > 0`` means agent ``i`` listens to agent ``j``, so
information flows ``j -> i``. A spanning tree is a root whose information
reaches every agent along such flows.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DomainError

CYCLE = "cycle"
ONCE = "once"


@dataclass(frozen=True, eq=False)
class Topology:
    """Directed weighted graph over ``n`` agents.

    ``weights[i, j]`` is the weight agent ``i`` puts on agent ``j``. The
    matrix is copied and frozen at construction.
    """

    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] == 0:
            raise DomainError(f"weight matrix must be square and non-empty, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise DomainError("weights must be finite")
        if np.any(w < 0):
            raise DomainError("weights must be nonnegative")
        if np.any(np.diag(w) != 0):
            raise DomainError("self-loops are not allowed (diagonal must be zero)")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def support(self) -> np.ndarray:
        return self.weights > 0

    def is_empty(self) -> bool:
        return not np.any(self.support)

    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.weights, self.weights.T))

    def row_sums(self) -> np.ndarray:
        return self.weights.sum(axis=1)

    def edges(self) -> list[tuple[int, int, float]]:
        """List of ``(from, to, weight)`` with information flowing from -> to."""
        to_idx, from_idx = np.nonzero(self.support)
        return [(int(j), int(i), float(self.weights[i, j])) for i, j in zip(to_idx, from_idx)]

    @classmethod
    def empty(cls, n: int) -> "Topology":
        return cls(np.zeros((n, n)))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int, float]]) -> "Topology":
        """Build from ``(from, to, weight)`` triples; ``to`` listens to ``from``."""
        w = np.zeros((n, n))
        for src, dst, weight in edges:
            if not (0 <= src < n and 0 <= dst < n):
                raise DomainError(f"edge ({src}, {dst}) out of range for n={n}")
            w[dst, src] = weight
        return cls(w)

    def __eq__(self, other):
        if not isinstance(other, Topology):
            return NotImplemented
        return np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash(self.weights.tobytes())

    def __repr__(self):
        return f"Topology(n={self.n}, edges={int(self.support.sum())})"


def complete(n: int, weight: float = 1.0) -> Topology:
    w = np.full((n, n), float(weight))
    np.fill_diagonal(w, 0.0)
    return Topology(w)


def ring(n: int, weight: float = 1.0, directed: bool = False) -> Topology:
    """Ring where agent ``i`` listens to ``i-1`` (and ``i+1`` if undirected)."""
    w = np.zeros((n, n))
    for i in range(n):
        w[i, (i - 1) % n] = weight
        if not directed:
            w[i, (i + 1) % n] = weight
    np.fill_diagonal(w, 0.0)
    return Topology(w)


def star(n: int, center: int = 0, weight: float = 1.0, directed: bool = True) -> Topology:
    """Leaves listen to ``center``; with ``directed=False`` the center listens back."""
    w = np.zeros((n, n))
    for i in range(n):
        if i != center:
            w[i, center] = weight
            if not directed:
                w[center, i] = weight
    return Topology(w)


def line(n: int, weight: float = 1.0, directed: bool = True) -> Topology:
    """Path ``0 -> 1 -> ... -> n-1``; undirected adds the reverse links."""
    w = np.zeros((n, n))
    for i in range(1, n):
        w[i, i - 1] = weight
        if not directed:
            w[i - 1, i] = weight
    return Topology(w)


def neighbors(topology: Topology, i: int) -> set[int]:
    """Agents whose state agent ``i`` reads."""
    if not 0 <= i < topology.n:
        raise DomainError(f"agent index {i} out of range for n={topology.n}")
    return {int(j) for j in np.flatnonzero(topology.weights[i] > 0)}


def reachable_from(topology: Topology, root: int) -> set[int]:
    """Agents that eventually receive information originating at ``root``."""
    listeners = topology.support.T  # listeners[j] marks agents reading j
    seen = {root}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v in np.flatnonzero(listeners[u]):
            v = int(v)
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return seen


def spanning_tree_roots(topology: Topology) -> list[int]:
    """Every agent whose information reaches all others."""
    return [r for r in range(topology.n) if len(reachable_from(topology, r)) == topology.n]


def has_spanning_tree(topology: Topology) -> bool:
    n = topology.n
    # a root cannot need anyone else, but every other agent needs an in-link
    no_input = np.flatnonzero(~topology.support.any(axis=1))
    if len(no_input) > 1:
        return False
    candidates = no_input if len(no_input) == 1 else range(n)
    return any(len(reachable_from(topology, int(r))) == n for r in candidates)


def min_positive_weight(topology: Topology) -> float:
    pos = topology.weights[topology.weights > 0]
    if pos.size == 0:
        raise DomainError("min positive weight is undefined for an empty topology")
    return float(pos.min())


def union(topologies: Sequence[Topology]) -> Topology:
    """Entrywise maximum: an edge is present if present in any member."""
    topologies = list(topologies)
    if not topologies:
        raise DomainError("union of an empty list")
    n = topologies[0].n
    if any(t.n != n for t in topologies):
        raise DomainError("all topologies in a union must have the same n")
    return Topology(np.maximum.reduce([t.weights for t in topologies]))


@dataclass(frozen=True)
class SwitchingSchedule:
    """Sequence of ``(topology_id, dwell)`` entries over a topology table.

    In ``cycle`` mode the sequence repeats forever; in ``once`` mode the last
    topology is held after the sequence ends.
    """

    entries: tuple[tuple[str, float], ...]
    table: Mapping[str, Topology]
    mode: str = CYCLE
    _ends: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        entries = tuple((str(tid), float(dwell)) for tid, dwell in self.entries)
        if not entries:
            raise DomainError("schedule needs at least one entry")
        if self.mode not in (CYCLE, ONCE):
            raise DomainError(f"mode must be {CYCLE!r} or {ONCE!r}, got {self.mode!r}")
        for tid, dwell in entries:
            if not dwell > 0 or not math.isfinite(dwell):
                raise DomainError(f"dwell for {tid!r} must be positive and finite, got {dwell}")
            if tid not in self.table:
                raise DomainError(f"topology id {tid!r} not found in table")
        sizes = {t.n for t in self.table.values()}
        if len(sizes) != 1:
            raise DomainError(f"all topologies must share n, got sizes {sorted(sizes)}")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "table", MappingProxyType(dict(self.table)))
        object.__setattr__(self, "_ends", np.cumsum([d for _, d in entries]))

    @classmethod
    def static(cls, topology: Topology, name: str = "G") -> "SwitchingSchedule":
        return cls(entries=((name, 1.0),), table={name: topology}, mode=CYCLE)

    @property
    def n(self) -> int:
        return next(iter(self.table.values())).n

    @property
    def period(self) -> float:
        return float(self._ends[-1])

    @property
    def _tol(self) -> float:
        # snaps k*dt style times that land a few ulps short of a boundary
        return 1e-9 * max(1.0, self.period)

    def index_at(self, t: float) -> int:
        if t < 0:
            raise DomainError(f"time must be nonnegative, got {t}")
        if self.mode == CYCLE:
            t = math.fmod(t, self.period)
        i = int(np.searchsorted(self._ends, t + self._tol, side="right"))
        if i >= len(self.entries):
            i = 0 if self.mode == CYCLE else len(self.entries) - 1
        return i

    def id_at(self, t: float) -> str:
        return self.entries[self.index_at(t)][0]

    def intervals(self, start: float, stop: float) -> list[tuple[float, float, str]]:
        """Dwell intervals ``(a, b, id)`` overlapping ``[start, stop)``."""
        out = []
        tol = self._tol
        starts = np.concatenate(([0.0], self._ends[:-1]))
        if self.mode == CYCLE:
            cycle = max(0, int(math.floor(start / self.period)) - 1)
            while cycle * self.period < stop - tol:
                base = cycle * self.period
                for (tid, _), a, b in zip(self.entries, starts, self._ends):
                    a, b = base + a, base + b
                    if b > start + tol and a < stop - tol:
                        out.append((a, b, tid))
                cycle += 1
        else:
            last = len(self.entries) - 1
            for k, ((tid, _), a, b) in enumerate(zip(self.entries, starts, self._ends)):
                b = math.inf if k == last else float(b)
                if b > start + tol and a < stop - tol:
                    out.append((float(a), b, tid))
        return out


def topology_at(schedule: SwitchingSchedule, t: float) -> Topology:
    return schedule.table[schedule.id_at(t)]


def window_unions(schedule: SwitchingSchedule, window: float, horizon: float) -> list[tuple[float, Topology]]:
    """Union topology for every aligned window ``[k*window, (k+1)*window)``."""
    if not window > 0:
        raise DomainError("window must be positive")
    if horizon < window:
        raise DomainError("horizon must be at least one window")
    out = []
    k = 0
    tol = 1e-9 * max(1.0, horizon)
    while (k + 1) * window <= horizon + tol:
        a, b = k * window, (k + 1) * window
        ids = {tid for _, _, tid in schedule.intervals(a, b)}
        out.append((a, union([schedule.table[i] for i in sorted(ids)])))
        k += 1
    return out


def windowed_union_has_spanning_tree(schedule: SwitchingSchedule, window: float, horizon: float) -> bool:
    return all(has_spanning_tree(u) for _, u in window_unions(schedule, window, horizon))
