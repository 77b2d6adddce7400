"""Derivative fields of the consensus update laws.

Every field is a pure function ``(state, topology) -> derivative``. An
optional ``neighbor_state`` replaces the values read from neighbors (used for
communication delay); the agent's own value is always taken from ``state``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .graph import Topology

SIGN = "sign"
UNIT_VECTOR = "unit_vector"
SATURATED = "saturated"
LINEAR = "linear"
KINDS = (SIGN, UNIT_VECTOR, SATURATED, LINEAR)


def sgn(x: float) -> float:
    """Sign with ``sgn(0) = 0``."""
    if math.isnan(x):
        raise DomainError("sgn of NaN")
    return 1.0 if x > 0 else (-1.0 if x < 0 else 0.0)


def sat(x, a: float):
    """Saturation normalised to the unit interval: ``clip(x / a, -1, 1)``.

    Works elementwise on arrays.
    """
    if not a > 0:
        raise DomainError(f"saturation radius must be positive, got {a}")
    with np.errstate(over="ignore"):
        out = np.clip(np.asarray(x, dtype=float) / a, -1.0, 1.0)
    return float(out) if out.ndim == 0 else out


def as_state(values, d: int | None = None) -> np.ndarray:
    """Validate a swarm state and return it as an ``(n, d)`` float array."""
    x = np.array(values, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] == 0:
        raise DomainError(f"state must be (n,) or (n, d), got shape {np.shape(values)}")
    if not np.all(np.isfinite(x)):
        raise DomainError("state entries must be finite")
    if d is not None and x.shape[1] != d:
        raise DomainError(f"expected state dimension {d}, got {x.shape[1]}")
    return x


def _scalar_inputs(state, topology, neighbor_state):
    x = np.asarray(state, dtype=float)
    shape = x.shape
    if x.ndim == 2 and x.shape[1] == 1:
        x = x[:, 0]
    if x.ndim != 1:
        raise DomainError(f"scalar protocol needs d=1 states, got shape {shape}")
    if x.shape[0] != topology.n:
        raise DomainError(f"state has {x.shape[0]} agents, topology has {topology.n}")
    if neighbor_state is None:
        xn = x
    else:
        xn = np.asarray(neighbor_state, dtype=float).reshape(x.shape)
    # rel[i, j] = x_j - x_i
    rel = xn[None, :] - x[:, None]
    return rel, shape


def _weighted_rows(weights, terms, shape):
    return (weights * terms).sum(axis=1).reshape(shape)


def scalar_sign_field(state, topology: Topology, neighbor_state=None) -> np.ndarray:
    rel, shape = _scalar_inputs(state, topology, neighbor_state)
    return _weighted_rows(topology.weights, np.sign(rel), shape)


def saturated_field(state, topology: Topology, a: float, neighbor_state=None) -> np.ndarray:
    if not a > 0:
        raise DomainError(f"saturation radius must be positive, got {a}")
    rel, shape = _scalar_inputs(state, topology, neighbor_state)
    with np.errstate(over="ignore"):  # tiny radii overflow to inf, which clips to +-1
        terms = np.clip(rel / a, -1.0, 1.0)
    return _weighted_rows(topology.weights, terms, shape)


def linear_field(state, topology: Topology, neighbor_state=None) -> np.ndarray:
    rel, shape = _scalar_inputs(state, topology, neighbor_state)
    return _weighted_rows(topology.weights, rel, shape)


def unit_vectors(rel: np.ndarray) -> np.ndarray:
    """Normalise vectors along the last axis; zero vectors stay zero."""
    norm = np.linalg.norm(rel, axis=-1, keepdims=True)
    out = np.zeros_like(rel)
    np.divide(rel, norm, out=out, where=norm > 0)
    return out


def unit_vector_field(state, topology: Topology, neighbor_state=None) -> np.ndarray:
    x = np.asarray(state, dtype=float)
    if x.ndim != 2 or x.shape[1] < 2:
        raise DomainError(f"unit-vector protocol needs (n, d>=2) states, got shape {x.shape}")
    if x.shape[0] != topology.n:
        raise DomainError(f"state has {x.shape[0]} agents, topology has {topology.n}")
    xn = x if neighbor_state is None else np.asarray(neighbor_state, dtype=float).reshape(x.shape)
    rel = xn[None, :, :] - x[:, None, :]
    return np.einsum("ij,ijk->ik", topology.weights, unit_vectors(rel))


@dataclass(frozen=True)
class ProtocolKind:
    """Which update law to integrate; ``radius`` only applies to ``saturated``."""

    tag: str = SIGN
    radius: float | None = None

    def __post_init__(self):
        if self.tag not in KINDS:
            raise DomainError(f"unknown protocol {self.tag!r}; expected one of {KINDS}")
        if self.tag == SATURATED:
            if self.radius is None or not self.radius > 0:
                raise DomainError(f"saturated protocol needs a positive radius, got {self.radius}")
        elif self.radius is not None:
            raise DomainError(f"radius only applies to the saturated protocol, not {self.tag!r}")

    @classmethod
    def saturated(cls, radius: float) -> "ProtocolKind":
        return cls(SATURATED, radius)

    @property
    def vector(self) -> bool:
        return self.tag == UNIT_VECTOR

    def field(self, state, topology: Topology, neighbor_state=None) -> np.ndarray:
        if self.tag == SIGN:
            return scalar_sign_field(state, topology, neighbor_state)
        if self.tag == UNIT_VECTOR:
            return unit_vector_field(state, topology, neighbor_state)
        if self.tag == SATURATED:
            return saturated_field(state, topology, self.radius, neighbor_state)
        return linear_field(state, topology, neighbor_state)

    def __str__(self):
        return f"saturated(a={self.radius:g})" if self.tag == SATURATED else self.tag
