"""Scenarios shipped with the package.

The four switching graphs of ``paper_fig2`` are built edge by edge to have
the structural properties the experiment relies on (10 agents, edges
listed as ``from -> to``, i.e. ``to`` listens to ``from``):

* ``G1``: undirected ring ``0 - 1 - ... - 9 - 0``. Connected, has a spanning tree.
* ``G2``: directed chains ``0 -> 1 -> 2 -> 3 -> 4`` and ``5 -> 6 -> 7 -> 8 -> 9``
  plus ``5 -> 4``. Weakly connected but agents 0 and 5 both lack inputs,
  so there is no spanning tree.
* ``G3``: directed ring ``0 -> 1 -> ... -> 9 -> 0``. Strongly connected.
* ``G4``: five undirected pairs ``{0,1}, {2,3}, ..., {8,9}``. No spanning tree.

The schedule cycles G1, G2, G3, G4 with 0.4 s dwell, so every aligned
0.8 s window contains G1 or G3.
"""

from __future__ import annotations

import copy

from .scenario_io import Scenario, scenario_from_dict


def _edges(pairs, undirected=False):
    out = []
    for a, b in pairs:
        out.append({"from": a, "to": b, "weight": 1})
        if undirected:
            out.append({"from": b, "to": a, "weight": 1})
    return out


def _complete(n, w=1):
    return [[0 if i == j else w for j in range(n)] for i in range(n)]


_FIG2_TOPOLOGIES = {
    "G1": {"n": 10, "edges": _edges([(i, (i + 1) % 10) for i in range(10)], undirected=True)},
    "G2": {"n": 10, "edges": _edges([(0, 1), (1, 2), (2, 3), (3, 4), (5, 6), (6, 7), (7, 8), (8, 9), (5, 4)])},
    "G3": {"n": 10, "edges": _edges([(i, (i + 1) % 10) for i in range(10)])},
    "G4": {"n": 10, "edges": _edges([(i, i + 1) for i in range(0, 10, 2)], undirected=True)},
}

_DOCS = [
    {
        "name": "paper_fig2",
        "description": "10 agents, uniform [0,10] start, switching G1..G4 every 0.4 s",
        "protocol": {"kind": "sign"},
        "topologies": _FIG2_TOPOLOGIES,
        "schedule": {
            "mode": "cycle",
            "window": 0.8,
            "entries": [{"topology": g, "dwell": 0.4} for g in ("G1", "G2", "G3", "G4")],
        },
        "initial_state": {"uniform": {"low": 0, "high": 10, "n": 10, "d": 1}},
        "sim": {"dt": 0.001, "t_max": 10.0, "tolerance": 0.01, "seed": 2020, "stop_on_converge": False},
        "application": {"kind": "consensus"},
    },
    {
        "name": "static_tree",
        "description": "directed tree rooted at agent 0, unit weights",
        "protocol": {"kind": "sign"},
        "topologies": {"T": {"n": 6, "edges": _edges([(0, 1), (0, 2), (1, 3), (1, 4), (2, 5)])}},
        "schedule": {"entries": [{"topology": "T", "dwell": 1.0}]},
        "initial_state": {"uniform": {"low": 0, "high": 10, "n": 6, "d": 1}},
        "sim": {"dt": 0.001, "t_max": 20.0, "tolerance": 0.01, "seed": 1},
        "application": {"kind": "consensus"},
    },
    {
        "name": "disconnected",
        "description": "two undirected triangles with no link between them",
        "protocol": {"kind": "sign"},
        "topologies": {
            "A": {"n": 6, "edges": _edges([(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)], undirected=True)},
        },
        "schedule": {"entries": [{"topology": "A", "dwell": 1.0}]},
        "initial_state": {"values": [1.0, 2.0, 3.0, 7.0, 8.0, 9.0]},
        "sim": {"dt": 0.001, "t_max": 50.0, "tolerance": 0.01, "stop_on_converge": False},
        "application": {"kind": "consensus"},
    },
    {
        "name": "delay_chattering",
        "description": "complete graph of 5 agents reading neighbors 20 steps late",
        "protocol": {"kind": "sign"},
        "topologies": {"K5": {"weights": _complete(5)}},
        "schedule": {"entries": [{"topology": "K5", "dwell": 1.0}]},
        "initial_state": {"uniform": {"low": 0, "high": 10, "n": 5, "d": 1}},
        "sim": {"dt": 0.001, "t_max": 10.0, "tolerance": 0.01, "delay": 20, "seed": 0, "stop_on_converge": False},
        "application": {"kind": "consensus"},
    },
    {
        "name": "rendezvous_2d",
        "description": "two agents 10 apart meet halfway",
        "protocol": {"kind": "unit_vector"},
        "topologies": {"K2": {"weights": _complete(2)}},
        "schedule": {"entries": [{"topology": "K2", "dwell": 1.0}]},
        "initial_state": {"values": [[0.0, 0.0], [10.0, 0.0]]},
        "sim": {"dt": 0.001, "t_max": 6.0, "tolerance": 0.01},
        "application": {"kind": "rendezvous"},
    },
    {
        "name": "optimization_quadratic",
        "description": "f1 = x^2/2, f2 = (x-2)^2/2; minimiser of the average is 1",
        "protocol": {"kind": "sign"},
        "topologies": {"K2": {"weights": _complete(2)}},
        "schedule": {"entries": [{"topology": "K2", "dwell": 1.0}]},
        "initial_state": {"values": [-3.0, 5.0]},
        "sim": {"dt": 1.0, "t_max": 2000.0},
        "application": {
            "kind": "optimization",
            "objectives": [{"q": 1.0, "b": 0.0}, {"q": 1.0, "b": 2.0}],
            "gamma": 1.0,
            "alpha0": 0.5,
            "step_schedule": "diminishing",
            "iterations": 2000,
        },
    },
    {
        "name": "formation_triangle",
        "description": "three agents settle into a unit equilateral triangle",
        "protocol": {"kind": "unit_vector"},
        "topologies": {"K3": {"weights": _complete(3)}},
        "schedule": {"entries": [{"topology": "K3", "dwell": 1.0}]},
        "initial_state": {"uniform": {"low": 0, "high": 1, "n": 3, "d": 2}},
        "sim": {"dt": 0.01, "t_max": 60.0, "tolerance": 0.05, "seed": 3, "stop_on_converge": False},
        "application": {"kind": "formation", "distance": 1.0, "attraction": 0.5, "damping": 0.5, "speed": 1.0},
    },
    {
        "name": "estimation_scalar",
        "description": "five agents on a ring track a constant scalar from noisy readings",
        "protocol": {"kind": "unit_vector"},
        "topologies": {"C5": {"n": 5, "edges": _edges([(i, (i + 1) % 5) for i in range(5)], undirected=True)}},
        "schedule": {"entries": [{"topology": "C5", "dwell": 1.0}]},
        "initial_state": {"uniform": {"low": 0, "high": 10, "n": 5, "d": 1}},
        "sim": {"dt": 1.0, "t_max": 400.0, "seed": 11},
        "application": {
            "kind": "estimation",
            "A": [[1.0]],
            "H": [[[1.0]]] * 5,
            "process_std": 0.0,
            "measurement_std": 0.1,
            "gain": 0.02,
            "x_true": [3.0],
            "steps": 400,
        },
    },
]

NAMES = tuple(d["name"] for d in _DOCS)


def bundled_documents() -> dict[str, dict]:
    return {d["name"]: copy.deepcopy(d) for d in _DOCS}


def bundled_scenarios() -> list[Scenario]:
    return [scenario_from_dict(copy.deepcopy(d)) for d in _DOCS]


def load_bundled(name: str) -> Scenario:
    docs = bundled_documents()
    if name not in docs:
        raise KeyError(f"no bundled scenario named {name!r}; available: {', '.join(NAMES)}")
    return scenario_from_dict(docs[name])
