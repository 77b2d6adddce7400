"""CSV output and standalone matplotlib scripts for traces."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Mapping

from .errors import DomainError
from .simulator import Trace

_STATES_SCRIPT = '''\
"""Agent states over time. Reads {csv_name} next to this script."""
import csv
from collections import defaultdict
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = Path(__file__).resolve().parent
series = defaultdict(lambda: ([], []))
with open(here / "{csv_name}", newline="") as fh:
    for row in csv.DictReader(fh):
        key = (int(row["agent"]), int(row["dim"]))
        series[key][0].append(float(row["t"]))
        series[key][1].append(float(row["value"]))

fig, ax = plt.subplots(figsize=(7, 4))
for (agent, dim), (t, v) in sorted(series.items()):
    ax.plot(t, v, lw=1, label=f"agent {{agent}}" if dim == 0 else None)
ax.set_xlabel("time")
ax.set_ylabel("state")
ax.set_title("{title}")
if len(series) <= 12:
    ax.legend(fontsize="small", ncol=2)
fig.tight_layout()
fig.savefig(here / "states.png", dpi=150)
'''

_LYAPUNOV_SCRIPT = '''\
"""Lyapunov function (state spread) over time, one line per series."""
import csv
from collections import defaultdict
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = Path(__file__).resolve().parent
series = defaultdict(lambda: ([], []))
with open(here / "{csv_name}", newline="") as fh:
    for row in csv.DictReader(fh):
        series[row["series"]][0].append(float(row["t"]))
        series[row["series"]][1].append(float(row["V"]))

fig, ax = plt.subplots(figsize=(7, 4))
for name, (t, v) in series.items():
    ax.plot(t, v, lw=1.2, label=name)
ax.set_xlabel("time")
ax.set_ylabel("V = max - min")
ax.set_title("{title}")
ax.legend()
fig.tight_layout()
fig.savefig(here / "lyapunov.png", dpi=150)
'''


def write_lyapunov_csv(traces: Mapping[str, Trace], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("t", "series", "V"))
        for name, trace in traces.items():
            for t, v in zip(trace.times, trace.lyapunov):
                w.writerow((repr(float(t)), name, repr(float(v))))


def emit_plots(traces: Trace | Mapping[str, Trace], out_dir, title: str = "") -> list[Path]:
    """Write ``trace.csv``, ``lyapunov.csv`` and the two plot scripts.

    With several traces the state plot uses the first one and the Lyapunov
    plot overlays all of them. Returns the written paths.
    """
    if isinstance(traces, Trace):
        traces = {"run": traces}
    if not traces or any(len(t) == 0 for t in traces.values()):
        raise DomainError("cannot plot an empty trace")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    first = next(iter(traces.values()))
    paths = [out / "trace.csv", out / "lyapunov.csv", out / "plot_states.py", out / "plot_lyapunov.py"]
    first.write_csv(paths[0])
    write_lyapunov_csv(traces, paths[1])
    paths[2].write_text(_STATES_SCRIPT.format(csv_name=paths[0].name, title=title or "agent states"), encoding="utf-8")
    paths[3].write_text(_LYAPUNOV_SCRIPT.format(csv_name=paths[1].name, title=title or "Lyapunov function"), encoding="utf-8")
    return paths
