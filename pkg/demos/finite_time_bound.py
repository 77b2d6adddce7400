"""
How fast is finite time?
========================

The range of a sign-protocol swarm closes at a rate of at least one minimum
edge weight, and twice that when both extreme agents are pulled inward. This
script compares the first crossing of V <= 0.01 with both estimates, then
shows two small graphs where the faster estimate is too optimistic.
"""

import numpy as np

from signcons import ProtocolKind, SimConfig, Topology, simulate
from signcons.graph import complete, min_positive_weight
from signcons.simulator import bound_report

sign = ProtocolKind("sign")


def report(label, x0, top):
    trace = simulate(x0, top, sign, SimConfig(t_max=60.0))
    r = bound_report(trace, min_positive_weight(top), 1e-2)
    print("%-28s crossed at %6.3f   range/(2w) = %6.3f %-4s  range/w = %6.3f %s" % (
        label, r.crossing, r.two_sided, "ok" if r.two_sided_ok else "LATE",
        r.one_sided, "ok" if r.one_sided_ok else "LATE"))


# two agents ten apart: each moves at unit speed, so they meet at t = 5
report("pair", [0.0, 10.0], complete(2))

# a complete graph closes faster than either estimate
rng = np.random.default_rng(0)
report("complete, 8 agents", rng.uniform(0, 10, 8), complete(8))

# an undirected path: agents 1 and 2 start close and must merge before the
# pair can chase agent 0, so the range shrinks at a single rate for a while
path = Topology([[0, 1, 0], [1, 0, 1], [0, 1, 0]])
report("path 0-1-2 from (0, 10, 9)", [0.0, 10.0, 9.0], path)

# two 2-cycles joined by one link: the follower cycle drags itself along at
# a reduced net speed once its members agree
w = np.zeros((4, 4))
w[0, 1] = w[1, 0] = w[2, 3] = w[3, 2] = w[2, 0] = 1
report("two 2-cycles", [10.0, 9.0, 0.0, 1.0], Topology(w))
