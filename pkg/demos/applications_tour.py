"""
Four uses of one bit
====================

Rendezvous, distributed estimation, distributed optimisation and formation
control all reuse the same sign / unit-vector coupling.
"""

import numpy as np

from signcons import load_bundled, run_scenario
from signcons.applications import steady_state_error_band

# rendezvous: two robots 10 m apart, each heading at unit speed toward the other
trace = run_scenario(load_bundled("rendezvous_2d"))
print("rendezvous at t = %.3f, positions %s" % (trace.converged_at, np.round(trace.final_state, 3).tolist()))

# estimation: five sensors on a ring track a constant from noisy readings;
# the normalised innovation keeps them jittering at the gain scale
trace = run_scenario(load_bundled("estimation_scalar"))
mean, worst = steady_state_error_band(trace)
print("estimation error over the second half: mean %.3f, max %.3f" % (mean, worst))

# optimisation: minimise x^2/2 + (x-2)^2/2 split across two agents
trace = run_scenario(load_bundled("optimization_quadratic"))
x = trace.states[:, :, 0]
print("optimisation: x after 10, 100, 2000 iterations:", [np.round(x[k], 3).tolist() for k in (10, 100, 2000)])

# formation: three agents settle into a unit equilateral triangle
trace = run_scenario(load_bundled("formation_triangle"))
labels, errors = trace.metrics["distance_error"]
print("formation edge errors at the end:", dict(zip(labels, np.round(errors[-1], 5).tolist())))
