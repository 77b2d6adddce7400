"""
Chattering, delay and saturation
================================

With a fixed step the sign protocol never sits still: agents hop across one
another by about dt per step. Reading neighbours 20 steps late makes the
hops larger. A saturated law, linear inside a small ball, damps them.
"""

from signcons import ProtocolKind, SimConfig, load_bundled, simulate
from signcons.graph import ring
from signcons.simulator import chattering_amplitude

scenario = load_bundled("delay_chattering")
x0 = scenario.initial_state()

for tau in (0, 20):
    cfg = SimConfig(t_max=10.0, delay=tau, stop_on_converge=False)
    for protocol in (ProtocolKind("sign"), ProtocolKind.saturated(0.1)):
        amp = chattering_amplitude(simulate(x0, scenario.schedule, protocol, cfg), 0.5)
        print("complete graph  tau=%2d  %-16s tail amplitude %.5f" % (tau, protocol, amp))

# on a sparser ring the delay effect is easier to see in the range
for tau in (0, 20):
    cfg = SimConfig(t_max=10.0, delay=tau, stop_on_converge=False)
    amp = chattering_amplitude(simulate(x0, ring(5), ProtocolKind("sign"), cfg), 0.5)
    print("ring            tau=%2d  sign             tail amplitude %.5f" % (tau, amp))

# the saturated law is exactly still at the end: inside the ball it is a
# linear consensus, which the delay here does not destabilise
