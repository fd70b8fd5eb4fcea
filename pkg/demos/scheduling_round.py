"""One uplink round under every scheduling policy.

Fixes a channel realization and a set of per-device update norms, then
shows which devices each policy picks and how many bits each selected
device may transmit.  Channel-driven and norm-driven policies disagree
exactly where a strong update sits behind a weak link.
"""

import numpy as np

from fedwireless.channel import ChannelRealization, capacities, draw_channel_gains, transmit_power
from fedwireless.compress import dsgd_quantize, max_q, sparse_l2norm
from fedwireless.schedule import decide

M, K, Kc, d = 6, 2, 4, 400
rng = np.random.default_rng(7)

chan = ChannelRealization(
    gains=draw_channel_gains(M, rng), noise_var=1.0, n_slots=800.0, pbar=1.0
)
deltas = [rng.standard_normal(d) * rng.uniform(0.2, 2.0) for _ in range(M)]
norms = np.array([np.linalg.norm(x) for x in deltas])

power = transmit_power(M, K, chan.pbar)
caps = capacities(chan.gains, power, chan.noise_var)
print(f"{'device':>6} {'capacity':>9} {'norm':>7}")
for m in range(M):
    print(f"{m:>6} {caps[m]:>9.2f} {norms[m]:>7.2f}")

# For the quantized-norm policy each device first compresses as if it
# owned the whole band, and reports the norm of what survives.
qnorms = []
for m in range(M):
    q_star = max_q(d, chan.n_slots * caps[m], "dsgd")
    qnorms.append(sparse_l2norm(dsgd_quantize(deltas[m], q_star)))

print(f"\n{'policy':>8} {'selected':>10} {'bits per device':>30}")
for policy, scores, kwargs in [
    ("bc", norms, {}),
    ("bn2", norms, {}),
    ("bc-bn2", norms, {"Kc": Kc}),
    ("bn2-c", qnorms, {}),
    ("random", norms, {"rng": np.random.default_rng(42)}),
]:
    decision = decide(policy, chan, scores, K, **kwargs)
    bits = ", ".join(f"{b.device}: {b.bits:.0f}" for b in decision.budgets)
    print(f"{policy:>8} {str(list(decision.selected)):>10}   {bits}")
