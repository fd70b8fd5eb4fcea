"""The two update compressors side by side, and what a bit budget buys.

The sign-mean scheme pays 33 bits total plus the support pattern; the
random sparsifier pays 33 bits for every kept coordinate.  Against the
same budget, the sign-mean scheme therefore keeps far more coordinates,
at the price of collapsing them to a single shared value.
"""

import numpy as np

from fedwireless.compress import (
    bit_cost_dsgd,
    bit_cost_rand,
    dsgd_quantize,
    max_q,
    rand_sparsify,
    sparse_l2norm,
)

rng = np.random.default_rng(1)
d = 1000
update = rng.standard_normal(d) * np.linspace(0.2, 1.5, d)

print(f"{'q':>6} {'sign-mean bits':>15} {'random bits':>13}")
for q in (1, 10, 50, 200, 500):
    print(f"{q:>6} {bit_cost_dsgd(d, q):>15.1f} {bit_cost_rand(d, q):>13.1f}")

for budget in (100.0, 1000.0, 10_000.0):
    q_sign = max_q(d, budget, "dsgd")
    q_rand = max_q(d, budget, "rand")
    print(f"\nbudget {budget:>8.0f} bits -> sign-mean keeps {q_sign:>4}, "
          f"random keeps {q_rand:>3}")

budget = 2000.0
q_sign = max_q(d, budget, "dsgd")
q_rand = max_q(d, budget, "rand")
signed = dsgd_quantize(update, q_sign)
random = rand_sparsify(update, q_rand, rng)
print(f"\noriginal norm          {np.linalg.norm(update):8.3f}")
print(f"sign-mean (q={q_sign:>3}) norm {sparse_l2norm(signed):8.3f}, "
      f"distinct values: {np.unique(signed.values).size}")
print(f"random    (q={q_rand:>3}) norm {sparse_l2norm(random):8.3f}, "
      f"values preserved to ~2^-32 of their range")

# The random sparsifier is unbiased up to the keep fraction q/d.
acc = np.zeros(d)
draws = 2000
for _ in range(draws):
    u = rand_sparsify(update, 250, rng)
    acc[u.indices] += u.values
ratio = (acc / draws) @ update / (update @ update)
print(f"\nmean sparsified update / original, q/d = 0.25: ratio {ratio:.4f}")
