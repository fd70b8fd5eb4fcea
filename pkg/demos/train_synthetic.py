"""A desk-scale federated run over the fading uplink, policy by policy.

Trains a softmax classifier on synthetic blobs with ten devices and a
single scheduled transmitter per round, comparing scheduling policies on
the same data and channel seeds.  Writes one CSV per policy next to this
script; render them with the companion plots package if installed:

    plots accuracy --in demo_sim_bn2-c.csv --in demo_sim_bc.csv --out demo.png
"""

from pathlib import Path

import numpy as np

from fedwireless import seeding
from fedwireless.datasets import make_blobs
from fedwireless.fedsim import TrainConfig, partition_iid, run_experiment
from fedwireless.losses import SoftmaxRegression
from fedwireless.rates import ConstantRate

HERE = Path(__file__).resolve().parent
SEED = 3

model = SoftmaxRegression(24, 2)
X, y = make_blobs(3000, 24, 2, seeding.stream(SEED, seeding.PARTITION, 0), sep=3.0)
train, test = (X[:2000], y[:2000]), (X[2000:], y[2000:])
parts = partition_iid(*train, M=10, B=200, rng=seeding.stream(SEED, seeding.PARTITION, 1))

for policy in ("bc", "bn2", "bn2-c", "random"):
    cfg = TrainConfig(
        M=10, K=1, T=150, tau=3, batch=20, lr_schedule=ConstantRate(0.3),
        seed=SEED, policy=policy, n_slots=2000.0,
    )
    _, records = run_experiment(cfg, parts, test, model)
    out = HERE / f"demo_sim_{policy}.csv"
    with open(out, "w") as fh:
        fh.write("round,policy,K,selected,test_accuracy,mean_loss,mean_q,mean_bits\n")
        for rec in records:
            sel = ";".join(str(m) for m in rec.metrics.selected)
            fh.write(
                f"{rec.metrics.round},{policy},1,{sel},{rec.test_accuracy!r},"
                f"{rec.mean_loss!r},{rec.metrics.mean_q!r},{rec.metrics.mean_bits!r}\n"
            )
    accs = [rec.test_accuracy for rec in records]
    print(f"{policy:>7}: final acc {accs[-1]:.3f}, best {max(accs):.3f}, "
          f"mean bits/round {np.mean([r.metrics.mean_bits for r in records]):.0f} "
          f"-> {out.name}")
