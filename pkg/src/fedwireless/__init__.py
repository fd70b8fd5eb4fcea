"""Federated learning over a bandwidth-limited fading wireless uplink.

A numpy/scipy toolkit for studying how device scheduling, bandwidth
allocation, and update compression interact when a parameter server
aggregates model updates arriving over a shared fading channel:

* `.channel`  — fading gains, transmit power, Shannon link budgets.
* `.compress` — sign-mean and random sparsifiers with exact bit costs.
* `.schedule` — scheduling policies and slot allocation rules.
* `.fedsim`   — the federated training loop and data partitioning.
* `.bound`    — the closed-form convergence bound and its channel-driven
  Monte Carlo sweeps.
* `.cli`      — the ``fedwireless`` command (simulate / bound / sweep).
"""

from .bound import (
    BoundParams,
    RhoSequence,
    SweepSeries,
    bound_trajectory,
    contraction_coeff,
    drift_coeff,
    loss_gap_bound,
    sample_rho_sequence,
    sweep,
)
from .channel import (
    ChannelRealization,
    LinkBudget,
    capacities,
    capacity,
    draw_channel_gains,
    transmit_power,
)
from .compress import (
    SparseUpdate,
    bit_cost_dsgd,
    bit_cost_rand,
    dsgd_quantize,
    max_q,
    rand_sparsify,
    sparse_l2norm,
)
from .fedsim import (
    DevicePartition,
    LocalUpdate,
    ModelState,
    NumericalDivergenceError,
    RoundMetrics,
    RoundRecord,
    TrainConfig,
    aggregate,
    evaluate,
    local_sgd,
    partition_iid,
    partition_noniid,
    run_experiment,
    run_round,
)
from .losses import SoftmaxRegression, TanhMLP
from .rates import ConstantRate, InverseTimeRate, parse_rate
from .schedule import (
    SchedulingDecision,
    alloc_equal_bits,
    alloc_weighted_bits,
    decide,
    schedule_bc,
    schedule_bc_bn2,
    schedule_bn2,
    schedule_bn2c,
    schedule_random,
    top_k,
)

__version__ = "0.1.0"
