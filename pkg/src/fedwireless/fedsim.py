"""The federated training loop over the bandwidth-limited uplink.

One global round: the server broadcasts the model, every device runs
``tau`` local SGD steps, the scheduler picks K devices and splits the
band among them, each scheduled device compresses its update to fit its
bit budget, and the server averages what arrives.  All randomness flows
through `.seeding` streams, so a (config, seed) pair fully determines the
trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import seeding
from .channel import ChannelRealization, capacities, draw_channel_gains, transmit_power
from .compress import SparseUpdate, dsgd_quantize, max_q, sparse_l2norm
from .schedule import SchedulingDecision, decide

#: Optional replacement for the budget-constrained compressor in `run_round`,
#: called as hook(delta, bit_budget) -> SparseUpdate.  Used by tests to
#: disable compression.
CompressHook = Callable[[np.ndarray, float], SparseUpdate]


class NumericalDivergenceError(RuntimeError):
    """Local training produced a non-finite gradient or parameter."""

    def __init__(self, round_idx: int, device: int):
        self.round_idx = round_idx
        self.device = device
        super().__init__(
            f"non-finite values during local training (round {round_idx}, device {device})"
        )


@dataclass(frozen=True)
class ModelState:
    """Global parameter vector and the round counter."""

    theta: np.ndarray
    round: int = 0

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=np.float64)
        object.__setattr__(self, "theta", theta)
        if not np.all(np.isfinite(theta)):
            raise ValueError("model parameters must be finite")

    @property
    def dim(self) -> int:
        return self.theta.size


@dataclass(frozen=True)
class LocalUpdate:
    """One device's model difference after its local steps."""

    device: int
    delta: np.ndarray
    norm: float

    def __post_init__(self):
        expected = float(np.linalg.norm(self.delta))
        if abs(self.norm - expected) > 1e-9 * max(expected, 1.0):
            raise ValueError("norm inconsistent with delta")


@dataclass(frozen=True)
class DevicePartition:
    """A device's local dataset."""

    device: int
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        if self.X.ndim != 2 or self.y.ndim != 1 or self.X.shape[0] != self.y.shape[0]:
            raise ValueError("X must be (B, f) and y must be (B,)")

    @property
    def size(self) -> int:
        return self.y.size


@dataclass(frozen=True)
class TrainConfig:
    """Everything a federated run needs besides data and the loss model."""

    M: int
    K: int
    T: int
    tau: int
    batch: int
    lr_schedule: Callable[[int], float]
    seed: int
    policy: str = "bn2-c"
    Kc: int | None = None
    n_slots: float = 1000.0
    pbar: float = 1.0
    noise_var: float = 1.0
    optimizer: str = "sgd"

    def __post_init__(self):
        if self.tau < 1:
            raise ValueError(f"tau must be >= 1, got {self.tau}")
        if self.batch < 1:
            raise ValueError(f"batch must be >= 1, got {self.batch}")
        if not 1 <= self.K <= self.M:
            raise ValueError(f"need 1 <= K <= M, got K={self.K}, M={self.M}")
        if self.T < 0:
            raise ValueError(f"T must be nonnegative, got {self.T}")
        if self.n_slots <= 0 or self.pbar <= 0 or self.noise_var <= 0:
            raise ValueError("n_slots, pbar and noise_var must be > 0")
        if self.policy.upper() not in ("BC", "BN2", "BC-BN2", "BN2-C", "RANDOM"):
            raise ValueError(f"unknown policy {self.policy!r}")
        if self.optimizer not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


@dataclass(frozen=True)
class RoundMetrics:
    """What happened on the uplink in one round."""

    round: int
    policy: str
    selected: tuple[int, ...]
    q_values: tuple[int, ...]
    bit_budgets: tuple[float, ...]
    update_norms: tuple[float, ...]

    @property
    def mean_q(self) -> float:
        return float(np.mean(self.q_values)) if self.q_values else 0.0

    @property
    def mean_bits(self) -> float:
        return float(np.mean(self.bit_budgets)) if self.bit_budgets else 0.0


@dataclass(frozen=True)
class RoundRecord:
    """Round metrics plus the post-aggregation test evaluation."""

    metrics: RoundMetrics
    test_accuracy: float
    mean_loss: float


def partition_iid(
    X: np.ndarray,
    y: np.ndarray,
    M: int,
    B: int,
    rng: np.random.Generator,
    replace: bool = True,
) -> list[DevicePartition]:
    """Give each of M devices B samples drawn uniformly from the dataset.

    With ``replace=True`` (the default) devices may share samples.
    ``replace=False`` samples without replacement within each device and
    requires B <= len(dataset).
    """
    n = y.shape[0]
    if B < 1:
        raise ValueError(f"B must be >= 1, got {B}")
    if n < 1:
        raise ValueError("dataset must be nonempty")
    if not replace and B > n:
        raise ValueError(f"cannot draw {B} samples without replacement from {n}")
    parts = []
    for m in range(M):
        idx = rng.choice(n, size=B, replace=replace)
        parts.append(DevicePartition(device=m, X=X[idx], y=y[idx]))
    return parts


def partition_noniid(
    X: np.ndarray,
    y: np.ndarray,
    M: int,
    B: int,
    rng: np.random.Generator,
) -> list[DevicePartition]:
    """Label-skewed split: each device draws B/2 samples from each of 2 classes.

    The two classes are chosen uniformly at random per device; B must be
    even and the dataset must contain at least 2 classes.
    """
    if B < 2 or B % 2 != 0:
        raise ValueError(f"B must be even and >= 2, got {B}")
    classes = np.unique(y)
    if classes.size < 2:
        raise ValueError("non-IID partitioning needs at least 2 classes")
    by_class = {int(c): np.flatnonzero(y == c) for c in classes}
    parts = []
    for m in range(M):
        picked = rng.choice(classes, size=2, replace=False)
        idx = np.concatenate(
            [rng.choice(by_class[int(c)], size=B // 2, replace=True) for c in picked]
        )
        idx = rng.permutation(idx)
        parts.append(DevicePartition(device=m, X=X[idx], y=y[idx]))
    return parts


def local_sgd(
    state: ModelState,
    part: DevicePartition,
    cfg: TrainConfig,
    loss_model,
    rng: np.random.Generator,
) -> LocalUpdate:
    """Run tau local steps from the global model; return the model difference.

    Each step samples a mini-batch uniformly with replacement and applies
    one stochastic gradient step at the round's learning rate.  With
    ``optimizer="adam"`` the steps instead use Adam moments, reset at the
    start of every round.
    """
    eta = cfg.lr_schedule(state.round)
    theta = state.theta.copy()
    if cfg.optimizer == "adam":
        m = np.zeros_like(theta)
        v = np.zeros_like(theta)
        beta1, beta2, eps = 0.9, 0.999, 1e-8
    for i in range(cfg.tau):
        idx = rng.integers(0, part.size, size=cfg.batch)
        g = loss_model.grad(theta, part.X[idx], part.y[idx])
        if not np.all(np.isfinite(g)):
            raise NumericalDivergenceError(state.round, part.device)
        if cfg.optimizer == "adam":
            m = beta1 * m + (1 - beta1) * g
            v = beta2 * v + (1 - beta2) * g**2
            mhat = m / (1 - beta1 ** (i + 1))
            vhat = v / (1 - beta2 ** (i + 1))
            theta -= eta * mhat / (np.sqrt(vhat) + eps)
        else:
            theta -= eta * g
    delta = theta - state.theta
    return LocalUpdate(device=part.device, delta=delta, norm=float(np.linalg.norm(delta)))


def aggregate(state: ModelState, updates: Sequence[SparseUpdate], K: int) -> ModelState:
    """Apply the average of K sparse updates to the global model."""
    if K < 1 or len(updates) != K:
        raise ValueError(f"expected {K} updates, got {len(updates)}")
    acc = np.zeros_like(state.theta)
    for u in updates:
        if u.dim != state.dim:
            raise ValueError(f"update dim {u.dim} != model dim {state.dim}")
        acc[u.indices] += u.values
    return ModelState(theta=state.theta + acc / K, round=state.round + 1)


def evaluate(theta: np.ndarray, test_set: tuple[np.ndarray, np.ndarray], loss_model):
    """Classification accuracy and mean loss on a held-out set."""
    X, y = test_set
    if y.size == 0:
        raise ValueError("test set must be nonempty")
    accuracy = float(np.mean(loss_model.predict(theta, X) == y))
    return accuracy, loss_model.loss(theta, X, y)


def _quantized_norms(
    updates: Sequence[LocalUpdate], chan: ChannelRealization, K: int, dim: int
) -> np.ndarray:
    """Each device's update norm after compressing to a whole-band budget."""
    power = transmit_power(chan.num_devices, K, chan.pbar)
    caps = capacities(chan.gains, power, chan.noise_var)
    norms = np.empty(len(updates))
    for m, u in enumerate(updates):
        q_star = max_q(dim, chan.n_slots * caps[m], "dsgd")
        norms[m] = sparse_l2norm(dsgd_quantize(u.delta, q_star))
    return norms


def run_round(
    state: ModelState,
    partitions: Sequence[DevicePartition],
    cfg: TrainConfig,
    chan: ChannelRealization,
    loss_model,
    rng: np.random.Generator,
    compress: CompressHook | None = None,
) -> tuple[ModelState, RoundMetrics]:
    """One full global iteration: local training, scheduling, uplink, merge.

    ``rng`` seeds this round's training and scheduling randomness (one
    child stream per device plus one for the scheduler).  ``compress``
    replaces the default budget-constrained sign-mean compressor when
    given.
    """
    M = len(partitions)
    if chan.num_devices != M:
        raise ValueError("channel realization and partitions disagree on M")
    children = rng.spawn(M + 1)
    updates = [
        local_sgd(state, partitions[m], cfg, loss_model, children[m]) for m in range(M)
    ]
    norms = np.array([u.norm for u in updates])

    if cfg.policy.upper() == "BN2-C":
        scores = _quantized_norms(updates, chan, cfg.K, state.dim)
    else:
        scores = norms
    decision = decide(cfg.policy, chan, scores, cfg.K, Kc=cfg.Kc, rng=children[M])

    qs, compressed = [], []
    for lb in decision.budgets:
        delta = updates[lb.device].delta
        q_m = max_q(state.dim, lb.bits, "dsgd")
        if compress is None:
            u = dsgd_quantize(delta, q_m)
        else:
            u = compress(delta, lb.bits)
        qs.append(q_m)
        compressed.append(u)

    new_state = aggregate(state, compressed, cfg.K)
    metrics = RoundMetrics(
        round=state.round,
        policy=decision.policy,
        selected=decision.selected,
        q_values=tuple(qs),
        bit_budgets=tuple(lb.bits for lb in decision.budgets),
        update_norms=tuple(float(x) for x in norms),
    )
    return new_state, metrics


def run_experiment(
    cfg: TrainConfig,
    partitions: Sequence[DevicePartition],
    test_set: tuple[np.ndarray, np.ndarray],
    loss_model,
    theta0: np.ndarray | None = None,
    compress: CompressHook | None = None,
) -> tuple[ModelState, list[RoundRecord]]:
    """Run T rounds, evaluating after each aggregation.

    Channel gains for round t come from stream (CHANNEL, t) and the round's
    training randomness from stream (ROUND, t), so trajectories depend only
    on (cfg, data, theta0).
    """
    if len(partitions) != cfg.M:
        raise ValueError(f"config says M={cfg.M} but {len(partitions)} partitions given")
    if theta0 is None:
        theta0 = loss_model.init_params(seeding.stream(cfg.seed, seeding.MODEL_INIT))
    elif np.asarray(theta0).size != loss_model.dim:
        raise ValueError(
            f"theta0 has {np.asarray(theta0).size} entries, model needs {loss_model.dim}"
        )
    state = ModelState(theta=theta0, round=0)
    records = []
    for t in range(cfg.T):
        gains = draw_channel_gains(cfg.M, seeding.stream(cfg.seed, seeding.CHANNEL, t))
        chan = ChannelRealization(
            gains=gains, noise_var=cfg.noise_var, n_slots=cfg.n_slots, pbar=cfg.pbar
        )
        state, metrics = run_round(
            state,
            partitions,
            cfg,
            chan,
            loss_model,
            seeding.stream(cfg.seed, seeding.ROUND, t),
            compress=compress,
        )
        accuracy, mean_loss = evaluate(state.theta, test_set, loss_model)
        records.append(
            RoundRecord(metrics=metrics, test_accuracy=accuracy, mean_loss=mean_loss)
        )
    return state, records
