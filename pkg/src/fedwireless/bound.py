"""Closed-form convergence bound for scheduled, rate-limited federated SGD.

For mu-strongly-convex, L-smooth local objectives with bounded stochastic
gradients, the expected squared distance to the optimum after round t obeys
the recursion

    e(t+1) = A(t) * e(t) + B(t)

where ``A`` is the per-round contraction factor and ``B`` collects the
noise injected by partial participation, local drift, compression, and
data heterogeneity.  ``rho(t)`` is the fraction of coordinates a scheduled
device can afford to convey that round; it couples the bound to the fading
channel through the random-sparsifier bit cost.

The recursion form is used instead of the equivalent product-sum expansion
because products of hundreds of contraction factors underflow; the two
forms are cross-checked in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from . import seeding
from .channel import capacities, draw_channel_gains, transmit_power
from .compress import max_q
from .schedule import schedule_random

_ATOL = 1e-12


@dataclass(frozen=True)
class BoundParams:
    """Inputs to the convergence recursion.

    Attributes:
        mu: strong-convexity modulus of every local objective.
        L: smoothness constant (mu <= L).
        tau: local SGD steps per round.
        G: bound on the expected squared stochastic-gradient norm, sqrt form.
        Gamma: heterogeneity gap — global minimum minus the average of the
            local minima; zero for perfectly balanced data.
        M: device count; K: scheduled devices per round.
        T: rounds.
        lr_schedule: t -> eta(t); must satisfy 0 < eta(t) <= min(1, 1/(mu*tau)).
        init_dist_sq: squared distance of the initial model from the optimum.
    """

    mu: float
    L: float
    tau: int
    G: float
    Gamma: float
    M: int
    K: int
    T: int
    lr_schedule: Callable[[int], float]
    init_dist_sq: float

    def __post_init__(self):
        if not 0 < self.mu <= self.L:
            raise ValueError(f"need 0 < mu <= L, got mu={self.mu}, L={self.L}")
        if self.tau < 1:
            raise ValueError(f"tau must be >= 1, got {self.tau}")
        if self.G < 0 or self.Gamma < 0:
            raise ValueError("G and Gamma must be nonnegative")
        if not 1 <= self.K <= self.M:
            raise ValueError(f"need 1 <= K <= M, got K={self.K}, M={self.M}")
        if self.T < 0:
            raise ValueError(f"T must be nonnegative, got {self.T}")
        if self.init_dist_sq < 0:
            raise ValueError("init_dist_sq must be nonnegative")
        cap = min(1.0, 1.0 / (self.mu * self.tau))
        for t in range(self.T):
            eta = self.lr_schedule(t)
            if not 0 < eta <= cap * (1 + 1e-12):
                raise ValueError(
                    f"lr_schedule({t}) = {eta} outside (0, min(1, 1/(mu*tau)) = {cap}]"
                )

    def etas(self) -> np.ndarray:
        return np.array([self.lr_schedule(t) for t in range(self.T)])


@dataclass(frozen=True)
class RhoSequence:
    """Per-round conveyed-coordinate fractions, each in [0, 1]."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        if values.ndim != 1:
            raise ValueError("rho sequence must be 1-D")
        if np.any(values < 0) or np.any(values > 1):
            raise ValueError("every rho must lie in [0, 1]")

    def __len__(self) -> int:
        return self.values.size


def contraction_coeff(rho, eta, mu: float, tau: int):
    """Per-round contraction factor 1 - mu*rho*eta*(tau - eta*(tau-1)).

    Guaranteed to lie in [0, 1] under the learning-rate constraint; values
    outside (beyond roundoff) signal an invalid parameter set and raise.
    Accepts scalars or arrays for rho/eta.
    """
    rho = np.asarray(rho, dtype=np.float64)
    eta = np.asarray(eta, dtype=np.float64)
    a = 1.0 - mu * rho * eta * (tau - eta * (tau - 1))
    if np.any(a < -_ATOL) or np.any(a > 1 + _ATOL):
        raise ValueError(
            "contraction factor outside [0, 1]; learning rate violates "
            "the 0 < eta <= min(1, 1/(mu*tau)) requirement"
        )
    a = np.clip(a, 0.0, 1.0)
    return float(a) if a.ndim == 0 else a


def drift_coeff(rho, eta, tau: int, G: float, Gamma: float, M: int, K: int, mu: float):
    """Per-round additive error term of the distance recursion.

    Four parts: scheduling variance (vanishes at K = M), the accumulated
    local-step drift, the compression/stochastic-gradient term, and the
    data-heterogeneity penalty.  Accepts scalars or arrays for rho/eta.
    """
    if not 1 <= K <= M:
        raise ValueError(f"need 1 <= K <= M, got K={K}, M={M}")
    rho = np.asarray(rho, dtype=np.float64)
    eta = np.asarray(eta, dtype=np.float64)
    eta2 = eta**2
    if K == M:
        sched = np.zeros_like(rho * eta)
    else:
        sched = (M - K) * rho * eta2 * tau**2 * G**2 / (K * (M - 1))
    local_drift = rho * (1 + mu * (1 - eta)) * eta2 * G**2 * (tau * (tau - 1) * (2 * tau - 1) / 6)
    gradient = rho * eta2 * (tau**2 + tau - 1) * G**2
    heterogeneity = 2 * rho * eta * (tau - 1) * Gamma
    b = sched + local_drift + gradient + heterogeneity
    return float(b) if b.ndim == 0 else b


def bound_trajectory(params: BoundParams, rho_seq: RhoSequence | np.ndarray) -> np.ndarray:
    """Distance bounds e(0..T) under the given per-round rho values."""
    rho = rho_seq.values if isinstance(rho_seq, RhoSequence) else np.asarray(rho_seq)
    if rho.size < params.T:
        raise ValueError(f"need at least {params.T} rho values, got {rho.size}")
    rho = rho[: params.T]
    eta = params.etas()
    a = np.atleast_1d(contraction_coeff(rho, eta, params.mu, params.tau))
    b = np.atleast_1d(
        drift_coeff(rho, eta, params.tau, params.G, params.Gamma, params.M, params.K, params.mu)
    )
    out = np.empty(params.T + 1)
    out[0] = params.init_dist_sq
    for t in range(params.T):
        out[t + 1] = a[t] * out[t] + b[t]
    return out


def loss_gap_bound(traj: np.ndarray, L: float) -> np.ndarray:
    """Expected-loss gap bounds: smoothness converts distance to (L/2)*e."""
    if L <= 0:
        raise ValueError(f"L must be > 0, got {L}")
    return (L / 2.0) * np.asarray(traj, dtype=np.float64)


def sample_rho_sequence(
    d: int,
    M: int,
    K: int,
    n: float,
    pbar: float,
    noise_var: float,
    T: int,
    rng: np.random.Generator,
) -> RhoSequence:
    """Draw T rounds of channel-limited sparsity fractions.

    Each round schedules K of M devices uniformly at random, draws their
    fading gains, splits the n slots so all deliver equally many bits, and
    inverts the random-sparsifier cost against that common budget.
    """
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    power = transmit_power(M, K, pbar)
    budgets = np.empty(T)
    for t in range(T):
        schedule_random(M, K, rng)  # which devices is irrelevant; gains are i.i.d.
        gains = draw_channel_gains(K, rng)
        caps = capacities(gains, power, noise_var)
        if np.any(caps <= 0):
            # Equal-bit sharing with a zero-capacity member drives every
            # budget to zero (it absorbs all slots).
            budgets[t] = 0.0
        else:
            budgets[t] = n / np.sum(1.0 / caps)
    q = max_q(d, budgets, "rand")
    return RhoSequence(np.asarray(q, dtype=np.float64) / d)


@dataclass(frozen=True)
class SweepSeries:
    """Replica-averaged trajectories for one sweep value."""

    axis: str
    value: float
    rho_mean: np.ndarray
    dist_bound: np.ndarray
    loss_gap: np.ndarray


def series_params(params: BoundParams, axis: str, value) -> BoundParams:
    if axis == "K":
        return replace(params, K=int(value))
    if axis == "tau":
        return replace(params, tau=int(value))
    raise ValueError(f"axis must be 'K' or 'tau', got {axis!r}")


def replica_trajectory(
    params: BoundParams,
    axis: str,
    value,
    d: int,
    n: float,
    pbar: float,
    noise_var: float,
    seed: int,
    series_idx: int,
    rep: int,
) -> tuple[np.ndarray, np.ndarray]:
    """One replica's (rho sequence, distance trajectory) for a sweep cell.

    Module-level so worker pools can dispatch it.
    """
    p = series_params(params, axis, value)
    rng = seeding.stream(seed, seeding.REPLICA, series_idx, rep)
    rho = sample_rho_sequence(d, p.M, p.K, n, pbar, noise_var, p.T, rng)
    return rho.values, bound_trajectory(p, rho)


def sweep(
    params: BoundParams,
    axis: str,
    values,
    *,
    d: int,
    n: float,
    pbar: float = 1.0,
    noise_var: float = 1.0,
    replicas: int = 1,
    seed: int = 0,
    fixed_rho: float | None = None,
    trajectories=None,
) -> list[SweepSeries]:
    """Average loss-gap trajectories over channel replicas for each value.

    With ``fixed_rho``, the channel is bypassed and a single deterministic
    trajectory per value is produced.  ``trajectories`` optionally supplies
    precomputed (rho, trajectory) pairs keyed by (series_idx, rep) — the
    hook the CLI uses to fan replicas out to worker processes.
    """
    if replicas < 1:
        raise ValueError(f"replicas must be >= 1, got {replicas}")
    out = []
    for i, value in enumerate(values):
        p = series_params(params, axis, value)
        if fixed_rho is not None:
            rho = np.full(p.T, float(fixed_rho))
            dist = bound_trajectory(p, rho)
            out.append(
                SweepSeries(axis, value, rho, dist, loss_gap_bound(dist, p.L))
            )
            continue
        rho_acc = np.zeros(p.T)
        dist_acc = np.zeros(p.T + 1)
        for r in range(replicas):
            if trajectories is not None:
                rho, dist = trajectories[(i, r)]
            else:
                rho, dist = replica_trajectory(
                    params, axis, value, d, n, pbar, noise_var, seed, i, r
                )
            rho_acc += rho
            dist_acc += dist
        rho_mean = rho_acc / replicas
        dist_mean = dist_acc / replicas
        out.append(
            SweepSeries(axis, value, rho_mean, dist_mean, loss_gap_bound(dist_mean, p.L))
        )
    return out
