"""Device scheduling policies and bandwidth allocation for the shared uplink.

Four deterministic policies pick the K transmitting devices each round:

* ``bc``     — largest channel gain magnitudes; slots split so every
               scheduled device delivers the same number of bits.
* ``bn2``    — largest update norms; slots split so delivered bits are
               proportional to the norms.
* ``bc-bn2`` — largest norms among the Kc best channels; norm-weighted slots.
* ``bn2-c``  — largest norms of the channel-budget-quantized updates (each
               device compresses as if it owned the whole band and reports
               the compressed norm); quantized-norm-weighted slots.

``random`` (uniform K-subset, equal-bit slots) is the reference policy used
by the convergence analysis.  All selections break ties toward the lower
device index so runs are reproducible.

The weighted allocation solves the proportionality constraint
``bits_i / bits_j = w_i / w_j`` directly: ``slots_k = n * (w_k / C_k) /
sum_j (w_j / C_j)``.  Delivered bits being proportional to the weights is
the load-bearing contract here, checked by the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, LinkBudget, capacities, transmit_power

POLICIES = ("BC", "BN2", "BC-BN2", "BN2-C", "RANDOM")


@dataclass(frozen=True)
class SchedulingDecision:
    """The selected device set with per-device slot and bit allocations."""

    selected: tuple[int, ...]
    budgets: tuple[LinkBudget, ...]
    policy: str
    n_slots: float

    def __post_init__(self):
        if self.policy not in POLICIES:
            raise ValueError(f"unknown policy tag {self.policy!r}")
        if len(set(self.selected)) != len(self.selected):
            raise ValueError("selected devices must be distinct")
        if len(self.budgets) != len(self.selected):
            raise ValueError("one budget per selected device required")
        total = sum(b.slots for b in self.budgets)
        if abs(total - self.n_slots) > 1e-9 * max(self.n_slots, 1.0):
            raise ValueError(f"slots sum to {total}, expected {self.n_slots}")

    def bits_for(self, device: int) -> float:
        for b in self.budgets:
            if b.device == device:
                return b.bits
        return 0.0


def top_k(scores, K: int) -> list[int]:
    """Indices of the K largest scores, ties broken toward the lower index."""
    scores = np.asarray(scores, dtype=np.float64)
    M = scores.size
    if K < 1 or K > M:
        raise ValueError(f"K must satisfy 1 <= K <= {M}, got {K}")
    order = np.argsort(-scores, kind="stable")
    return [int(i) for i in order[:K]]


def schedule_bc(gain_mags, K: int) -> list[int]:
    """Schedule the K devices with the largest channel gain magnitudes."""
    return top_k(gain_mags, K)


def schedule_bn2(norms, K: int) -> list[int]:
    """Schedule the K devices with the largest update norms."""
    return top_k(norms, K)


def schedule_bc_bn2(gain_mags, norms, K: int, Kc: int) -> list[int]:
    """Schedule by norm among the Kc devices with the best channels.

    Interpolates between the channel-only rule (Kc = K) and the norm-only
    rule (Kc = M).
    """
    gain_mags = np.asarray(gain_mags, dtype=np.float64)
    norms = np.asarray(norms, dtype=np.float64)
    M = gain_mags.size
    if Kc < K or Kc > M:
        raise ValueError(f"Kc must satisfy K <= Kc <= M, got Kc={Kc}, K={K}, M={M}")
    candidates = np.array(top_k(gain_mags, Kc))
    within = top_k(norms[candidates], K)
    return [int(candidates[i]) for i in within]


def schedule_bn2c(quantized_norms, K: int) -> list[int]:
    """Schedule by the norm each update retains after channel-limited compression.

    ``quantized_norms[m]`` is the norm of device m's update after sign-mean
    sparsification at the level the whole band would afford it.
    """
    return top_k(quantized_norms, K)


def schedule_random(M: int, K: int, rng: np.random.Generator) -> list[int]:
    """A uniformly random K-subset; every device has marginal probability K/M."""
    if K < 1 or K > M:
        raise ValueError(f"K must satisfy 1 <= K <= {M}, got {K}")
    return [int(i) for i in rng.choice(M, size=K, replace=False)]


def alloc_equal_bits(caps, n: float) -> np.ndarray:
    """Slot shares under which every device delivers the same number of bits.

    slots_k = n * (1/C_k) / sum_j (1/C_j); all products slots_k * C_k are
    equal and the shares sum to n.
    """
    caps = np.asarray(caps, dtype=np.float64)
    if caps.size < 1:
        raise ValueError("at least one capacity required")
    if np.any(caps <= 0):
        raise ValueError("zero-capacity device cannot be scheduled")
    inv = 1.0 / caps
    return n * inv / inv.sum()


def alloc_weighted_bits(caps, weights, n: float) -> np.ndarray:
    """Slot shares making delivered bits proportional to the given weights.

    slots_k = n * (w_k / C_k) / sum_j (w_j / C_j).  A zero-weight device
    gets zero slots and stays silent; all-zero weights are rejected.
    """
    caps = np.asarray(caps, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if caps.shape != weights.shape:
        raise ValueError("capacities and weights must align")
    if np.any(caps <= 0):
        raise ValueError("zero-capacity device cannot be scheduled")
    if np.any(weights < 0):
        raise ValueError("weights must be nonnegative")
    ratio = weights / caps
    total = ratio.sum()
    if total <= 0:
        raise ValueError("weights must not all be zero")
    return n * ratio / total


def decide(
    policy: str,
    chan: ChannelRealization,
    norms,
    K: int,
    Kc: int | None = None,
    rng: np.random.Generator | None = None,
) -> SchedulingDecision:
    """Run one round of scheduling plus bandwidth allocation.

    ``norms`` holds the per-device update norms (for ``bn2``/``bc-bn2``) or
    the channel-budget-quantized norms (for ``bn2-c``); it is ignored by
    ``bc`` and ``random``.  Scheduled devices transmit at the fixed power
    M * pbar / K.
    """
    tag = policy.upper()
    if tag not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}")
    M = chan.num_devices
    power = transmit_power(M, K, chan.pbar)
    caps = capacities(chan.gains, power, chan.noise_var)
    gain_mags = np.abs(chan.gains)

    if tag == "BC":
        selected = schedule_bc(gain_mags, K)
    elif tag == "BN2":
        selected = schedule_bn2(norms, K)
    elif tag == "BC-BN2":
        if Kc is None:
            raise ValueError("bc-bn2 requires Kc")
        selected = schedule_bc_bn2(gain_mags, norms, K, Kc)
    elif tag == "BN2-C":
        selected = schedule_bn2c(norms, K)
    else:
        if rng is None:
            raise ValueError("random policy requires a random generator")
        selected = schedule_random(M, K, rng)

    sel_caps = caps[selected]
    if tag in ("BC", "RANDOM"):
        slots = alloc_equal_bits(sel_caps, chan.n_slots)
    else:
        sel_weights = np.asarray(norms, dtype=np.float64)[selected]
        slots = alloc_weighted_bits(sel_caps, sel_weights, chan.n_slots)

    budgets = tuple(
        LinkBudget(device=int(m), slots=float(s), capacity=float(c))
        for m, s, c in zip(selected, slots, sel_caps)
    )
    return SchedulingDecision(
        selected=tuple(selected), budgets=budgets, policy=tag, n_slots=chan.n_slots
    )
