"""Block-fading uplink model: gain draws, transmit power, and link budgets.

The uplink is a single-carrier TDMA channel with ``n_slots`` channel uses
per round shared by the scheduled devices.  Gains are i.i.d. circularly
symmetric complex Gaussian with unit variance (Rayleigh amplitude), constant
within a round.  A device holding ``slots`` channel uses at per-slot capacity
``capacity`` can convey ``slots * capacity`` bits, assuming capacity-achieving
codes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ChannelRealization:
    """One round's channel state plus the static budget parameters.

    Attributes:
        gains: complex amplitude gain per device, length M.
        noise_var: receiver noise power (sigma^2), > 0.
        n_slots: channel uses available in the round, > 0. Real-valued;
            allocations are continuous rate budgets, not integer slots.
        pbar: per-device average transmit power budget, > 0.
    """

    gains: np.ndarray
    noise_var: float
    n_slots: float
    pbar: float

    def __post_init__(self):
        gains = np.asarray(self.gains, dtype=complex)
        object.__setattr__(self, "gains", gains)
        if gains.ndim != 1 or gains.size < 1:
            raise ValueError("gains must be a nonempty 1-D array")
        if not self.noise_var > 0:
            raise ValueError(f"noise_var must be > 0, got {self.noise_var}")
        if not self.n_slots > 0:
            raise ValueError(f"n_slots must be > 0, got {self.n_slots}")
        if not self.pbar > 0:
            raise ValueError(f"pbar must be > 0, got {self.pbar}")

    @property
    def num_devices(self) -> int:
        return self.gains.size


@dataclass(frozen=True)
class LinkBudget:
    """Per-device slot share and the bits it buys.

    ``bits`` is filled in as ``slots * capacity`` when omitted, and
    cross-checked against it when given; zero slots means a silent device.
    """

    device: int
    slots: float
    capacity: float
    bits: float | None = None

    def __post_init__(self):
        if self.slots < 0 or self.capacity < 0:
            raise ValueError("slots and capacity must be nonnegative")
        expected = self.slots * self.capacity
        if self.bits is None:
            object.__setattr__(self, "bits", expected)
        elif abs(self.bits - expected) > 1e-12 * max(abs(expected), 1.0):
            raise ValueError(
                f"bits={self.bits} inconsistent with slots*capacity={expected}"
            )


def draw_channel_gains(M: int, rng: np.random.Generator) -> np.ndarray:
    """Draw M i.i.d. unit-variance circularly symmetric complex gains.

    Real and imaginary parts are independent N(0, 1/2), so |h|^2 is Exp(1).
    Deterministic for a given generator state.
    """
    if M < 0:
        raise ValueError(f"M must be nonnegative, got {M}")
    scale = np.sqrt(0.5)
    return scale * (rng.standard_normal(M) + 1j * rng.standard_normal(M))


def transmit_power(M: int, K: int, pbar: float) -> float:
    """Fixed per-round transmit power M*pbar/K for a scheduled device.

    Under uniform scheduling probability K/M this meets the long-run average
    power budget ``pbar`` with equality.
    """
    if K < 1 or K > M:
        raise ValueError(f"K must satisfy 1 <= K <= M, got K={K}, M={M}")
    if not pbar > 0:
        raise ValueError(f"pbar must be > 0, got {pbar}")
    return M * pbar / K


def capacity(gain: complex, power: float, noise_var: float) -> float:
    """Per-slot Shannon capacity log2(1 + |gain|^2 * power / noise_var)."""
    if noise_var <= 0:
        raise ValueError(f"noise_var must be > 0, got {noise_var}")
    if power < 0:
        raise ValueError(f"power must be nonnegative, got {power}")
    snr = (abs(gain) ** 2) * power / noise_var
    # log1p keeps tiny SNRs from flushing the rate to exactly zero.
    return float(np.log1p(snr) / np.log(2.0))


def capacities(gains: np.ndarray, power: float, noise_var: float) -> np.ndarray:
    """Vectorized `capacity` over an array of complex gains."""
    if noise_var <= 0:
        raise ValueError(f"noise_var must be > 0, got {noise_var}")
    if power < 0:
        raise ValueError(f"power must be nonnegative, got {power}")
    snr = np.abs(np.asarray(gains)) ** 2 * power / noise_var
    return np.log1p(snr) / np.log(2.0)
