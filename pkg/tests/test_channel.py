import numpy as np
import pytest
from hypothesis import given, strategies as st

from fedwireless.channel import (
    ChannelRealization,
    LinkBudget,
    capacities,
    capacity,
    draw_channel_gains,
    transmit_power,
)


class TestDrawChannelGains:
    def test_empty_draw(self):
        assert draw_channel_gains(0, np.random.default_rng(0)).size == 0

    def test_seeded_reproducibility(self):
        a = draw_channel_gains(1, np.random.default_rng(1234))
        b = draw_channel_gains(1, np.random.default_rng(1234))
        assert a == b
        c = draw_channel_gains(1, np.random.default_rng(4321))
        assert a != c

    def test_negative_count_rejected(self):
        with pytest.raises(ValueError):
            draw_channel_gains(-1, np.random.default_rng(0))

    def test_power_gain_is_unit_exponential(self):
        """|h|^2 should look Exp(1): mean 1 within 1%, variance 1 within 5%."""
        gains = draw_channel_gains(200_000, np.random.default_rng(7))
        power = np.abs(gains) ** 2
        assert abs(power.mean() - 1.0) < 0.01
        assert abs(power.var() - 1.0) < 0.05

    def test_halved_component_variance(self):
        gains = draw_channel_gains(200_000, np.random.default_rng(8))
        assert abs(gains.real.var() - 0.5) < 0.01
        assert abs(gains.imag.var() - 0.5) < 0.01


class TestTransmitPower:
    def test_single_device_gets_full_boost(self):
        assert transmit_power(40, 1, 1.0) == 40.0

    def test_direct_ratio(self):
        assert transmit_power(100, 20, 1.0) == 5.0

    def test_full_participation(self):
        assert transmit_power(17, 17, 2.5) == 2.5

    @pytest.mark.parametrize("K", [0, 41])
    def test_invalid_k_rejected(self, K):
        with pytest.raises(ValueError):
            transmit_power(40, K, 1.0)

    @given(
        M=st.integers(1, 500),
        K=st.integers(1, 500),
        pbar=st.floats(1e-3, 1e3),
    )
    def test_average_power_budget_met_exactly(self, M, K, pbar):
        """Scheduling each device w.p. K/M makes the average power exactly pbar."""
        K = min(K, M)
        assert transmit_power(M, K, pbar) * K / M == pytest.approx(pbar, rel=1e-12)


class TestCapacity:
    def test_unit_snr(self):
        assert capacity(1.0 + 0j, 1.0, 1.0) == pytest.approx(1.0)

    def test_snr_three(self):
        assert capacity(np.sqrt(3.0), 1.0, 1.0) == pytest.approx(2.0)

    def test_zero_gain(self):
        assert capacity(0.0, 5.0, 1.0) == 0.0

    def test_bad_noise_rejected(self):
        with pytest.raises(ValueError):
            capacity(1.0, 1.0, 0.0)

    @given(
        g1=st.floats(0, 10),
        g2=st.floats(0, 10),
        p=st.floats(0, 100),
        nv=st.floats(1e-3, 10),
    )
    def test_monotone_in_gain_and_positive_iff_signal(self, g1, g2, p, nv):
        lo, hi = sorted([g1, g2])
        assert capacity(hi, p, nv) >= capacity(lo, p, nv)
        assert (capacity(g1, p, nv) > 0) == (g1**2 * p > 0)

    def test_vectorized_matches_scalar(self):
        gains = np.array([0.3 + 0.1j, 1.2 - 0.4j, 0.0])
        vec = capacities(gains, 2.0, 0.5)
        for g, c in zip(gains, vec):
            assert c == pytest.approx(capacity(g, 2.0, 0.5))


class TestRealizationAndBudget:
    def test_realization_validation(self):
        gains = draw_channel_gains(3, np.random.default_rng(0))
        chan = ChannelRealization(gains=gains, noise_var=1.0, n_slots=100.0, pbar=1.0)
        assert chan.num_devices == 3
        with pytest.raises(ValueError):
            ChannelRealization(gains=gains, noise_var=0.0, n_slots=100.0, pbar=1.0)
        with pytest.raises(ValueError):
            ChannelRealization(gains=np.empty(0, complex), noise_var=1.0, n_slots=1.0, pbar=1.0)

    def test_budget_bits_follow_slots(self):
        lb = LinkBudget(device=0, slots=12.5, capacity=2.0)
        assert lb.bits == 25.0

    def test_zero_slots_zero_bits(self):
        assert LinkBudget(device=3, slots=0.0, capacity=7.0).bits == 0.0

    def test_inconsistent_bits_rejected(self):
        with pytest.raises(ValueError):
            LinkBudget(device=0, slots=2.0, capacity=3.0, bits=7.0)
