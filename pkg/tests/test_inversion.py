import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qarrival.arrival import CounterArray, DeltaCounter, counter_amplitudes, single_counter_amplitude
from qarrival.dynamics import DimensionlessPacket
from qarrival.inversion import (
    AliasingError,
    EfficiencyWarning,
    SpectralAmplitude,
    TailMassWarning,
    clip_density,
    invert_to_time,
    offset_grid,
    parseval_efficiency,
    sample_spectrum,
)

MOVING = DimensionlessPacket(-4.0, 4.0)


def single(alpha, packet=MOVING):
    return lambda z: single_counter_amplitude(packet, DeltaCounter(0.0, alpha), z)


@given(st.floats(0.5, 5000), st.integers(8, 2000))
def test_offset_grid_properties(y_max, half):
    y, w = offset_grid(y_max, 2 * half)
    assert np.all(np.diff(y) > 0)
    assert np.allclose(y, -y[::-1], rtol=0, atol=1e-12 * y_max)
    assert not np.any(y == 0)
    assert np.all(np.abs(y) < y_max)
    assert w.sum() == pytest.approx(2 * y_max, rel=1e-12)


def test_offset_grid_rejects_bad_input():
    for args in [(0.0, 64), (10.0, 15), (10.0, 8), (10.0, 63)]:
        with pytest.raises(ValueError):
            offset_grid(*args)


def test_zero_spectrum():
    s = sample_spectrum(lambda z: np.zeros_like(z), 100.0, 1024)
    assert np.all(s.values == 0) and parseval_efficiency(s) == 0
    d = invert_to_time(s, np.linspace(0, 3, 50))
    assert np.all(d.p == 0) and d.P_inf == 0 and np.all(d.P_cum == 0)


def test_y_max_doubling_changes_P_inf_little():
    a = parseval_efficiency(sample_spectrum(single(1.0), 400.0, 2**14))
    b = parseval_efficiency(sample_spectrum(single(1.0), 800.0, int(2**14 * np.sqrt(2)) // 2 * 2))
    assert abs(a - b) < 1e-6


def test_riemann_sum_converges():
    vals = [parseval_efficiency(sample_spectrum(single(1.0), 400.0, n)) for n in (2**11, 2**12, 2**13, 2**14)]
    diffs = np.abs(np.diff(vals))
    assert diffs[-1] < 1e-8
    assert diffs[-1] <= diffs[0]


def test_parseval_matches_time_integral_and_mean():
    s = sample_spectrum(single(1.0), 400.0, 2**14)
    d = invert_to_time(s, np.linspace(0.0, 8.0, 4097))
    assert abs(d.P_inf - d.mass) < 1e-6
    assert 0.9 <= d.mean() <= 1.1
    assert np.all(np.diff(d.P_cum) >= 0)
    assert d.P_cum[-1] <= d.P_inf + 1e-6


def test_static_packet_efficiency():
    s = sample_spectrum(single(1.3216, DimensionlessPacket(0.0, 0.0)), 400.0, 2**14)
    assert parseval_efficiency(s) == pytest.approx(0.7254, abs=1e-3)


def test_causality_far_packet():
    d = invert_to_time(sample_spectrum(single(1.0, DimensionlessPacket(-10.0, 4.0))), np.linspace(0.0, 0.5, 501))
    assert d.mass < 1e-3


def test_grid_refinement_sup_norm():
    tau = np.linspace(0.0, 4.0, 401)
    coarse = invert_to_time(sample_spectrum(single(1.0), 400.0, 2**14), tau)
    fine = invert_to_time(sample_spectrum(single(1.0), 800.0, 2**16), tau)
    assert np.max(np.abs(coarse.p - fine.p)) < 1e-5


def test_multichannel_density_sums_channels():
    arr = CounterArray((DeltaCounter(0.0, 1.0), DeltaCounter(2.0, 1.0)))
    s = sample_spectrum(lambda z: counter_amplitudes(MOVING, arr, z))
    assert s.n_channels == 2
    tau = np.linspace(0, 6, 1201)
    both = invert_to_time(s, tau)
    parts = [invert_to_time(SpectralAmplitude(s.y, s.weights, s.values[i:i + 1], s.y_max, s.tail_mass[i:i + 1]), tau) for i in range(2)]
    assert np.allclose(both.p, parts[0].p + parts[1].p, atol=1e-14)


def test_aliasing_detected():
    s = sample_spectrum(single(1.0), 400.0, 2**10)
    with pytest.raises(AliasingError):
        invert_to_time(s, np.linspace(0, 50, 100))


def test_bad_tau_grid():
    s = sample_spectrum(single(1.0), 100.0, 256, warn=False)
    with pytest.raises(ValueError):
        invert_to_time(s, np.array([0.0, 1.0, 0.5]))
    with pytest.raises(ValueError):
        invert_to_time(s, np.array([1.0]))


def test_tail_warning_for_short_window():
    with pytest.warns(TailMassWarning):
        sample_spectrum(single(1.0), 5.0, 256)


def test_tail_estimate_improves_truncated_sum():
    # static packet: the spectrum has a genuine |y|^-2 tail
    static = single(1.0, DimensionlessPacket(0.0, 0.0))
    full = parseval_efficiency(sample_spectrum(static, 6400.0, 2**17))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TailMassWarning)
        short = sample_spectrum(static, 100.0, 2**12)
    with_tail = parseval_efficiency(short)
    without = parseval_efficiency(short, include_tail=False)
    assert abs(with_tail - full) < 0.05 * abs(without - full)


def test_tail_estimate_not_spurious_before_asymptotics():
    # moving packet: at y_max = 100 the window is still in the Gaussian fall-off
    ref = parseval_efficiency(sample_spectrum(single(1.0), 400.0, 2**14))
    short = sample_spectrum(single(1.0), 100.0, 2**12)
    assert abs(parseval_efficiency(short) - ref) < 1e-6


def test_efficiency_warning():
    y, w = offset_grid(10.0, 64)
    s = SpectralAmplitude(y, w, np.full((1, y.size), 2.0 + 0j), 10.0, np.zeros(1))
    with pytest.warns(EfficiencyWarning):
        parseval_efficiency(s)


def test_provider_length_checked():
    with pytest.raises(ValueError):
        sample_spectrum(lambda z: np.zeros(3), 10.0, 64)


def test_clip_density():
    assert np.all(clip_density(np.array([0.1, -1e-13, 0.0])) >= 0)
    with pytest.raises(ValueError):
        clip_density(np.array([0.1, -1e-6]))
