import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qarrival.arrival import DeltaCounter
from qarrival.dynamics import DimensionlessPacket
from qarrival.events import (
    IntensityTrace,
    SaturationError,
    detection_fraction_check,
    first_event_from_uniform,
    integrated_intensity,
    intensity_from_survival,
    ks_against_law,
    ks_two_sample,
    sample_first_event,
    sample_first_events,
    sample_first_events_thinning,
)
from qarrival.inversion import ArrivalDistribution
from qarrival.studies import arrival_distribution

TAU = np.linspace(0.0, 8.0, 4097)


@pytest.fixture(scope="module")
def moving_law():
    return arrival_distribution(DimensionlessPacket(-4.0, 4.0), DeltaCounter(0.0, 1.0), TAU)


def exponential_law(lam0, tau=TAU):
    P = 1.0 - np.exp(-lam0 * tau)
    return ArrivalDistribution(tau, lam0 * np.exp(-lam0 * tau), P, float(P[-1]))


def test_zero_density_trace():
    d = ArrivalDistribution(TAU, np.zeros_like(TAU), np.zeros_like(TAU), 0.0)
    tr = intensity_from_survival(d)
    assert np.all(tr.lam == 0) and np.all(tr.survival == 1)
    assert np.all(np.isnan(sample_first_events(tr, 1000, 1)))
    assert not sample_first_event(tr, 5).detected


def test_constant_rate_recovered():
    tr = intensity_from_survival(exponential_law(0.7))
    assert np.max(np.abs(tr.lam - 0.7)) < 1e-10


def test_saturation():
    with pytest.raises(SaturationError):
        intensity_from_survival(exponential_law(10.0))


def test_survival_identity_moving(moving_law):
    tr = intensity_from_survival(moving_law)
    assert np.max(np.abs(np.exp(-integrated_intensity(tr)) - tr.survival)) < 1e-8
    assert tr.survival[0] == 1.0
    assert np.all(np.diff(tr.survival) <= 0)
    assert np.all(tr.lam >= 0)


@given(st.floats(0.05, 2.0))
def test_survival_identity_exponential(lam0):
    tr = intensity_from_survival(exponential_law(lam0))
    assert np.max(np.abs(np.exp(-integrated_intensity(tr)) - tr.survival)) < 1e-10


def test_inverse_cdf_endpoints(moving_law):
    tr = intensity_from_survival(moving_law)
    # u just below 1 maps to the start of the support, u below the survival to no event
    early = first_event_from_uniform(tr, 1.0 - 1e-12)
    assert 0.0 <= early < moving_law.tau[np.argmax(moving_law.p)]
    assert np.isnan(first_event_from_uniform(tr, 0.5 * tr.survival[-1]))
    med = first_event_from_uniform(tr, 1.0 - 0.5 * tr.detection_probability)
    assert np.interp(med, moving_law.tau, moving_law.P_cum) == pytest.approx(0.5 * moving_law.mass, rel=1e-6)


def test_determinism(moving_law):
    tr = intensity_from_survival(moving_law)
    a, b = sample_first_events(tr, 5000, 42), sample_first_events(tr, 5000, 42)
    assert np.array_equal(a, b, equal_nan=True)
    assert not np.array_equal(a, sample_first_events(tr, 5000, 43), equal_nan=True)
    e = sample_first_event(tr, 9)
    assert e.seed == 9 and (e.tau is None) == (not e.detected)
    assert np.array_equal(sample_first_events_thinning(tr, 300, 4), sample_first_events_thinning(tr, 300, 4), equal_nan=True)


def test_ks_and_fraction_moving(moving_law):
    tr = intensity_from_survival(moving_law)
    t = sample_first_events(tr, 100_000, 20240611)
    ks = ks_against_law(t, moving_law)
    assert ks.passed, ks
    assert ks.critical == pytest.approx(1.6276 / np.sqrt(ks.n), rel=1e-3)
    frac, sigma, ok = detection_fraction_check(t, moving_law.P_inf)
    assert ok, (frac, sigma)
    assert np.all(t[~np.isnan(t)] >= 0)


def test_thinning_agrees_with_inverse_cdf(moving_law):
    tr = intensity_from_survival(moving_law)
    a = sample_first_events(tr, 100_000, 1)
    b = sample_first_events_thinning(tr, 100_000, 2)
    assert ks_two_sample(a, b).passed
    frac, _, ok = detection_fraction_check(b, tr.detection_probability)
    assert ok


def test_ks_detects_wrong_law(moving_law):
    tr = intensity_from_survival(exponential_law(0.5))
    t = sample_first_events(tr, 20_000, 3)
    assert not ks_against_law(t, moving_law).passed


def test_ks_rejects_empty():
    with pytest.raises(ValueError):
        ks_against_law(np.array([np.nan, np.nan]), exponential_law(0.2))


def test_trace_detection_probability():
    tr = IntensityTrace(TAU, np.zeros_like(TAU), np.linspace(1.0, 0.6, TAU.size))
    assert tr.detection_probability == pytest.approx(0.4)
