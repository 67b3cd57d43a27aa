"""First-event times as the first jump of an inhomogeneous Poisson process.

The intensity ``lambda(tau) = p(tau) / (1 - P(tau))`` of the normalised state
reproduces the survival ``1 - P(tau) = exp(-int_0^tau lambda)``. Two samplers
are provided: inverse CDF on the tabulated law (primary) and Lewis-Shedler
thinning with the grid supremum of ``lambda`` as the majorant (cross-check).
Random streams come from ``numpy.random.default_rng`` (PCG64, 128-bit state).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats
from scipy.integrate import cumulative_simpson
from scipy.special import kolmogi

from .inversion import ArrivalDistribution

__all__ = [
    "IntensityTrace",
    "EventSample",
    "SaturationError",
    "intensity_from_survival",
    "integrated_intensity",
    "first_event_from_uniform",
    "sample_first_event",
    "sample_first_events",
    "sample_first_events_thinning",
    "KSResult",
    "ks_against_law",
    "ks_two_sample",
    "detection_fraction_check",
]

SATURATION_TOL = 1e-12


class SaturationError(ArithmeticError):
    """Survival probability too close to zero to define the intensity."""


@dataclass(frozen=True)
class IntensityTrace:
    tau: np.ndarray
    lam: np.ndarray
    survival: np.ndarray

    @property
    def detection_probability(self) -> float:
        return float(1.0 - self.survival[-1])


@dataclass(frozen=True)
class EventSample:
    detected: bool
    tau: Optional[float]
    seed: int


def intensity_from_survival(dist: ArrivalDistribution) -> IntensityTrace:
    survival = 1.0 - dist.P_cum
    if np.any(survival < SATURATION_TOL):
        raise SaturationError("1 - P(tau) drops below 1e-12 on the grid")
    return IntensityTrace(tau=dist.tau, lam=dist.p / survival, survival=survival)


def integrated_intensity(trace: IntensityTrace) -> np.ndarray:
    """``int_0^tau lambda`` by cumulative Simpson quadrature."""
    return cumulative_simpson(trace.lam, x=trace.tau, initial=0.0)


def _inverse_cdf_table(trace: IntensityTrace):
    cdf = 1.0 - trace.survival
    keep = np.concatenate([[True], np.diff(cdf) > 0])
    return cdf[keep], trace.tau[keep]


def first_event_from_uniform(trace: IntensityTrace, u):
    """Map uniforms on (0, 1) to first-event times; ``nan`` marks no event.

    ``u < survival[-1]`` means no event in the window, otherwise the event is
    at ``P^-1(1 - u)`` by linear interpolation of the tabulated law.
    """
    u = np.asarray(u, dtype=float)
    cdf, tau = _inverse_cdf_table(trace)
    times = np.interp(1.0 - u, cdf, tau)
    return np.where(u < trace.survival[-1], np.nan, times)


def sample_first_events(trace: IntensityTrace, n: int, seed: int) -> np.ndarray:
    """``n`` independent first-event times (``nan`` for no event), reproducible in ``seed``."""
    rng = np.random.default_rng(seed)
    return first_event_from_uniform(trace, rng.random(n))


def sample_first_event(trace: IntensityTrace, seed: int) -> EventSample:
    t = float(sample_first_events(trace, 1, seed)[0])
    if np.isnan(t):
        return EventSample(detected=False, tau=None, seed=seed)
    return EventSample(detected=True, tau=t, seed=seed)


def sample_first_events_thinning(trace: IntensityTrace, n: int, seed: int) -> np.ndarray:
    """First jumps by thinning a homogeneous process of rate ``max(lambda)``."""
    rng = np.random.default_rng(seed)
    lam_max = float(np.max(trace.lam))
    t_end = float(trace.tau[-1])
    out = np.full(n, np.nan)
    if lam_max <= 0 or n == 0:
        return out
    t = np.full(n, float(trace.tau[0]))
    active = np.arange(n)
    while active.size:
        t[active] += rng.exponential(1.0 / lam_max, size=active.size)
        inside = t[active] <= t_end
        active = active[inside]
        if not active.size:
            break
        accept = rng.random(active.size) * lam_max < np.interp(t[active], trace.tau, trace.lam)
        out[active[accept]] = t[active[accept]]
        active = active[~accept]
    return out


@dataclass(frozen=True)
class KSResult:
    statistic: float
    critical: float
    pvalue: float
    n: int
    level: float

    @property
    def passed(self) -> bool:
        return self.statistic < self.critical


def ks_against_law(times, dist: ArrivalDistribution, level: float = 0.01) -> KSResult:
    """One-sample KS test of detected times against ``P(tau) / P(tau_end)``."""
    t = np.asarray(times, dtype=float)
    t = t[~np.isnan(t)]
    if t.size == 0:
        raise ValueError("no detected events to test")
    cdf = dist.P_cum / dist.P_cum[-1]
    res = stats.kstest(t, lambda x: np.interp(x, dist.tau, cdf))
    return KSResult(float(res.statistic), float(kolmogi(level) / np.sqrt(t.size)), float(res.pvalue), t.size, level)


def ks_two_sample(a, b, level: float = 0.01) -> KSResult:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a, b = a[~np.isnan(a)], b[~np.isnan(b)]
    res = stats.ks_2samp(a, b)
    neff = a.size * b.size / (a.size + b.size)
    return KSResult(float(res.statistic), float(kolmogi(level) / np.sqrt(neff)), float(res.pvalue), a.size + b.size, level)


def detection_fraction_check(times, p_detect: float, n_sigma: float = 3.0):
    """Return ``(fraction, sigma, ok)`` for the detected share against ``p_detect``."""
    t = np.asarray(times, dtype=float)
    frac = float(np.mean(~np.isnan(t)))
    sigma = float(np.sqrt(p_detect * (1.0 - p_detect) / t.size))
    return frac, sigma, abs(frac - p_detect) <= n_sigma * sigma
