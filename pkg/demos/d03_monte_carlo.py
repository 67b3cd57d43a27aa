"""
Detection events as a Poisson process
=====================================

The arrival density defines an intensity ``p / S`` where ``S`` is the
survival probability. Drawing the first event of that inhomogeneous Poisson
process reproduces the arrival law; we check it with a KS test and the
detected fraction, and compare inverse-CDF sampling with thinning.
"""
import numpy as np

from _common import plt, save
from qarrival import DeltaCounter, DimensionlessPacket, arrival_distribution
from qarrival.events import (
    detection_fraction_check,
    intensity_from_survival,
    ks_against_law,
    ks_two_sample,
    sample_first_events,
    sample_first_events_thinning,
)

dist = arrival_distribution(DimensionlessPacket(-4.0, 4.0), DeltaCounter(0.0, 1.0), np.linspace(0.0, 8.0, 4097))
trace = intensity_from_survival(dist)

times = sample_first_events(trace, 100_000, seed=20240611)
ks = ks_against_law(times, dist)
frac, sigma, ok = detection_fraction_check(times, dist.P_inf)
print(f"KS D={ks.statistic:.5f} (critical {ks.critical:.5f}) passed={ks.passed}")
print(f"detected fraction {frac:.5f} vs P_inf {dist.P_inf:.5f} +- {sigma:.5f}")

thin = sample_first_events_thinning(trace, 20_000, seed=7)
two = ks_two_sample(times, thin)
print(f"inverse CDF vs thinning: D={two.statistic:.5f} (critical {two.critical:.5f})")

fig, ax = plt.subplots(1, 2, figsize=(10, 3.5))
hit = times[~np.isnan(times)]
ax[0].hist(hit, bins=200, range=(0, 2.5), density=True, alpha=0.5, label="sampled")
ax[0].plot(dist.tau, dist.p / dist.mass, label="p / P")
ax[0].set_xlim(0, 2.5)
ax[0].set_xlabel("tau")
ax[0].legend()
ax[1].plot(trace.tau, trace.lam)
ax[1].set_xlim(0, 2.5)
ax[1].set_xlabel("tau")
ax[1].set_ylabel("intensity")
save(fig, "monte_carlo.png")
