"""
Grid detector versus the analytic law
=====================================

A narrow absorbing cell of width dx on a split-step grid stands in for the
delta counter. As dx shrinks the lattice arrival density approaches the
analytic one, and the lost norm equals the integrated detection rate.
"""
import numpy as np

from _common import plt, save
from qarrival import DeltaCounter, DimensionlessPacket, arrival_distribution
from qarrival.lattice import point_counter_run, richardson

runs = {dx: point_counter_run(-4.0, 4.0, 1.0, dx, 2.5) for dx in (0.08, 0.04, 0.02)}
ref = arrival_distribution(DimensionlessPacket(-4.0, 4.0), DeltaCounter(0.0, 1.0), runs[0.02].distribution.tau)
scale = ref.p.max()

fig, ax = plt.subplots(1, 2, figsize=(10, 3.5))
ax[0].plot(ref.tau, ref.p, "k", lw=2, label="analytic")
for dx, r in runs.items():
    d = r.distribution
    err = np.max(np.abs(np.interp(ref.tau, d.tau, d.p) - ref.p)) / scale
    ident = np.max(np.abs(r.norm_loss - r.integrated_rate))
    print(f"dx={dx}: sup relative error {err:.2e}, norm identity {ident:.1e}")
    ax[0].plot(d.tau, d.p, "--", label=f"dx={dx}")
    ax[1].plot(ref.tau, np.interp(ref.tau, d.tau, d.p) - ref.p, label=f"dx={dx}")
extrap = richardson(runs[0.04].distribution, runs[0.02].distribution)
print(f"Richardson: {np.max(np.abs(extrap - ref.p)) / scale:.2e}")
ax[0].set_xlabel("tau")
ax[0].legend()
ax[1].set_xlabel("tau")
ax[1].set_title("lattice minus analytic")
ax[1].legend()
save(fig, "lattice_bridge.png")
