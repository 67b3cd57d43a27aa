"""
Optimal coupling strength
=========================

For a packet at rest on the counter the detection probability has a single
interior maximum in alpha. For moving packets the optimum grows roughly
like 2 v, and the best probability creeps towards one half. The
ultra-relativistic model gives the same picture in closed form.
"""
import numpy as np

from _common import plt, save
from qarrival import DimensionlessPacket, GaussianPacket, optimize_alpha, ultra_arrival
from qarrival.studies import CounterResponse, alpha_opt_curve, efficiency_surface, slopes

# Static packet: scan and optimise.
static = CounterResponse(DimensionlessPacket(0.0, 0.0))
alphas = np.linspace(0.05, 10.0, 300)
a_opt, p_max = optimize_alpha(DimensionlessPacket(0.0, 0.0))
print(f"static packet: alpha_opt={a_opt:.5f} P_max={p_max:.6f}")

# Moving packets starting at xi0 = -4.
pts = alpha_opt_curve([2.0, 4.0, 8.0], xi0=-4.0, threads=3)
for p in pts:
    print(f"v={p.v:g}: alpha_opt={p.alpha:.4f} P_max={p.P_inf:.5f}")
print("slopes:", ", ".join(f"{s:.3f}" for s in slopes(pts)))

# Ultra-relativistic counter: P(kappa) peaks at 1/2 for kappa = 2c.
packet = GaussianPacket(x0=-20.0, k=1.0, eta=1.0)
kappas = np.linspace(0.05, 10.0, 300)
p_ultra = [ultra_arrival(packet, 1.0, k, 0.0).P_inf for k in kappas]

fig, ax = plt.subplots(1, 3, figsize=(14, 3.5))
ax[0].plot(alphas, [static.efficiency(a) for a in alphas])
ax[0].axvline(a_opt, ls=":", c="k")
ax[0].set_xlabel("alpha")
ax[0].set_ylabel("P_inf")
ax[0].set_title("packet at rest on the counter")

vs = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0]
grid = np.geomspace(0.1, 40.0, 60)
rows = efficiency_surface(vs, grid, threads=3)
for r in rows:
    ax[1].semilogx(grid, [c.P_inf for c in r], label=f"v={r[0].v:g}")
ax[1].set_xlabel("alpha")
ax[1].set_title("packets centred on the counter")
ax[1].legend(fontsize=7)

ax[2].plot(kappas, p_ultra)
ax[2].axvline(2.0, ls=":", c="k")
ax[2].set_xlabel("kappa / c")
ax[2].set_title("ultra-relativistic counter")
save(fig, "optimal_coupling.png")
