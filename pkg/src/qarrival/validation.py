"""Acceptance checks shared by ``qarrival validate`` and the test suite.

Each check returns a :class:`CheckResult` with the measured numbers, the
threshold it was held to and its wall time. Runtime limits are part of the
pass condition.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List

import numpy as np

from .arrival import DeltaCounter, counter_amplitudes, ultra_arrival
from .dynamics import DimensionlessPacket, GaussianPacket
from .events import (
    detection_fraction_check,
    integrated_intensity,
    intensity_from_survival,
    ks_against_law,
    sample_first_events,
)
from .inversion import invert_to_time, parseval_efficiency, sample_spectrum
from .lattice import load_shadow_config, point_counter_run, richardson, run_shadow
from .specfun import boundary_sqrt_iz, boundary_sqrt_neg_iz, faddeeva_w
from .studies import alpha_opt_curve, arrival_distribution, golden_section_max, optimize_alpha, shape_invariance, slopes

__all__ = ["CheckResult", "CHECKS", "run_checks", "format_table", "reference_tau_grid", "faddeeva_grid", "shipped_arrival_cases"]

MOVING = DimensionlessPacket(-4.0, 4.0)


def reference_tau_grid() -> np.ndarray:
    return np.linspace(0.0, 8.0, 4097)


@dataclass
class CheckResult:
    number: int
    title: str
    passed: bool
    runtime: float = 0.0
    limit: float = float("inf")
    details: Dict[str, object] = field(default_factory=dict)

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        info = ", ".join(f"{k}={_fmt(v)}" for k, v in self.details.items())
        return f"[{flag}] {self.number}. {self.title} ({self.runtime:.1f}s/{self.limit:g}s) {info}"


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def _timed(number: int, title: str, limit: float):
    def wrap(fn: Callable[[], tuple]):
        def run() -> CheckResult:
            t0 = time.perf_counter()
            ok, details = fn()
            dt = time.perf_counter() - t0
            return CheckResult(number, title, bool(ok) and dt < limit, dt, limit, details)

        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run

    return wrap


@_timed(1, "ultra-relativistic optimum", 1.0)
def check_ultra():
    packet = GaussianPacket(x0=-20.0, k=1.0, eta=1.0)
    c = 1.0
    p_half = ultra_arrival(packet, c, 2.0 * c, 0.0).P_inf
    k_opt, _ = golden_section_max(lambda k: ultra_arrival(packet, c, k, 0.0).P_inf, 0.1 * c, 10.0 * c, tol=1e-8)
    err_p, err_k = abs(p_half - 0.5), abs(k_opt - 2.0 * c)
    return err_p < 1e-12 and err_k < 1e-6, {"P_inf(2c)": p_half, "kappa_opt": k_opt, "|dP|": err_p, "|dkappa|": err_k}


@_timed(2, "static-packet optimum", 30.0)
def check_static():
    a, pm = optimize_alpha(DimensionlessPacket(0.0, 0.0), (0.05, 20.0), tol=1e-5)
    return abs(pm - 0.7254) <= 1e-3 and abs(a - 1.322) <= 5e-3, {"alpha_opt": a, "P_max": pm}


@_timed(3, "linear optimal-coupling law", 120.0)
def check_linear_law():
    pts = alpha_opt_curve([2.0, 4.0, 8.0], xi0=-4.0, threads=3)
    sl = slopes(pts)
    ok = bool(np.all((sl >= 1.7) & (sl <= 2.3))) and 0.46 <= pts[-1].P_inf <= 0.54
    return ok, {"alpha_opt": [p.alpha for p in pts], "slopes": list(map(float, sl)), "P_max(v=8)": pts[-1].P_inf}


@_timed(4, "arrival timing", 30.0)
def check_timing():
    rep = shape_invariance(MOVING, [0.01, 1.0, 100.0], reference_tau_grid())
    means = list(rep.means)
    ok = all(0.9 <= m <= 1.1 for m in means) and rep.means_decreasing
    return ok, {"means": means, "max_L1": rep.max_l1}


CONFIG_DIR = Path(__file__).with_name("data") / "configs"


def shipped_arrival_cases():
    """``name -> (packet, counters, tau, y_max, n)`` for every shipped arrival/mc config."""
    from .cli import RunConfig, _counters, _packet, _tau

    cases = {}
    for path in sorted(CONFIG_DIR.glob("*.cfg")):
        if not path.name.startswith(("arrival_", "mc_")):
            continue
        cfg = RunConfig.load(str(path), [])
        cases[path.stem] = (_packet(cfg), _counters(cfg), _tau(cfg), cfg.number("grid.ymax"), cfg.integer("grid.n"))
    return cases


@_timed(5, "Parseval identity", 120.0)
def check_parseval():
    gaps = {}
    for name, (pk, arr, tau, y_max, n) in shipped_arrival_cases().items():
        spec = sample_spectrum(lambda z: counter_amplitudes(pk, arr, z), y_max, n)
        dist = invert_to_time(spec, tau)
        gaps[name] = abs(parseval_efficiency(spec) - dist.mass)
    worst = max(gaps.values())
    return worst < 1e-6, {"max_gap": worst, "cases": len(gaps)}


@_timed(6, "Poisson-process equivalence", 60.0)
def check_poisson(n: int = 100_000, seed: int = 20240611):
    dist = arrival_distribution(MOVING, DeltaCounter(0.0, 1.0), reference_tau_grid())
    trace = intensity_from_survival(dist)
    surv_err = float(np.max(np.abs(np.exp(-integrated_intensity(trace)) - trace.survival)))
    times = sample_first_events(trace, n, seed)
    ks = ks_against_law(times, dist, 0.01)
    frac, sigma, frac_ok = detection_fraction_check(times, dist.P_inf)
    ok = surv_err < 1e-8 and ks.passed and frac_ok
    return ok, {"survival_err": surv_err, "KS": ks.statistic, "KS_crit": ks.critical, "fraction": frac, "P_inf": dist.P_inf, "sigma": sigma}


@_timed(7, "lattice-analytic bridge", 120.0)
def check_bridge():
    xi0, v, alpha, t_end = -4.0, 4.0, 1.0, 2.5
    runs = {dx: point_counter_run(xi0, v, alpha, dx, t_end) for dx in (0.04, 0.02)}
    fine = runs[0.02].distribution
    sub = slice(None, None, 8)
    ref = arrival_distribution(MOVING, DeltaCounter(0.0, alpha), fine.tau[sub])
    scale = float(np.max(ref.p))
    errs = {dx: float(np.max(np.abs(np.interp(ref.tau, r.distribution.tau, r.distribution.p) - ref.p)) / scale) for dx, r in runs.items()}
    extrap = richardson(runs[0.04].distribution, fine)[sub]
    err_rich = float(np.max(np.abs(extrap - ref.p)) / scale)
    ident = max(float(np.max(np.abs(r.norm_loss - r.integrated_rate))) for r in runs.values())
    ok = errs[0.02] < 0.02 and errs[0.02] <= errs[0.04] and ident < 1e-4
    return ok, {"sup_err(dx=0.04)": errs[0.04], "sup_err(dx=0.02)": errs[0.02], "sup_err(richardson)": err_rich, "norm_identity": ident}


@_timed(8, "shadowing", 180.0)
def check_shadow():
    res = run_shadow(load_shadow_config())
    rep = res.report
    behind = rep.axial_x > 0
    depleted = bool(np.all(rep.axial_difference[behind] <= 1e-12)) and rep.shadow_depth > 0
    ok = 0.53 <= res.P_inf <= 0.57 and depleted and rep.local_maximum and rep.axial_local_maximum
    return ok, {
        "P_inf": res.P_inf,
        "shadow_depth": rep.shadow_depth,
        "transverse_max": rep.local_maximum,
        "axial_peak_x": rep.axial_peak_x,
        "edge_mass": res.run.max_edge_mass,
    }


def faddeeva_grid() -> np.ndarray:
    """200 points: 10 radii in (0, 30] times 20 angles spread over both half-planes."""
    r = np.geomspace(0.05, 30.0, 10)
    th = (np.arange(20) + 0.5) * (2.0 * np.pi / 20)
    return (r[:, None] * np.exp(1j * th[None, :])).ravel()


def _mp_faddeeva(u: complex) -> complex:
    import mpmath as mp

    with mp.workdps(40):
        z = mp.mpc(u.real, u.imag)
        return complex(mp.exp(-z * z) * mp.erfc(-1j * z))


@_timed(9, "special functions", 60.0)
def check_specfun():
    grid = faddeeva_grid()
    worst, overflow_ok, n_over = 0.0, True, 0
    for u in grid:
        if u.imag < 0 and u.imag**2 - u.real**2 > 700.0:
            # exp(-u^2) is not representable: the contract is an explicit overflow signal
            n_over += 1
            try:
                faddeeva_w(u)
                overflow_ok = False
            except OverflowError:
                pass
            continue
        ref = _mp_faddeeva(complex(u))
        worst = max(worst, abs(complex(faddeeva_w(u)) - ref) / abs(ref))
    ys = np.array([4.0, -4.0, 0.25, -0.25, 9.0, -9.0, 0.0, 1e-8, -1e-8])
    want_neg = np.where(ys >= 0, np.sqrt(np.abs(ys)) + 0j, -1j * np.sqrt(np.abs(ys)))
    want_pos = np.where(ys >= 0, 1j * np.sqrt(np.abs(ys)), np.sqrt(np.abs(ys)) + 0j)
    tables = bool(np.array_equal(boundary_sqrt_neg_iz(ys), want_neg) and np.array_equal(boundary_sqrt_iz(ys), want_pos))
    tables &= complex(boundary_sqrt_iz(4.0)) == 2j and complex(boundary_sqrt_neg_iz(-4.0)) == -2j
    ok = worst < 1e-10 and overflow_ok and tables
    return ok, {"max_rel_err": worst, "points": grid.size, "overflow_points": n_over, "branch_tables": tables}


CHECKS: List[Callable[[], CheckResult]] = [
    check_ultra,
    check_static,
    check_linear_law,
    check_timing,
    check_parseval,
    check_poisson,
    check_bridge,
    check_shadow,
    check_specfun,
]


def run_checks(select=None) -> List[CheckResult]:
    chosen = CHECKS if select is None else [CHECKS[i - 1] for i in select]
    return [c() for c in chosen]


def format_table(results: List[CheckResult]) -> str:
    return "\n".join(r.line() for r in results)
