"""Parameter studies over coupling strength and packet velocity."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import simpson

from .arrival import CounterArray, DeltaCounter, counter_amplitudes
from .dynamics import DimensionlessPacket, w_pair
from .inversion import (
    DEFAULT_N,
    DEFAULT_Y_MAX,
    ArrivalDistribution,
    _tail_estimate,
    invert_to_time,
    offset_grid,
    sample_spectrum,
)
from .specfun import sqrt_iz

__all__ = [
    "BracketError",
    "golden_section_max",
    "EfficiencyPoint",
    "CounterResponse",
    "arrival_distribution",
    "default_tau_grid",
    "optimize_alpha",
    "alpha_opt_curve",
    "slopes",
    "efficiency_surface",
    "ShapeReport",
    "shape_invariance",
]

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class BracketError(ValueError):
    """The bracket does not enclose an interior maximum."""


def golden_section_max(f: Callable[[float], float], a: float, b: float, tol: float = 1e-4):
    """Maximise a unimodal ``f`` on ``[a, b]`` to an interval shorter than ``tol``.

    Returns ``(x, f(x))``. Raises :class:`BracketError` when an endpoint beats
    both interior probes.
    """
    a, b = min(a, b), max(a, b)
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    fa, fb = f(a), f(b)
    if max(fa, fb) > max(fc, fd):
        raise BracketError(f"f({a:g})={fa:.6g}, f({b:g})={fb:.6g} exceed interior probes; widen or shift the bracket")
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


@dataclass(frozen=True)
class EfficiencyPoint:
    v: float
    alpha: float
    P_inf: float


class CounterResponse:
    """Single delta counter response of one packet, reusable across couplings.

    The Faddeeva part of the amplitude does not depend on ``alpha``; it is
    evaluated once on the spectral grid so that ``P_inf(alpha)`` costs one
    vector reduction.
    """

    def __init__(self, packet: DimensionlessPacket, xi_a: float = 0.0, y_max: float = DEFAULT_Y_MAX, n: int = DEFAULT_N):
        self.packet = packet
        self.xi_a = xi_a
        self.y_max = y_max
        self.y, self.weights = offset_grid(y_max, n)
        z = 1j * self.y
        self._root = sqrt_iz(z)
        self._numer = (2.0 * np.pi) ** 0.25 * w_pair(packet, xi_a, z)

    def amplitude(self, alpha: float) -> np.ndarray:
        """``(2 pi)^(1/4) sqrt(alpha) e^(-d^2-2ivd) [w(u+)+w(u-)] / (2 sqrt(iz) + alpha)``."""
        return np.sqrt(alpha) * self._numer / (2.0 * self._root + alpha)

    def efficiency(self, alpha: float) -> float:
        if alpha == 0:
            return 0.0
        vals = self.amplitude(alpha)[None]
        body = float(np.abs(vals[0]) ** 2 @ self.weights) / (2.0 * np.pi)
        return body + float(_tail_estimate(self.y, vals, self.y_max)[0])


def default_tau_grid(tau_max: float = 4.0, n: int = 2048) -> np.ndarray:
    return np.linspace(0.0, tau_max, n)


def arrival_distribution(
    packet: DimensionlessPacket,
    counters,
    tau=None,
    y_max: float = DEFAULT_Y_MAX,
    n: int = DEFAULT_N,
) -> ArrivalDistribution:
    """Arrival law of a packet at a counter or counter array via Fourier inversion."""
    if isinstance(counters, DeltaCounter):
        counters = CounterArray((counters,))
    tau = default_tau_grid() if tau is None else np.asarray(tau, dtype=float)
    spec = sample_spectrum(lambda z: counter_amplitudes(packet, counters, z), y_max=y_max, n=n)
    return invert_to_time(spec, tau)


def optimize_alpha(
    packet: DimensionlessPacket,
    bracket=(0.05, 20.0),
    xi_a: float = 0.0,
    tol: float = 1e-4,
    y_max: float = DEFAULT_Y_MAX,
    n: int = DEFAULT_N,
):
    """Coupling that maximises ``P_inf`` for a single counter; returns ``(alpha_opt, P_max)``."""
    resp = CounterResponse(packet, xi_a, y_max, n)
    return golden_section_max(resp.efficiency, bracket[0], bracket[1], tol)


def alpha_opt_curve(v_grid: Sequence[float], xi0: float = -4.0, bracket=None, threads: int = 1, **kw):
    """Optimal coupling per velocity for packets starting at ``xi0`` towards a counter at 0."""
    v_grid = [float(v) for v in v_grid]

    def one(v):
        br = bracket if bracket is not None else (0.05, 6.0 * max(v, 1.0))
        a, pm = optimize_alpha(DimensionlessPacket(xi0, v), br, **kw)
        return EfficiencyPoint(v, a, pm)

    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(one, v_grid))


def slopes(points: Sequence[EfficiencyPoint]) -> np.ndarray:
    """Finite-difference slopes of ``alpha_opt(v)`` between consecutive points."""
    v = np.array([p.v for p in points])
    a = np.array([p.alpha for p in points])
    return np.diff(a) / np.diff(v)


def efficiency_surface(v_grid, alpha_grid, xi0: float = 0.0, threads: int = 1, y_max: float = DEFAULT_Y_MAX, n: int = DEFAULT_N):
    """``P_inf`` on a (v, alpha) grid for a packet starting at ``xi0``, rows indexed by v."""
    alpha_grid = [float(a) for a in alpha_grid]

    def row(v):
        resp = CounterResponse(DimensionlessPacket(xi0, float(v)), 0.0, y_max, n)
        return [EfficiencyPoint(float(v), a, resp.efficiency(a)) for a in alpha_grid]

    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(row, v_grid))


@dataclass(frozen=True)
class ShapeReport:
    alphas: tuple
    P_inf: tuple
    means: tuple
    l1: dict  # (i, j) -> L1 distance of unit-mass densities
    densities: np.ndarray  # unit-mass densities, one row per alpha
    tau: np.ndarray

    @property
    def max_l1(self) -> float:
        return max(self.l1.values(), default=0.0)

    @property
    def means_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.means) < 0))


def shape_invariance(packet: DimensionlessPacket, alphas: Sequence[float], tau=None, xi_a: float = 0.0, **kw) -> ShapeReport:
    """Compare unit-mass arrival densities across couplings."""
    tau = default_tau_grid() if tau is None else np.asarray(tau, dtype=float)
    dens, pinf, means = [], [], []
    for a in alphas:
        dist = arrival_distribution(packet, DeltaCounter(xi_a, float(a)), tau, **kw)
        if dist.P_inf < 1e-6:
            raise ZeroDivisionError(f"P_inf={dist.P_inf:.3g} too small to normalise at alpha={a}")
        dens.append(dist.normalized())
        pinf.append(dist.P_inf)
        means.append(dist.mean())
    dens = np.array(dens)
    l1 = {(i, j): float(simpson(np.abs(dens[i] - dens[j]), x=tau)) for i, j in combinations(range(len(alphas)), 2)}
    return ShapeReport(tuple(alphas), tuple(pinf), tuple(means), l1, dens, tau)
