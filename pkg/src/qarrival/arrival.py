"""Laplace-domain arrival amplitudes for point counters.

For ``Lambda = sum_i |a_i><a_i|`` the resolvent equation
``K~ = K0~ - 1/2 K0~ Lambda K~`` projected on the counter vectors gives the
linear system ``(2 + G) x = 2 b`` with ``G_ij = <a_i|K0~|a_j>`` and
``b_i = <a_i|K0~|psi0>``; ``x_i`` are the transformed arrival amplitudes.
Counters are Dirac deltas ``|a> = sqrt(alpha) delta(xi - xi_a)`` in
dimensionless units.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import norm

from .dynamics import (
    DimensionlessPacket,
    FreeSchrodinger,
    GaussianPacket,
    free_laplace_kernel,
    psi0_laplace_at,
)
from .specfun import gaussian_integral

__all__ = [
    "DeltaCounter",
    "CounterArray",
    "SingularSystemError",
    "gram_laplace",
    "single_counter_amplitude",
    "composite_amplitudes",
    "counter_amplitudes",
    "UltraArrivalLaw",
    "ultra_arrival",
]

DELTA_TOL = 1e-14


class SingularSystemError(ArithmeticError):
    """The counter resolvent system is numerically singular."""


@dataclass(frozen=True)
class DeltaCounter:
    xi_a: float
    alpha: float

    def __post_init__(self):
        if not self.alpha >= 0:
            raise ValueError("counter strength must be non-negative")


@dataclass(frozen=True)
class CounterArray:
    """Point counters composed incoherently (independent detectors) or coherently (one detector)."""

    counters: tuple
    mode: str = "incoherent"

    def __post_init__(self):
        object.__setattr__(self, "counters", tuple(self.counters))
        if not self.counters:
            raise ValueError("CounterArray needs at least one counter")
        if self.mode not in ("incoherent", "coherent"):
            raise ValueError(f"unknown composition mode {self.mode!r}")

    def __len__(self):
        return len(self.counters)

    @property
    def positions(self):
        return np.array([c.xi_a for c in self.counters], dtype=float)

    @property
    def strengths(self):
        return np.array([c.alpha for c in self.counters], dtype=float)


_DYN = FreeSchrodinger()


def gram_laplace(counters: Sequence[DeltaCounter], z) -> np.ndarray:
    """``(ij) = <a_i|K0~(z)|a_j>`` with shape ``z.shape + (n, n)``."""
    z = np.asarray(z, dtype=complex)
    pos = np.array([c.xi_a for c in counters], dtype=float)
    amp = np.sqrt(np.array([c.alpha for c in counters], dtype=float))
    k = free_laplace_kernel(_DYN, pos[:, None], pos[None, :], z[..., None, None])
    return k * amp[:, None] * amp[None, :]


def single_counter_amplitude(p: DimensionlessPacket, c: DeltaCounter, z):
    """Transformed arrival amplitude ``2 <a|psi0~> / (2 + <a|K0~|a>)`` of one delta counter."""
    z = np.asarray(z, dtype=complex)
    if c.alpha == 0:
        return np.zeros(z.shape, dtype=complex)
    b = np.sqrt(c.alpha) * psi0_laplace_at(p, c.xi_a, z)
    g = c.alpha * free_laplace_kernel(_DYN, c.xi_a, c.xi_a, z)
    return 2.0 * b / (2.0 + g)


def composite_amplitudes(p: DimensionlessPacket, arr: CounterArray, z) -> np.ndarray:
    """Transformed amplitudes of an incoherent counter array, shape ``(n, *z.shape)``.

    Two counters use the explicit 2x2 inverse with determinant
    ``Delta = 4 + 2((11) + (22)) + (11)(22) - (12)(21)``; larger arrays solve
    the same system by LU with partial pivoting.
    """
    if arr.mode != "incoherent":
        raise ValueError("composite_amplitudes expects an incoherent array; use counter_amplitudes")
    z = np.asarray(z, dtype=complex)
    b = np.stack([np.sqrt(c.alpha) * psi0_laplace_at(p, c.xi_a, z) for c in arr.counters])
    g = gram_laplace(arr.counters, z)
    n = len(arr)
    if n == 1:
        return (2.0 * b[0] / (2.0 + g[..., 0, 0]))[None]
    if n == 2:
        g11, g12, g21, g22 = g[..., 0, 0], g[..., 0, 1], g[..., 1, 0], g[..., 1, 1]
        delta = 4.0 + 2.0 * (g11 + g22) + (g11 * g22 - g12 * g21)
        if np.any(np.abs(delta) < DELTA_TOL):
            raise SingularSystemError("|Delta| below threshold")
        x1 = 2.0 / delta * ((2.0 + g22) * b[0] - g12 * b[1])
        x2 = 2.0 / delta * ((2.0 + g11) * b[1] - g21 * b[0])
        return np.stack([x1, x2])
    mat = 2.0 * np.eye(n) + g
    rhs = 2.0 * np.moveaxis(b, 0, -1)[..., None]
    try:
        x = np.linalg.solve(mat, rhs)[..., 0]
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(str(exc)) from exc
    return np.moveaxis(x, -1, 0)


def counter_amplitudes(p: DimensionlessPacket, arr: CounterArray, z) -> np.ndarray:
    """Per-channel transformed amplitudes for either composition mode.

    Coherent arrays act as one rank-one detector ``|s> = sum_i sqrt(alpha_i) delta_i``
    and return a single channel; incoherent arrays return one channel per counter.
    """
    z = np.asarray(z, dtype=complex)
    if arr.mode == "incoherent":
        return composite_amplitudes(p, arr, z)
    amp = np.sqrt(arr.strengths)
    b = sum(a * psi0_laplace_at(p, c.xi_a, z) for a, c in zip(amp, arr.counters))
    gss = gram_laplace(arr.counters, z).sum(axis=(-2, -1))
    return (2.0 * b / (2.0 + gss))[None]


@dataclass(frozen=True)
class UltraArrivalLaw:
    """Exact arrival law for ``H0 = -i c d/dx`` and a delta counter at ``a``."""

    packet: GaussianPacket
    c: float
    kappa: float
    a: float
    amplitude_factor: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "amplitude_factor", np.sqrt(self.kappa) / (1.0 + self.kappa / (2.0 * self.c)))

    @property
    def left_mass(self) -> float:
        """Initial probability to the left of the counter."""
        return float(norm.cdf((self.a - self.packet.x0) / self.packet.eta))

    @property
    def P_inf(self) -> float:
        x = self.kappa / (2.0 * self.c)
        return (self.kappa / self.c) / (1.0 + x) ** 2 * self.left_mass

    def amplitude(self, t):
        """``phi(t) = const(kappa) psi0(a - c t)``."""
        t = np.asarray(t, dtype=float)
        return np.where(t >= 0, self.amplitude_factor * self.packet(self.a - self.c * t), 0.0)

    def density(self, t):
        return np.abs(self.amplitude(t)) ** 2

    def laplace_amplitude(self, z):
        """``const(kappa) * int_0^inf exp(-z t) psi0(a - c t) dt`` in closed form."""
        z = np.asarray(z, dtype=complex)
        pk = self.packet
        dist = self.a - pk.x0
        s2 = 4.0 * pk.eta**2
        qa = self.c**2 / s2
        qb = -dist * self.c / s2 + 1j * pk.k * self.c + z / 2.0
        qc = dist**2 / s2 - 2j * pk.k * dist
        amp = (2.0 * np.pi) ** -0.25 / np.sqrt(pk.eta)
        return self.amplitude_factor * amp * gaussian_integral(qa, qb, qc)


def ultra_arrival(packet: GaussianPacket, c: float, kappa, a: float) -> UltraArrivalLaw:
    """Closed-form arrival law of an ultra-relativistic particle at a delta counter.

    ``kappa`` may be a sequence of strengths of a coherent superposition of
    counters; the efficiency then depends on their sum only.
    """
    if not c > 0:
        raise ValueError("c must be positive")
    total = float(np.sum(kappa))
    if np.any(np.asarray(kappa) < 0):
        raise ValueError("kappa must be non-negative")
    return UltraArrivalLaw(packet=packet, c=c, kappa=total, a=a)
