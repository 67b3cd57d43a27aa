"""Gaussian wave packets, free dynamics and their Laplace-domain propagators.

Analytic work is done in dimensionless variables

    xi = x / (2 eta),  tau = hbar t / (2 m eta**2),  alpha = m eta kappa / hbar,
    xi0 = x0 / (2 eta), v = 2 eta k,

in which the free Schrodinger generator is ``H0 = -(1/4) d^2/dxi^2`` and a
packet with phase ``exp(2 i v xi)`` moves with group velocity ``v``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .specfun import scaled_faddeeva_w, sqrt_neg_iz

__all__ = [
    "GaussianPacket",
    "DimensionlessPacket",
    "UltraRelativistic",
    "FreeSchrodinger",
    "to_dimensionless",
    "from_dimensionless",
    "packet_value",
    "free_evolved_packet",
    "free_kernel",
    "free_laplace_kernel",
    "ultra_shift",
    "psi0_laplace_at",
    "w_pair",
]

_NORM = (2.0 / np.pi) ** 0.25


@dataclass(frozen=True)
class GaussianPacket:
    """Initial state ``(2 pi)^(-1/4) eta^(-1/2) exp(-(x-x0)^2/(4 eta^2) + 2 i k (x-x0))``."""

    x0: float
    k: float
    eta: float
    mass: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError("packet width eta must be positive")
        if not (self.mass > 0 and self.hbar > 0):
            raise ValueError("mass and hbar must be positive")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        s = x - self.x0
        amp = (2.0 * np.pi) ** -0.25 / np.sqrt(self.eta)
        return amp * np.exp(-(s**2) / (4.0 * self.eta**2) + 2j * self.k * s)

    def tau(self, t):
        """Dimensionless time for physical time ``t``."""
        return self.hbar * np.asarray(t) / (2.0 * self.mass * self.eta**2)

    def alpha(self, kappa):
        """Dimensionless coupling for physical strength ``kappa``."""
        return self.mass * self.eta * np.asarray(kappa) / self.hbar

    def xi(self, x):
        return np.asarray(x) / (2.0 * self.eta)


@dataclass(frozen=True)
class DimensionlessPacket:
    xi0: float
    v: float

    def __call__(self, xi):
        return packet_value(self, xi)


@dataclass(frozen=True)
class UltraRelativistic:
    """``H0 = -i c d/dx``: rigid translation at speed ``c``."""

    c: float

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("c must be positive")


@dataclass(frozen=True)
class FreeSchrodinger:
    """``H0 = -(1/4) d^2/dxi^2`` in dimensionless units."""


Dynamics = Union[UltraRelativistic, FreeSchrodinger]


def to_dimensionless(p: GaussianPacket) -> DimensionlessPacket:
    return DimensionlessPacket(xi0=p.x0 / (2.0 * p.eta), v=2.0 * p.eta * p.k)


def from_dimensionless(p: DimensionlessPacket, eta: float, mass: float = 1.0, hbar: float = 1.0) -> GaussianPacket:
    return GaussianPacket(x0=2.0 * eta * p.xi0, k=p.v / (2.0 * eta), eta=eta, mass=mass, hbar=hbar)


def packet_value(p: DimensionlessPacket, xi):
    """Dimensionless amplitude ``(2/pi)^(1/4) exp(-(xi-xi0)^2 + 2 i v (xi-xi0))``."""
    s = np.asarray(xi, dtype=float) - p.xi0
    return _NORM * np.exp(-(s**2) + 2j * p.v * s)


def free_evolved_packet(p: DimensionlessPacket, xi, tau):
    """Freely evolved packet ``(K0(tau) psi0)(xi)`` in closed form.

    Obtained by integrating the free kernel ``(pi i tau)^(-1/2) exp(i (xi'-xi)^2 / tau)``
    against the Gaussian; regular at ``tau = 0``.
    """
    tau = np.asarray(tau, dtype=float)
    dx = np.asarray(xi, dtype=float) - p.xi0
    v = p.v
    expo = (1j * dx**2 + 2.0 * v * dx - v**2 * tau) / (tau - 1j)
    return _NORM / np.sqrt(1.0 + 1j * tau) * np.exp(expo)


def free_kernel(xi1, xi2, tau):
    """Time-domain Schrodinger kernel ``(pi i tau)^(-1/2) exp(i (xi1-xi2)^2 / tau)``."""
    tau = np.asarray(tau, dtype=float)
    if np.any(tau <= 0):
        raise ValueError("free_kernel needs tau > 0")
    d = np.asarray(xi1, dtype=float) - np.asarray(xi2, dtype=float)
    return np.sqrt(1.0 / (1j * np.pi * tau)) * np.exp(1j * d**2 / tau)


def free_laplace_kernel(dyn: Dynamics, x1, x2, z):
    """Laplace-transformed free propagator ``K0~(x1, x2; z)``.

    Schrodinger (dimensionless): ``(i z)^(-1/2) exp(-2 sqrt(-i z) |x1 - x2|)``.
    Ultra-relativistic: ``(1/c) exp(-(x1 - x2) z / c)`` for ``x1 >= x2`` and 0
    otherwise (the transform of ``delta(x2 - x1 + c t)``); the diagonal is ``1/c``.
    """
    z = np.asarray(z, dtype=complex)
    dx = np.asarray(x1, dtype=float) - np.asarray(x2, dtype=float)
    if isinstance(dyn, UltraRelativistic):
        if np.any(z.real < 0):
            raise ValueError("Laplace variable must satisfy Re z >= 0")
        val = np.exp(-np.where(dx >= 0, dx, 0.0) * z / dyn.c) / dyn.c
        return np.where(dx >= 0, val, 0.0)
    if isinstance(dyn, FreeSchrodinger):
        if np.any(z == 0):
            raise ZeroDivisionError("Schrodinger resolvent kernel is singular at z = 0")
        if np.any(z.real < 0):
            raise ValueError("Laplace variable must satisfy Re z >= 0")
        s = sqrt_neg_iz(z)
        return np.exp(-2.0 * s * np.abs(dx)) / (1j * s)
    raise TypeError(f"unknown dynamics {dyn!r}")


def ultra_shift(psi: Callable, c: float, t: float) -> Callable:
    """Free ultra-relativistic evolution: ``(K0(t) psi)(x) = psi(x - c t)``."""
    return lambda x: psi(np.asarray(x, dtype=float) - c * t)


def psi0_laplace_at(p: DimensionlessPacket, xi_a: float, z):
    """Laplace transform of the freely evolving packet at ``xi_a``.

    ``1/2 (2 pi)^(1/4) (i z)^(-1/2) exp(-d^2 - 2 i v d) [w(u+) + w(u-)]`` with
    ``u+- = i sqrt(-i z) +- (v - i d)`` and ``d = xi0 - xi_a``. Boundary points
    ``Re z = 0`` use the 0+ branch values.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise ZeroDivisionError("psi0_laplace_at is singular at z = 0")
    return 0.5 * (2.0 * np.pi) ** 0.25 * w_pair(p, xi_a, z) / (1j * sqrt_neg_iz(z))


def w_pair(p: DimensionlessPacket, xi_a: float, z):
    """``exp(-d^2 - 2 i v d) [w(u+) + w(u-)]``, the z-dependence shared by all counters."""
    d = p.xi0 - xi_a
    s = sqrt_neg_iz(z)
    shift = p.v - 1j * d
    log_pref = -(d**2) - 2j * p.v * d
    return scaled_faddeeva_w(1j * s + shift, log_pref) + scaled_faddeeva_w(1j * s - shift, log_pref)
