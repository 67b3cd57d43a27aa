"""From boundary values of Laplace amplitudes to arrival-time distributions.

Spectra are sampled on ``z = 0+ + i y``. Amplitudes of delta counters are
analytic in ``sqrt(-i z)``, so they carry a square-root cusp at ``y = 0``; the
sampling grid is therefore uniform in ``t = sign(y) sqrt(|y|)`` (``y = t|t|``,
``dy = 2|t| dt``) with a half-step offset, which keeps the grid symmetric,
excludes ``y = 0`` and turns the cusp into a smooth integrand.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_simpson

__all__ = [
    "SpectralAmplitude",
    "ArrivalDistribution",
    "AliasingError",
    "TailMassWarning",
    "EfficiencyWarning",
    "offset_grid",
    "sample_spectrum",
    "invert_to_time",
    "parseval_efficiency",
    "clip_density",
    "DEFAULT_Y_MAX",
    "DEFAULT_N",
]

DEFAULT_Y_MAX = 400.0
DEFAULT_N = 2**14
NEG_DENSITY_TOL = 1e-12
TAIL_WARN_RATIO = 1e-4
_TAIL_POWERS = (2.0, 2.5, 3.0)
_CHUNK = 64


class AliasingError(ValueError):
    """Spectral sampling too coarse for the requested time window."""


class TailMassWarning(UserWarning):
    """Spectral mass beyond ``y_max`` is not negligible."""


class EfficiencyWarning(UserWarning):
    """Parseval efficiency exceeds 1 beyond tolerance."""


@dataclass(frozen=True)
class SpectralAmplitude:
    """Boundary samples ``phi~_i(0+ + i y)`` with quadrature weights for ``dy``."""

    y: np.ndarray
    weights: np.ndarray
    values: np.ndarray  # (channels, len(y))
    y_max: float
    tail_mass: np.ndarray  # per channel, already divided by 2 pi

    @property
    def n_channels(self) -> int:
        return self.values.shape[0]

    @property
    def max_spacing(self) -> float:
        return float(np.max(np.diff(self.y)))


@dataclass(frozen=True)
class ArrivalDistribution:
    tau: np.ndarray
    p: np.ndarray
    P_cum: np.ndarray
    P_inf: float

    @property
    def mass(self) -> float:
        """Probability of an event inside the time window."""
        return float(self.P_cum[-1])

    def mean(self) -> float:
        """Mean arrival time conditioned on an event inside the window."""
        num = cumulative_simpson(self.tau * self.p, x=self.tau)[-1]
        return float(num / self.mass)

    def normalized(self) -> np.ndarray:
        """Density rescaled to unit mass on the window."""
        if self.mass <= 1e-300:
            raise ZeroDivisionError("cannot normalize a distribution with zero mass")
        return self.p / self.mass


def offset_grid(y_max: float, n: int):
    """Symmetric grid ``y = t|t|`` with ``t`` uniform and offset by half a step.

    Returns ``(y, weights)`` with ``sum(weights * f(y))`` approximating the
    integral of ``f`` over ``[-y_max, y_max]``.
    """
    if not y_max > 0:
        raise ValueError("y_max must be positive")
    if n < 16 or n % 2:
        raise ValueError("n must be even and at least 16")
    top = np.sqrt(y_max)
    dt = 2.0 * top / n
    t = (np.arange(n) + 0.5) * dt - top
    return t * np.abs(t), 2.0 * np.abs(t) * dt


def _tail_estimate(y, values, y_max):
    """Spectral mass beyond ``|y| = y_max`` from a fit of ``|phi~|^2`` in inverse powers of ``|y|``.

    Leading behaviour is ``|y|^-2``; two subleading powers absorb the
    curvature of the fit window ``|y| >= y_max / 4``. When the window is not
    yet asymptotic (the spectrum still falls faster than any power) the fit can
    extrapolate spuriously, so it is only trusted within a factor 2 of the
    leading-order edge estimate ``y_max |phi~(y_max)|^2``; otherwise the edge
    estimate is used.
    """
    dens = np.abs(values) ** 2
    tails = np.zeros(values.shape[0])
    for side in (y > 0, y < 0):
        ay = np.abs(y[side])
        window = ay >= y_max / 4.0
        if window.sum() < len(_TAIL_POWERS):
            window = np.argsort(ay)[-len(_TAIL_POWERS):]
        yw = ay[window]
        design = np.stack([yw ** (2.0 - q) for q in _TAIL_POWERS], axis=1)
        rhs = (dens[:, side][:, window] * yw**2).T
        coef, *_ = np.linalg.lstsq(design, rhs, rcond=None)
        integ = np.array([y_max ** (1.0 - q) / (q - 1.0) for q in _TAIL_POWERS])
        fit = np.clip(integ @ coef, 0.0, None)
        outer = ay >= np.quantile(ay, 0.95)
        edge = np.mean(dens[:, side][:, outer] * ay[outer] ** 2, axis=1) / y_max
        tails += np.where(fit <= 2.0 * edge, fit, edge)
    return tails / (2.0 * np.pi)


def sample_spectrum(provider: Callable, y_max: float = DEFAULT_Y_MAX, n: int = DEFAULT_N, warn: bool = True) -> SpectralAmplitude:
    """Evaluate an amplitude provider on the offset boundary grid.

    ``provider`` maps an array of ``z = 0+ + i y`` to one channel (same shape)
    or several channels (leading axis).
    """
    y, w = offset_grid(y_max, n)
    z = 1j * y
    vals = np.asarray(provider(z), dtype=complex)
    if vals.ndim == 1:
        vals = vals[None]
    if vals.shape[-1] != y.size:
        raise ValueError("provider returned an array of the wrong length")
    tail = _tail_estimate(y, vals, y_max)
    spec = SpectralAmplitude(y=y, weights=w, values=vals, y_max=float(y_max), tail_mass=tail)
    if warn:
        total = parseval_efficiency(spec, include_tail=False)
        if tail.sum() > TAIL_WARN_RATIO * total and tail.sum() > 0:
            warnings.warn(
                f"estimated spectral tail mass {tail.sum():.2e} beyond y_max={y_max} "
                f"exceeds {TAIL_WARN_RATIO:g} of P_inf; it is added to P_inf but the "
                "time-domain density is truncated",
                TailMassWarning,
                stacklevel=2,
            )
    return spec


def parseval_efficiency(s: SpectralAmplitude, include_tail: bool = True) -> float:
    """Total efficiency ``P_inf = (1/2pi) sum_i int |phi~_i(iy)|^2 dy``."""
    total = float(np.sum(np.abs(s.values) ** 2 @ s.weights) / (2.0 * np.pi))
    if include_tail:
        total += float(np.sum(s.tail_mass))
    if total > 1.0 + 1e-6:
        warnings.warn(f"Parseval efficiency {total:.8f} exceeds 1", EfficiencyWarning, stacklevel=2)
    return total


def clip_density(p: np.ndarray) -> np.ndarray:
    """Zero round-off negativity; larger negative values signal a bug."""
    p = np.asarray(p, dtype=float)
    if np.any(p < -NEG_DENSITY_TOL):
        raise ValueError(f"density has negative values down to {p.min():.3e}")
    return np.where(p < 0, 0.0, p)


def inverse_fourier(s: SpectralAmplitude, tau) -> np.ndarray:
    """Channel amplitudes ``phi_i(tau) = (1/2pi) int exp(i tau y) phi~_i(iy) dy``."""
    tau = np.asarray(tau, dtype=float)
    if tau.size and np.max(np.abs(tau)) * s.max_spacing >= np.pi:
        raise AliasingError(
            f"max|tau| * max dy = {np.max(np.abs(tau)) * s.max_spacing:.3f} >= pi; refine n or shrink the window"
        )
    weighted = (s.values * s.weights).T / (2.0 * np.pi)
    out = np.empty((s.n_channels, tau.size), dtype=complex)
    for lo in range(0, tau.size, _CHUNK):
        block = tau[lo:lo + _CHUNK]
        out[:, lo:lo + _CHUNK] = (np.exp(1j * np.outer(block, s.y)) @ weighted).T
    return out


def invert_to_time(s: SpectralAmplitude, tau) -> ArrivalDistribution:
    """Density ``p = sum_i |phi_i|^2`` on ``tau`` with its running integral and ``P_inf``."""
    tau = np.asarray(tau, dtype=float)
    if tau.ndim != 1 or tau.size < 2 or np.any(np.diff(tau) <= 0):
        raise ValueError("tau grid must be strictly increasing with at least two points")
    phi = inverse_fourier(s, tau)
    p = clip_density(np.sum(np.abs(phi) ** 2, axis=0))
    P_cum = cumulative_simpson(p, x=tau, initial=0.0)
    P_cum = np.maximum.accumulate(np.maximum(P_cum, 0.0))
    return ArrivalDistribution(tau=tau, p=p, P_cum=P_cum, P_inf=parseval_efficiency(s))
