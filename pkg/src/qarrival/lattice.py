"""Grid simulation of the non-unitary evolution ``exp(-i H0 t - Lambda t / 2)``.

Periodic spectral grids in one or two dimensions with ``H0 = -kinetic * laplacian``
(``kinetic = 1/4`` matches the dimensionless units used elsewhere). Each step is
a Strang splitting: half kinetic step in Fourier space, the absorptive factor
``exp(-Lambda dt / 2)``, half kinetic step.
"""
from __future__ import annotations

import json
import os
import tempfile
import warnings
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.optimize import brentq

from .inversion import ArrivalDistribution, clip_density

__all__ = [
    "GaussianShape",
    "PointApprox",
    "Tabulated",
    "DetectorProfile",
    "LatticeState",
    "DomainEscapeWarning",
    "SplitStepPropagator",
    "DetectionRun",
    "ShadowReport",
    "make_state",
    "gaussian_packet_field",
    "step",
    "run_detection",
    "shadow_profile",
    "edge_absorber",
    "richardson",
    "point_counter_run",
    "ShadowConfig",
    "ShadowResult",
    "run_shadow",
    "calibrate_shadow",
    "load_shadow_config",
    "atomic_write",
    "write_snapshot",
    "read_snapshot",
    "write_axial_csv",
    "read_axial_csv",
]

ESCAPE_TOL = 1e-3
EDGE_FRACTION = 1.0 / 16.0


class DomainEscapeWarning(UserWarning):
    """Probability is reaching the periodic boundary."""


@dataclass(frozen=True)
class GaussianShape:
    center: tuple
    sigma: float

    def values(self, axes):
        r2 = sum((g - c) ** 2 for g, c in zip(np.meshgrid(*axes, indexing="ij"), self.center))
        return np.exp(-r2 / (2.0 * self.sigma**2))


@dataclass(frozen=True)
class PointApprox:
    """Indicator of a box of side ``width`` normalised to unit integral (a smeared delta)."""

    center: tuple
    width: float

    def values(self, axes):
        mask = np.ones([len(a) for a in axes], dtype=bool)
        for g, c in zip(np.meshgrid(*axes, indexing="ij"), self.center):
            mask &= np.abs(g - c) < self.width / 2.0 * (1.0 + 1e-9)
        cell = np.prod([a[1] - a[0] for a in axes])
        count = mask.sum()
        if count == 0:
            raise ValueError("PointApprox width is smaller than the grid spacing around its center")
        return mask / (count * cell)


@dataclass(frozen=True)
class Tabulated:
    grid_values: np.ndarray

    def values(self, axes):
        vals = np.asarray(self.grid_values, dtype=float)
        if vals.shape != tuple(len(a) for a in axes):
            raise ValueError("tabulated profile does not match the grid")
        return vals


@dataclass(frozen=True)
class DetectorProfile:
    """``Lambda(x) = lambda0 * shape(x)``; a zero ``lambda0`` switches the detector off."""

    lambda0: float
    shape: Union[GaussianShape, PointApprox, Tabulated]

    def __post_init__(self):
        if not self.lambda0 >= 0:
            raise ValueError("lambda0 must be non-negative")

    def on_grid(self, axes) -> np.ndarray:
        vals = self.lambda0 * self.shape.values(axes)
        if np.any(vals < 0):
            raise ValueError("detector profile must be non-negative")
        return vals


@dataclass(frozen=True)
class LatticeState:
    field: np.ndarray
    dx: float
    dt: float
    time: float = 0.0
    origin: Optional[tuple] = None
    norm_sq: float = field(default=None)

    def __post_init__(self):
        f = np.asarray(self.field, dtype=complex)
        object.__setattr__(self, "field", f)
        if self.origin is None:
            object.__setattr__(self, "origin", tuple(-n * self.dx / 2.0 for n in f.shape))
        if self.norm_sq is None:
            object.__setattr__(self, "norm_sq", float(np.sum(np.abs(f) ** 2) * self.dx**f.ndim))

    @property
    def axes(self):
        return [o + self.dx * np.arange(n) for o, n in zip(self.origin, self.field.shape)]

    @property
    def density(self):
        return np.abs(self.field) ** 2


def make_state(n: Union[int, Sequence[int]], dx: float, dt: Optional[float] = None, ndim: int = 1) -> LatticeState:
    """Zero field on a centred grid; ``dt`` defaults to ``0.25 dx**2``."""
    shape = (n,) * ndim if np.isscalar(n) else tuple(n)
    return LatticeState(np.zeros(shape, dtype=complex), dx, 0.25 * dx**2 if dt is None else dt)


def gaussian_packet_field(state: LatticeState, center, velocity, width=None) -> LatticeState:
    """Fill ``state`` with ``prod_j (2/pi)^(1/4) w_j^(-1/2) exp(-((x_j - c_j)/w_j)^2 + 2 i v_j (x_j - c_j))``.

    In the ``kinetic = 1/4`` units and with unit widths this is the
    dimensionless Gaussian of unit norm moving with velocity ``v``.
    """
    grids = np.meshgrid(*state.axes, indexing="ij")
    width = (1.0,) * len(grids) if width is None else width
    f = np.ones(state.field.shape, dtype=complex)
    for g, c, v, w in zip(grids, center, velocity, width):
        s = g - c
        f *= (2.0 / np.pi) ** 0.25 / np.sqrt(w) * np.exp(-((s / w) ** 2) + 2j * v * s)
    return replace(state, field=f, norm_sq=None)


class SplitStepPropagator:
    """Precomputed Strang factors for one grid, time step and detector."""

    def __init__(self, state: LatticeState, profile: DetectorProfile, kinetic: float = 0.25, mask=None):
        self.dx = state.dx
        self.dt = state.dt
        self.ndim = state.field.ndim
        self.cell = state.dx**self.ndim
        self.lam = profile.on_grid(state.axes)
        ks = np.meshgrid(*[2.0 * np.pi * np.fft.fftfreq(n, state.dx) for n in state.field.shape], indexing="ij")
        k2 = sum(k**2 for k in ks)
        self.half_kinetic = np.exp(-0.5j * kinetic * k2 * state.dt)
        self.absorb = np.exp(-0.5 * self.lam * state.dt)
        if mask is not None:
            # boundary absorber: removes probability without counting it as events
            self.absorb = self.absorb * np.exp(-0.5 * np.asarray(mask, dtype=float) * state.dt)

    def advance(self, psi: np.ndarray) -> np.ndarray:
        psi = np.fft.ifftn(self.half_kinetic * np.fft.fftn(psi))
        psi = self.absorb * psi
        return np.fft.ifftn(self.half_kinetic * np.fft.fftn(psi))

    def rate(self, psi: np.ndarray) -> float:
        """Event density ``<psi, Lambda psi>``."""
        return float(np.sum(self.lam * np.abs(psi) ** 2) * self.cell)

    def norm_sq(self, psi: np.ndarray) -> float:
        return float(np.sum(np.abs(psi) ** 2) * self.cell)


def step(state: LatticeState, profile: DetectorProfile, kinetic: float = 0.25) -> LatticeState:
    """One Strang step; prefer :class:`SplitStepPropagator` in loops."""
    prop = SplitStepPropagator(state, profile, kinetic)
    psi = prop.advance(state.field)
    return replace(state, field=psi, time=state.time + state.dt, norm_sq=prop.norm_sq(psi))


def _edge_mass(psi: np.ndarray, cell: float) -> float:
    dens = np.abs(psi) ** 2
    inner = np.ones(dens.shape, dtype=bool)
    for ax, n in enumerate(dens.shape):
        m = max(1, int(n * EDGE_FRACTION))
        idx = np.arange(n)
        band = (idx < m) | (idx >= n - m)
        shape = [1] * dens.ndim
        shape[ax] = n
        inner &= ~band.reshape(shape)
    return float(dens[~inner].sum() * cell)


@dataclass
class DetectionRun:
    distribution: ArrivalDistribution
    times: np.ndarray  # snapshot times
    snapshots: list  # LatticeState per recorded time
    norm_loss: np.ndarray  # 1 - ||psi||^2 at every step
    integrated_rate: np.ndarray  # int_0^t p at every step
    max_edge_mass: float

    @property
    def final(self) -> LatticeState:
        return self.snapshots[-1]


def run_detection(
    state0: LatticeState,
    profile: DetectorProfile,
    t_end: float,
    record_stride: int = 100,
    kinetic: float = 0.25,
    mask=None,
) -> DetectionRun:
    """Evolve to ``t_end`` recording ``P(t) = 1 - ||psi_t||^2`` and ``p(t) = <psi_t, Lambda psi_t>``.

    ``P`` in the returned distribution is the norm loss itself; ``P_inf`` is its
    final value. Warns with :class:`DomainEscapeWarning` when more than 1e-3 of
    probability sits in the outer 1/16 of the grid at a recorded time. An
    optional ``mask`` (see :func:`edge_absorber`) damps the boundary band; its
    loss then also enters the norm, so leave it off when ``P`` matters.
    """
    if abs(state0.norm_sq - 1.0) > 1e-6:
        raise ValueError(f"initial state must have unit norm, got {state0.norm_sq:.8f}")
    prop = SplitStepPropagator(state0, profile, kinetic, mask)
    nsteps = int(round((t_end - state0.time) / state0.dt))
    psi = state0.field.copy()
    times = state0.time + state0.dt * np.arange(nsteps + 1)
    rates = np.empty(nsteps + 1)
    norms = np.empty(nsteps + 1)
    rates[0] = prop.rate(psi)
    norms[0] = prop.norm_sq(psi)
    snaps = [state0]
    edge = _edge_mass(psi, prop.cell)
    for k in range(1, nsteps + 1):
        psi = prop.advance(psi)
        rates[k] = prop.rate(psi)
        norms[k] = prop.norm_sq(psi)
        if k % record_stride == 0 or k == nsteps:
            snaps.append(LatticeState(psi.copy(), state0.dx, state0.dt, float(times[k]), state0.origin, float(norms[k])))
            edge = max(edge, _edge_mass(psi, prop.cell))
    if edge > ESCAPE_TOL:
        warnings.warn(f"{edge:.2e} of probability reached the grid boundary band", DomainEscapeWarning, stacklevel=2)
    loss = norms[0] - norms
    P = np.maximum.accumulate(np.clip(loss, 0.0, None))
    dist = ArrivalDistribution(tau=times - state0.time, p=clip_density(rates), P_cum=P, P_inf=float(P[-1]))
    integ = cumulative_trapezoid(rates, times, initial=0.0)
    return DetectionRun(dist, np.array([s.time for s in snaps]), snaps, loss, integ, edge)


@dataclass
class ShadowReport:
    axial_x: np.ndarray
    axial_difference: np.ndarray  # |psi_mon|^2 - |psi_free|^2 on the beam axis
    transverse_y: np.ndarray
    transverse_monitored: np.ndarray
    transverse_free: np.ndarray
    probe_x: float
    shadow_depth: float  # free minus monitored density at the probe point, >= 0 in a shadow
    local_maximum: bool  # strict transverse maximum on the axis at probe_x
    max_abs_difference: float
    axial_peak_x: Optional[float] = None  # strict maximum of the monitored axial density behind the detector

    @property
    def axial_local_maximum(self) -> bool:
        return self.axial_peak_x is not None

    @property
    def shadowed(self) -> bool:
        return self.shadow_depth > 0


def shadow_profile(snapshots, free_snapshots, detector_center, probe_x: Optional[float] = None) -> ShadowReport:
    """Compare monitored and free evolutions at the last recorded time.

    The beam runs along the first axis. ``probe_x`` defaults to the centroid of
    the free density along that axis, i.e. where the packet would be without the
    detector. The local-maximum flag tests whether the monitored density on the
    transverse line through the probe has a strict local maximum at the
    detector's transverse coordinate; ``axial_peak_x`` locates the largest
    strict maximum of the monitored density along the axis downstream of the
    detector centre.
    """
    mon = snapshots[-1] if isinstance(snapshots, (list, tuple)) else snapshots
    free = free_snapshots[-1] if isinstance(free_snapshots, (list, tuple)) else free_snapshots
    if mon.field.shape != free.field.shape or mon.dx != free.dx or abs(mon.time - free.time) > 1e-12:
        raise ValueError("snapshots must share grid and time")
    axes = mon.axes
    x = axes[0]
    rho_m, rho_f = mon.density, free.density
    diff = rho_m - rho_f
    if mon.field.ndim == 1:
        iy = None
        axial = diff
        y = np.zeros(1)
        tm = tf = np.zeros(1)
    else:
        y = axes[1]
        iy = int(np.argmin(np.abs(y - detector_center[1])))
        axial = diff[:, iy]
    if probe_x is None:
        marg = rho_f.sum(axis=tuple(range(1, rho_f.ndim)))
        probe_x = float(np.sum(x * marg) / np.sum(marg))
    ix = int(np.argmin(np.abs(x - probe_x)))
    if iy is None:
        depth = float(rho_f[ix] - rho_m[ix])
        local_max = False
    else:
        tm, tf = rho_m[ix, :], rho_f[ix, :]
        depth = float(tf[iy] - tm[iy])
        local_max = bool(tm[iy] > tm[iy - 1] and tm[iy] > tm[iy + 1])
    line = rho_m if iy is None else rho_m[:, iy]
    inner = np.arange(1, x.size - 1)
    peaks = inner[(line[inner] > line[inner - 1]) & (line[inner] > line[inner + 1]) & (x[inner] > detector_center[0])]
    peak_x = float(x[peaks[np.argmax(line[peaks])]]) if peaks.size else None
    return ShadowReport(x, axial, y, tm, tf, float(x[ix]), depth, local_max, float(np.max(np.abs(diff))), peak_x)


def edge_absorber(state: LatticeState, strength: float, band: float = EDGE_FRACTION) -> np.ndarray:
    """Quadratic ramp ``strength * s^2`` over the outer ``band`` fraction of each axis (off by default)."""
    out = np.zeros(state.field.shape)
    for ax, n in enumerate(state.field.shape):
        m = max(1, int(n * band))
        idx = np.arange(n)
        depth = np.clip(np.maximum(m - idx, idx - (n - 1 - m)) / m, 0.0, 1.0)
        shape = [1] * state.field.ndim
        shape[ax] = n
        out = np.maximum(out, (strength * depth**2).reshape(shape))
    return out


def richardson(coarse: ArrivalDistribution, fine: ArrivalDistribution, ratio: float = 2.0, order: float = 1.0) -> np.ndarray:
    """Extrapolated density on the fine time grid from two runs with ``dx`` and ``dx / ratio``."""
    pc = np.interp(fine.tau, coarse.tau, coarse.p)
    f = ratio**order
    return (f * fine.p - pc) / (f - 1.0)


def point_counter_run(xi0: float, v: float, alpha: float, dx: float, t_end: float, length: float = 32.0, xi_a: float = 0.0, record_stride: int = 10**9) -> DetectionRun:
    """1D lattice version of a delta counter ``alpha delta(xi - xi_a)``.

    The delta is a box of width ``dx`` with height ``alpha / dx`` and the
    packet is the unit-width dimensionless Gaussian.
    """
    n = int(round(length / dx))
    n += n % 2
    st = gaussian_packet_field(make_state(n, dx), (xi0,), (v,))
    prof = DetectorProfile(alpha, PointApprox((xi_a,), dx))
    return run_detection(st, prof, t_end, record_stride)


# ---------------------------------------------------------------- 2D shadow


@dataclass(frozen=True)
class ShadowConfig:
    """2D Gaussian packet crossing a Gaussian detector centred at the origin.

    The beam runs along the first axis; ``width`` is the packet width per axis
    (``exp(-(s/w)^2)`` in amplitude).
    """

    n: int = 256
    length: float = 24.0
    x0: float = -6.0
    v: float = 4.0
    width: tuple = (1.5, 3.0)
    sigma: float = 0.6
    lambda0: float = 10.0
    t_end: float = 2.75
    dt: Optional[float] = None
    record_stride: int = 200
    calibrated: bool = False
    note: str = ""

    @property
    def dx(self) -> float:
        return self.length / self.n

    def initial_state(self) -> LatticeState:
        st = make_state(self.n, self.dx, self.dt, ndim=2)
        return gaussian_packet_field(st, (self.x0, 0.0), (self.v, 0.0), tuple(self.width))

    def profile(self, lambda0: Optional[float] = None) -> DetectorProfile:
        lam = self.lambda0 if lambda0 is None else lambda0
        return DetectorProfile(lam, GaussianShape((0.0, 0.0), self.sigma))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["width"] = list(self.width)
        return d


@dataclass
class ShadowResult:
    config: ShadowConfig
    run: DetectionRun
    free: DetectionRun
    report: ShadowReport

    @property
    def P_inf(self) -> float:
        return self.run.distribution.P_inf


def run_shadow(cfg: ShadowConfig) -> ShadowResult:
    """Monitored and free evolutions with the same grid, and their comparison."""
    st = cfg.initial_state()
    mon = run_detection(st, cfg.profile(), cfg.t_end, cfg.record_stride)
    free = run_detection(st, cfg.profile(0.0), cfg.t_end, cfg.record_stride)
    return ShadowResult(cfg, mon, free, shadow_profile(mon.snapshots, free.snapshots, (0.0, 0.0)))


def calibrate_shadow(base: ShadowConfig, target: float = 0.55, bracket=(1.0, 50.0), xtol: float = 1e-2) -> ShadowConfig:
    """Solve ``P_inf(lambda0) = target`` at fixed ``sigma`` by Brent's method.

    ``P_inf`` grows monotonically with ``lambda0`` over the bracket. The result
    is flagged as calibrated.
    """
    st = base.initial_state()

    def miss(lam):
        return run_detection(st, base.profile(lam), base.t_end, 10**9).distribution.P_inf - target

    lam = brentq(miss, *bracket, xtol=xtol)
    return replace(base, lambda0=round(float(lam), 4), calibrated=True)


def load_shadow_config(path: Union[str, Path, None] = None) -> ShadowConfig:
    """Read a shadow config from JSON; defaults to the shipped calibrated one."""
    if path is None:
        path = Path(__file__).with_name("data") / "shadow_calibrated.json"
    d = json.loads(Path(path).read_text())
    d.pop("comment", None)
    if "width" in d:
        d["width"] = tuple(d["width"])
    return ShadowConfig(**d)


# ---------------------------------------------------------------- snapshot I/O

_HEADER_KEYS = ("shape", "dx", "dt", "time", "norm_sq", "origin")


def atomic_write(path: Union[str, Path], data: bytes) -> None:
    """Write through a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_snapshot(path, state: LatticeState, extra: Optional[dict] = None) -> None:
    """Text header line (JSON) followed by row-major little-endian float64 (re, im) pairs."""
    head = {
        "format": "qarrival-snapshot/1",
        "shape": list(state.field.shape),
        "dx": state.dx,
        "dt": state.dt,
        "time": state.time,
        "norm_sq": state.norm_sq,
        "origin": list(state.origin),
    }
    if extra:
        head.update(extra)
    body = np.ascontiguousarray(state.field, dtype="<c16").tobytes(order="C")
    atomic_write(path, (json.dumps(head) + "\n").encode() + body)


def read_snapshot(path) -> LatticeState:
    raw = Path(path).read_bytes()
    cut = raw.index(b"\n")
    head = json.loads(raw[:cut].decode())
    missing = [k for k in _HEADER_KEYS if k not in head]
    if missing:
        raise ValueError(f"snapshot header lacks {missing}")
    shape = tuple(head["shape"])
    field_ = np.frombuffer(raw[cut + 1:], dtype="<c16")
    if field_.size != int(np.prod(shape)):
        raise ValueError("snapshot body size does not match header shape")
    return LatticeState(field_.reshape(shape).copy(), head["dx"], head["dt"], head["time"], tuple(head["origin"]), head["norm_sq"])


def write_axial_csv(path, report: ShadowReport, header_lines: Sequence[str] = ()) -> None:
    """Axial difference ``x, |psi_mon|^2 - |psi_free|^2``; ``#`` lines carry metadata."""
    lines = [f"# {h}" for h in header_lines]
    lines.append("x,difference")
    lines += [f"{x:.10g},{d:.10g}" for x, d in zip(report.axial_x, report.axial_difference)]
    atomic_write(path, ("\n".join(lines) + "\n").encode())


def read_axial_csv(path):
    rows = [ln for ln in Path(path).read_text().splitlines() if ln and not ln.startswith("#")]
    body = np.array([r.split(",") for r in rows[1:]], dtype=float).reshape(-1, 2)
    return body[:, 0], body[:, 1]
