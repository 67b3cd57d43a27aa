import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad, trapezoid

from qarrival.dynamics import (
    DimensionlessPacket,
    FreeSchrodinger,
    GaussianPacket,
    UltraRelativistic,
    free_evolved_packet,
    free_kernel,
    free_laplace_kernel,
    from_dimensionless,
    packet_value,
    psi0_laplace_at,
    to_dimensionless,
    ultra_shift,
    w_pair,
)
from qarrival.specfun import boundary_sqrt_iz


def laplace_rotated(f, z, phi):
    """int_0^inf e^{-z tau} f(tau) d tau along the ray tau = s e^{-i phi}."""
    ray = np.exp(-1j * phi)
    g = lambda s: ray * np.exp(-z * ray * s) * f(ray * s)
    re = quad(lambda s: g(s).real, 0, np.inf, epsabs=1e-11, epsrel=1e-10, limit=500)[0]
    im = quad(lambda s: g(s).imag, 0, np.inf, epsabs=1e-11, epsrel=1e-10, limit=500)[0]
    return re + 1j * im


def evolved_complex(p, xi, tau):
    """Analytic continuation of the freely evolved packet to complex tau."""
    dx = xi - p.xi0
    expo = (1j * dx**2 + 2.0 * p.v * dx - p.v**2 * tau) / (tau - 1j)
    return (2 / np.pi) ** 0.25 / np.sqrt(1.0 + 1j * tau) * np.exp(expo)


def test_to_dimensionless_examples():
    assert to_dimensionless(GaussianPacket(0, 0, 1)) == DimensionlessPacket(0, 0)
    assert to_dimensionless(GaussianPacket(-8, 2, 1)) == DimensionlessPacket(-4, 4)


@given(st.floats(-50, 50), st.floats(-20, 20), st.floats(0.01, 10))
def test_unit_round_trip(x0, k, eta):
    p = GaussianPacket(x0, k, eta)
    q = from_dimensionless(to_dimensionless(p), eta)
    assert q.x0 == pytest.approx(x0, rel=1e-15, abs=1e-15)
    assert q.k == pytest.approx(k, rel=1e-15, abs=1e-15)


def test_unit_maps():
    p = GaussianPacket(0, 1, eta=0.5, mass=2.0, hbar=3.0)
    assert p.tau(1.0) == pytest.approx(3.0 / (2 * 2.0 * 0.25))
    assert p.alpha(4.0) == pytest.approx(2.0 * 0.5 * 4.0 / 3.0)


def test_invalid_packet():
    with pytest.raises(ValueError):
        GaussianPacket(0, 0, 0)
    with pytest.raises(ValueError):
        UltraRelativistic(0)


def test_physical_packet_normalised():
    p = GaussianPacket(1.0, 2.0, 0.7)
    val = quad(lambda x: abs(p(x)) ** 2, -20, 20, points=[1.0], epsabs=1e-13)[0]
    assert val == pytest.approx(1.0, abs=1e-10)


def test_packet_value_examples():
    p = DimensionlessPacket(-4, 4)
    assert packet_value(p, -4) == pytest.approx(0.8932438417380023, rel=1e-14)
    norm = quad(lambda x: abs(packet_value(p, x)) ** 2, -14, 6, epsabs=1e-13)[0]
    assert norm == pytest.approx(1.0, abs=1e-10)
    dphase = np.angle(packet_value(p, -3.0)) - np.angle(packet_value(p, -4.0))
    assert np.mod(dphase - 2 * p.v, 2 * np.pi) == pytest.approx(0.0, abs=1e-12)


def test_free_evolution_matches_kernel_quadrature():
    p = DimensionlessPacket(-1.0, 1.5)
    tau, xi = 0.7, 0.4
    f = lambda x: free_kernel(xi, x, tau) * packet_value(p, x)
    re = quad(lambda x: f(x).real, -9, 7, limit=400, epsabs=1e-12)[0]
    im = quad(lambda x: f(x).imag, -9, 7, limit=400, epsabs=1e-12)[0]
    assert abs(free_evolved_packet(p, xi, tau) - (re + 1j * im)) < 1e-9
    assert free_evolved_packet(p, xi, 0.0) == pytest.approx(packet_value(p, xi), rel=1e-14)


def test_free_evolution_conserves_norm():
    p = DimensionlessPacket(0.3, 2.0)
    x = np.linspace(-40, 40, 40001)
    for tau in (0.5, 3.0):
        rho = np.abs(free_evolved_packet(p, x, tau)) ** 2
        assert trapezoid(rho, x) == pytest.approx(1.0, abs=1e-8)


def test_laplace_kernel_examples():
    sch = FreeSchrodinger()
    assert free_laplace_kernel(sch, 0.3, 0.3, 1.0) == pytest.approx(np.exp(-1j * np.pi / 4), rel=1e-14)
    assert free_laplace_kernel(UltraRelativistic(2.5), 1.0, 1.0, 3 + 4j) == pytest.approx(0.4)
    # boundary z = 0+ + 4i: sqrt(iz) = 2i, sqrt(-iz) = 2
    val = free_laplace_kernel(sch, 1.0, 0.0, 4j)
    assert val == pytest.approx(np.exp(-4.0) / boundary_sqrt_iz(4.0), rel=1e-14)
    assert val == pytest.approx(-0.5j * np.exp(-4.0), rel=1e-14)


@pytest.mark.parametrize("z", [4j, 1.0 + 4j, 2.0])
def test_laplace_kernel_against_time_domain(z):
    f = lambda t: np.sqrt(1.0 / (1j * np.pi * t)) * np.exp(1j * 1.0 / t)
    ref = laplace_rotated(f, z, np.pi / 4)
    assert abs(free_laplace_kernel(FreeSchrodinger(), 1.0, 0.0, z) - ref) < 1e-8


def test_laplace_kernel_singular_at_origin():
    with pytest.raises(ZeroDivisionError):
        free_laplace_kernel(FreeSchrodinger(), 0.0, 1.0, 0.0)


def test_ultra_kernel_is_laplace_of_shift():
    # (K0(t) delta_{x'})(x) = delta(x - x' - c t): transform is exp(-(x-x')z/c)/c for x > x'
    c, z = 2.0, 1.5 + 3j
    assert free_laplace_kernel(UltraRelativistic(c), 3.0, 1.0, z) == pytest.approx(np.exp(-2.0 * z / c) / c)
    assert free_laplace_kernel(UltraRelativistic(c), 1.0, 3.0, z) == 0


@given(st.floats(0.01, 5), st.floats(-5, 5))
def test_laplace_kernel_decays_along_rays(re, im):
    z = complex(re, im)
    d = np.linspace(0, 5, 30)
    mod = np.abs(free_laplace_kernel(FreeSchrodinger(), d, 0.0, z))
    assert np.all(np.diff(mod) <= 1e-15)


@given(st.floats(-10, 10), st.floats(0.1, 5), st.floats(0, 3))
def test_ultra_shift(x0, c, t):
    p = GaussianPacket(x0, 1.0, 0.8)
    x = np.linspace(-10, 10, 41)
    assert np.allclose(ultra_shift(p, c, t)(x), p(x - c * t), atol=1e-12, rtol=0)


@pytest.mark.parametrize(
    "d,v,y",
    [(-4.0, 4.0, 5.0), (-4.0, 4.0, -3.0), (-4.0, 4.0, 40.0), (-2.0, 1.0, 2.0), (1.5, -2.0, -6.0), (0.0, 0.0, 1.0)],
)
def test_psi0_laplace_against_time_quadrature(d, v, y):
    p = DimensionlessPacket(d, v)
    z = 1j * y
    # rotate away from the branch point tau = i: downwards for y > 0, upwards for y < 0
    phi = np.pi / 4 if y > 0 else -np.pi / 4
    ref = laplace_rotated(lambda t: evolved_complex(p, 0.0, t), z, phi)
    assert abs(psi0_laplace_at(p, 0.0, z) - ref) < 1e-6


def test_psi0_laplace_at_real_z():
    p = DimensionlessPacket(-4.0, 4.0)
    f = lambda t: free_evolved_packet(p, 0.0, t)
    re = quad(lambda t: (np.exp(-t) * f(t)).real, 0, 60, limit=800, epsabs=1e-12)[0]
    im = quad(lambda t: (np.exp(-t) * f(t)).imag, 0, 60, limit=800, epsabs=1e-12)[0]
    assert abs(psi0_laplace_at(p, 0.0, 1.0) - (re + 1j * im)) < 1e-6


def test_psi0_laplace_symmetries():
    z = np.array([0.5j, -2j, 1 + 1j])
    assert np.allclose(psi0_laplace_at(DimensionlessPacket(2.0, 0), 0.0, z), psi0_laplace_at(DimensionlessPacket(-2.0, 0), 0.0, z), rtol=1e-13)
    # v = d = 0: the two w terms coincide
    pair = w_pair(DimensionlessPacket(0, 0), 0.0, z)
    from qarrival.specfun import faddeeva_w, sqrt_neg_iz

    assert np.allclose(pair, 2 * faddeeva_w(1j * sqrt_neg_iz(z)), rtol=1e-14)
    with pytest.raises(ZeroDivisionError):
        psi0_laplace_at(DimensionlessPacket(0, 0), 0.0, 0.0)
