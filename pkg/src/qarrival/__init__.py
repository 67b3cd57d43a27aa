"""Arrival-time distributions of quantum particles at absorbing detectors.

Modules
-------
specfun     Faddeeva function, boundary square-root branches, Gaussian integrals
dynamics    Gaussian packets and free propagators (time and Laplace domain)
arrival     Laplace-domain amplitudes for delta counters and the ultra-relativistic law
inversion   Boundary sampling, Fourier inversion, Parseval efficiency
events      First-event sampling and goodness-of-fit tests
lattice     Split-step grid simulation of absorbing detectors, shadow analysis
studies     Coupling optimisation, efficiency surfaces, shape comparisons
"""
__version__ = "0.1.0"

from .arrival import CounterArray, DeltaCounter, counter_amplitudes, single_counter_amplitude, ultra_arrival
from .dynamics import DimensionlessPacket, GaussianPacket, from_dimensionless, to_dimensionless
from .inversion import ArrivalDistribution, invert_to_time, parseval_efficiency, sample_spectrum
from .specfun import faddeeva_w, gaussian_integral
from .studies import arrival_distribution, optimize_alpha

__all__ = [
    "__version__",
    "CounterArray",
    "DeltaCounter",
    "counter_amplitudes",
    "single_counter_amplitude",
    "ultra_arrival",
    "DimensionlessPacket",
    "GaussianPacket",
    "from_dimensionless",
    "to_dimensionless",
    "ArrivalDistribution",
    "invert_to_time",
    "parseval_efficiency",
    "sample_spectrum",
    "faddeeva_w",
    "gaussian_integral",
    "arrival_distribution",
    "optimize_alpha",
]
