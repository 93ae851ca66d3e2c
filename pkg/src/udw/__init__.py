"""Macroscopic Unruh-DeWitt detectors: detection spectra and second-order coherence."""

__version__ = "0.1.0"

from .errors import (
    UDWError, DomainError, RegimeError, InvariantError, ConvergenceError,
    IllConditionedError, DegeneratePoleError,
)
from .worldlines import (
    Event, Worldline, UniformAcceleration, Static, VariableAcceleration, SingleAxis,
    PairGeometry, interval_squared, light_delay, check_timelike,
)
from .smearing import f_sigma, g_sigma, ResolutionKernel
from .propagators import (
    vacuum_wightman, accelerated_pair_wightman, thermal_wightman, feynman, TwoPointKernel,
)
from .quadrature import QuadratureSpec, integrate_windowed, residue_sum, eta_series_term, smearing_correction
from .response import (
    TwoLevel, Tabulated, CallableAlpha, Constant, DetectorModel, Spectrum,
    response_general, stationary_response, thermal_static_response, planck_response,
    single_axis_response, intensity,
)
from .coherence import (
    AcceleratedSource, ThermalSource, CoherenceCurve, g2, g2_numeric, g_coefficient,
    g_coefficient_numeric, coherence_curve,
)
