"""Keldysh-field-theory tools for free-electron-laser gain, threshold and saturation."""

from .beam import (
    BeamParameters,
    GaussianScales,
    OccupationProfile,
    PhysicalBeamInputs,
    cold_profile,
    gaussian_profile,
    rho_from_physical,
    uniform_profile,
)
from .dispersion import gamma_r, pierce_cubic, solve_threshold
from .errors import ConfigurationError, DomainError, FelError, NumericalError
from .langevin import LangevinConfig, simulate, stationary_stats
from .lgk import CanonicalLaserParams, LGKParameters, extract_lgk, to_canonical
from .selfenergy import Broadening
from .specfun import dawson, pv_hilbert

__version__ = "0.1.0"
