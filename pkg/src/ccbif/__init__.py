"""Detection and classification of bifurcations of planar central configurations."""

__version__ = "0.1.0"

from . import bifurcation, families, nbody, spectral  # noqa: E402,F401
from .bifurcation import (BifurcationEvent, EulerRingElement,  # noqa: E402,F401
                          bifurcation_index, degree_at, map_2d, scan_1d)
from .families import (FamilyPoint, rosette_point,  # noqa: E402,F401
                       solve_balancing_masses, two_squares_point)
from .spectral import SpectralReport, spectral_report  # noqa: E402,F401
