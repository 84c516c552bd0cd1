"""Numerical checks for mass estimates of positive closed (1,1)-currents near
generating real submanifolds of C^n."""
from .currents import Divisor, ParametrizedVariety, SmoothPotential, divisor_mass, kappa
from .forms import HermitianForm, positivity_margin, wedge_coefficient
from .manifold import DefiningSystem, WeightedPointCloud, distance
from .mass_profile import MassProfile, almost_monotone_report, sigma_profile
from .polynomial import Polynomial

__version__ = "0.1.0"

__all__ = [
    "DefiningSystem", "Divisor", "HermitianForm", "MassProfile", "ParametrizedVariety",
    "Polynomial", "SmoothPotential", "WeightedPointCloud", "almost_monotone_report",
    "distance", "divisor_mass", "kappa", "positivity_margin", "sigma_profile",
    "wedge_coefficient",
]
