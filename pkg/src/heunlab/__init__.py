"""Numerical lab for finite-gap solutions of the elliptic Heun equation and Painleve VI families.

Modules
-------
elliptic
    Weierstrass functions on the lattice ``Z + tau Z``, elliptic logarithm,
    ``tau`` from the modular cross-ratio.
quadrature
    Safe polyline paths and adaptive Gauss--Kronrod along them, including
    square-root branch tracking.
spectral
    Product function ``Xi``, constant ``Q``, integral representation of the
    eigenfunction, Hermite--Krichever data and genus-two reductions.
painleve
    Explicit Painleve VI families, apparency, frame maps and residuals.
modular
    Closed-form ``tau``-derivatives and finite-difference oracles.
monodromy
    Path continuation of linear ODEs and monodromy matrices.
"""
__version__ = "0.1.0"

from .elliptic import Lattice, lattice_from_tau, wp, wp_prime, zeta, sigma, elliptic_log, tau_from_t  # noqa: F401
from .errors import (HeunLabError, DomainError, PrecisionError, NumericError,  # noqa: F401
                     PoleProximityError, DegeneracyError, DegenerateEnergyError,
                     InconsistencyError, PathError, ContinuityError, IntegrationError)
