"""Numerics for complex spectra of perturbed Landau Hamiltonians.

The package computes the discrete spectrum of a magnetic Schrodinger
operator perturbed by a complex potential along two independent routes
(dense eigensolve and determinant zero scan), probes the conformal and
resolvent machinery the error bounds rest on, and evaluates the weighted
eigenvalue-sum functionals with their bounding constants.
"""

__version__ = "0.1.0"

from .landau import BasisSpec, MagneticConfig, landau_level
from .potentials import (
    Potential,
    make_gaussian_complex,
    make_power_decay,
    make_synthetic_diagonal,
)
from .zeros import ComplexRectangle, ZeroRecord

__all__ = [
    "__version__",
    "BasisSpec",
    "MagneticConfig",
    "landau_level",
    "Potential",
    "make_gaussian_complex",
    "make_power_decay",
    "make_synthetic_diagonal",
    "ComplexRectangle",
    "ZeroRecord",
]
