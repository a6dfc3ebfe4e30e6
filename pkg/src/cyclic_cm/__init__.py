"""Numerical toolkit for Calogero-Moser spaces of the cyclic quiver."""

__version__ = "0.1.0"

from .config import DEFAULT, Tolerances
from .coords import canonicalize, r_function, recover_spectral, s_function, theta_closed
from .curves import CurvePolys, curve_polys
from .dynamics import FlowSpec, evolve, positions
from .kernel import DensePoly
from .model import (
    Coupling,
    QModelPoint,
    Quadruple,
    SpectralPoint,
    SpinFraming,
    build_dual,
    build_qmodel,
    derived_constants,
    moment_residual,
)

__all__ = [
    "DEFAULT",
    "Tolerances",
    "DensePoly",
    "Coupling",
    "SpectralPoint",
    "SpinFraming",
    "QModelPoint",
    "Quadruple",
    "derived_constants",
    "build_dual",
    "build_qmodel",
    "moment_residual",
    "r_function",
    "s_function",
    "theta_closed",
    "recover_spectral",
    "canonicalize",
    "FlowSpec",
    "evolve",
    "positions",
    "CurvePolys",
    "curve_polys",
]
