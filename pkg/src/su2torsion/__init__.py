"""Reidemeister torsion on SU(2) representation circles of knot exteriors.

The package traces the circle of irreducible SU(2) conjugacy classes of a
knot group from a bundled CW-pair model, computes the normalized torsion
polynomial and the torsion volume form along it, and verifies the symmetry
relations satisfied by the resulting torsion function (central involution,
peripheral outer automorphisms, translation matchings).
"""

from .cwmodel import CWPairModel, load_model, parse_model, validate_model
from .errors import Su2TorsionError
from .laurent import LaurentPoly, UnitClass, symmetrize
from .repspace import (RepPoint, TracedCircle, continue_circle,
                       find_irreducible_point, solve_near)
from .su2 import SU2, killing
from .symm import (FIGURE8_PHI1, FIGURE8_PHI2, OuterAutomorphism,
                   TorsionFunction, check_symmetry, delta_sign, iota,
                   metabelian_locus, torsion_function)
from .torsion import NormalizedTorsion, normalized_torsion, wada_invariant
from .volform import MetrizedCircle, compute_h_rho, metrize, tau_eval
from .words import GroupPresentation, Word, fox_derivative, parse_word

__version__ = "0.1.0"

__all__ = [
    "CWPairModel", "FIGURE8_PHI1", "FIGURE8_PHI2", "GroupPresentation",
    "LaurentPoly", "MetrizedCircle", "NormalizedTorsion", "OuterAutomorphism",
    "RepPoint", "SU2", "Su2TorsionError", "TorsionFunction", "TracedCircle",
    "UnitClass", "Word", "check_symmetry", "compute_h_rho", "continue_circle",
    "delta_sign", "find_irreducible_point", "fox_derivative", "iota",
    "killing", "load_model", "metabelian_locus", "metrize",
    "normalized_torsion", "parse_model", "parse_word", "solve_near",
    "symmetrize", "tau_eval", "torsion_function", "validate_model",
    "wada_invariant",
]
