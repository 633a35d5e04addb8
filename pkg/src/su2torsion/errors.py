"""Exception types shared across the package.

Numerical failure modes get their own classes so callers (and the CLI exit
code mapping) can tell input problems from breakdowns of the numerics.
"""


class Su2TorsionError(Exception):
    """Base class for all package errors."""


# ---- input / model errors -------------------------------------------------

class ParseError(Su2TorsionError):
    """Malformed word, group-ring expression, or model file."""


class FreeRankNotOne(Su2TorsionError):
    """Abelianization has free rank != 1, so there is no canonical t."""


class ChainMapViolation(Su2TorsionError):
    """A boundary or inclusion identity failed; message names the cell."""


class HomologyMismatch(Su2TorsionError):
    """Integral homology of a model part disagrees with its declaration."""


class AmbientNotZHS(Su2TorsionError):
    """Model does not claim an integral homology sphere ambient space."""


# ---- linear algebra / torsion errors --------------------------------------

class DimensionMismatch(Su2TorsionError):
    """Chain complex data with inconsistent shapes."""


class DegenerateBasis(Su2TorsionError):
    """A base change matrix inside the torsion product is singular."""


class NotAcyclic(Su2TorsionError):
    """Twisted complex has homology where none is allowed."""


class NoSymmetricForm(Su2TorsionError):
    """No unit multiple of the polynomial is palindromic."""


class SingularDenominator(Su2TorsionError):
    """det(evaluated generator - 1) vanishes identically."""


class CentralElement(Su2TorsionError):
    """Axis extraction attempted on +-identity."""


# ---- representation space errors -------------------------------------------

class NoConvergence(Su2TorsionError):
    """Newton corrector failed to reach tolerance."""


class ReducibleLimit(Su2TorsionError):
    """Iteration collapsed onto the reducible locus."""


class PathLost(Su2TorsionError):
    """Continuation step fell below the minimum step size."""


class Bifurcation(Su2TorsionError):
    """Rank drop along the path: more than one branch direction."""


class NotRegular(Su2TorsionError):
    """Twisted cohomology dimensions differ from (0, 1, 1)."""


class NonRegularSample(NotRegular):
    """A traced sample fed to metrization is not a regular curve point."""


# ---- volume form / symmetry errors -----------------------------------------

class ZeroClass(Su2TorsionError):
    """Tangent vector projects to zero in first cohomology."""


class DegenerateRestriction(Su2TorsionError):
    """Boundary restriction pairing degenerated; no reference class."""


class CentralMuImage(Su2TorsionError):
    """Automorphism sends the meridian to a central image."""


class InconsistentSign(Su2TorsionError):
    """Sign data disagrees across samples of one component."""


class ComponentMismatch(Su2TorsionError):
    """Symmetry check asked to compare components of different size."""
