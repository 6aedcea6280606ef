"""Exception types shared across the package."""


class HolodiscError(Exception):
    """Base class for all errors raised by holodisc."""


# -- almost-complex calculus ------------------------------------------------

class NotAlmostComplex(HolodiscError):
    """A structure tensor fails J(z)^2 = -Id beyond tolerance."""


class SingularStructure(HolodiscError):
    """J_st + J(z) is singular; normalize coordinates before converting."""


class NormTooLarge(HolodiscError):
    """A complex matrix with operator norm >= 1 cannot encode a structure."""


class SingularTransform(HolodiscError):
    """The denominator matrix of a coordinate change is singular."""


class GradientUnavailable(HolodiscError):
    """Neither analytic nor finite-difference gradients could be formed."""


# -- disc operators ----------------------------------------------------------

class SingularityTooClose(HolodiscError):
    """An evaluation point sits inside the exclusion radius of a node."""


class GridTooCoarse(HolodiscError):
    """The grid does not support the requested stencil."""


class BadCutoff(HolodiscError):
    """A boundary cutoff violates its range or support constraints."""


# -- disc solver -------------------------------------------------------------

class NoContraction(HolodiscError):
    """Picard steps stopped contracting; the structure is too large."""


class MaxIterExceeded(HolodiscError):
    """The iteration budget was exhausted before reaching tolerance."""


class DirectionLost(HolodiscError):
    """Re-seeding failed to restore the prescribed center/tangent."""


class BoundaryMismatch(HolodiscError):
    """The edge-gluing condition stalled above tolerance."""


# -- wedges and families -----------------------------------------------------

class NotInWedge(HolodiscError):
    """A point lies outside the (shrunken) wedge."""


class InversionFailed(HolodiscError):
    """Parameter recovery for the evaluation map did not converge."""

    def __init__(self, message, best_residual=None):
        super().__init__(message)
        self.best_residual = best_residual


class DirectionNotInterior(HolodiscError):
    """A cone axis does not point into the wedge from its vertex."""


# -- boundary-limit harness --------------------------------------------------

class DiscExitsWedge(HolodiscError):
    """Interior disc nodes left the wedge."""


class PairOutsideDisc(HolodiscError):
    """A point pair is not contained in the declared sub-disc."""


class ApproachTangential(HolodiscError):
    """An approach sequence violates its non-tangential (Stolz) region."""


class NotTangent(HolodiscError):
    """Two curves are not tangent at their common endpoint."""


class TransversalMiss(HolodiscError):
    """A transversal disc failed to intersect a curve inside the disc."""


# -- CLI ----------------------------------------------------------------------

class ConfigError(HolodiscError):
    """A run configuration field is invalid; the message names the field."""


class InputParseError(HolodiscError):
    """An input file failed to parse."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            loc = f"line {line}" + (f", column {column}" if column is not None else "")
            message = f"{message} ({loc})"
        super().__init__(message)
        self.line = line
        self.column = column
