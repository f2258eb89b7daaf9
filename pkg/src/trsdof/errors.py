"""Exception hierarchy for domain errors.

Every error carries an optional 1-based location so command-line
diagnostics can name the failing entry, e.g. ``QualityOutOfRange at (2,1)``.
"""

from __future__ import annotations


class DofError(Exception):
    """Base class for all domain errors raised by this package."""

    def __init__(self, detail: str = "", location: tuple[int, ...] | None = None):
        self.detail = detail
        self.location = location
        super().__init__(self.diagnostic())

    def diagnostic(self) -> str:
        text = type(self).__name__
        if self.location is not None:
            text += " at (" + ",".join(str(i) for i in self.location) + ")"
        if self.detail:
            text += ": " + self.detail
        return text


class QualityOutOfRange(DofError):
    """A CSIT quality lies outside [0, 1]."""


class QualityOnAbsentLink(DofError):
    """A quality was supplied for a link whose connectivity bit is 0."""


class MissingDiagonal(DofError):
    """A direct link is marked absent."""


class MissingQuality(DofError):
    """A present interference link has no quality."""


class ExponentOutOfRange(DofError):
    """A power exponent lies outside [0, 1]."""


class InvalidOrder(DofError):
    """Cyclic parameters violate a <= b."""


class InvalidActiveSet(DofError):
    """An active set is empty or refers to unknown users."""


class NotFullyConnected(DofError):
    """An operation that needs every link present got a partial topology."""


class TooLarge(DofError):
    """An exhaustive search would exceed its size budget."""


class NotRealisticClass(DofError):
    """A topology or matrix is outside the three-transmitter {a, b} class."""


class SizeBound(DofError):
    """User count exceeds the configured subset-enumeration bound."""


class ClosedFormMismatch(DofError):
    """An LP optimum disagrees with a closed-form expression."""


class MalformedPacking(DofError):
    """A linear program is not in packing form."""


class PlanTopologyMismatch(DofError):
    """A transmission plan was built for a different topology."""


class InsufficientPoints(DofError):
    """Slope regression needs at least three SNR points."""


class DegenerateNullSpace(DofError):
    """The vectors to null leave no usable direction."""


class TopologyFormatError(DofError):
    """A topology document cannot be parsed."""
