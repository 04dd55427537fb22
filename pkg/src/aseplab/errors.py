"""Exception taxonomy shared by all modules.

Every precondition failure raises a subclass of AsepLabError so callers can
distinguish contract violations from programming errors.
"""


class AsepLabError(Exception):
    """Base class for all package errors."""


class RateConstraintViolated(AsepLabError):
    """Jump rates outside the admissible region (need right > left >= 0, right - left = 1)."""


class WindowExcludesOrigin(AsepLabError):
    """Initial condition needs site 0 inside the window."""


class ProfileOutOfRange(AsepLabError):
    """A density profile produced a value outside [0, 1]."""


class ClockTooShort(AsepLabError):
    """Requested evolution time exceeds the clock window horizon."""


class WindowMismatch(AsepLabError):
    """Configuration window and clock window (or two coupled members) disagree."""


class StateSpaceTooLarge(AsepLabError):
    """Exact computation requested on a window too large to enumerate."""


class NonStochasticGenerator(AsepLabError):
    """Generator rows do not sum to zero within tolerance."""


class MissingTags(AsepLabError):
    """Trajectory lacks the tagging information needed for particle-tracking heights."""


class OutOfRegion(AsepLabError):
    """Site outside the validity region (or stored field range) was requested."""


class NotInitiallyOrdered(AsepLabError):
    """Coupled pair does not satisfy the required ordering at time zero."""


class PremiseViolatedAtTimeZero(AsepLabError):
    """Monotonicity premise (height shift or closeness) fails before evolution starts."""


class DominationBroken(AsepLabError):
    """Second-class decomposition requested for configurations without domination."""


class InadmissibleAlpha(AsepLabError):
    """Added-particle set is not an admissible N-particle addition at the tagged site."""


class ParameterOutOfRange(AsepLabError):
    """Profile parameters outside their documented domain."""


class JOutOfRange(AsepLabError):
    """Injection site index outside the injection interval."""


class DivergentParameter(AsepLabError):
    """Infinite product evaluated at parameters where it diverges."""


class TruncationTooLarge(AsepLabError):
    """Kernel truncation size too large for the quadrature to stay accurate."""


class TruncationUnsound(AsepLabError):
    """Gap probability requested beyond the stored kernel truncation."""
