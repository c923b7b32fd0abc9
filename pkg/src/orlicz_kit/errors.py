"""Exception hierarchy.

The CLI maps these onto exit codes: ConfigError -> 3, HypothesisViolation -> 2,
everything else derived from OrliczKitError -> 1.
"""


class OrliczKitError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(OrliczKitError):
    """Malformed or inconsistent descriptor / configuration input."""


class DomainError(OrliczKitError):
    """Argument outside an operation's mathematical domain."""


class SpaceMismatchError(DomainError):
    """Two objects do not live on the same (or a compatible refined) space."""


class UnsupportedRuleError(OrliczKitError):
    """A symbolic family rule combination has no closed form; never guessed."""


class NotInSpaceError(OrliczKitError):
    """The modular is infinite for every scaling: f is not in the space."""


class UnboundedConjugateError(OrliczKitError):
    """The Young conjugate is +infinity at the requested point."""


class HypothesisViolation(OrliczKitError):
    """A theorem hypothesis required by the requested check does not hold."""


class ComputationError(OrliczKitError):
    """A numerical routine failed to converge or produced nonsense."""
