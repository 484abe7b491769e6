"""Exception hierarchy shared by all frobdens modules."""


class FrobDensError(Exception):
    """Base class for library errors."""


class BadInput(FrobDensError):
    """Malformed or inconsistent user input (CLI exit code 2)."""


# group engine
class SizeCapExceeded(BadInput):
    pass


class MalformedGenerator(BadInput):
    pass


class ElementNotInGroup(BadInput):
    pass


class NotNormal(BadInput):
    pass


class TargetMismatch(BadInput):
    pass


class GroupMismatch(BadInput):
    pass


class NotHomomorphism(BadInput):
    pass


# field backends
class Ramified(FrobDensError):
    pass


class NotSquarefreeModP(Ramified):
    pass


class DegreeMismatch(BadInput):
    pass


class NotFullSymmetric(BadInput):
    pass


# prime stream
class BoundTooLarge(BadInput):
    pass


# density core
class ClassNotInFiber(BadInput):
    pass


class OutOfRange(FrobDensError):
    pass


class MissingDensity(BadInput):
    pass


class NotPredictable(FrobDensError):
    """The set expression is not reducible to fiber classes of the scenario."""


class HypothesisViolated(FrobDensError):
    pass


# estimator
class SBelowAbscissa(BadInput):
    pass


class EmptyDenominator(FrobDensError):
    pass


class InvariantBreach(FrobDensError):
    """An internal consistency check failed (CLI exit code 4)."""
