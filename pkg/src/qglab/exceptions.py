"""Exception types raised by qglab."""


class QGLabError(Exception):
    """Base class for all qglab errors."""


class LinearlyDependentError(QGLabError, ValueError):
    """A generating tuple is (numerically) linearly dependent."""


class NotHermitianError(QGLabError, ValueError):
    pass


class NotUnitaryError(QGLabError, ValueError):
    pass


class ParameterOutOfRangeError(QGLabError, ValueError):
    pass


class ExhaustedRetriesError(QGLabError, RuntimeError):
    """A rejection sampler hit its retry budget."""


class NotReflexiveError(QGLabError, ValueError):
    pass


class NotSymmetricError(QGLabError, ValueError):
    pass


class UnsupportedPatternError(QGLabError, ValueError):
    """The support pattern of a subspace could not be decided numerically."""


class NotRegularError(QGLabError, ValueError):
    pass


class BadPartitionError(QGLabError, ValueError):
    pass


class InvalidOperatorSystemError(QGLabError, ValueError):
    """A deserialized operator system violates its invariants."""
