"""Exception hierarchy.

``InputError`` subclasses describe malformed or out-of-contract input (CLI exit
code 2).  ``PropertyViolation`` subclasses describe a well-formed input that
fails a structural property the algorithm needs (CLI exit code 1).
"""


class CycleCutError(Exception):
    """Base class for all errors raised by this package."""


class InputError(CycleCutError):
    pass


class PropertyViolation(CycleCutError):
    pass


# multigraph
class SelfLoop(InputError):
    pass


class EndpointOutOfRange(InputError):
    pass


class OddDegree(PropertyViolation):
    pass


class Disconnected(PropertyViolation):
    pass


# instance
class ParseError(InputError):
    pass


class HalfIntegralityViolation(InputError):
    pass


class DegreeViolation(InputError):
    pass


class SubtourViolation(InputError):
    pass


class DegenerateInstance(InputError):
    pass


class BlueprintInvalid(InputError):
    pass


class TooLarge(InputError):
    pass


class MetricUndefined(InputError):
    pass


# cuts / embedding
class NotFourRegular(InputError):
    pass


class NotFourConnected(InputError):
    pass


class NotCycleCut(PropertyViolation):
    pass


class NotApplicable(CycleCutError):
    pass


class FrameMismatch(PropertyViolation):
    pass


# chain / sampler
class ParityViolation(PropertyViolation):
    pass


class ParamOutOfRange(InputError):
    pass


class NotInRegion(PropertyViolation):
    pass


class RegionViolation(PropertyViolation):
    pass


class DegreeCutPresent(PropertyViolation):
    pass
