"""Exception hierarchy shared by all modules.

Every error carries its class name as the user-facing error name; the CLI
prints ``<Name>: <message>`` on stderr.
"""


class LallopError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


class InputError(LallopError):
    exit_code = 1


class ModelError(LallopError):
    exit_code = 2


# words
class InvalidCharacter(InputError):
    pass


class EmptyWord(InputError):
    pass


class ParseError(InputError):
    pass


class UnboundName(InputError):
    pass


# cancellation
class NotCyclicallyReduced(InputError):
    pass


class IsProperPower(InputError):
    pass


class NotInCommutatorSubgroup(InputError):
    pass


class InvalidScl(InputError):
    pass


# diagram
class DiagramError(InputError):
    pass


class EdgePairingError(DiagramError):
    pass


class LabelMismatch(DiagramError):
    def __init__(self, message, disk=None, position=None):
        super().__init__(message)
        self.disk = disk
        self.position = position


class ZeroDegreeDisk(DiagramError):
    pass


class DegreeOneVertex(DiagramError):
    pass


class ZeroTotalDegree(DiagramError):
    pass


class NotCancelling(DiagramError):
    pass


class NotReduced(DiagramError):
    pass


# pods
class InvalidPod(InputError):
    pass


class MixedBasis(InputError):
    pass


# ratlp
class NoNormalizablePoint(ModelError):
    pass


class NumericallyUnstable(ModelError):
    pass


# lallop_core
class NotRootFree(InputError):
    pass


class InternalModelError(ModelError):
    pass


class ResourceLimit(LallopError):
    exit_code = 3


# survey
class RejectionBudgetExceeded(ModelError):
    pass


class UsageError(InputError):
    pass
