"""Exception types raised across the package."""


class SpliceError(Exception):
    """Base class for all errors raised by this package."""


class SpliceIndexError(SpliceError, IndexError):
    """A splice action violates the bounds of its canvas or neighbor."""


class NoSuchNeighbor(SpliceError, IndexError):
    pass


class EmptyTarget(SpliceError, ValueError):
    pass


class Unparseable(SpliceError):
    """Some target token occurs in no neighbor sequence."""


class InternalInconsistency(SpliceError):
    """An extracted derivation does not replay to its target."""


class LimitExceeded(SpliceError, ValueError):
    pass


class CorpusTooSmall(SpliceError, ValueError):
    pass


class ZeroNorm(SpliceError, ValueError):
    pass


class DimensionMismatch(SpliceError, ValueError):
    pass


class AlreadyPadded(SpliceError, ValueError):
    pass


class EmptyCorpus(SpliceError, ValueError):
    pass


class _KeyLookup(SpliceError, KeyError):
    # KeyError would quote the message
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class UnknownExample(_KeyLookup):
    pass


class MissingPolicy(_KeyLookup):
    pass


class SchemaError(SpliceError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
