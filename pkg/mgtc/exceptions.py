"""
Exception classes used in :mod:`mgtc`.
"""


class MgtcError(Exception):
    """
    Base exception for all mgtc exceptions.
    """
    pass


class InvalidParameterError(MgtcError):
    """
    Exception raised when an invalid parameter is provided.
    """
    pass


class DimensionError(MgtcError):
    """
    Exception raised when tensor shapes do not line up.
    """
    pass


class NumericalError(MgtcError):
    """
    Exception raised when an operation produces a NaN or an infinity.
    """
    pass


class TapeError(MgtcError):
    """
    Exception raised when the gradient tape is used out of order, e.g. \
            ``backward`` before any forward operation was recorded.
    """
    pass


class CheckpointFormatError(MgtcError):
    """
    Exception raised when a checkpoint file cannot be read back, or does \
            not fit the model it is loaded into.
    """
    pass


class ConfigMismatchError(MgtcError):
    """
    Exception raised when a checkpoint and a vocabulary or model \
            configuration do not belong together.
    """
    pass


class CorpusValidationError(MgtcError):
    """
    Exception raised when a corpus file violates the data model.
    """
    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        if line is not None:
            message = "line %d: %s" % (line, message)
        super().__init__(message)


class ParseError(MgtcError):
    """
    Exception raised in strict mode when a label stream cannot be \
            assembled into a process structure tree.
    """
    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics or []
        super().__init__(message)
