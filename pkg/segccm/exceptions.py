class SegccmError(Exception):
    """
    Base class of every error raised by segccm
    """


class ArgumentError(SegccmError, ValueError):
    """
    Raised if an argument is out of range, has the wrong dimension
    or contains non-finite values
    """


class UnknownSystemError(SegccmError, KeyError):
    """
    Raised if a catalogue identifier is not known
    """

    def __init__(self, name, available):
        self.name = name
        self.available = sorted(available)
        super().__init__(
            "Unknown system '%s' (available: %s)"
            % (name, ", ".join(self.available))
        )

    def __str__(self):
        # KeyError would repr() the message
        return self.args[0]


class DivergenceError(SegccmError):
    """
    Raised if an integrated state leaves the finite-overflow guard
    """

    def __init__(self, message, step):
        super().__init__(message)
        self.step = step


class SeriesTooShortError(ArgumentError):
    """
    Raised if a series holds fewer samples than an operation requires
    """

    def __init__(self, message, required):
        super().__init__(message)
        self.required = required


class DegenerateInputError(ArgumentError):
    """
    Raised if data is constant or all points coincide
    """


class SegmentTooSmallError(SegccmError):
    """
    Raised if a segment of a symmetric manifold is smaller than the
    minimum library
    """

    def __init__(self, message, size, required):
        super().__init__(message)
        self.size = size
        self.required = required


class UnsupportedSymmetryError(SegccmError):
    """
    Raised if an operation needs an order-two symmetry the system lacks
    """


class NumericalError(SegccmError):
    """
    Raised if a Lie derivative overflows
    """

    def __init__(self, message, order):
        super().__init__(message)
        self.order = order


class BenchRowError(SegccmError):
    """
    Raised if a bench row fails; names the row
    """

    def __init__(self, message, row_id):
        super().__init__(message)
        self.row_id = row_id
