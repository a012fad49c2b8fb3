"""Exception types raised on bad input data."""


class DataError(ValueError):
    """Input data cannot be tested as given."""


class DegenerateDataError(DataError):
    """A quadratic form is zero, so its logarithm is undefined.

    Raised instead of flooring the value, which would fabricate evidence.
    """

    def __init__(self, message: str, group: int | None = None, block: int | None = None):
        super().__init__(message)
        self.group = group
        self.block = block


class DataFormatError(DataError):
    """A data file could not be parsed into a numeric sample matrix."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        super().__init__(message)
        self.path = path
        self.line = line


class ReplicationError(RuntimeError):
    """A Monte Carlo replication failed; carries the replication index."""

    def __init__(self, message: str, replication: int):
        super().__init__(f"replication {replication}: {message}")
        self.replication = replication

    def __reduce__(self):
        message = str(self).split(": ", 1)[1]
        return (type(self), (message, self.replication))
