"""Exception hierarchy.

Every data-level failure derives from :class:`InfodemicError`; the CLI maps
these to exit code 2 and prints the class name.
"""


class InfodemicError(Exception):
    """Base class for data errors raised by the analysis pipeline."""


class UnreadableStream(InfodemicError):
    pass


class TooManyMalformed(InfodemicError):
    def __init__(self, count, total=None, limit=None):
        self.count = count
        self.total = total
        self.limit = limit
        msg = f"{count} malformed record(s)"
        if total is not None:
            msg += f" out of {total}"
        if limit is not None:
            msg += f" exceeds limit {limit:.2%}"
        super().__init__(msg)


class EmptyResult(InfodemicError):
    pass


class EmptyActivity(InfodemicError):
    pass


class DegenerateNetwork(InfodemicError):
    pass


class DegenerateSeries(InfodemicError):
    pass


class AllMissing(InfodemicError):
    pass


class SeriesTooShort(InfodemicError):
    pass


class MissingValues(InfodemicError):
    pass


class DegenerateTarget(InfodemicError):
    pass


class InvalidParams(InfodemicError):
    pass


class Diverged(InfodemicError):
    pass


class MissingArtifact(InfodemicError):
    def __init__(self, name):
        self.name = name
        super().__init__(name)
