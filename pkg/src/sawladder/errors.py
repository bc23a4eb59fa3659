"""Exception types raised by sawladder."""


class SawLadderError(ValueError):
    """Base class for all domain errors; the CLI maps these to exit status 1."""


class SingularNetworkError(SawLadderError):
    pass


class NoResonanceError(SawLadderError):
    pass


class SpanTooNarrowError(SawLadderError):
    pass


class BandNotBracketedError(SawLadderError):
    pass


class TouchstoneError(SawLadderError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
