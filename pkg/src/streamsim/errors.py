"""Exception types shared across the package."""


class StreamSimError(Exception):
    """Base class for all streamsim errors."""


class ModelContractError(StreamSimError):
    """An incremental model was driven outside its contract (e.g. a forced
    prefix longer than the tokens the model can produce)."""


class ProtocolError(StreamSimError):
    """Wire-protocol failure while talking to an external model."""

    def __init__(self, code: str, message: str = ""):
        super().__init__(f"{code}: {message}" if message else code)
        self.code = code
        self.message = message


class MetricUndefinedError(StreamSimError):
    """A metric was requested on degenerate input (no tokens, no lines,
    zero-duration source)."""


class SubtitleValidationError(StreamSimError):
    """Tagged text or subtitle blocks violate the two-line block format."""


class SrtParseError(StreamSimError):
    """Malformed SRT input; carries the 1-based offending line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no
