"""Exception hierarchy shared by all remask modules."""


class RemaskError(Exception):
    """Base class for every error raised by this package."""


class DatasetError(RemaskError):
    """Malformed or unusable input data."""


class DenoiserError(RemaskError):
    """Invalid denoiser usage: bad state, bad position, untrainable config."""


class MaskingError(RemaskError):
    """Invalid masking request."""


class SufficiencyError(RemaskError):
    """Invalid scoring request or unusable classifier training data."""


class EngineError(RemaskError):
    """Invalid generation or refinement request."""


class RemoteError(RemaskError):
    """Remote endpoint failure after retries, or a protocol violation."""


class MalformedVerdictError(RemoteError):
    """The judge endpoint answered, but no verdict line could be parsed."""

    def __init__(self, message: str, raw_response: str):
        super().__init__(message)
        self.raw_response = raw_response
