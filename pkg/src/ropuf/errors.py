"""Exception types shared across the toolkit."""


class ConfigurationError(ValueError):
    """Invalid model or campaign parameters."""


class ModelRangeError(ValueError):
    """A query fell outside the range where the timing model is valid."""


class TraceExhaustedError(IndexError):
    """A waveform was queried beyond its generated toggle events."""


class DatasetError(ValueError):
    """A campaign dataset is incomplete or inconsistent."""


class DecodeFailure(Exception):
    """The received word is not correctable (more than t errors)."""
