class CaptureError(Exception):
    """Base class for capture failures."""


class CaptureConfigError(CaptureError):
    """Invalid condition or perturbation configuration."""


class GenerationError(CaptureError):
    """The model failed to produce the required number of tokens."""
