"""Exception types shared across the toolkit."""


class PavetexError(Exception):
    """Base class for all toolkit errors."""


class InvalidImage(PavetexError):
    """Frame is empty or not an 8-bit image."""


class PatchTooLarge(PavetexError):
    """Requested patch side exceeds an image dimension."""


class InvalidQuantization(PavetexError):
    """Quantization level count outside [2, 256]."""


class DegenerateInput(PavetexError):
    """Input too small for the requested window/offset geometry."""


class InsufficientData(PavetexError):
    """Not enough samples (or missing classes) for the requested fit."""


class DegenerateTraining(PavetexError):
    """Training set contains a single class."""


class InvalidInput(PavetexError):
    """Input shape or value violates an operation contract."""


class ManifestError(PavetexError):
    """Malformed manifest or annotation file."""

    def __init__(self, message, row=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row
