"""Exporter error types."""


class ExportError(Exception):
    """Base class; `category` names the machine-readable failure kind."""

    @property
    def category(self) -> str:
        return type(self).__name__


class ModelUnavailable(ExportError):
    """The embedding-model weights could not be found or loaded."""


class DecodeFailure(ExportError):
    """An audio file in the manifest could not be decoded."""

    def __init__(self, utt_id: str, reason: str):
        super().__init__(f"{utt_id}: {reason}")
        self.utt_id = utt_id


class ManifestError(ExportError):
    """The manifest CSV is malformed."""
