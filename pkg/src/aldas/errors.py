"""Exception types shared across the toolkit.

Every error the CLI can surface maps to one class here, so exit handling
can print a single machine-parseable category name.
"""


class AldasError(Exception):
    """Base class; `category` is the stable machine-readable name."""

    @property
    def category(self) -> str:
        return type(self).__name__


# audio-io
class MalformedWav(AldasError):
    pass


class UnsupportedEncoding(AldasError):
    pass


class EmptyAudio(AldasError):
    pass


# dsp
class ClipTooShort(AldasError):
    pass


# embeddings
class DimensionMismatch(AldasError):
    pass


class BadMagic(AldasError):
    pass


class UnsupportedVersion(AldasError):
    pass


class TruncatedFile(AldasError):
    pass


class DuplicateUttId(AldasError):
    pass


class IoFailure(AldasError):
    pass


# tensor-nn
class ShapeMismatch(AldasError):
    pass


class DegenerateData(AldasError):
    pass


# imbalance
class MinorityTooSmall(AldasError):
    pass


# labeler
class MissingLabels(AldasError):
    pass


# fusion
class ParseError(AldasError):
    pass


class MissingUtterances(AldasError):
    pass


class UtteranceSetMismatch(AldasError):
    pass


# metrics
class SingleClass(AldasError):
    pass


# manifest
class HeaderMismatch(AldasError):
    pass


class BadEnum(AldasError):
    pass


class LabelContradiction(AldasError):
    pass


class StratumTooSmall(AldasError):
    pass


class TooFewSamples(AldasError):
    pass


# cli
class UsageError(AldasError):
    pass
