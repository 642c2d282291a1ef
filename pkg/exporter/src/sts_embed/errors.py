"""Exporter error types; the CLI maps them to exit code 2."""


class StsEmbedError(Exception):
    """Base class for exporter errors."""


class ModelLoadError(StsEmbedError):
    """The encoder model id/path could not be loaded."""


class EmptyNamesError(StsEmbedError):
    """The names file contains no names."""


class DuplicateNameError(StsEmbedError):
    """The same name appears twice after whitespace trimming."""


class ExportError(StsEmbedError):
    """The encoder produced an unusable vector (non-finite or all-zero)."""


class CorpusFormatError(StsEmbedError):
    """A pair-corpus line is not three tab-separated columns."""


class LabelOutOfRangeError(StsEmbedError):
    """A similarity label falls outside [0, 1] after rescaling."""


class FinetuneRegressionError(StsEmbedError):
    """Fine-tuning failed to beat the base model on the held-out split."""


class UsageError(StsEmbedError):
    """Bad command line; maps to exit code 1."""
