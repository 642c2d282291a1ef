"""Exception types shared across the toolkit.

Every data/config problem raises a subclass of :class:`StsSelectError`, which
the CLI maps to exit code 2. Anything else escaping is a bug.
"""


class StsSelectError(Exception):
    """Base class for all toolkit errors."""


# --- tabular ---------------------------------------------------------------

class MalformedCsvError(StsSelectError):
    """CSV structure problem: row length mismatch, unknown header, no header."""


class UnparseableCellError(StsSelectError):
    """A cell value failed to parse under its declared column kind."""


class MissingParticipantKeyError(StsSelectError):
    """The participant key column is absent or contains nulls."""


class MissingLabelColumnError(StsSelectError):
    """A label-rule column is absent or has the wrong kind."""


class NonBinaryAnswerError(StsSelectError):
    """A yes/no label column contains a value outside {Yes, No}."""


class EmptyColumnError(StsSelectError):
    """A column has zero rows."""


class PlanMismatchError(StsSelectError):
    """Dataset columns do not match the fitted preprocessing plan."""


# --- embeddings ------------------------------------------------------------

class BadHeaderError(StsSelectError):
    """Embedding store header line is missing or malformed."""


class DimMismatchError(StsSelectError):
    """A vector's length disagrees with the declared dimension."""


class DuplicateNameError(StsSelectError):
    """The same name appears twice in an embedding store."""


class ZeroVectorError(StsSelectError):
    """An embedding store entry is the all-zero vector."""


class CountMismatchError(StsSelectError):
    """Word-vector file body disagrees with its declared entry count."""


class EmptyNameError(StsSelectError):
    """A name tokenizes to nothing."""


class LengthMismatchError(StsSelectError):
    """Two vectors that must have equal length do not."""


class UnknownNameError(StsSelectError):
    """A name is not present in the embedding store."""


# --- scoring ---------------------------------------------------------------

class TooFewSamplesError(StsSelectError):
    """Not enough samples for the requested neighbor count."""


class DegenerateLabelsError(StsSelectError):
    """Labels contain a single usable class."""


class BadRangeError(StsSelectError):
    """Invalid grid range."""


# --- selection -------------------------------------------------------------

class NTooLargeError(StsSelectError):
    """Requested more features than exist."""


class TooFewFeaturesError(StsSelectError):
    """The operation needs at least two features."""


class MissingRedundancyError(StsSelectError):
    """mRMR requires a redundancy matrix but the score set has none."""


# --- model evaluation ------------------------------------------------------

class SingleClassTrainingError(StsSelectError):
    """Training data contains a single class."""


class EmptyTrainingError(StsSelectError):
    """Training data is empty."""


class SingleClassError(StsSelectError):
    """Metric requires both classes present."""


class NoPositivesError(StsSelectError):
    """Metric requires at least one positive example."""


class TooFewPerClassError(StsSelectError):
    """A class is too small for the requested split/folding."""


# --- synthetic benchmark ---------------------------------------------------

class BadSpecError(StsSelectError):
    """Invalid synthetic benchmark specification."""


# --- CLI -------------------------------------------------------------------

class UsageError(StsSelectError):
    """Bad command line; maps to exit code 1."""
