"""Exception hierarchy.

Three broad families map onto CLI exit codes: ConfigError (2),
DataError (3) and TrainingError (4). Everything derives from
StackgenError so callers can catch the whole library with one clause.
"""


class StackgenError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(StackgenError):
    """Invalid experiment configuration (unknown keys, bad values)."""


class DataError(StackgenError):
    """A dataset could not be loaded or is structurally unusable."""


class TrainingError(StackgenError):
    """Model fitting failed."""


# --- datamodel ---------------------------------------------------------

class BadFoldCount(ConfigError):
    """Fewer than two folds requested."""


class TooFewSamplesPerClass(DataError):
    """Some class has fewer members than there are folds."""


class DegenerateSplit(DataError):
    """A train/test split would leave a side empty or single-class."""


# --- ingest ------------------------------------------------------------

class EmptyFile(DataError):
    """The CSV holds a header but no data rows (or nothing at all)."""


class RaggedRow(DataError):
    """A CSV row's cell count differs from the header's."""


class MissingTargetColumn(DataError):
    """The configured target column is not present in the file."""


class NonBinaryTarget(DataError):
    """The target column does not have exactly two distinct values."""


# --- learners ----------------------------------------------------------

class BadHyperparameter(ConfigError):
    """A learner hyperparameter is out of its valid range."""


class SingleClassTraining(TrainingError):
    """fit() was handed labels containing only one class."""


class DimensionMismatch(TrainingError):
    """Matrix/vector shapes do not line up."""


class NonFiniteInput(TrainingError):
    """NaN or infinity found in an input matrix."""


class WrongModelKind(TrainingError):
    """An algorithm-specific operation was called on another model kind."""


class FoldFitFailure(TrainingError):
    """A learner fit failed during stacking.

    ``fold`` is the fold index for phase-1 failures, or the strings
    "full" / "meta" for the full-data refit and meta-learner steps.
    """

    def __init__(self, learner: str, fold, cause: Exception):
        self.learner = learner
        self.fold = fold
        super().__init__(f"fit of learner {learner!r} failed on fold {fold}: {cause}")


# --- metrics -----------------------------------------------------------

class LengthMismatch(StackgenError):
    """Two paired vectors have different lengths."""


class BadBeta(StackgenError):
    """F-beta called with beta <= 0."""


class SingleClassTruth(StackgenError):
    """ROC analysis needs both classes present in the truth vector."""


# --- cli ---------------------------------------------------------------

class IncompatibleRuns(ConfigError):
    """Run directories passed to compare do not share a metric set."""
