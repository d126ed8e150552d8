"""Exception hierarchy for ballotbeat.

Every error carries a short machine-parsable ``code`` that the CLI prints
as a single line before exiting nonzero.
"""


class BallotbeatError(Exception):
    """Base class for all package errors."""

    code = "E_RUNTIME"


class ShapeError(BallotbeatError, ValueError):
    """Tensor or vector dimensions do not line up."""

    code = "E_SHAPE"


class ParameterError(BallotbeatError, ValueError):
    """A numeric argument is outside its documented range."""

    code = "E_PARAM"


class ConfigError(BallotbeatError, ValueError):
    """A model or pipeline configuration violates its invariants."""

    code = "E_CONFIG"


class EmptyInputError(BallotbeatError, ValueError):
    """An operation received an input with nothing to work on."""

    code = "E_EMPTY"


class NumericalError(BallotbeatError, ArithmeticError):
    """A non-finite value showed up where the contract forbids one."""

    code = "E_NUMERIC"


class MalformedRowError(BallotbeatError, ValueError):
    """A one-hot row has more than one bit set."""

    code = "E_ROW"


class VocabLookupError(BallotbeatError, KeyError):
    """A term is not present in the vocabulary."""

    code = "E_VOCAB"


class UndefinedSimilarityError(BallotbeatError, ValueError):
    """Cosine similarity is undefined for a zero vector."""

    code = "E_SIMILARITY"


class UndefinedRhoError(BallotbeatError, ValueError):
    """Election significance is undefined: the term matched zero tweets.

    Deliberately distinct from a significance of 0, which means the term
    matched tweets but none of them contained a seed term.
    """

    code = "E_RHO"


class CorpusError(BallotbeatError, ValueError):
    """A corpus file violates its schema (for example, duplicate ids)."""

    code = "E_CORPUS"


class CorpusFormatError(CorpusError):
    """Too many malformed lines to trust the file at all."""

    code = "E_FORMAT"


class DatasetError(BallotbeatError, ValueError):
    """A labeled dataset cannot be used as requested."""

    code = "E_DATASET"


class ModelIOError(BallotbeatError):
    """Base class for model container read/write failures."""

    code = "E_MODEL"


class ModelFormatError(ModelIOError):
    """The file is not a ballotbeat model container."""

    code = "E_MODEL_FORMAT"


class ModelVersionError(ModelIOError):
    """The container was written by an incompatible format version."""

    code = "E_MODEL_VERSION"


class ModelShapeError(ModelIOError):
    """Manifest tensor shapes disagree with the payload layout."""

    code = "E_MODEL_SHAPE"


class ModelTruncatedError(ModelIOError):
    """The payload is shorter than the manifest promises."""

    code = "E_MODEL_TRUNCATED"


class UsageError(BallotbeatError, ValueError):
    """Bad command-line arguments or configuration values (exit code 2)."""

    code = "E_USAGE"
