"""Exception types raised across the package."""


class LowresLoopError(Exception):
    """Base class for every error this package raises on purpose."""


# -- corpus ------------------------------------------------------------

class MismatchedLineCount(LowresLoopError):
    def __init__(self, language: str, expected: int, got: int):
        super().__init__(
            f"language {language!r} has {got} lines, expected {expected}"
        )
        self.language = language
        self.expected = expected
        self.got = got


class EmptyCorpus(LowresLoopError):
    pass


class MalformedBookIndex(LowresLoopError):
    pass


class DuplicateLanguage(LowresLoopError):
    pass


class MalformedManifest(LowresLoopError):
    pass


class ReservedToken(LowresLoopError):
    pass


class SeedOutOfRange(LowresLoopError):
    pass


class DegenerateSeed(LowresLoopError):
    pass


class UnknownBook(LowresLoopError):
    pass


class UnknownLanguage(LowresLoopError):
    pass


# -- lexicon / entity handling -----------------------------------------

class DanglingPlaceholder(LowresLoopError):
    pass


class AlreadyLabeled(LowresLoopError):
    pass


# -- backend / alignment ------------------------------------------------

class EmptyTrainingSet(LowresLoopError):
    pass


class UntrainedModel(LowresLoopError):
    pass


class ModelFormatError(LowresLoopError):
    pass


class InsufficientLinks(LowresLoopError):
    pass


class NotEnoughLanguages(LowresLoopError):
    pass


class MissingLinguisticList(LowresLoopError):
    pass


# -- ensemble / evaluation ----------------------------------------------

class EmptyHypothesisSet(LowresLoopError):
    pass


class IndexGap(LowresLoopError):
    pass


class LengthMismatch(LowresLoopError):
    pass


class EmptyEvaluationSet(LowresLoopError):
    pass


class MisalignedDraft(LowresLoopError):
    pass


# -- loop / experiment ---------------------------------------------------

class SampleTooLarge(LowresLoopError):
    pass


class LoopComplete(LowresLoopError):
    pass


class BackendFailure(LowresLoopError):
    pass


class OverlapWithExisting(LowresLoopError):
    pass


class ProxyIsTarget(LowresLoopError):
    pass


class SpecInvalid(LowresLoopError):
    pass


class ConfigError(LowresLoopError):
    """Raised with every config problem collected, one per field path."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = list(problems)
