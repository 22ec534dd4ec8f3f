"""Exception hierarchy shared by every stage of the pipeline."""


class RetrievalError(Exception):
    """Base class for all errors raised by histretrieval."""


class MalformedImage(RetrievalError):
    pass


class PatchTooLarge(RetrievalError, ValueError):
    pass


class EmptyDataset(RetrievalError):
    pass


class DimensionMismatch(RetrievalError, ValueError):
    pass


class TooFewDescriptors(RetrievalError, ValueError):
    pass


class EmptyPatchSet(RetrievalError, ValueError):
    pass


class RankTooLarge(RetrievalError, ValueError):
    pass


class NonFiniteObjective(RetrievalError, FloatingPointError):
    pass


class KTooLarge(RetrievalError, ValueError):
    pass


class TooManyFolds(RetrievalError, ValueError):
    pass


class DegenerateLabels(RetrievalError, ValueError):
    pass


class BadConfig(RetrievalError, ValueError):
    pass


class ModelLoadError(RetrievalError):
    pass
