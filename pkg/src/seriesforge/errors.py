"""Exception hierarchy shared by all seriesforge modules."""


class SeriesForgeError(Exception):
    """Base class for every error raised by this package."""


class ModeError(SeriesForgeError):
    """Arithmetic modes were mixed within one computation run."""


class MissingOracle(SeriesForgeError):
    """A tail-bound oracle was required but none is available."""


class ExhaustedSet(SeriesForgeError):
    """An enumeration ran past the end of a finite index set or series."""


class NotPcc(SeriesForgeError):
    """The series lacks a potentially-conditionally-convergent certificate."""


class NotConditionallyConvergentOnA(SeriesForgeError):
    """The sub-series on the constraint set is not certified conditionally convergent."""


class NonCcSource(SeriesForgeError):
    """The series is not certified conditionally convergent."""


class StageBudgetExceeded(SeriesForgeError):
    """A rearrangement stage consumed more terms than its budget allows.

    ``partial`` holds the result built from the stages that completed.
    """

    def __init__(self, message, max_terms=None, stage=None, partial=None):
        super().__init__(message)
        self.max_terms = max_terms
        self.stage = stage
        self.partial = partial


class BlockBudgetExceeded(SeriesForgeError):
    """A sparse-support block exceeded its term budget."""

    def __init__(self, message, block=None, partial=None):
        super().__init__(message)
        self.block = block
        self.partial = partial


class InsufficientDomain(SeriesForgeError):
    """A permutation prefix cannot be extended far enough."""


class InvalidQuotientMap(SeriesForgeError):
    """Fibers do not form a partition of an initial segment into consecutive runs."""


class EmptyResult(SeriesForgeError):
    """An operation needing at least one checkpoint received none."""


class NonMonotoneSelector(SeriesForgeError):
    """A subsequence selector was not strictly increasing."""


class EmptyInput(SeriesForgeError):
    """An operation needing a nonempty collection received an empty one."""
