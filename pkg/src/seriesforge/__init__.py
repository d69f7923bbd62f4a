"""Construction and independent verification of series rearrangements."""

from .analysis import (
    SparseSupport,
    SparseSupportPlan,
    center_of_distances,
    natural_density_prefix,
    restrict,
    sparse_conditional_support,
)
from .errors import (
    BlockBudgetExceeded,
    EmptyInput,
    EmptyResult,
    ExhaustedSet,
    InsufficientDomain,
    InvalidQuotientMap,
    MissingOracle,
    ModeError,
    NonCcSource,
    NonMonotoneSelector,
    NotConditionallyConvergentOnA,
    NotPcc,
    SeriesForgeError,
    StageBudgetExceeded,
)
from .hypernumber import (
    HyperRep,
    QuotientMap,
    analytical_sum,
    brst_integer_obstruction,
    c0_equiv_monitor,
    checkpoints_to_quotient,
    j0,
    j1,
    quotient_series,
    subnumber_extract,
)
from .indexsets import IndexSet
from .rearrange import (
    PermutationPrefix,
    RearrangementResult,
    TargetSpec,
    compose,
    constrained_rearrange,
    convergentize,
    parse_target,
    rearrange_pcc,
    riemann_rearrange,
)
from .series import (
    Empirical,
    Mode,
    PccReport,
    SeriesSource,
    classify_pcc,
    parse_series,
    partial_sums,
    sign_split,
    tail_bound,
    topological_sum,
)
from .verify import VerificationReport, load_run, save_run, verify

__version__ = "0.1.0"

__all__ = [
    "BlockBudgetExceeded",
    "Empirical",
    "EmptyInput",
    "EmptyResult",
    "ExhaustedSet",
    "HyperRep",
    "IndexSet",
    "InsufficientDomain",
    "InvalidQuotientMap",
    "MissingOracle",
    "Mode",
    "ModeError",
    "NonCcSource",
    "NonMonotoneSelector",
    "NotConditionallyConvergentOnA",
    "NotPcc",
    "PccReport",
    "PermutationPrefix",
    "QuotientMap",
    "RearrangementResult",
    "SeriesForgeError",
    "SeriesSource",
    "SparseSupport",
    "SparseSupportPlan",
    "StageBudgetExceeded",
    "TargetSpec",
    "VerificationReport",
    "analytical_sum",
    "brst_integer_obstruction",
    "c0_equiv_monitor",
    "center_of_distances",
    "checkpoints_to_quotient",
    "classify_pcc",
    "compose",
    "constrained_rearrange",
    "convergentize",
    "j0",
    "j1",
    "load_run",
    "natural_density_prefix",
    "parse_series",
    "parse_target",
    "partial_sums",
    "quotient_series",
    "rearrange_pcc",
    "restrict",
    "riemann_rearrange",
    "save_run",
    "sign_split",
    "sparse_conditional_support",
    "subnumber_extract",
    "tail_bound",
    "topological_sum",
    "verify",
]
