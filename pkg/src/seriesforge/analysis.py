"""Index-set densities, sub-series restriction, sparse conditionally convergent
supports and the center of distances."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import mpmath

from .errors import BlockBudgetExceeded, EmptyInput, NonCcSource
from .indexsets import ALL, BLOCKS, COMPLEMENT, RESIDUES, IndexSet
from .series import (
    ABS_DIVERGENT,
    ABS_TAIL,
    ALTERNATING,
    FAILS,
    HOLDS,
    MONOTONE,
    NULL,
    Mode,
    PccReport,
    SeriesSource,
    term,
    zero,
)


def natural_density_prefix(A: IndexSet, N: int) -> Fraction:
    """|A ∩ [1, N]| / N, exactly."""
    if N < 1:
        raise ValueError("N must be >= 1")
    return Fraction(A.count_upto(N), N)


# ---------------------------------------------------------------------------
# restriction
# ---------------------------------------------------------------------------


def _is_residue_like(A: IndexSet) -> bool:
    if A.kind == RESIDUES:
        return A.size != 0
    if A.kind == COMPLEMENT:
        simple = A._simple
        return simple is not None and simple.kind == RESIDUES and simple.size != 0
    return False


def restrict(source: SeriesSource, A: IndexSet) -> SeriesSource:
    """The series b_i = a_{A.enumerate(i)}.

    Finite sets give finite-length series (no zero padding).  Certificates are
    carried over only where the restriction provably preserves them.
    """
    if A.kind == ALL:
        return source
    name = f"{source.name}|A"
    mode = source.mode

    def rule(i):
        return term(source, A.enumerate(i))

    size = A.size
    if size is not None:
        return _restrict_finite(source, A, rule, size, name)

    traits = {t for t in (MONOTONE, NULL) if source.has(t)}
    if source.has(ALTERNATING) and A.parity_alternates():
        traits.add(ALTERNATING)
    # a nonincreasing-magnitude series keeps absolute divergence on any residue
    # class: each class collects at least every mod-th term of the tail.
    if source.has(ABS_DIVERGENT, MONOTONE) and _is_residue_like(A):
        traits.add(ABS_DIVERGENT)
    tail = None
    if source.has(ABS_TAIL) and source.tail is not None:
        traits.add(ABS_TAIL)

        def tail(i):
            return source.tail(A.enumerate(i) if i >= 1 else 0)
    elif {ALTERNATING, MONOTONE, NULL} <= traits:
        def tail(i):
            return abs(rule(i + 1))
    cert = None
    if {ALTERNATING, MONOTONE, NULL, ABS_DIVERGENT} <= traits:
        cert = PccReport(HOLDS, HOLDS, HOLDS)
    return SeriesSource(
        rule,
        mode=mode,
        name=name,
        tail=tail,
        traits=frozenset(traits),
        certificate=cert,
        mass=_restricted_mass(source, A),
    )


def _restrict_finite(source, A, rule, size, name):
    z = zero(source.mode)
    suffix: list = []

    def tail(m):
        # lazily built: sizes can be astronomically large for sparse supports
        if not suffix:
            acc = z
            vals = [acc]
            for i in range(size, 0, -1):
                acc = acc + abs(rule(i))
                vals.append(acc)
            suffix.extend(reversed(vals))
        return suffix[m] if m < size else z

    traits = {t for t in (MONOTONE, NULL) if source.has(t)} | {ABS_TAIL}
    return SeriesSource(
        rule,
        mode=source.mode,
        name=name,
        tail=tail,
        length=size,
        traits=frozenset(traits),
        certificate=PccReport(FAILS, FAILS, HOLDS),
        mass=_restricted_mass(source, A),
    )


def _restricted_mass(source, A):
    if source.mass is None or A.kind != BLOCKS:
        return None
    blocks = A.block_list()

    def mass(i):
        if i <= 0:
            return mpmath.mpf(0), mpmath.mpf(0)
        top = A.enumerate(i)
        plus = minus = mpmath.mpf(0)
        for lo, hi in blocks:
            if lo > top:
                break
            p1, m1 = source.mass(min(hi, top))
            p0, m0 = source.mass(lo - 1)
            plus += p1 - p0
            minus += m1 - m0
        return plus, minus

    return mass


# ---------------------------------------------------------------------------
# sparse conditionally convergent support
# ---------------------------------------------------------------------------


@dataclass
class SparseSupportPlan:
    """Block schedule for a density-zero support.

    Block j collects positive terms summing to at least ``s_j`` and negative
    terms (in absolute value) summing to at least ``s_j``; it starts at an index
    no smaller than ``separation * j * (end of block j-1)``.
    """

    block_sum: Callable[[int], Fraction] = field(default=lambda j: Fraction(1, j))
    separation: Fraction = Fraction(4)
    term_budget: int = 10**6
    explicit_limit: int = 4096
    blocks_built: list = field(default_factory=list)


@dataclass
class BlockRecord:
    j: int
    start: int
    end: int
    target: Fraction
    pos_first: int
    pos_last: int
    neg_first: int
    neg_last: int
    pos_sum: object  # Fraction, or mpmath value for far-out blocks
    neg_sum: object
    pos_last_term: object
    neg_last_term: object
    exact: bool
    density: Fraction = Fraction(0)

    @property
    def net(self):
        return self.pos_sum - self.neg_sum

    def to_dict(self) -> dict:
        def fmt(v):
            if isinstance(v, Fraction):
                return f"{v.numerator}/{v.denominator}"
            return mpmath.nstr(v, 30)

        return {
            "block": self.j,
            "interval": [self.start, self.end],
            "positive": [self.pos_first, self.pos_last],
            "negative": [self.neg_first, self.neg_last],
            "target": fmt(self.target),
            "pos_sum": fmt(self.pos_sum),
            "neg_sum": fmt(self.neg_sum),
            "net": fmt(self.net),
            "exact": self.exact,
            "density": fmt(self.density),
            "density_float": float(self.density),
        }


@dataclass
class SparseSupport:
    index_set: IndexSet
    blocks: list
    plan: SparseSupportPlan
    evidence: str = "EMPIRICAL"

    @property
    def horizon(self) -> int:
        return self.blocks[-1].end if self.blocks else 0

    def densities(self) -> list:
        return [b.density for b in self.blocks]

    def to_dict(self) -> dict:
        return {
            "density_evidence": self.evidence,
            "horizon": self.horizon,
            "size": self.index_set.size,
            "set": self.index_set.to_json(),
            "blocks": [b.to_dict() for b in self.blocks],
        }


def sparse_conditional_support(source: SeriesSource, plan: Optional[SparseSupportPlan] = None,
                               blocks: int = 30, assume_cc: bool = False) -> SparseSupport:
    """Greedy block construction of a sparse support carrying both divergent
    sign parts of a conditionally convergent series."""
    plan = plan or SparseSupportPlan()
    if blocks < 1:
        raise ValueError("need at least one block")
    if not assume_cc and source.conditionally_convergent is not True:
        raise NonCcSource(f"{source.name} is not certified conditionally convergent")
    built: list = []
    runs: list = []
    end = 0
    count = 0
    for j in range(1, blocks + 1):
        start = max(1, math.ceil(Fraction(plan.separation) * j * end))
        s_j = Fraction(plan.block_sum(j))
        try:
            rec, block_runs = _build_block(source, plan, j, start, s_j)
        except BlockBudgetExceeded as exc:
            exc.partial = SparseSupport(IndexSet.blocks(runs), built, plan)
            raise
        runs.extend(block_runs)
        count += sum(hi - lo + 1 for lo, hi in block_runs)
        end = rec.end
        rec.density = Fraction(count, end)
        built.append(rec)
    plan.blocks_built = built
    return SparseSupport(IndexSet.blocks(runs), built, plan)


def _build_block(source, plan, j, start, s_j):
    bulk = source.mass is not None and source.has(ALTERNATING)
    if not bulk or start <= plan.explicit_limit:
        try:
            return _explicit_block(source, j, start, s_j, plan.term_budget)
        except _TooLong:
            if not bulk:
                raise BlockBudgetExceeded(
                    f"block {j} needs more than {plan.term_budget} terms", block=j) from None
    return _bulk_block(source, plan, j, start, s_j)


class _TooLong(Exception):
    pass


def _explicit_block(source, j, start, s_j, limit):
    mode = source.mode
    target = s_j if mode is Mode.EXACT else float(s_j)
    pos = neg = zero(mode)
    pos_idx: list = []
    neg_idx: list = []
    n = start
    while pos < target or neg < target:
        if n - start >= limit:
            raise _TooLong
        a = term(source, n)
        if a > 0 and pos < target:
            pos += a
            pos_idx.append(n)
        elif a < 0 and neg < target:
            neg -= a
            neg_idx.append(n)
        n += 1
    rec = BlockRecord(
        j, start, max(pos_idx[-1], neg_idx[-1]), s_j,
        pos_idx[0], pos_idx[-1], neg_idx[0], neg_idx[-1],
        pos, neg, term(source, pos_idx[-1]), -term(source, neg_idx[-1]),
        exact=mode is Mode.EXACT,
    )
    return rec, _runs(sorted(pos_idx + neg_idx))


def _runs(indices) -> list:
    out = []
    for n in indices:
        if out and out[-1][1] == n - 1:
            out[-1][1] = n
        else:
            out.append([n, n])
    return [tuple(r) for r in out]


def _first_crossing(mass_fn, start, target):
    """Smallest P >= start with mass_fn(P) - mass_fn(start - 1) >= target."""
    base = mass_fn(start - 1)

    def reached(p):
        return mass_fn(p) - base >= target

    if reached(start):
        return start
    lo, step = start, 1
    while not reached(start + step):
        lo = start + step
        step *= 2
    hi = start + step
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if reached(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _bulk_block(source, plan, j, start, s_j):
    # Closed-form sign-part masses.  Working precision grows with the index
    # size so one far-out term (~1/index) is still resolved at the crossing.
    first = term(source, start)
    pos_first, neg_first = (start, start + 1) if first > 0 else (start + 1, start)
    pos_mass = lambda n: source.mass(n)[0]  # noqa: E731
    neg_mass = lambda n: source.mass(n)[1]  # noqa: E731
    extra = 40
    while True:
        digits = 2 * len(str(start)) + extra
        with mpmath.workdps(digits):
            tgt = mpmath.mpf(s_j.numerator) / s_j.denominator
            P = _first_crossing(pos_mass, start, tgt)
            Q = _first_crossing(neg_mass, start, tgt)
            pos_sum = pos_mass(P) - pos_mass(start - 1)
            neg_sum = neg_mass(Q) - neg_mass(start - 1)
            a_P, a_Q = abs(term(source, P)), abs(term(source, Q))
            eps = mpmath.mpf(10) ** (-(digits - 2 * len(str(max(P, Q))) - 10))
            resolved = all(
                x - tgt > eps and tgt - (x - mpmath.mpf(t.numerator) / t.denominator) > eps
                for x, t in ((pos_sum, Fraction(a_P)), (neg_sum, Fraction(a_Q)))
            )
        if resolved:
            break
        extra += 40
        if extra > 400:
            raise BlockBudgetExceeded(f"block {j}: crossing not resolvable", block=j)
    lo_common, hi_end = min(P, Q), max(P, Q)
    ragged = range(lo_common + 1 + (hi_end - lo_common + 1) % 2, hi_end + 1, 2)
    if len(ragged) > plan.term_budget:
        raise BlockBudgetExceeded(f"block {j}: ragged block end too long", block=j)
    runs = [(start, lo_common)] + [(n, n) for n in ragged]
    rec = BlockRecord(
        j, start, hi_end, s_j, pos_first, P, neg_first, Q,
        pos_sum, neg_sum, a_P, a_Q, exact=False,
    )
    return rec, _merge_runs(runs)


def _merge_runs(runs):
    out = []
    for lo, hi in runs:
        if out and out[-1][1] + 1 >= lo:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return out


# ---------------------------------------------------------------------------
# center of distances
# ---------------------------------------------------------------------------


def center_of_distances(X) -> set:
    """{α >= 0 : every x in X has some y in X with |x - y| = α}, exactly."""
    pts = sorted({Fraction(x) for x in X})
    if not pts:
        raise EmptyInput("center of distances of an empty set")
    members = set(pts)
    candidates = {abs(x - y) for x in pts for y in pts}
    return {
        alpha
        for alpha in candidates
        if all((x + alpha) in members or (x - alpha) in members for x in pts)
    }
