"""Greedy rearrangement engines.

``riemann_rearrange``
    classical two-cursor greedy towards a target (constant, +-inf lowered
    to b_n = +-n, or a sequence).
``constrained_rearrange``
    permutation fixed off a set A whose checkpoint partial sums S_{k_n}
    track an arbitrary sequence b_n within 1/n.
``convergentize`` / ``compose`` / ``rearrange_pcc``
    the pipeline for potentially conditionally convergent input: first
    rearrange into a convergent series, then run the constrained engine
    with A = all indices and compose the two permutations.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Optional

from .analysis import restrict
from .errors import (
    ExhaustedSet,
    InsufficientDomain,
    MissingOracle,
    NotConditionallyConvergentOnA,
    NotPcc,
    StageBudgetExceeded,
)
from .indexsets import IndexSet
from .series import (
    DEFAULT_SLACK,
    HOLDS,
    NULL,
    Mode,
    SeriesSource,
    classify_pcc,
    coerce,
    format_scalar,
    parse_scalar,
    read_literals,
    smallest_index_below,
    term,
    zero,
)

DEFAULT_BUDGET = 10**7
DEFAULT_ORACLE_REACH = 10**5


def default_budget() -> int:
    env = os.environ.get("SERIESFORGE_BUDGET")
    return int(env) if env else DEFAULT_BUDGET


# ---------------------------------------------------------------------------
# permutation prefixes
# ---------------------------------------------------------------------------


class PermutationPrefix:
    """An injective map on positions 1..m, grown one position at a time.

    With a constraint set A, positions outside A must map to themselves and
    positions inside A must map into A.
    """

    def __init__(self, values=(), constraint: Optional[IndexSet] = None):
        self.constraint = constraint
        self._values: list = []
        self._image: set = set()
        for v in values:
            self.assign(v)

    @classmethod
    def identity(cls, m: int) -> "PermutationPrefix":
        return cls(range(1, m + 1))

    def __len__(self):
        return len(self._values)

    def __iter__(self):
        return iter(self._values)

    def __repr__(self):
        head = self._values[:8]
        more = ", ..." if len(self._values) > 8 else ""
        return f"PermutationPrefix({head}{more}, len={len(self)})"

    def __eq__(self, other):
        if isinstance(other, PermutationPrefix):
            return self._values == other._values
        return NotImplemented

    def extend_to(self, m: int) -> None:
        if m > len(self._values):
            raise InsufficientDomain(f"prefix has length {len(self)}, need {m}")

    def value(self, j: int) -> int:
        if j < 1:
            raise ValueError("positions start at 1")
        if j > len(self._values):
            self.extend_to(j)
        return self._values[j - 1]

    __call__ = value

    def assign(self, index: int) -> int:
        """Append ``index`` as the value at the next position; returns the position."""
        pos = len(self._values) + 1
        if index < 1:
            raise ValueError("indices start at 1")
        if index in self._image:
            raise ValueError(f"index {index} already in the image")
        A = self.constraint
        if A is not None:
            if A.member(pos):
                if not A.member(index):
                    raise ValueError(f"position {pos} in A mapped outside A")
            elif index != pos:
                raise ValueError(f"position {pos} outside A must be fixed")
        self._values.append(index)
        self._image.add(index)
        return pos

    @property
    def image(self) -> frozenset:
        return frozenset(self._image)

    def in_image(self, index: int) -> bool:
        return index in self._image

    def as_list(self) -> list:
        return list(self._values)

    def is_bijection_of_prefix(self) -> bool:
        m = len(self._values)
        return len(self._image) == m and (m == 0 or max(self._image) == m)


class _Cursor:
    """Smallest not-yet-used candidate index with a term of the wanted sign.

    ``sign`` is +1, -1, or 0 for "any sign, zero included".
    """

    __slots__ = ("source", "it", "sign", "used", "head")

    def __init__(self, source: SeriesSource, candidates: Iterator[int], sign: int, used: set):
        self.source = source
        self.it = candidates
        self.sign = sign
        self.used = used
        self.head = None

    def peek(self) -> tuple:
        head = self.head
        if head is not None and head[0] not in self.used:
            return head
        used, sign, src = self.used, self.sign, self.source
        for n in self.it:
            if n in used:
                continue
            a = term(src, n)
            if sign == 0 or (a > 0 if sign > 0 else a < 0):
                self.head = (n, a)
                return self.head
        raise ExhaustedSet(f"no further {'+' if sign > 0 else '-' if sign < 0 else ''}terms")

    def take(self) -> tuple:
        head = self.peek()
        self.head = None
        return head


# ---------------------------------------------------------------------------
# targets
# ---------------------------------------------------------------------------

CONST, PLUS_INF, MINUS_INF, SEQUENCE = "const", "plusinf", "minusinf", "sequence"


@dataclass(frozen=True)
class TargetSpec:
    kind: str
    value: Optional[Fraction] = None
    rule: Optional[Callable[[int], object]] = None
    spec: Optional[str] = None

    @classmethod
    def const(cls, b) -> "TargetSpec":
        return cls(CONST, value=b, spec=f"const:{format_scalar(b)}")

    @classmethod
    def plus_inf(cls) -> "TargetSpec":
        return cls(PLUS_INF, spec="plusinf")

    @classmethod
    def minus_inf(cls) -> "TargetSpec":
        return cls(MINUS_INF, spec="minusinf")

    @classmethod
    def sequence(cls, rule: Callable[[int], object], spec: Optional[str] = None) -> "TargetSpec":
        return cls(SEQUENCE, rule=rule, spec=spec)

    def at(self, n: int, mode: Mode):
        """b_n in the arithmetic of ``mode``; +-inf lowered to +-n."""
        if self.kind == CONST:
            return coerce(self.value, mode)
        if self.kind == PLUS_INF:
            return coerce(n, mode)
        if self.kind == MINUS_INF:
            return coerce(-n, mode)
        return coerce(self.rule(n), mode)


TARGET_BUILTINS = {
    "altsign01": lambda n: n % 2,
    "alternating": lambda n: 1 if n % 2 == 0 else -1,
    "zero": lambda n: 0,
}


def parse_target(text: str, mode: Mode = Mode.EXACT) -> TargetSpec:
    """``const:<rational>``, ``plusinf``, ``minusinf``, ``seq:<builtin>``, ``seq:file:<path>``."""
    if text == "plusinf":
        return TargetSpec.plus_inf()
    if text == "minusinf":
        return TargetSpec.minus_inf()
    kind, _, arg = text.partition(":")
    if kind == "const" and arg:
        return TargetSpec(CONST, value=parse_scalar(arg, mode), spec=text)
    if kind == "seq" and arg:
        if arg in TARGET_BUILTINS:
            return TargetSpec.sequence(TARGET_BUILTINS[arg], spec=text)
        path = arg[5:] if arg.startswith("file:") else arg
        vals = read_literals(path, mode)
        z = zero(mode)
        return TargetSpec.sequence(lambda n: vals[n - 1] if n <= len(vals) else z, spec=text)
    raise ValueError(f"unknown target spec {text!r}")


# ---------------------------------------------------------------------------
# results
# ---------------------------------------------------------------------------


@dataclass
class RearrangementResult:
    sigma: PermutationPrefix
    checkpoints: list = field(default_factory=list)
    checkpoint_sums: list = field(default_factory=list)
    targets: list = field(default_factory=list)
    stage_log: list = field(default_factory=list)
    mode: Mode = Mode.EXACT
    slack: float = 0.0
    engine: str = "constrained"
    constraint: Optional[IndexSet] = None
    forced_placement: bool = False
    meta: dict = field(default_factory=dict)
    inner: Optional["RearrangementResult"] = None

    @property
    def stages(self) -> int:
        return len(self.checkpoints)

    @property
    def bounds(self) -> list:
        return [Fraction(1, n) for n in range(1, self.stages + 1)]


def _tol(n: int, mode: Mode):
    return Fraction(1, n) if mode is Mode.EXACT else 1.0 / n


def _slack(mode: Mode, slack) -> float:
    if mode is Mode.EXACT:
        return 0.0
    return DEFAULT_SLACK if slack is None else float(slack)


def _require_pcc(source, assume_pcc):
    if assume_pcc:
        return
    if classify_pcc(source).verdict != HOLDS:
        raise NotPcc(f"{source.name} carries no pcc certificate")


# ---------------------------------------------------------------------------
# classical Riemann greedy
# ---------------------------------------------------------------------------


def riemann_rearrange(source: SeriesSource, target: TargetSpec, stages: int, *,
                      assume_pcc: bool = False, budget: Optional[int] = None,
                      slack=None) -> RearrangementResult:
    """Two-cursor greedy: below b_n take unused positive terms in index order
    until the sum reaches b_n, above take negative ones; oscillate until the
    sum is within 1/n and record the crossing as checkpoint n."""
    _require_pcc(source, assume_pcc)
    if stages < 0:
        raise ValueError("stages must be >= 0")
    budget = default_budget() if budget is None else budget
    mode = source.mode
    used: set = set()
    from itertools import count

    pos = _Cursor(source, count(1), +1, used)
    neg = _Cursor(source, count(1), -1, used)
    sigma = PermutationPrefix()
    result = RearrangementResult(sigma, mode=mode, slack=_slack(mode, slack), engine="riemann")
    S = zero(mode)
    for n in range(1, stages + 1):
        b = target.at(n, mode)
        tol = _tol(n, mode)
        consumed = crossings = 0
        going_up = S < b
        while True:
            idx, a = (pos if going_up else neg).take()
            used.add(idx)
            sigma.assign(idx)
            S += a
            consumed += 1
            if consumed > budget:
                raise StageBudgetExceeded(
                    f"stage {n} exceeded {budget} terms", max_terms=budget, stage=n, partial=result)
            crossed = S >= b if going_up else S <= b
            if not crossed:
                continue
            crossings += 1
            if abs(S - b) <= tol:
                break
            going_up = S < b
        result.checkpoints.append(len(sigma))
        result.checkpoint_sums.append(S)
        result.targets.append(b)
        result.stage_log.append({"n": n, "terms": consumed, "crossings": crossings})
    return result


# ---------------------------------------------------------------------------
# constrained engine
# ---------------------------------------------------------------------------


def off_set_tail_oracle(source: SeriesSource, A: IndexSet) -> Optional[Callable[[int], object]]:
    """B(m) >= sup_q |sum_{m < j <= q, j not in A} a_j|, or None if underivable."""
    comp = A.complement()
    if comp.size == 0:
        z = zero(source.mode)
        return lambda m: z
    off = restrict(source, comp)
    if off.tail is None:
        return None
    return lambda m: off.tail(comp.count_upto(m))


AUTO, SUP, REALIZED = "auto", "sup", "realized"


def constrained_rearrange(source: SeriesSource, A: IndexSet, target: TargetSpec, stages: int, *,
                          policy: str = AUTO, off_tail: Optional[Callable[[int], object]] = None,
                          assume_cc: bool = False, budget: Optional[int] = None,
                          oracle_reach: int = DEFAULT_ORACLE_REACH, slack=None) -> RearrangementResult:
    """Permutation fixed off A whose checkpoints satisfy |S_{k_n} - b_n| <= 1/n.

    Stage n (tolerance t = 1/(2n)) places, at the first A-position after
    k_{n-1}, the smallest A-index not yet used, then fills A-positions greedily
    from the unused A-indices of the needed sign.  The off-A contribution
    beyond k'_n is controlled in one of two ways:

    ``"sup"``
        k'_n is the smallest index > k_{n-1} with off-A tail oracle B(k'_n) <= t;
        the stage stops at the first position past k'_n where the A-part is
        within t of its residual target.
    ``"realized"``
        k'_n = k_n - 1 and the off-A sum over (k'_n, k_n] is evaluated exactly
        and required to be <= t; no oracle is needed.
    ``"auto"``
        ``"sup"`` when the oracle certifies some k'_n within ``oracle_reach``
        positions of k_{n-1}, ``"realized"`` otherwise.
    """
    if stages < 0:
        raise ValueError("stages must be >= 0")
    if policy not in (AUTO, SUP, REALIZED):
        raise ValueError(f"unknown tail policy {policy!r}")
    if not assume_cc and restrict(source, A).conditionally_convergent is not True:
        raise NotConditionallyConvergentOnA(
            f"sum of {source.name} over A is not certified conditionally convergent")
    B = off_tail or off_set_tail_oracle(source, A)
    if B is None and policy != REALIZED:
        raise MissingOracle(f"no tail oracle for {source.name} off A")
    budget = default_budget() if budget is None else budget
    mode = source.mode

    sigma = PermutationPrefix(constraint=A)
    used = sigma._image
    pos = _Cursor(source, A.iter_from(1), +1, used)
    neg = _Cursor(source, A.iter_from(1), -1, used)
    forced = _Cursor(source, A.iter_from(1), 0, used)
    result = RearrangementResult(sigma, mode=mode, slack=_slack(mode, slack), engine="constrained",
                                 constraint=A, forced_placement=True)
    member = A.member
    S = zero(mode)
    k = 0
    for n in range(1, stages + 1):
        b = target.at(n, mode)
        tol = Fraction(1, 2 * n) if mode is Mode.EXACT else 1.0 / (2 * n)
        k_prime = None
        if policy != REALIZED:
            reach = budget if policy == SUP else min(budget, oracle_reach)
            k_prime = smallest_index_below(B, tol, start=k + 1, limit=k + reach)
            if k_prime is None and policy == SUP:
                raise StageBudgetExceeded(
                    f"stage {n}: off-A tail oracle needs k' beyond {k + reach}",
                    max_terms=budget, stage=n, partial=result)
        args = (source, sigma, member, pos, neg, forced, S, k, b, tol, budget, n, result)
        if k_prime is not None:
            S, p, log = _stage_sup(*args, k_prime, B)
        else:
            S, p, log = _stage_realized(*args)
        k = p
        result.checkpoints.append(k)
        result.checkpoint_sums.append(S)
        result.targets.append(b)
        result.stage_log.append(log)
    return result


def _budget_check(walked, budget, n, result):
    if walked > budget:
        raise StageBudgetExceeded(
            f"stage {n} exceeded {budget} terms", max_terms=budget, stage=n, partial=result)


def _stage_sup(source, sigma, member, pos, neg, forced, S, k, b, tol, budget, n, result, k_prime, B):
    # residual target for the A-part: b - S_k - (off-A terms in (k, k'])
    off_pre = zero(source.mode)
    for j in range(k + 1, k_prime + 1):
        if not member(j):
            off_pre += term(source, j)
    r = b - S - off_pre
    T = off = zero(source.mode)
    forced_at = forced_idx = None
    p = k
    while True:
        p += 1
        _budget_check(p - k, budget, n, result)
        if member(p):
            if forced_at is None:
                idx, a = forced.take()
                forced_at, forced_idx = p, idx
            else:
                idx, a = (pos if T < r else neg).take()
            sigma.assign(idx)
            T += a
        else:
            sigma.assign(p)
            off += term(source, p)
        if p > k_prime and forced_at is not None and abs(T - r) <= tol:
            break
    log = {
        "n": n,
        "k_prime": k_prime,
        "tail_kind": "oracle",
        "tail_bound": format_scalar(B(k_prime)),
        "forced_position": forced_at,
        "forced_index": forced_idx,
        "terms": p - k,
    }
    return S + T + off, p, log


def _stage_realized(source, sigma, member, pos, neg, forced, S, k, b, tol, budget, n, result):
    forced_at = forced_idx = None
    p = k
    while True:
        p += 1
        _budget_check(p - k, budget, n, result)
        if member(p):
            if forced_at is None:
                idx, a = forced.take()
                forced_at, forced_idx = p, idx
            else:
                idx, a = (pos if S < b else neg).take()
            sigma.assign(idx)
            S += a
            off_last = None
        else:
            sigma.assign(p)
            off_last = term(source, p)
            S += off_last
        if p < k + 2 or forced_at is None:
            continue
        if off_last is None:
            if abs(S - b) <= tol:
                break
        elif abs(off_last) <= tol and abs(S - off_last - b) <= tol:
            break
    realized = abs(off_last) if off_last is not None else zero(source.mode)
    log = {
        "n": n,
        "k_prime": p - 1,
        "tail_kind": "realized",
        "tail_bound": format_scalar(realized),
        "forced_position": forced_at,
        "forced_index": forced_idx,
        "terms": p - k,
    }
    return S, p, log


# ---------------------------------------------------------------------------
# pcc pipeline
# ---------------------------------------------------------------------------


class GreedyPermutation(PermutationPrefix):
    """Greedy rearrangement towards 0, extended on demand.

    At the start and after every sign change of the running sum, the smallest
    unused index is placed next; otherwise the next unused term of the sign
    that moves the sum towards 0 is taken.
    """

    def __init__(self, source: SeriesSource):
        super().__init__()
        from itertools import count

        self.source = source
        used = self._image
        self._pos = _Cursor(source, count(1), +1, used)
        self._neg = _Cursor(source, count(1), -1, used)
        self._any = _Cursor(source, count(1), 0, used)
        self._sum = zero(source.mode)
        self._pending_forced = True
        self.partial_sums: list = []

    def extend_to(self, m: int) -> None:
        while len(self._values) < m:
            self._step()

    def _step(self):
        if self._pending_forced:
            idx, a = self._any.take()
            self._pending_forced = False
        else:
            idx, a = (self._neg if self._sum >= 0 else self._pos).take()
        before = self._sum >= 0
        self._sum += a
        if (self._sum >= 0) != before:
            self._pending_forced = True
        self.assign(idx)
        self.partial_sums.append(self._sum)


def convergentize(source: SeriesSource, assume_pcc: bool = False) -> GreedyPermutation:
    _require_pcc(source, assume_pcc)
    return GreedyPermutation(source)


def compose(outer: PermutationPrefix, inner: PermutationPrefix, m: int) -> PermutationPrefix:
    """The prefix j -> outer(inner(j)) for j = 1..m."""
    inner.extend_to(m)
    vals = [inner.value(j) for j in range(1, m + 1)]
    if vals:
        outer.extend_to(max(vals))
    return PermutationPrefix(outer.value(v) for v in vals)


def permuted(source: SeriesSource, perm: PermutationPrefix, name: Optional[str] = None) -> SeriesSource:
    """The series a_{perm(1)} + a_{perm(2)} + ..."""
    return SeriesSource(
        lambda i: term(source, perm.value(i)),
        mode=source.mode,
        name=name or f"{source.name}∘π",
        traits=frozenset({NULL}) if source.has(NULL) else frozenset(),
    )


def rearrange_pcc(source: SeriesSource, target: TargetSpec, stages: int, *,
                  assume_pcc: bool = False, budget: Optional[int] = None, slack=None) -> RearrangementResult:
    """Convergentize, track ``target`` on the convergent rearrangement with
    A = all indices, and compose: the final series is a_{π(σ'(j))}."""
    pi = convergentize(source, assume_pcc)
    c = permuted(source, pi)
    try:
        inner = constrained_rearrange(c, IndexSet.all(), target, stages, policy=SUP,
                                      assume_cc=True, budget=budget, slack=slack)
    except StageBudgetExceeded as exc:
        if exc.partial is not None:
            exc.partial = _compose_result(exc.partial, pi)
        raise
    return _compose_result(inner, pi)


def _compose_result(inner: RearrangementResult, pi) -> RearrangementResult:
    sigma = compose(pi, inner.sigma, len(inner.sigma))
    return RearrangementResult(
        sigma,
        checkpoints=list(inner.checkpoints),
        checkpoint_sums=list(inner.checkpoint_sums),
        targets=list(inner.targets),
        stage_log=list(inner.stage_log),
        mode=inner.mode,
        slack=inner.slack,
        engine="pcc",
        constraint=IndexSet.all(),
        forced_placement=False,
        inner=inner,
    )
