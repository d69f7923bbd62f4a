"""Sequence representatives, quotient series and subnumbers.

A hypernumber is a c0-equivalence class of sequences; here we only ever hold
one representative (:class:`HyperRep`) and report finite-horizon evidence.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

from .errors import EmptyResult, InvalidQuotientMap, NonMonotoneSelector
from .series import Mode, SeriesSource, altsign, format_scalar, term, zero


@dataclass(frozen=True)
class HyperRep:
    rule: Callable[[int], object]
    label: str = "rep"
    length: Optional[int] = None

    def __call__(self, n: int):
        if n < 1:
            raise ValueError("representatives are indexed from 1")
        if self.length is not None and n > self.length:
            raise IndexError(f"{self.label} is known only up to {self.length}")
        return self.rule(n)

    def prefix(self, N: int) -> list:
        return [self(n) for n in range(1, N + 1)]

    @classmethod
    def from_values(cls, values: Sequence, label: str = "rep") -> "HyperRep":
        vals = list(values)
        return cls(lambda n: vals[n - 1], label=label, length=len(vals))


def analytical_sum(source: SeriesSource, N: int) -> HyperRep:
    """Partial sums A_1..A_N as a representative prefix."""
    if N < 1:
        raise ValueError("N must be >= 1")
    acc = zero(source.mode)
    sums = []
    for n in range(1, N + 1):
        acc = acc + term(source, n)
        sums.append(acc)
    return HyperRep.from_values(sums, label=f"an({source.name})")


# ---------------------------------------------------------------------------
# quotient maps
# ---------------------------------------------------------------------------


class QuotientMap:
    """A surjection p: N -> N whose fibers are finite runs of consecutive integers.

    Monotone maps are given by fiber ends m_1 < m_2 < ... (fiber i is
    (m_{i-1}, m_i]), either as a finite list or as a rule i -> m_i.  General
    maps are an explicit table of intervals, fiber i = ``fibers[i-1]``,
    required to tile an initial segment [1, M].
    """

    def __init__(self, *, fiber_ends: Optional[Sequence[int]] = None,
                 ends_rule: Optional[Callable[[int], int]] = None,
                 fibers: Optional[Sequence[tuple]] = None, name: Optional[str] = None):
        given = sum(x is not None for x in (fiber_ends, ends_rule, fibers))
        if given != 1:
            raise InvalidQuotientMap("give exactly one of fiber_ends, ends_rule, fibers")
        self.name = name
        self._rule = ends_rule
        self._ends: list = []
        self._fibers: Optional[list] = None
        if fiber_ends is not None:
            for m in fiber_ends:
                self._push_end(int(m))
        elif fibers is not None:
            self._fibers = [(int(lo), int(hi)) for lo, hi in fibers]
            _check_tiling(self._fibers)

    def _push_end(self, m: int):
        prev = self._ends[-1] if self._ends else 0
        if m <= prev:
            raise InvalidQuotientMap(f"fiber ends must strictly increase ({prev} then {m})")
        self._ends.append(m)

    @property
    def monotone(self) -> bool:
        return self._fibers is None

    @property
    def size(self) -> Optional[int]:
        """Number of fibers, None for an unbounded rule."""
        if self._fibers is not None:
            return len(self._fibers)
        return None if self._rule is not None else len(self._ends)

    def fiber_end(self, i: int) -> int:
        if not self.monotone:
            raise InvalidQuotientMap("fiber ends are defined for monotone maps only")
        while len(self._ends) < i:
            if self._rule is None:
                raise IndexError(f"map has only {len(self._ends)} fibers")
            self._push_end(int(self._rule(len(self._ends) + 1)))
        return self._ends[i - 1]

    def fiber(self, i: int) -> tuple:
        """Fiber i as the closed interval (lo, hi)."""
        if i < 1:
            raise ValueError("fibers are indexed from 1")
        if self._fibers is not None:
            if i > len(self._fibers):
                raise IndexError(f"map has only {len(self._fibers)} fibers")
            return self._fibers[i - 1]
        hi = self.fiber_end(i)
        lo = self.fiber_end(i - 1) + 1 if i > 1 else 1
        return lo, hi

    def __call__(self, j: int) -> int:
        """p(j)."""
        if self._fibers is not None:
            for i, (lo, hi) in enumerate(self._fibers, 1):
                if lo <= j <= hi:
                    return i
            raise IndexError(f"{j} beyond the declared horizon")
        i = 1
        while self.fiber_end(i) < j:
            i += 1
        return i

    def to_json(self) -> dict:
        if self._fibers is not None:
            return {"kind": "general", "fibers": [list(f) for f in self._fibers]}
        if self._rule is not None:
            if self.name:
                return {"kind": "builtin", "name": self.name}
            raise ValueError("rule-based maps are not serializable")
        return {"kind": "monotone", "fiber_ends": list(self._ends)}

    @classmethod
    def from_json(cls, obj) -> "QuotientMap":
        if isinstance(obj, str):
            obj = json.loads(obj)
        kind = obj.get("kind")
        if kind == "monotone":
            return cls(fiber_ends=obj["fiber_ends"])
        if kind == "general":
            return cls(fibers=[tuple(f) for f in obj["fibers"]])
        if kind == "builtin":
            return builtin_map(obj["name"])
        raise InvalidQuotientMap(f"unknown quotient map kind {kind!r}")

    def __repr__(self):
        if self.name:
            return f"QuotientMap({self.name})"
        if self._fibers is not None:
            return f"QuotientMap(fibers={self._fibers})"
        return f"QuotientMap(fiber_ends={self._ends})"


def _check_tiling(fibers: list):
    if not fibers:
        raise InvalidQuotientMap("a quotient map needs at least one fiber")
    for lo, hi in fibers:
        if lo < 1 or hi < lo:
            raise InvalidQuotientMap(f"bad fiber [{lo}, {hi}]")
    covered = sorted(fibers)
    expect = 1
    for lo, hi in covered:
        if lo != expect:
            raise InvalidQuotientMap(f"fibers do not tile an initial segment at {expect}")
        expect = hi + 1


def j0() -> QuotientMap:
    """Fibers {2k-1, 2k}."""
    return QuotientMap(ends_rule=lambda i: 2 * i, name="j0")


def j1() -> QuotientMap:
    """j(1) = 1 and j(2k) = j(2k+1) = k: fibers {1, 2, 3}, then {2k, 2k+1}."""
    return QuotientMap(ends_rule=lambda i: 2 * i + 1, name="j1")


QUOTIENT_BUILTINS = {"j0": j0, "j1": j1}


def builtin_map(name: str) -> QuotientMap:
    if name not in QUOTIENT_BUILTINS:
        raise InvalidQuotientMap(f"unknown builtin quotient map {name!r}")
    return QUOTIENT_BUILTINS[name]()


def parse_quotient_map(text: str) -> QuotientMap:
    """A builtin name, inline JSON, or a path to a JSON file."""
    if text in QUOTIENT_BUILTINS:
        return builtin_map(text)
    if text.lstrip().startswith("{"):
        return QuotientMap.from_json(text)
    with open(text) as fh:
        return QuotientMap.from_json(json.load(fh))


def quotient_series(source: SeriesSource, p: QuotientMap) -> SeriesSource:
    """b_i = sum of a_j over the fiber p^{-1}(i)."""
    def rule(i):
        lo, hi = p.fiber(i)
        acc = zero(source.mode)
        for j in range(lo, hi + 1):
            acc = acc + term(source, j)
        return acc

    return SeriesSource(rule, mode=source.mode, name=f"{source.name}/{p.name or 'p'}", length=p.size)


def checkpoints_to_quotient(result, source: SeriesSource) -> tuple:
    """Group the rearranged series between consecutive checkpoints.

    Returns ``(c, p)`` with p monotone, fiber ends k_1 < k_2 < ..., and
    c_n = a_{σ(k_{n-1}+1)} + ... + a_{σ(k_n)}.
    """
    if not result.checkpoints:
        raise EmptyResult("result has no checkpoints")
    p = QuotientMap(fiber_ends=result.checkpoints)
    sigma = result.sigma

    def permuted_term(j):
        return term(source, sigma.value(j))

    arranged = SeriesSource(permuted_term, mode=source.mode, name=f"{source.name}∘σ",
                            length=result.checkpoints[-1])
    return quotient_series(arranged, p), p


def subnumber_extract(rep: HyperRep, selector: Union[Callable[[int], int], Sequence[int]],
                      check: int = 1000) -> HyperRep:
    """n -> rep(selector(n)) for a strictly increasing selector.

    List selectors are checked in full; rule selectors on their first ``check``
    values and again on every evaluation.
    """
    if callable(selector):
        sel = selector
        horizon = check if rep.length is None else None
        length = None
    else:
        vals = list(selector)
        sel = lambda n: vals[n - 1]  # noqa: E731
        horizon = len(vals)
        length = len(vals)
    if horizon is None:
        # finite rep: check as far as the selector stays in range
        horizon = 0
        while horizon < check and sel(horizon + 1) <= rep.length:
            horizon += 1
    prev = 0
    for n in range(1, horizon + 1):
        s = sel(n)
        if s <= prev:
            raise NonMonotoneSelector(f"selector not strictly increasing at n={n}")
        prev = s

    def rule(n):
        s = sel(n)
        if n > 1 and s <= sel(n - 1):
            raise NonMonotoneSelector(f"selector not strictly increasing at n={n}")
        return rep(s)

    if length is None and rep.length is not None:
        length = horizon
    return HyperRep(rule, label=f"{rep.label}[sel]", length=length)


# ---------------------------------------------------------------------------
# finite-horizon monitors
# ---------------------------------------------------------------------------

CONSISTENT, VIOLATED = "CONSISTENT", "VIOLATED"


@dataclass
class C0Report:
    verdict: str
    horizon: int
    first_violation: Optional[int]
    max_deviation: object
    witness: Optional[int]
    evidence: str = "FINITE_HORIZON"

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict if self.first_violation is None else f"{VIOLATED}({self.first_violation})",
            "horizon": self.horizon,
            "first_violation": self.first_violation,
            "max_deviation": format_scalar(self.max_deviation),
            "witness": self.witness,
            "evidence": self.evidence,
        }


def c0_equiv_monitor(x: HyperRep, y: HyperRep, N: int,
                     schedule: Optional[Callable[[int], object]] = None) -> C0Report:
    """Check |x_n - y_n| <= tol_n for n <= N; evidence about a prefix only."""
    tol = schedule or (lambda n: Fraction(1, n))
    worst, witness, prev_tol = None, None, None
    for n in range(1, N + 1):
        t = tol(n)
        if t <= 0 or (prev_tol is not None and t > prev_tol):
            raise ValueError("tolerance schedule must be positive and nonincreasing")
        prev_tol = t
        d = abs(x(n) - y(n))
        if worst is None or d > worst:
            worst, witness = d, n
        if d > t:
            return C0Report(VIOLATED, N, n, worst, witness)
    return C0Report(CONSISTENT, N, None, worst if worst is not None else 0, witness)


@dataclass
class ObstructionReport:
    horizon: int
    terms_integer: bool
    sums_integer: bool
    partial_sums: list = field(default_factory=list)
    first_non_integer: Optional[int] = None

    @property
    def holds(self) -> bool:
        return self.terms_integer and self.sums_integer

    def to_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "terms_integer": self.terms_integer,
            "sums_integer": self.sums_integer,
            "first_non_integer": self.first_non_integer,
            "partial_sums": [format_scalar(s) for s in self.partial_sums],
            "obstruction": "CONFIRMED" if self.holds else "REFUTED",
        }


def _is_integer(v) -> bool:
    if isinstance(v, Fraction):
        return v.denominator == 1
    if isinstance(v, int):
        return True
    return float(v).is_integer()


def extend_permutation(prefix: Sequence[int]) -> Callable[[int], int]:
    """σ on the prefix, then the unused indices in increasing order."""
    vals = list(prefix)
    if len(set(vals)) != len(vals) or any(v < 1 for v in vals):
        raise ValueError("permutation prefix must be injective on positive integers")
    used = set(vals)
    tail: list = []
    nxt = [1]

    def sigma(j):
        if j <= len(vals):
            return vals[j - 1]
        while len(vals) + len(tail) < j:
            while nxt[0] in used:
                nxt[0] += 1
            tail.append(nxt[0])
            nxt[0] += 1
        return tail[j - len(vals) - 1]

    return sigma


def brst_integer_obstruction(p: QuotientMap, sigma_prefix, N: int,
                             source: Optional[SeriesSource] = None) -> ObstructionReport:
    """Quotient partial sums of a permuted altsign are all integers up to fiber N.

    Every quotient series of a rearrangement of 1 - 1 + 1 - ... has integer
    terms, so no hypernumber with a non-integer-valued representative is
    reachable that way.
    """
    source = source or altsign(Mode.EXACT)
    values = sigma_prefix.as_list() if hasattr(sigma_prefix, "as_list") else list(sigma_prefix)
    sigma = extend_permutation(values)
    arranged = SeriesSource(lambda j: term(source, sigma(j)), mode=source.mode, name=f"{source.name}∘σ")
    q = quotient_series(arranged, p)
    acc = zero(source.mode)
    sums, terms_ok, sums_ok, first_bad = [], True, True, None
    for i in range(1, N + 1):
        b = q.rule(i)
        acc = acc + b
        sums.append(acc)
        if not _is_integer(b):
            terms_ok = False
        if not _is_integer(acc):
            sums_ok = False
        if first_bad is None and not (_is_integer(b) and _is_integer(acc)):
            first_bad = i
    return ObstructionReport(N, terms_ok, sums_ok, sums, first_bad)
