"""Lazy real series with exact or binary64 arithmetic.

A :class:`SeriesSource` is a deterministic term rule ``n -> a_n`` (``n >= 1``)
plus optional metadata: a tail-bound oracle, structural traits used to derive
certificates, and an analytic pcc certificate for catalogue series.

Two arithmetic modes exist.  ``Mode.EXACT`` carries :class:`fractions.Fraction`
values and never rounds; ``Mode.FLOAT`` carries Python floats and every
comparison against a bound is allowed an absolute slack ``eps_num``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional, Union

import mpmath

from .errors import ExhaustedSet, MissingOracle, ModeError

Scalar = Union[Fraction, float]

DEFAULT_SLACK = 1e-9


class Mode(enum.Enum):
    EXACT = "exact"
    FLOAT = "float"


def coerce(value, mode: Mode) -> Scalar:
    """Convert ``value`` into the representation used by ``mode``.

    Floats are refused in EXACT mode: a binary64 value entering an exact run
    means two arithmetic modes were mixed.
    """
    if mode is Mode.EXACT:
        if isinstance(value, float):
            raise ModeError(f"float value {value!r} in an exact run")
        return Fraction(value)
    return float(value)


def parse_scalar(text: str, mode: Mode) -> Scalar:
    """Parse ``"p/q"``, integer or decimal literals (``"0.5"``, ``"1e-6"``)."""
    text = text.strip()
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational literal: {text!r}") from exc
    return value if mode is Mode.EXACT else float(value)


def format_scalar(value: Scalar) -> str:
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    return format(float(value), ".17g")


def zero(mode: Mode) -> Scalar:
    return Fraction(0) if mode is Mode.EXACT else 0.0


# Structural traits.  They are promises about the whole term sequence and are
# what certificates (tail oracles, pcc verdicts) get derived from.
ALTERNATING = "alternating"  # no zero terms, signs strictly alternate
MONOTONE = "monotone_magnitude"  # |a_n| nonincreasing
NULL = "null"  # a_n -> 0
ABS_DIVERGENT = "abs_divergent"  # sum |a_n| = +inf
ABS_TAIL = "abs_tail"  # the tail oracle bounds sum_{j>m} |a_j|
DIVERGENT = "divergent"  # the series itself diverges


HOLDS, FAILS, INCONCLUSIVE = "holds", "fails", "inconclusive"


@dataclass(frozen=True)
class PccReport:
    """Verdicts for sum a+ = inf (a), sum a- = inf (b) and a_n -> 0 (c)."""

    cond_a: str
    cond_b: str
    cond_c: str
    evidence: str = "ANALYTIC"
    horizon: Optional[int] = None
    thresholds: Optional[dict] = None

    @property
    def verdict(self) -> str:
        conds = (self.cond_a, self.cond_b, self.cond_c)
        if all(c == HOLDS for c in conds):
            return HOLDS
        if any(c == FAILS for c in conds):
            return FAILS
        return INCONCLUSIVE

    def to_dict(self) -> dict:
        return {
            "cond_a": self.cond_a,
            "cond_b": self.cond_b,
            "cond_c": self.cond_c,
            "verdict": self.verdict,
            "evidence": self.evidence,
            "horizon": self.horizon,
            "thresholds": self.thresholds,
        }


@dataclass(frozen=True)
class SeriesSource:
    rule: Callable[[int], Scalar]
    mode: Mode = Mode.EXACT
    name: str = "series"
    spec: Optional[str] = None
    tail: Optional[Callable[[int], Scalar]] = None
    length: Optional[int] = None
    traits: frozenset = field(default_factory=frozenset)
    certificate: Optional[PccReport] = None
    # n -> (sum_{i<=n} a_i+, sum_{i<=n} a_i-) as mpmath numbers at the ambient
    # precision; lets far-out block computations skip term enumeration.
    mass: Optional[Callable[[int], tuple]] = None

    def __call__(self, n: int) -> Scalar:
        return term(self, n)

    @property
    def finite(self) -> bool:
        return self.length is not None

    def has(self, *traits: str) -> bool:
        return all(t in self.traits for t in traits)

    @property
    def convergent(self) -> Optional[bool]:
        """True/False when certified either way, None when unknown."""
        if self.length is not None or self.has(ABS_TAIL):
            return True
        if self.has(ALTERNATING, MONOTONE, NULL):
            return True
        if self.has(DIVERGENT):
            return False
        return None

    @property
    def conditionally_convergent(self) -> Optional[bool]:
        conv = self.convergent
        if conv is True and self.has(ABS_DIVERGENT):
            return True
        if conv is False or self.has(ABS_TAIL) or self.length is not None:
            return False
        return None


@dataclass(frozen=True)
class SignParts:
    plus: SeriesSource
    minus: SeriesSource


def term(source: SeriesSource, n: int) -> Scalar:
    if n < 1:
        raise ValueError(f"series index must be >= 1, got {n}")
    if source.length is not None and n > source.length:
        raise ExhaustedSet(f"{source.name} has only {source.length} terms")
    return source.rule(n)


def partial_sums(source: SeriesSource, N: int) -> list:
    if N < 1:
        raise ValueError("N must be >= 1")
    out = []
    acc = zero(source.mode)
    for n in range(1, N + 1):
        acc = acc + term(source, n)
        out.append(acc)
    return out


def sign_split(source: SeriesSource) -> SignParts:
    mode = source.mode
    z = zero(mode)

    def plus(n):
        return max(term(source, n), z)

    def minus(n):
        a = term(source, n)
        return max(a, z) - a

    common = dict(mode=mode, length=source.length)
    return SignParts(
        plus=SeriesSource(plus, name=f"{source.name}+", **common),
        minus=SeriesSource(minus, name=f"{source.name}-", **common),
    )


def tail_bound(source: SeriesSource, m: int) -> Scalar:
    """Certified B(m) >= sup_q |a_{m+1} + ... + a_q|."""
    if m < 0:
        raise ValueError("m must be >= 0")
    if source.tail is None:
        raise MissingOracle(f"no tail oracle for {source.name}")
    return source.tail(m)


# ---------------------------------------------------------------------------
# pcc classification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Empirical:
    horizon: int = 10**5
    divergence_threshold: float = 10.0
    smallness_threshold: float = 1e-3


ANALYTIC = "analytic"

_BULK_HORIZON = 10**6


def classify_pcc(source: SeriesSource, policy=ANALYTIC) -> PccReport:
    if policy == ANALYTIC:
        if source.certificate is not None:
            return source.certificate
        derived = _derived_certificate(source)
        if derived is not None:
            return derived
        return PccReport(INCONCLUSIVE, INCONCLUSIVE, INCONCLUSIVE, "ANALYTIC")
    if not isinstance(policy, Empirical):
        raise TypeError(f"unknown classification policy {policy!r}")
    if policy.horizon < 1:
        raise ValueError("horizon must be >= 1")
    if policy.horizon > _BULK_HORIZON and source.mass is not None and source.has(MONOTONE):
        return _classify_bulk(source, policy)
    return _classify_direct(source, policy)


def _derived_certificate(source: SeriesSource) -> Optional[PccReport]:
    if source.length is not None:
        return PccReport(FAILS, FAILS, HOLDS)
    if source.has(ALTERNATING, MONOTONE, NULL, ABS_DIVERGENT):
        return PccReport(HOLDS, HOLDS, HOLDS)
    return None


def _quarters(N: int) -> tuple:
    q = max(1, N // 4)
    last = (N - q + 1, N)
    third = (max(1, N - 2 * q + 1), max(1, N - q))
    return third, last


def _verdict_c(last_max, third_max, small) -> str:
    if last_max < small:
        return HOLDS
    if last_max > small and last_max >= third_max:
        return FAILS
    return INCONCLUSIVE


def _thresholds(policy: Empirical) -> dict:
    return {
        "divergence_threshold": policy.divergence_threshold,
        "smallness_threshold": policy.smallness_threshold,
    }


def _classify_direct(source: SeriesSource, policy: Empirical) -> PccReport:
    # Empirical evidence only, so binary64 accumulation is fine in either mode.
    N = policy.horizon
    (t_lo, t_hi), (l_lo, l_hi) = _quarters(N)
    plus = minus = 0.0
    third_max = last_max = 0.0
    for n in range(1, N + 1):
        a = float(term(source, n))
        if a > 0:
            plus += a
        else:
            minus -= a
        if t_lo <= n <= t_hi:
            third_max = max(third_max, abs(a))
        if n >= l_lo:
            last_max = max(last_max, abs(a))
    div = policy.divergence_threshold
    return PccReport(
        HOLDS if plus > div else INCONCLUSIVE,
        HOLDS if minus > div else INCONCLUSIVE,
        _verdict_c(last_max, third_max, policy.smallness_threshold),
        "EMPIRICAL",
        N,
        _thresholds(policy),
    )


def _classify_bulk(source: SeriesSource, policy: Empirical) -> PccReport:
    # |a_n| nonincreasing: a quarter's max sits at its first index.
    N = policy.horizon
    (t_lo, _), (l_lo, _) = _quarters(N)
    with mpmath.workdps(len(str(N)) + 30):
        plus, minus = source.mass(N)
        plus, minus = float(plus), float(minus)
    third_max = abs(float(term(source, t_lo)))
    last_max = abs(float(term(source, l_lo)))
    div = policy.divergence_threshold
    return PccReport(
        HOLDS if plus > div else INCONCLUSIVE,
        HOLDS if minus > div else INCONCLUSIVE,
        _verdict_c(last_max, third_max, policy.smallness_threshold),
        "EMPIRICAL",
        N,
        _thresholds(policy),
    )


# ---------------------------------------------------------------------------
# topological sums
# ---------------------------------------------------------------------------

CERTIFIED, UNCERTIFIED, UNDECIDED = "CERTIFIED", "UNCERTIFIED", "UNDECIDED"

_EXACT_SUM_LIMIT = 20_000


@dataclass(frozen=True)
class TopologicalSum:
    value: object  # Scalar, +-inf, or None when undecided
    status: str
    index: Optional[int] = None
    error_bound: Optional[float] = None


def smallest_index_below(bound: Callable[[int], Scalar], tol, start: int = 0, limit: int = 10**12):
    """Smallest m >= start with bound(m) <= tol, for nonincreasing ``bound``.

    Doubling search followed by bisection.  Returns None past ``limit``.
    """
    if bound(start) <= tol:
        return start
    lo, step = start, 1
    while True:
        hi = start + step
        if hi > limit:
            return None
        if bound(hi) <= tol:
            break
        lo = hi
        step *= 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if bound(mid) <= tol:
            hi = mid
        else:
            lo = mid
    return hi


def topological_sum(source: SeriesSource, tol, horizon: int = 10**6, max_terms: int = 10**7) -> TopologicalSum:
    if tol <= 0:
        raise ValueError("tol must be positive")
    if source.tail is not None:
        found = _certified_sum(source, tol, max_terms)
        if found is not None:
            return found
    return _empirical_sum(source, tol, horizon)


def _certified_sum(source, tol, max_terms):
    tol_q = Fraction(tol) if source.mode is Mode.EXACT else float(tol)
    limit = max_terms if source.length is None else source.length
    m = smallest_index_below(source.tail, tol_q, limit=limit)
    if m is None:
        return None
    if source.mode is Mode.EXACT and m <= _EXACT_SUM_LIMIT:
        total = sum((term(source, n) for n in range(1, m + 1)), Fraction(0))
        return TopologicalSum(total, CERTIFIED, m, float(source.tail(m)))
    # Long prefix: correctly rounded fsum of binary64 terms.  Each term carries
    # relative error <= 2**-53; budget half of tol for the tail, half for rounding.
    m = smallest_index_below(source.tail, tol_q / 2, start=m, limit=limit)
    if m is None:
        return None
    terms = [float(term(source, n)) for n in range(1, m + 1)]
    total = math.fsum(terms)
    rounding = math.fsum(abs(t) for t in terms) * 2.0**-52 + math.ulp(total)
    err = float(source.tail(m)) + rounding
    if err > float(tol):
        return None
    return TopologicalSum(total, CERTIFIED, m, err)


def _empirical_sum(source, tol, horizon):
    N = horizon if source.length is None else min(horizon, source.length)
    sums = []
    acc = comp = 0.0
    for n in range(1, N + 1):
        # Neumaier compensated running sum
        a = float(term(source, n))
        t = acc + a
        if abs(acc) >= abs(a):
            comp += (acc - t) + a
        else:
            comp += (a - t) + acc
        acc = t
        sums.append(acc + comp)
    window = sums[-max(1, N // 10):]
    if max(window) - min(window) <= float(tol):
        return TopologicalSum(sums[-1], UNCERTIFIED, N)
    half = sums[N // 2:]
    rise = half[-1] - half[0]
    if rise > float(tol) and all(y >= x for x, y in zip(half, half[1:])):
        return TopologicalSum(math.inf, UNCERTIFIED, N)
    if rise < -float(tol) and all(y <= x for x, y in zip(half, half[1:])):
        return TopologicalSum(-math.inf, UNCERTIFIED, N)
    return TopologicalSum(None, UNDECIDED, N)


# ---------------------------------------------------------------------------
# catalogue
# ---------------------------------------------------------------------------


def _ceil_fourth_root(n: int) -> int:
    c = math.isqrt(math.isqrt(n))
    while c**4 < n:
        c += 1
    return c


def _alternating_tail(rule):
    return lambda m: abs(rule(m + 1))


def _make(exact_rule, mode, **kw) -> SeriesSource:
    if mode is Mode.EXACT:
        rule = exact_rule
    else:
        def rule(n, _r=exact_rule):
            return float(_r(n))
    tail = kw.pop("tail", None)
    if tail == "alternating":
        tail = _alternating_tail(rule)
    elif tail is not None and mode is Mode.FLOAT:
        tail = (lambda m, _t=tail: float(_t(m)))
    return SeriesSource(rule, mode=mode, tail=tail, **kw)


def _altharmonic_mass(n: int):
    if n <= 0:
        return mpmath.mpf(0), mpmath.mpf(0)
    h_half = mpmath.harmonic(n // 2)
    return mpmath.harmonic(n) - h_half / 2, h_half / 2


def _harmonic_mass(n: int):
    return (mpmath.harmonic(n) if n > 0 else mpmath.mpf(0)), mpmath.mpf(0)


def altsign(mode: Mode = Mode.EXACT) -> SeriesSource:
    return _make(
        lambda n: Fraction(1 if n % 2 else -1),
        mode,
        name="altsign",
        spec="altsign",
        traits=frozenset({ALTERNATING, MONOTONE, DIVERGENT}),
        certificate=PccReport(HOLDS, HOLDS, FAILS),
    )


def altharmonic(mode: Mode = Mode.EXACT) -> SeriesSource:
    return _make(
        lambda n: Fraction(1 if n % 2 else -1, n),
        mode,
        name="altharmonic",
        spec="altharmonic",
        tail="alternating",
        traits=frozenset({ALTERNATING, MONOTONE, NULL, ABS_DIVERGENT}),
        certificate=PccReport(HOLDS, HOLDS, HOLDS),
        mass=_altharmonic_mass,
    )


def altpow4ceil(mode: Mode = Mode.EXACT) -> SeriesSource:
    return _make(
        lambda n: Fraction(1 if n % 2 else -1, _ceil_fourth_root(n)),
        mode,
        name="altpow4ceil",
        spec="altpow4ceil",
        tail="alternating",
        traits=frozenset({ALTERNATING, MONOTONE, NULL, ABS_DIVERGENT}),
        certificate=PccReport(HOLDS, HOLDS, HOLDS),
    )


def geometric(r, mode: Mode = Mode.EXACT) -> SeriesSource:
    """a_n = r**n for n >= 1, |r| < 1."""
    r = Fraction(r)
    if not abs(r) < 1:
        raise ValueError("geometric ratio must satisfy |r| < 1")
    if r == 0:
        return zero_series(mode)
    ar = abs(r)
    traits = {NULL, MONOTONE, ABS_TAIL}
    if r < 0:
        traits.add(ALTERNATING)
    src = _make(
        lambda n: r**n,
        mode,
        name=f"geometric({r})",
        spec=f"geometric:{r}",
        tail=lambda m: ar ** (m + 1) / (1 - ar),
        traits=frozenset(traits),
        certificate=PccReport(FAILS, FAILS, HOLDS),
    )
    if mode is Mode.FLOAT:
        # exact powers grow in size with n; binary64 powers do not
        rf, af = float(r), float(ar)
        src = replace(src, rule=lambda n: rf**n, tail=lambda m: af ** (m + 1) / (1 - af))
    return src


def triples(mode: Mode = Mode.EXACT) -> SeriesSource:
    """1/k, 1/k, -1/k for k = 1, 2, ...; partial sums diverge to +inf."""

    def rule(n):
        k, r = divmod(n - 1, 3)
        return Fraction(-1 if r == 2 else 1, k + 1)

    return _make(
        rule,
        mode,
        name="triples",
        spec="triples",
        traits=frozenset({NULL, ABS_DIVERGENT, DIVERGENT}),
        certificate=PccReport(HOLDS, HOLDS, HOLDS),
    )


def harmonic(mode: Mode = Mode.EXACT) -> SeriesSource:
    return _make(
        lambda n: Fraction(1, n),
        mode,
        name="harmonic",
        spec="harmonic",
        traits=frozenset({NULL, MONOTONE, ABS_DIVERGENT, DIVERGENT}),
        certificate=PccReport(HOLDS, FAILS, HOLDS),
        mass=_harmonic_mass,
    )


def invsquare(mode: Mode = Mode.EXACT) -> SeriesSource:
    return _make(
        lambda n: Fraction(1, n * n),
        mode,
        name="invsquare",
        spec="invsquare",
        tail=lambda m: Fraction(2) if m == 0 else Fraction(1, m),
        traits=frozenset({NULL, MONOTONE, ABS_TAIL}),
        certificate=PccReport(FAILS, FAILS, HOLDS),
    )


def zero_series(mode: Mode = Mode.EXACT) -> SeriesSource:
    return _make(
        lambda n: Fraction(0),
        mode,
        name="zero",
        spec="zero",
        tail=lambda m: Fraction(0),
        traits=frozenset({NULL, MONOTONE, ABS_TAIL}),
        certificate=PccReport(FAILS, FAILS, HOLDS),
    )


def finite_list(values, mode: Mode = Mode.EXACT, name: str = "finite-list", spec=None) -> SeriesSource:
    """Listed terms followed by zeros."""
    vals = [coerce(v, mode) for v in values]
    z = zero(mode)
    suffix = [z] * (len(vals) + 1)
    for i in range(len(vals) - 1, -1, -1):
        suffix[i] = suffix[i + 1] + abs(vals[i])

    def rule(n):
        return vals[n - 1] if n <= len(vals) else z

    def tail(m):
        return suffix[m] if m < len(vals) else z

    return SeriesSource(
        rule,
        mode=mode,
        name=name,
        spec=spec,
        tail=tail,
        traits=frozenset({NULL, ABS_TAIL}),
        certificate=PccReport(FAILS, FAILS, HOLDS),
    )


BUILTINS = {
    "altsign": altsign,
    "altharmonic": altharmonic,
    "altpow4ceil": altpow4ceil,
    "triples": triples,
    "harmonic": harmonic,
    "invsquare": invsquare,
    "zero": zero_series,
}


def read_literals(path, mode: Mode) -> list:
    """One decimal or ``p/q`` literal per line; blank lines and ``#`` comments skipped."""
    out = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(parse_scalar(line, mode))
    return out


def parse_series(spec: str, mode: Mode = Mode.EXACT) -> SeriesSource:
    """Build a series from a CLI spec string such as ``geometric:0.5``."""
    name, _, arg = spec.partition(":")
    if name in BUILTINS and not arg:
        return BUILTINS[name](mode)
    if name == "geometric" and arg:
        return geometric(Fraction(arg), mode)
    if name == "file" and arg:
        return finite_list(read_literals(arg, mode), mode, name=f"file:{arg}", spec=spec)
    raise ValueError(f"unknown series spec {spec!r}")


def with_traits(source: SeriesSource, **changes) -> SeriesSource:
    return replace(source, **changes)
