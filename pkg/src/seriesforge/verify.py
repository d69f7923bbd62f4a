"""Independent checkpoint verification and run-file I/O.

The verifier recomputes every checkpoint sum by naive left-to-right summation
of ``a_{σ(j)}`` straight from the source; it never reads engine accumulators
except to compare them against its own recomputation.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .indexsets import IndexSet
from .rearrange import PermutationPrefix, RearrangementResult, parse_target
from .series import DEFAULT_SLACK, Mode, SeriesSource, format_scalar, parse_scalar, parse_series, term, zero

RUN_VERSION = "v1"


@dataclass
class StageCheck:
    n: int
    k_n: int
    S: object
    b: object
    err: object
    bound: Fraction
    ok: bool
    claimed_matches: Optional[bool] = None

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k_n": self.k_n,
            "S": None if self.S is None else format_scalar(self.S),
            "b": format_scalar(self.b),
            "err": None if self.err is None else format_scalar(self.err),
            "bound": format_scalar(self.bound),
            "ok": self.ok,
            # absent and agreeing engine sums report alike
            "claim_conflict": self.claimed_matches is False,
        }


@dataclass
class VerificationReport:
    stages: list = field(default_factory=list)
    sigma_checks: dict = field(default_factory=dict)
    mode: str = "EXACT"
    slack: float = 0.0

    @property
    def overall(self) -> bool:
        return all(s.ok for s in self.stages) and all(v for v in self.sigma_checks.values() if v is not None)

    @property
    def failed_stages(self) -> list:
        return [s.n for s in self.stages if not s.ok]

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "slack": self.slack,
            "overall": "pass" if self.overall else "fail",
            "failed_stages": self.failed_stages,
            "sigma_checks": dict(self.sigma_checks),
            "stages": [s.to_dict() for s in self.stages],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "VerificationReport":
        mode = Mode.EXACT if obj["mode"] == "EXACT" else Mode.FLOAT
        stages = []
        for s in obj["stages"]:
            stages.append(StageCheck(
                n=s["n"],
                k_n=s["k_n"],
                S=None if s["S"] is None else parse_scalar(s["S"], mode),
                b=parse_scalar(s["b"], mode),
                err=None if s["err"] is None else parse_scalar(s["err"], mode),
                bound=Fraction(s["bound"]),
                ok=s["ok"],
                claimed_matches=False if s["claim_conflict"] else None,
            ))
        return cls(stages, dict(obj["sigma_checks"]), obj["mode"], obj["slack"])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "k_n", "S", "b", "err", "bound", "ok"])
        for s in self.stages:
            d = s.to_dict()
            w.writerow([d["n"], d["k_n"], d["S"], d["b"], d["err"], d["bound"], str(s.ok).lower()])
        return buf.getvalue()

    def __eq__(self, other):
        if not isinstance(other, VerificationReport):
            return NotImplemented
        return self.to_dict() == other.to_dict()


def verify(result: RearrangementResult, source: SeriesSource, A: Optional[IndexSet] = None,
           slack: Optional[float] = None) -> VerificationReport:
    """Recheck |S_{k_n} - b_n| <= 1/n (+ slack in FLOAT mode) and the permutation laws."""
    mode = source.mode
    if mode is Mode.EXACT:
        eps = 0.0
        label = "EXACT"
    else:
        eps = result.slack if slack is None else float(slack)
        eps = eps or DEFAULT_SLACK
        label = f"FLOAT({eps!r})"
    A = A if A is not None else result.constraint
    values = result.sigma.as_list()
    m = len(values)

    injective = len(set(values)) == m and all(v >= 1 for v in values)
    identity_off = True
    if A is not None:
        for j, v in enumerate(values, 1):
            if A.member(j) != A.member(v) or (not A.member(j) and v != j):
                identity_off = False
                break

    ks = list(result.checkpoints)
    monotone = all(k >= 1 for k in ks[:1]) and all(a < b for a, b in zip(ks, ks[1:]))

    stages = []
    acc = zero(mode)
    j = 0
    image: set = set()
    smallest_ok = True
    ptr = 1  # number of smallest A-elements seen in the image, plus one
    for n, k in enumerate(ks, 1):
        b = result.targets[n - 1]
        bound = Fraction(1, n)
        if k > m or k < j:
            stages.append(StageCheck(n, k, None, b, None, bound, False))
            continue
        while j < k:
            j += 1
            v = values[j - 1]
            acc = acc + term(source, v)
            image.add(v)
        err = abs(acc - b)
        ok = err <= bound if mode is Mode.EXACT else float(err) <= float(bound) + eps
        claimed = None
        if n <= len(result.checkpoint_sums) and result.checkpoint_sums[n - 1] is not None:
            c = result.checkpoint_sums[n - 1]
            claimed = c == acc if mode is Mode.EXACT else abs(float(c) - float(acc)) <= eps
            ok = ok and claimed
        stages.append(StageCheck(n, k, acc, b, err, bound, ok, claimed))
        if result.forced_placement and A is not None:
            while A.enumerate(ptr) in image:
                ptr += 1
            smallest_ok = smallest_ok and ptr - 1 >= n

    checks = {
        "injective": injective,
        "identity_off_A": identity_off,
        "checkpoints_increasing": monotone,
        "surjectivity_progress": smallest_ok if result.forced_placement and A is not None else None,
    }
    return VerificationReport(stages, checks, label, eps)


# ---------------------------------------------------------------------------
# run files
# ---------------------------------------------------------------------------


def run_to_dict(result: RearrangementResult, meta: dict) -> dict:
    out_meta = {"mode": "exact" if result.mode is Mode.EXACT else "float",
                "stages": result.stages, "engine": result.engine, "slack": result.slack}
    out_meta.update(meta)
    return {
        "version": RUN_VERSION,
        "meta": out_meta,
        "sigma_prefix": result.sigma.as_list(),
        "checkpoints": list(result.checkpoints),
        "checkpoint_sums": [format_scalar(s) for s in result.checkpoint_sums],
        "targets": [format_scalar(b) for b in result.targets],
        "stage_log": list(result.stage_log),
    }


def save_run(result: RearrangementResult, path, meta: dict) -> None:
    with open(path, "w") as fh:
        json.dump(run_to_dict(result, meta), fh, indent=1)
        fh.write("\n")


@dataclass
class LoadedRun:
    result: RearrangementResult
    source: SeriesSource
    A: Optional[IndexSet]
    meta: dict
    targets_match: bool = True


def run_from_dict(obj: dict) -> LoadedRun:
    if obj.get("version", RUN_VERSION) != RUN_VERSION:
        raise ValueError(f"unsupported run version {obj.get('version')!r}")
    meta = obj["meta"]
    mode = Mode.EXACT if meta.get("mode", "exact") == "exact" else Mode.FLOAT
    source = parse_series(meta["series"], mode)
    A = IndexSet.from_json(meta["set"]) if meta.get("set") is not None else None
    sums = obj.get("checkpoint_sums")
    targets = [parse_scalar(b, mode) for b in obj["targets"]]
    match = True
    if meta.get("target"):
        # verify against the declared target, not the copy stored in the file
        regenerated = targets_of(meta, len(targets), mode)
        match = regenerated == targets
        targets = regenerated
    result = RearrangementResult(
        PermutationPrefix(obj["sigma_prefix"]),
        checkpoints=list(obj["checkpoints"]),
        checkpoint_sums=[parse_scalar(s, mode) for s in sums] if sums is not None else [],
        targets=targets,
        stage_log=list(obj.get("stage_log", [])),
        mode=mode,
        slack=float(meta.get("slack", 0.0)),
        engine=meta.get("engine", "constrained"),
        constraint=A,
        forced_placement=meta.get("engine") == "constrained",
        meta=meta,
    )
    return LoadedRun(result, source, A, meta, match)


def load_run(path) -> LoadedRun:
    with open(path) as fh:
        return run_from_dict(json.load(fh))


def targets_of(meta: dict, n: int, mode: Mode) -> list:
    """Regenerate b_1..b_n from the target spec stored in run metadata."""
    t = parse_target(meta["target"], mode)
    return [t.at(i, mode) for i in range(1, n + 1)]


__all__ = [
    "StageCheck",
    "VerificationReport",
    "verify",
    "run_to_dict",
    "run_from_dict",
    "save_run",
    "load_run",
    "LoadedRun",
    "targets_of",
]
