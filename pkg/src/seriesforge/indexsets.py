"""Explicit subsets of the positive integers.

Every :class:`IndexSet` answers membership, counts ``|A ∩ [1, N]|`` and
enumerates its elements in increasing order (``enumerate(i)`` is the i-th
smallest, 1-based).  Kinds mirror the JSON schema::

    {"kind": "all"}
    {"kind": "finite", "elements": [...]}
    {"kind": "residues", "mod": 4, "residues": [1, 2]}
    {"kind": "blocks", "blocks": [[l, r], ...]}
    {"kind": "complement", "of": {...}}
"""

from __future__ import annotations

import bisect
import json
from itertools import count
from typing import Callable, Iterator, Optional

from .errors import ExhaustedSet

ALL, FINITE, RESIDUES, BLOCKS, COMPLEMENT = "all", "finite", "residues", "blocks", "complement"


class IndexSet:
    __slots__ = ("kind", "_elements", "_mod", "_offsets", "_blocks", "_block_rule",
                 "_cum", "_of", "_simple")

    def __init__(self, kind, *, elements=None, mod=None, residues=None, blocks=None,
                 block_rule=None, of=None):
        self.kind = kind
        self._simple = None
        if kind == ALL:
            pass
        elif kind == FINITE:
            els = sorted(set(int(e) for e in elements))
            if els and els[0] < 1:
                raise ValueError("index sets live in the positive integers")
            self._elements = els
        elif kind == RESIDUES:
            mod = int(mod)
            if mod < 1:
                raise ValueError("modulus must be >= 1")
            self._mod = mod
            # residue r  <->  offset in 1..mod within each period
            self._offsets = sorted({(int(r) % mod) or mod for r in residues})
        elif kind == BLOCKS:
            self._blocks = []
            self._cum = [0]
            self._block_rule = block_rule
            for lo, hi in blocks or ():
                self._push_block(int(lo), int(hi))
        elif kind == COMPLEMENT:
            if not isinstance(of, IndexSet):
                raise TypeError("complement needs an IndexSet")
            self._of = of
            self._simple = _simplify_complement(of)
        else:
            raise ValueError(f"unknown index set kind {kind!r}")

    # constructors ---------------------------------------------------------

    @classmethod
    def all(cls):
        return cls(ALL)

    @classmethod
    def finite(cls, elements):
        return cls(FINITE, elements=elements)

    @classmethod
    def residues(cls, mod, residues):
        return cls(RESIDUES, mod=mod, residues=residues)

    @classmethod
    def blocks(cls, blocks=(), rule: Optional[Callable[[int], tuple]] = None):
        """Closed 1-based intervals; ``rule(j)`` may generate blocks j = len(blocks)+1, ..."""
        return cls(BLOCKS, blocks=blocks, block_rule=rule)

    def complement(self):
        return IndexSet(COMPLEMENT, of=self)

    # block bookkeeping ---------------------------------------------------

    def _push_block(self, lo, hi):
        if lo < 1 or hi < lo:
            raise ValueError(f"bad block [{lo}, {hi}]")
        if self._blocks and lo <= self._blocks[-1][1]:
            raise ValueError("blocks must be sorted and pairwise disjoint")
        self._blocks.append((lo, hi))
        self._cum.append(self._cum[-1] + hi - lo + 1)

    def _grow_blocks(self, until_start=None, until_count=None) -> bool:
        """Generate blocks until the last one starts beyond ``until_start`` or
        the running count reaches ``until_count``; False if no rule."""
        if self._block_rule is None:
            return False
        while True:
            if until_start is not None and self._blocks and self._blocks[-1][0] > until_start:
                return True
            if until_count is not None and self._cum[-1] >= until_count:
                return True
            self._push_block(*self._block_rule(len(self._blocks) + 1))

    # queries --------------------------------------------------------------

    @property
    def is_finite(self) -> bool:
        if self.kind == ALL:
            return False
        if self.kind == FINITE:
            return True
        if self.kind == RESIDUES:
            return not self._offsets
        if self.kind == BLOCKS:
            return self._block_rule is None
        if self._simple is not None:
            return self._simple.is_finite
        return False  # complement of a finite set, or of an infinite block set: assume infinite

    @property
    def size(self) -> Optional[int]:
        if self.kind == FINITE:
            return len(self._elements)
        if self.kind == RESIDUES and not self._offsets:
            return 0
        if self.kind == BLOCKS and self._block_rule is None:
            return self._cum[-1]
        if self._simple is not None:
            return self._simple.size
        return None

    def member(self, n: int) -> bool:
        if n < 1:
            return False
        k = self.kind
        if k == ALL:
            return True
        if k == FINITE:
            i = bisect.bisect_left(self._elements, n)
            return i < len(self._elements) and self._elements[i] == n
        if k == RESIDUES:
            return ((n % self._mod) or self._mod) in self._offsets
        if k == BLOCKS:
            self._grow_blocks(until_start=n)
            i = bisect.bisect_right(self._blocks, (n, float("inf"))) - 1
            return i >= 0 and self._blocks[i][0] <= n <= self._blocks[i][1]
        if self._simple is not None:
            return self._simple.member(n)
        return not self._of.member(n)

    __contains__ = member

    def count_upto(self, N: int) -> int:
        """|A ∩ [1, N]|."""
        if N < 1:
            return 0
        k = self.kind
        if k == ALL:
            return N
        if k == FINITE:
            return bisect.bisect_right(self._elements, N)
        if k == RESIDUES:
            q, rem = divmod(N, self._mod)
            return q * len(self._offsets) + bisect.bisect_right(self._offsets, rem)
        if k == BLOCKS:
            self._grow_blocks(until_start=N)
            i = bisect.bisect_right(self._blocks, (N, float("inf"))) - 1
            if i < 0:
                return 0
            lo, hi = self._blocks[i]
            return self._cum[i] + min(hi, N) - lo + 1
        if self._simple is not None:
            return self._simple.count_upto(N)
        return N - self._of.count_upto(N)

    def enumerate(self, i: int) -> int:
        """The i-th smallest element (1-based)."""
        if i < 1:
            raise ValueError("enumeration index must be >= 1")
        k = self.kind
        if k == ALL:
            return i
        if k == FINITE:
            if i > len(self._elements):
                raise ExhaustedSet(f"set has only {len(self._elements)} elements")
            return self._elements[i - 1]
        if k == RESIDUES:
            if not self._offsets:
                raise ExhaustedSet("empty residue set")
            q, j = divmod(i - 1, len(self._offsets))
            return q * self._mod + self._offsets[j]
        if k == BLOCKS:
            self._grow_blocks(until_count=i)
            if i > self._cum[-1]:
                raise ExhaustedSet(f"block set has only {self._cum[-1]} elements")
            b = bisect.bisect_left(self._cum, i) - 1
            return self._blocks[b][0] + (i - self._cum[b]) - 1
        if self._simple is not None:
            return self._simple.enumerate(i)
        # generic complement: smallest N with N - count_of(N) >= i
        of = self._of
        lo, hi = i - 1, i
        while hi - of.count_upto(hi) < i:
            lo, hi = hi, 2 * hi
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if mid - of.count_upto(mid) >= i:
                hi = mid
            else:
                lo = mid
        return hi

    def next_at_or_after(self, n: int) -> Optional[int]:
        """Smallest element >= n, or None when there is none."""
        n = max(n, 1)
        before = self.count_upto(n - 1)
        size = self.size
        if size is not None and before >= size:
            return None
        return self.enumerate(before + 1)

    def iter_from(self, n: int = 1) -> Iterator[int]:
        i = self.count_upto(max(n, 1) - 1) + 1
        size = self.size
        for j in count(i):
            if size is not None and j > size:
                return
            yield self.enumerate(j)

    def __iter__(self):
        return self.iter_from(1)

    def block_list(self) -> list:
        if self.kind != BLOCKS:
            raise TypeError("not a block set")
        return list(self._blocks)

    def parity_alternates(self) -> bool:
        """True when consecutive elements always differ in parity."""
        if self.kind == ALL:
            return True
        target = self._simple if self.kind == COMPLEMENT else self
        if target is None or target.kind != RESIDUES or not target._offsets:
            return False
        # the parity pattern has period 2*mod in n, i.e. 2*len(offsets) elements
        els = [target.enumerate(j) for j in range(1, 2 * len(target._offsets) + 2)]
        return all((a - b) % 2 for a, b in zip(els, els[1:]))

    # serialization ---------------------------------------------------------

    def to_json(self) -> dict:
        k = self.kind
        if k == ALL:
            return {"kind": ALL}
        if k == FINITE:
            return {"kind": FINITE, "elements": list(self._elements)}
        if k == RESIDUES:
            res = sorted(o % self._mod for o in self._offsets)
            return {"kind": RESIDUES, "mod": self._mod, "residues": res}
        if k == BLOCKS:
            if self._block_rule is not None:
                raise ValueError("generated block sets are not serializable")
            return {"kind": BLOCKS, "blocks": [[lo, hi] for lo, hi in self._blocks]}
        return {"kind": COMPLEMENT, "of": self._of.to_json()}

    @classmethod
    def from_json(cls, obj) -> "IndexSet":
        if isinstance(obj, str):
            obj = json.loads(obj)
        kind = obj.get("kind")
        if kind == ALL:
            return cls.all()
        if kind == FINITE:
            return cls.finite(obj["elements"])
        if kind == RESIDUES:
            return cls.residues(obj["mod"], obj["residues"])
        if kind == BLOCKS:
            return cls.blocks([tuple(b) for b in obj["blocks"]])
        if kind == COMPLEMENT:
            return cls.from_json(obj["of"]).complement()
        raise ValueError(f"unknown index set kind {kind!r}")

    def __eq__(self, other):
        if not isinstance(other, IndexSet):
            return NotImplemented
        try:
            return self.to_json() == other.to_json()
        except ValueError:
            return self is other

    def __hash__(self):
        return hash(json.dumps(self.to_json(), sort_keys=True))

    def __repr__(self):
        try:
            return f"IndexSet({json.dumps(self.to_json())})"
        except ValueError:
            return f"IndexSet(kind={self.kind!r}, generated)"


def _simplify_complement(of: IndexSet) -> Optional[IndexSet]:
    if of.kind == ALL:
        return IndexSet.finite([])
    if of.kind == RESIDUES:
        mod = of._mod
        return IndexSet.residues(mod, [o for o in range(1, mod + 1) if o not in of._offsets])
    if of.kind == COMPLEMENT:
        return of._of
    return None
