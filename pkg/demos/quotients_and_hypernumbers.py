"""
Grouping terms: quotient series
===============================

Bracketing 1 - 1 + 1 - 1 + ... as (1 - 1) + (1 - 1) + ... gives 0, while
1 + (-1 + 1) + (-1 + 1) + ... gives 1.  Quotient maps make this precise and
let checkpoints of a rearrangement become a new series.
"""

from fractions import Fraction

from seriesforge import (
    HyperRep,
    TargetSpec,
    analytical_sum,
    brst_integer_obstruction,
    c0_equiv_monitor,
    checkpoints_to_quotient,
    j0,
    j1,
    quotient_series,
    riemann_rearrange,
    subnumber_extract,
)
from seriesforge.series import altharmonic, altsign

for p in (j0(), j1()):
    q = quotient_series(altsign(), p)
    print(p.name, " + ".join(str(q(i)) for i in range(1, 8)), "+ ...")

# Whatever the grouping, partial sums of integer terms stay integers.
print("integer obstruction holds:", brst_integer_obstruction(j1(), [3, 1, 2], 200).holds)

# The sequence of partial sums 1, 0, 1, 0, ... and its even-indexed sub-sequence
rep = analytical_sum(altsign(), 20)
print("partial sums:", [str(v) for v in rep.prefix(8)])
print("even subnumber:", [str(v) for v in subnumber_extract(rep, lambda n: 2 * n).prefix(5)])

# A rearrangement's checkpoints become a grouped series tracking its target.
source = altharmonic()
result = riemann_rearrange(source, TargetSpec.const(Fraction(1, 3)), 60)
c, p = checkpoints_to_quotient(result, source)
print("fiber sizes:", [p.fiber(i)[1] - p.fiber(i)[0] + 1 for i in range(1, 10)])
S = HyperRep.from_values(result.checkpoint_sums)
b = HyperRep.from_values(result.targets)
print("c0 monitor:", c0_equiv_monitor(S, b, 60).to_dict()["verdict"])
