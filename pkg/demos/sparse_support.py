"""
A density-zero set that carries all the divergence
==================================================

Pick blocks of the alternating harmonic series far apart, and inside each block
take just enough odd and even terms to add mass 1/j of each sign.  The chosen
set thins out while the sub-series keeps both halves divergent.
"""

from seriesforge import restrict, sparse_conditional_support
from seriesforge.series import altharmonic

support = sparse_conditional_support(altharmonic(), blocks=25)

for b in support.blocks[:4] + support.blocks[-2:]:
    print(f"block {b.j:2d}: [{b.start}, {b.end}]  density at end {float(b.density):.4f}")

A = support.index_set
sub = restrict(altharmonic(), A)
plus, minus = sub.mass(A.size)
print(f"|A ∩ [1, M_25]| = {A.size}, density {float(support.densities()[-1]):.4f}")
print(f"positive mass {float(plus):.4f}, negative mass {float(minus):.4f}")
