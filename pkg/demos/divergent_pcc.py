"""
A divergent series that still rearranges
========================================

`triples` is 1 + 1 - 1 + 1/2 + 1/2 - 1/2 + ...  Its partial sums grow like a
harmonic sum, so it has no sum at all; its positive and negative parts both
diverge and its terms vanish.  First reorder it into a convergent series, then
steer that one toward a target.
"""

from seriesforge import TargetSpec, rearrange_pcc, verify
from seriesforge.series import Mode, partial_sums, triples

source = triples(Mode.FLOAT)
print("raw partial sums at 10^k:", [round(partial_sums(source, 10**k)[-1], 3) for k in range(1, 5)])

result = rearrange_pcc(source, TargetSpec.sequence(lambda n: (-1) ** n), 8)
print("checkpoint sums:", [round(s, 4) for s in result.checkpoint_sums])
print("checkpoint positions:", result.checkpoints)

# Each swing between -1 and +1 consumes ever more terms: mass grows only
# logarithmically in the number of terms used.
print("verified:", verify(result, source).overall)
