"""
Rearranging only inside a set A
===============================

With A = {n : n mod 4 in {1, 2}} every index outside A stays put, yet the
checkpoint sums still follow the oscillating target (-1)^n.
"""

from seriesforge import IndexSet, TargetSpec, constrained_rearrange, verify
from seriesforge.series import altpow4ceil, term

source = altpow4ceil()  # (-1)^(n+1) / ceil(n^(1/4))
A = IndexSet.residues(4, [1, 2])
target = TargetSpec.sequence(lambda n: (-1) ** n)

result = constrained_rearrange(source, A, target, 40)

sigma = result.sigma.as_list()
fixed = [j for j in range(1, len(sigma) + 1) if not A.member(j)]
print("fixed points off A (first 8):", fixed[:8], "all fixed:", all(sigma[j - 1] == j for j in fixed))
print("first terms:", [str(term(source, v)) for v in sigma[:8]])

for entry in result.stage_log[:5]:
    print("stage", entry["n"], "k' =", entry["k_prime"], "via", entry["tail_kind"], "terms", entry["terms"])

report = verify(result, source, A)
print("verified:", report.overall, report.sigma_checks)
