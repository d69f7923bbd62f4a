"""
Steering the alternating harmonic series to 1/2
===============================================

The series 1 - 1/2 + 1/3 - ... sums to ln 2, but a greedy reordering can make
its partial sums settle anywhere.  Here we aim for 1/2 and watch each
checkpoint land inside its 1/n window.
"""

from fractions import Fraction

import numpy as np

from seriesforge import TargetSpec, riemann_rearrange, verify
from seriesforge.series import altharmonic

source = altharmonic()
result = riemann_rearrange(source, TargetSpec.const(Fraction(1, 2)), 200)

# The first few rearranged indices: two positives, then a negative, and so on.
print("sigma(1..12) =", result.sigma.as_list()[:12])

# Scaled errors n * |S_{k_n} - 1/2| must stay <= 1; in practice they sit well below.
n = np.arange(1, result.stages + 1)
err = np.array([float(abs(s - Fraction(1, 2))) for s in result.checkpoint_sums])
print("max n*err  =", (n * err).max())
print("median     =", np.median(n * err))

# The verifier recomputes every checkpoint from scratch in exact arithmetic.
report = verify(result, source)
print("verified   =", report.overall, "| last checkpoint k =", result.checkpoints[-1])
