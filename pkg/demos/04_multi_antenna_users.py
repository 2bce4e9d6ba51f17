"""
Users with several receive antennas
===================================

Each user combines its antennas with a vector ``w`` of norm at most one.
For fixed combiners the precoder problem is the single-antenna one on
the effective channels ``H_k w_k``; for a fixed codebook each combiner
is a small convex problem. The two steps alternate until the worst
margin stops improving.
"""

import numpy as np

from irs_precoding import alternating_design, make_constellation, sample_channels

const = make_constellation(4)
ch = sample_channels(8, 2, 2, stream=np.random.default_rng(5))

book, W, trace = alternating_design(ch, const, "inf", seed=5)
print(" iter   before comb.   after comb.   best so far")
for i in range(trace.iterations):
    print(f"{i:5d}   {trace.before_combiner[i]:+11.4f}   {trace.after_combiner[i]:+11.4f}"
          f"   {trace.best[i]:+11.4f}")
print("combiner norms:", np.round(np.linalg.norm(W, axis=1), 4))

###############################################################################
# Freezing the combiners at their start value shows what combining buys.
_, _, frozen = alternating_design(ch, const, "inf", seed=5, update_combiners=False)
print(f"\nfrozen combiners: {frozen.best[-1]:+.4f}   alternating: {trace.best[-1]:+.4f}")
