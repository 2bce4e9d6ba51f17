"""
Discrete phase shifters: rounding versus branch-and-bound
=========================================================

Practical surfaces offer only ``2**B`` phase values. The simplest design
rounds the continuous solution to the nearest value. With one bit each
element is +1 or -1, the margin becomes a maximum of linear functions of
a sign vector, and an exact branch-and-bound search is affordable.
"""

import numpy as np

from irs_precoding import make_constellation, phase_alphabet, sample_channels, solve_relaxed
from irs_precoding.discrete import bnb_solve_1bit, build_onebit_instance, quantize_phases
from irs_precoding.margin import worst_user_margin
from irs_precoding.oracles import exhaustive_onebit

const = make_constellation(4)
rng = np.random.default_rng(3)
h = sample_channels(12, 2, stream=rng).h
s = const.points[[0, 2]]

sol = solve_relaxed(h, s, const.phi, rng=rng)
print(f"continuous phases : {sol.margin:+.4f}")
for B in (3, 2, 1):
    q = quantize_phases(sol.theta, phase_alphabet(B))
    print(f"{B}-bit rounding    : {worst_user_margin(h, q, s, const.phi):+.4f}")

###############################################################################
# Branch-and-bound starts from the rounded 1-bit vector and proves optimality.
inst = build_onebit_instance(h, s, const.phi)
res = bnb_solve_1bit(inst, quantize_phases(sol.theta, phase_alphabet(1)))
_, best = exhaustive_onebit(inst)
print(f"1-bit B&B         : {res.value:+.4f} ({res.status}, {res.nodes} nodes "
      f"of {2 ** inst.N} leaves)")
print(f"exhaustive search : {best:+.4f}")
