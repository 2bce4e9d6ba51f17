"""
Continuous phases with Riemannian conjugate gradient
====================================================

Each reflecting element contributes a unit-modulus phase, so the design
variable lives on a product of circles. The worst-user margin is a
maximum of linear forms; a log-sum-exp surrogate with shrinking
temperature makes it smooth enough for conjugate gradient on that
manifold.

For one user the optimum is known: align every element with the channel
(co-phasing), which gives ``-tan(pi/M) * sum |h_n|``.
"""

import math

import numpy as np

from irs_precoding import make_constellation, sample_channels, solve_relaxed
from irs_precoding.rcg import SmoothedProblem, epsilon_schedule, form_values, rcg_minimize, to_oblique

const = make_constellation(4)
rng = np.random.default_rng(0)

###############################################################################
# One user, started from random phases rather than from co-phasing.
h = sample_channels(16, 1, stream=rng).h
s = const.points[:1]
x = to_oblique(np.exp(1j * rng.uniform(0, 2 * np.pi, 16)))
for eps in epsilon_schedule(h):
    x, trace = rcg_minimize(SmoothedProblem.from_channels(h, s, const.phi, eps), x)
    print(f"eps = {eps:.4f}: {trace.iterations:3d} iterations, smoothed value {trace.objective[-1]:+.6f}")
reached = form_values(SmoothedProblem.from_channels(h, s, const.phi, 1.0), x).max()
print(f"reached {reached:+.6f}, closed form {-math.tan(const.phi) * np.abs(h).sum():+.6f}")

###############################################################################
# Three users share the same phases. The best of several starts is kept.
h3 = sample_channels(16, 3, stream=rng).h
s3 = const.points[[0, 1, 3]]
sol = solve_relaxed(h3, s3, const.phi, rng=rng, restarts=3)
print(f"\nthree users: worst margin {sol.margin:+.4f} (best start #{sol.start})")
