"""
How far is a received point from the decision boundary?
=======================================================

A user decodes an M-PSK symbol correctly as long as the noise-free
received point stays inside the symbol's angular sector. After rotating
the point back by the symbol phase, the sector is ``|angle| < pi/M`` and
the quantity

    |Im r| - tan(pi/M) Re r

is negative inside the sector: the more negative, the deeper inside.
This demo evaluates that margin and checks the two real linear forms
that replace ``|Im r|`` in the optimizers.
"""

import numpy as np

from irs_precoding import make_constellation
from irs_precoding.margin import margin_objective, realify, rotated_received

const = make_constellation(8)
print(f"8-PSK: half sector angle phi = {const.phi:.4f} rad, tan(phi) = {const.alpha:.4f}")

###############################################################################
# A point exactly on the symbol axis, one on the boundary and one outside.
for label, r in [("on axis", 1.0 + 0j),
                 ("on boundary", np.exp(1j * const.phi)),
                 ("outside", np.exp(1j * 2 * const.phi))]:
    print(f"{label:12s} margin = {margin_objective(r, const.phi):+.4f}")

###############################################################################
# With a channel and a phase vector, the rotated received point is
# ``h^H theta exp(-j angle(s))``. The two linear forms in the real and
# imaginary parts of theta reproduce the margin exactly.
rng = np.random.default_rng(1)
h = (rng.standard_normal(6) + 1j * rng.standard_normal(6)) / np.sqrt(2)
theta = np.exp(1j * rng.uniform(0, 2 * np.pi, 6))
s = const.points[3]
odd, even = realify(h, s, const.phi)
direct = margin_objective(rotated_received(h, theta, s), const.phi)
print(f"\ncomplex path margin  {direct:+.12f}")
print(f"max of linear forms  {max(odd(theta), even(theta)):+.12f}")
