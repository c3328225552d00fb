"""
Two nested squares: balancing masses and Morse indices
=======================================================

Eight bodies on two concentric, aligned squares. The outer square has side 1
and mass M_r per body; the inner square has circumradius r and unit masses.
"""
import math

import numpy as np

from ccbif import families, nbody, spectral

# the outer mass is whatever makes the shape central; it hits zero at r0
r0 = families.locate_r0()
print(f"family valid for 0 < r < r0 = {r0:.6f}")

for r in np.linspace(0.05, 0.35, 7):
    M = families.two_squares_point(r).masses[0]
    print(f"r = {r:.3f}   M_r = {M:10.6f}   closed form = {families.two_squares_mass_closed_form(r):10.6f}")

# Morse indices at three radii
for label, r in [("sqrt2/7", math.sqrt(2) / 7), ("sqrt2/6", math.sqrt(2) / 6),
                 ("sqrt2/5", math.sqrt(2) / 5)]:
    p = families.two_squares_point(r)
    H = nbody.hessian_phi(p.positions, p.ctx)
    rep = spectral.spectral_report(H)
    print(f"r = {label}: kernel {rep.kernel_dim}, Morse index {rep.morse_index}, "
          f"lowest eigenvalues {np.round(rep.eigenvalues[:5], 4)}")

# the orbit tangent is always in the kernel at a critical point
p = families.two_squares_point(0.25)
t = nbody.orbit_tangent(p.positions)
print("|H t| =", np.linalg.norm(nbody.hessian_phi(p.positions, p.ctx) @ t))
