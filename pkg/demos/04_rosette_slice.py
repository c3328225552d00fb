"""
A one-parameter slice of the rosette
====================================

Freeze m0 and move m1. Along the slice the index runs 0, 2, 3, 5, 3: four
degenerate parameters, and only the 2 -> 3 step changes parity.
"""
from ccbif import bifurcation, families

m0 = 1.0
result = bifurcation.scan_1d(families.RosetteSlice(m0), 0.1, 10.0, n_steps=512)
for ev in result:
    print(f"m1 in [{ev.bracket[0]:.7f}, {ev.bracket[1]:.7f}]  "
          f"{ev.left_morse} -> {ev.right_morse}  {ev.classification}  BIF = {ev.bif_index}")

# the index depends on m1/m0 only, so other slices are rescaled copies
for m0 in (0.5, 2.0):
    res = bifurcation.scan_1d(families.RosetteSlice(m0), 0.05, 20.0, n_steps=512)
    print(m0, [round(ev.bracket[0] / m0, 5) for ev in res])
