"""
Morse-index map of the 13-body rosette
======================================

Two hexagons (radii 1/2 and sqrt(3)/2, the outer one rotated by pi/6) and a
central body. The masses m0 (centre) and m1 (inner hexagon) are free; the
outer-hexagon mass m2 follows from the balance condition.
"""
import numpy as np

from ccbif import bifurcation, families

print("m2(1, 1) =", families.rosette_point(1.0, 1.0).masses[6],
      " closed form:", families.rosette_m2_closed_form(1.0, 1.0))

grid = np.linspace(0.1, 5.0, 32)
rmap = bifurcation.map_2d(grid, grid)
print("Morse indices found:", rmap.index_set())

# crude picture: rows are m0 (top = small), columns m1
for row in rmap.morse[::2]:
    print("".join(str(v) for v in row))

for b in rmap.boundaries:
    if b["edge_count"] > 5:
        print(f"regions {b['regions']} indices {b['indices']}: "
              f"{b['edge_count']} edges, {b['classification']}")

# rmap.cell_rows() gives (m0, m1, index, kernel_flag, det_B) for plotting
