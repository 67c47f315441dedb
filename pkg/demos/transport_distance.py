"""Comparing functions on different point sets with a transport metric.

Discrete minimizers live on a sampled cloud; continuum minimizers live on a
grid.  A transport distance between (measure, function) pairs with ground
cost |x - y|^p + |f(x) - g(y)|^p compares them without interpolating either
one: atoms are matched by an optimal assignment that trades off moving in
space against disagreeing in value.

This demo shows three facts on small instances:
  * the exact assignment distance is a metric (symmetry, triangle);
  * pure value shifts on identical atoms cost exactly the shift;
  * a cloud/grid comparison is bounded by a cheap map-based pairing, so the
    expensive exact solver is only needed at small sizes.

Run:  python3 demos/transport_distance.py          (a few seconds)
"""

import numpy as np

from graphssl.continuum import Grid
from graphssl.transport import TlpPair, tlp_exact, tlp_map_bound

rng = np.random.default_rng(0)


def pair(m):
    return TlpPair(points=rng.uniform(0, 1, size=(m, 2)),
                   values=rng.standard_normal(m))


a, b, c = pair(40), pair(40), pair(40)
dab, dbc, dac = tlp_exact(a, b), tlp_exact(b, c), tlp_exact(a, c)
print(f"d(a,b) = {dab:.4f}   d(b,c) = {dbc:.4f}   d(a,c) = {dac:.4f}")
print(f"triangle inequality: {dac:.4f} <= {dab + dbc:.4f}  "
      f"({'holds' if dac <= dab + dbc else 'VIOLATED'})")
print(f"symmetry: |d(a,b) - d(b,a)| = {abs(dab - tlp_exact(b, a)):.2e}")

shifted = TlpPair(points=a.points.copy(), values=a.values + 0.3)
print(f"\npure value shift by 0.3: distance {tlp_exact(a, shifted):.6f}")

grid = Grid(dim=2, N=16)
pts = rng.uniform(0, 1, size=(60, 2))
u_grid = np.sin(np.pi * grid.coordinates()[:, 0])
u_n = np.sin(np.pi * pts[:, 0]) + 0.05 * rng.standard_normal(60)
bound, transport = tlp_map_bound(pts, u_n, grid, u_grid, np.ones(grid.size))
print(f"\ncloud (60 atoms) vs grid ({grid.size} cells):")
print(f"  map-based upper bound {bound:.4f} "
      f"(transport part {transport:.4f})")
