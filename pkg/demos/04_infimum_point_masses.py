#!/usr/bin/env python3
"""The infimum side: point masses realize the minimal eigenvalue for p > dim.

Spreading a fixed boundary mass can only help the eigenvalue; concentrating
it at the worst boundary point realizes the infimum when p exceeds the
dimension. The scan below locates that point, tracks it as the mass grows,
and shows the limit: the minimal point-constrained eigenvalue.
"""

import numpy as np

from robinopt import SolverParams, build_square, lambda_inf, scan_point_eigen, track_xm

mesh = build_square(0.125)
params = SolverParams(p=3.0)

print("=" * 64)
print("Point-constrained eigenvalues on the unit square, p = 3")
print("=" * 64)
scan = scan_point_eigen(mesh, params)
print(f"boundary nodes: {len(scan.nodes)}")
print(f"minimum over the boundary: {scan.lambda1_omega:.6f}")
ties = [tuple(np.round(mesh.nodes[t], 3)) for t in scan.tie_set]
print(f"attained at (up to symmetry): {ties}")

print()
print("Minimal Dirac eigenvalue per mass and its concentration point:")
print(f"{'m':>8} {'lambda(m)':>12} {'x_m':>14} {'m/|Omega|':>10}")
for m in (0.1, 1.0, 10.0, 100.0):
    rep = lambda_inf(mesh, m, params, scan=scan)
    print(f"{m:8.1f} {rep.lambda_inf:12.6f} {str(np.round(rep.x_m,3)):>14} {m/mesh.volume:10.1f}")

print()
print("Tracking the concentration point over a mass sweep:")
tr = track_xm(mesh, [1.0, 10.0, 100.0], params, workers=1)
for m, node, d in zip(tr.m_list, tr.x_m_nodes, tr.distances):
    print(f"  m={m:6.1f}: x_m at {np.round(mesh.nodes[node],3)}, "
          f"distance to the argmin set {d:.3f}")
print("\nAs the mass grows, lambda(m) climbs toward the minimal")
print(f"point-constrained eigenvalue {scan.lambda1_omega:.6f} and x_m settles on its minimizers.")
