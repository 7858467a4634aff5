"""Hyperbolic approximation of a 4x4 grid in the l1 plane.

Layers are greedy r^i-nets; the radial basis spreads each vertex over its
neighbours one layer down. The distortion stays below 1 + 2C, where C is the
homogeneity constant measured on the layers that were actually built.
"""

from tcspace import build_hyperbolic, homogeneity_constant, verify_hyperbolic_bound
from tcspace.hyperbolic import grid_instance
from tcspace.metric import fmt

approx = build_hyperbolic(grid_instance(), lam=2, r="1/8", k=1)
for i, net in sorted(approx.layers.items()):
    print(f"layer {i:+d}: {len(net)} points")
print(f"{len(approx.horizontal)} horizontal and {len(approx.radial)} radial edges")

h = homogeneity_constant(approx)
print(f"C_used = {fmt(h.C_used)} at {h.witness}; doubling estimate D = {h.D_est}")

report = verify_hyperbolic_bound(approx)
print(f"distortion {report['distortion']} <= bound {report['bound']}: {report['passed']}")
for name, ok in report["checks"].items():
    print(f"  {name:<30} {'ok' if ok else 'FAILED'}")
