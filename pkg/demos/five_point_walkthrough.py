"""Walk through one stochastic basis on a five-point graph.

The graph is K4 on {1, 2, 3, 4} plus the edges 0-1 and 0-2, all of unit
length. Rows 3 and 4 split their mass evenly over 1 and 2, so the basis is
not molecular and several compatible trees carry probability.
"""

from tcspace import (
    TransportProblem,
    basis_distortion,
    basis_norms,
    dual_coefficients,
    effective_charge,
    expected_distortion,
    product_probability,
)
from tcspace.metric import fmt
from tcspace.samples import five_point_basis, five_point_space

space = five_point_space()
basis = five_point_basis(space)

print("basis norms:", [fmt(v) for v in basis_norms(basis, space)[1:]])

mu = TransportProblem.molecule(space, "4", "3")
print("coordinates of δ4 − δ3:", [fmt(a) for a in dual_coefficients(basis, mu).coeffs])

# The coordinate sum is realised exactly as an expected tree distance.
p, _ = effective_charge(basis, "4", "3")
for tree, w in p.trees():
    print(f"  tree {tree.parent} with probability {fmt(w)}")
print("effective charge expectation:", fmt(expected_distortion(p, space, "4", "3")))

# The product law over all compatible trees does worse on this pair.
pi = product_probability(basis)
print("product law expectation:", fmt(expected_distortion(pi, space, "4", "3")))

result = basis_distortion(basis, space)
print(f"basis distortion {fmt(result.value)} attained at {result.pair}")
