"""
Exact coupling on a small graph
===============================

Enumerate the clock measure, the random-cluster measure and the joint
measure on a triangle with one boundary vertex, then check that the two
marginals come out right.
"""

from clockrc import Graph, build_weight_table
from clockrc.oracle import enumerate_all, verify_es_marginals, verify_i14, verify_positive_correlations

g = Graph(3, (2,), ((0, 1), (0, 2), (1, 2)))
wt = build_weight_table(3, 1.0)
dist = enumerate_all(g, wt)

print("spin configs", len(dist.spins), " edge configs", len(dist.omegas))
print("Z =", dist.Z, " Z' q^m =", dist.Zprime * 3 ** dist.n_free)

rep = verify_es_marginals(g, wt, dist)
print("marginal deviations:", rep.dev_phi, rep.dev_mu)

# spin 0 at vertex 0 beats any other spin by at least the connection probability
x = 0
print("mu(sigma_x = .)", dist.spin_marginal(x).round(4))
print("P(x <-> U)     ", round(dist.connection_probability(x), 4))
print("slack          ", verify_positive_correlations(g, wt, x, dist).slack)
for a in range(3):
    print("split identity a =", a, verify_i14(g, wt, x, a, dist).deviation)
