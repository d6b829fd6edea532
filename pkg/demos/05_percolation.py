"""
Bond percolation on a box
=========================

Crossing probabilities on a 64 x 64 grid sharpen around p = 1/2, and a
thinned Bernoulli(p) disorder looks like a fresh Bernoulli(p rho) one.
"""

import numpy as np
from clockrc.percolation import crossing_point, crossing_probabilities, estimate_connection, thinning_test

rng = np.random.Generator(np.random.Philox(3))
ps = np.round(np.arange(0.40, 0.601, 0.02), 2)
probs = crossing_probabilities(ps, 64, 200, rng)
for p, c in zip(ps, probs):
    print(f"p={p:.2f}  crossing={c:.3f}")
print("crosses 1/2 at", round(crossing_point(ps, probs), 4))

est = estimate_connection(0.7, 16, 2, 500, rng)
print(f"P(0 <-> boundary), p=0.7 n=16: {est.estimate:.3f} +- {est.stderr:.3f}")

rep = thinning_test(0.9, 0.7, 16, 1000, rng)
print("open fractions", np.round(rep.open_fraction, 4), "p-values", round(rep.p_open, 3), round(rep.p_connection, 3))
