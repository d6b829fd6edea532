"""
The reflection injection
========================

Walk through one reflection by hand, then sweep every edge configuration of
a 4-vertex path and check the map is one-to-one.
"""

import numpy as np
from clockrc import Graph, build_weight_table
from clockrc.reflection import build_incompatibility_set, phi_map, sweep_injection

# x=0 - v=1 - y=2, y is the boundary
g = Graph(3, (2,), ((0, 1), (1, 2)))
wt = build_weight_table(4, 1.0)

sigma = np.array([1, 1, 0])
omega = np.array([2, 1])  # x-v edge at the top level
trace = build_incompatibility_set(sigma, omega, 0, 1, g, wt)
print("layers:", [sorted(a) for a in trace.layers])
print("image :", phi_map(sigma, omega, 0, 1, g, wt, trace))

# lower that edge and v no longer needs to move
trace = build_incompatibility_set(sigma, np.array([1, 1]), 0, 1, g, wt)
print("layers:", [sorted(a) for a in trace.layers])

# odd q exercises spins on both sides of the reflection line
path = Graph(4, (3,), ((0, 1), (1, 2), (2, 3)))
wt5 = build_weight_table(5, 1.0)
for x in (0, 1, 2):
    rep = sweep_injection(path, wt5, x)
    print(f"x={x}: {rep.pairs} pairs, passed={rep.passed}")
