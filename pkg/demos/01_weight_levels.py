"""
Levels of the clock weight
==========================

The pair weight exp(-beta (1 - cos theta)) takes only q//2 + 1 distinct
values.  Everything downstream works with the index of that value.
"""

import numpy as np
from clockrc import build_weight_table

wt = build_weight_table(4, 1.0)
print("q=4 beta=1")
print("  levels t  ", np.round(wt.t, 4))
print("  increments", np.round(wt.r, 4))
print("  pair count", wt.K)

# the class matrix gives each spin pair its level cap
print(wt.class_matrix)

# larger q: the top increment r_k shrinks as the gap to the next level closes
for q in (3, 6, 12, 24):
    t = build_weight_table(q, 1.0)
    print(f"q={q:3d}  k={t.k:2d}  r_top={t.r[-1]:.4f}")
