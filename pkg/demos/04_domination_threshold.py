"""
Domination threshold
====================

varphi(beta) lower-bounds the chance that an edge sits at the top level
whatever the other edges do.  beta0(rho) inverts it.
"""

import numpy as np
from clockrc.domination import beta0, beta0_upper_bound, threshold_curve, varphi_q4_closed_form

curve = threshold_curve(4, 0.01, 10.0, 11)
for b, v in zip(curve.beta, curve.phi):
    print(f"beta={b:6.3f}  varphi={v:.6f}  closed form={varphi_q4_closed_form(b):.6f}")

for rho in (0.3, 0.6, 0.9):
    print(f"beta0({rho}) = {beta0(rho, 4):.6f}")

# square lattice, p_c = 1/2: the explicit bound grows like q^2 log q
for q in (4, 16, 64, 256):
    b = beta0_upper_bound(1.0, q, 2, 0.5)
    print(f"q={q:4d}  bound={b:12.3f}  bound/(q^2 log q)={b / (q * q * np.log(q)):.4f}")
