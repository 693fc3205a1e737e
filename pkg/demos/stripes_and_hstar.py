"""
Stripes and the optimal width
=============================

Energy per unit length of periodic stripes at the critical coupling, the
width that minimizes it, and what happens when the period is not a multiple
of the optimal one.
"""

import numpy as np

from stripelab import ModelParams, f0, find_hstar, make_stripes, minimize_f0_stripes, stripe_energy_inf

params = ModelParams(d=2, p=5)

# closed form against the exact integrator, a few widths
for h in (0.5, 1.0, 1.5, 2.0):
    exact = f0(make_stripes(h, 2 * h), params).total
    print(f"h = {h:3.1f}   integrator {exact: .12f}   closed form {stripe_energy_inf(h, params): .12f}")

h_star, e_star = find_hstar(params)
print(f"\nh* = {h_star:.12f}, e(h*) = {e_star:.12f}")

# sample the curve; plot it with any tool you like
hs = np.linspace(0.6, 6.0, 10)
for h, e in zip(hs, stripe_energy_inf(hs, params)):
    print(f"{h:6.3f} {e: .6f}")

# in a box of period L the best stripe count is the neighbour of L/(2h*)
for factor in (7.3, 20.0, 31.7):
    N, h, e = minimize_f0_stripes(factor * h_star, params)
    print(f"L = {factor:5.1f} h*:  N = {N:3d}, h/h* = {h / h_star:.4f}, energy {e:.8f}")
