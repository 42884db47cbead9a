# Exact equilibrium of the discrete model by forward recursion
#
# The discrete equilibrium is fixed by two numbers: the spacing h and the
# mass m1. The number moment m0 follows from m0/(1-m0)^3 = m1/h, and then the
# terms f_i^h come one by one from a recursion that never looks ahead.

# %%
import numpy as np

from coagfrag import complete_monotonicity_check, equilibrium_sequence, small_size_indicator, solve_m0

m1, h = 1.0, 1.0
m0 = solve_m0(m1, h)
print(f"m0 = {m0:.10f}")

# %%
# First terms and the two moments. With a few hundred terms the moments are
# already exact to roundoff at h = 1.

seq = equilibrium_sequence(m0, h, 400)
print("f_1..f_5 =", np.round(seq.values[:5], 6))
print(f"number {seq.number():.12f}  (m0 {m0:.12f})")
print(f"mass   {seq.mass():.12f}  (m1 {m1})")

# %%
# The sequence is completely monotone: every signed forward difference keeps
# its sign.

print(complete_monotonicity_check(seq.values[:200], 6))

# %%
# Far out the terms follow C z^-n n^-3/2. The approach is slow, the error
# roughly halves each time n doubles. Extended precision keeps the tail
# meaningful once terms fall below 1e-16 of the first one.

seq_hp = equilibrium_sequence(m0, h, 400, dps=50)
z = 1 + 4 * h / (27 * m1)
C = 9 / 8 * np.sqrt(m1 * z / (h * np.pi))
for n in (50, 100, 200, 400):
    print(f"n={n:4d}  f_n z^n n^1.5 / C = {seq_hp.values[n - 1] * z**n * n**1.5 / C:.4f}")

# %%
# For small h the first term behaves like (1/3)(h/m1)^(1/3).

for hh in (1e-2, 1e-3, 1e-4, 1e-5):
    print(f"h={hh:g}  f_1 / leading = {small_size_indicator(hh, m1).ratio:.4f}")
