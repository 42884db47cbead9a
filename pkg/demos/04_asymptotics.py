# Closed-form asymptotes and the discrete-to-continuous limit
#
# Large groups are exponentially rare with a power-law prefactor. The
# discrete model has its own decay rate ln z, which tends to the continuous
# rate 4/27 as h -> 0, but for fixed h the two tails part ways at large x.

# %%
import numpy as np

from coagfrag import AsymptoteKind, AsymptoteModel, asymptote_gap, grid_refinement_study, log10_asymptote

c_small = AsymptoteModel(AsymptoteKind.C_SMALL)
c_large = AsymptoteModel(AsymptoteKind.C_LARGE)
niwa = AsymptoteModel(AsymptoteKind.NIWA, n_p=20.0)
x = np.array([0.01, 0.1, 1.0, 10.0, 100.0])
print("x        small-size   large-size   Niwa (unnormalised)")
for xi, a, b, c in zip(x, log10_asymptote(c_small, x), log10_asymptote(c_large, x), log10_asymptote(niwa, x)):
    print(f"{xi:<8g} {a:11.4f}  {b:11.4f}  {c:11.4f}")

# %%
# Gap between the discrete and continuous large-size laws (log10, density
# scale). It shrinks in proportion to h at fixed x and grows with x at fixed h.

for h in (1.0, 0.1, 0.01):
    print(f"h={h:<5g} gap at x=90: {asymptote_gap(h, 90.0):.4f}")
for xx in (200.0, 1000.0, 2000.0):
    print(f"h=0.01 gap at x={xx:g}: {asymptote_gap(0.01, xx):.4f}")

# %%
# The recursive equilibria themselves, rescaled to densities. The offset to
# the discrete law is the same for every h: it is the finite-x correction to
# the power law, not a discretisation error.

for row in grid_refinement_study(1.0, [1.0, 0.1, 0.01], 100.0, [10.0, 50.0, 90.0]):
    print(f"h={row.h:<5g} x={row.x:<4g} vs discrete law {row.log10_density - row.log10_d_large:+.4f}  "
          f"vs continuous law {row.log10_density - row.log10_c_large:+.4f}")
